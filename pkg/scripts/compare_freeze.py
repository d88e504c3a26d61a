"""Error ladders of the first-order density expansion for both ways of freezing ``L_*``.

    python scripts/compare_freeze.py [--n 16 32 64] [--m 641]

``point`` freezes the coefficients at the point where the correction is
evaluated, ``start`` at the starting point ``x0``.  The table shows the
sup-norm error with and without the correction and the ratio err(2n)/err(n).
"""
import argparse

from flightlab.chain import preset
from flightlab.edgeworth import Grid1D, expansion_error_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--m", type=int, default=641, help="grid nodes on [-8, 8]")
    ap.add_argument("--preset", default="sine-sigma")
    args = ap.parse_args()
    grid = Grid1D(-8.0, 8.0, args.m)
    for freeze in ("point", "start"):
        res = expansion_error_scan(preset(args.preset), 0.0, args.n, grid, freeze=freeze)
        print(f"\nfreeze={freeze}  grid error {res.grid_error:.2e}  max|correction| {res.correction_norm:.3e}")
        print(f"{'n':>5} {'err':>11} {'err_no_corr':>12} {'ratio':>7} {'ratio_nc':>9}")
        for r in res.rows:
            fmt = lambda v: "" if v is None else f"{v:.3f}"  # noqa: E731
            print(f"{r.n:5d} {r.err:11.3e} {r.err_no_corr:12.3e} {fmt(r.ratio):>7} {fmt(r.ratio_no_corr):>9}")


if __name__ == "__main__":
    main()
