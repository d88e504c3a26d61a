"""Sample one rescaled flight per clock regime and write the paths to CSV (and an SVG if asked).

    python scripts/sample_flights.py [--n 200] [--seed 1] [--out flights] [--plot]
"""
import argparse
from pathlib import Path

from flightlab.clock import ClockFunction
from flightlab.directions import DirectionLaw
from flightlab.paths import sample_rescaled_flight
from flightlab.rng import RngStream

REGIMES = {
    "power": ClockFunction.power(1.0),
    "exponential": ClockFunction.exponential(1.0),
    "superexponential": ClockFunction.superexponential(),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="flights")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    law = DirectionLaw.uniform(2)
    paths = {}
    for i, (name, clock) in enumerate(REGIMES.items()):
        path = sample_rescaled_flight(args.n, clock, law, RngStream(args.seed, i))
        path.to_csv(out / f"{name}.csv")
        paths[name] = path
        print(f"{name:17s} {len(path.knot_times):5d} knots -> {out / (name + '.csv')}")
    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 3, figsize=(11, 3.6))
        for ax, (name, path) in zip(axes, paths.items()):
            ax.plot(path.knot_values[:, 0], path.knot_values[:, 1], lw=0.8)
            ax.set_title(name)
            ax.set_aspect("equal", adjustable="datalim")
        fig.tight_layout()
        fig.savefig(out / "flights.svg", format="svg", metadata={"Date": None})
        print(f"plot -> {out / 'flights.svg'}")


if __name__ == "__main__":
    main()
