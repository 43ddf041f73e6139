"""plotkit <figure-kind> --in DIR --out FILE

Figure kinds: loss (log-scale convergence curves), simplex (3D coefficient
trajectories), cumulative (ordered final-weight distributions).
"""

from __future__ import annotations

import argparse
import sys

from .figures import (
    plot_cumulative_distribution,
    plot_loss_curves,
    plot_simplex_trajectory,
)
from .traces import load_bundle, load_final_probs

DEFAULT_PATTERNS = {
    "loss": "*_seed*.csv",
    "simplex": "pauli_seed*.csv",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit")
    parser.add_argument("figure", choices=("loss", "simplex", "cumulative"))
    parser.add_argument("--in", dest="in_dir", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--pattern", default=None, help="seed CSV glob override")
    parser.add_argument(
        "--normalization", default="none", choices=("none", "qubits")
    )
    parser.add_argument(
        "--plane", type=float, default=None,
        help="simplex plane position (sum of non-identity weights)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.figure == "cumulative":
            plot_cumulative_distribution(load_final_probs(args.in_dir), args.out)
        else:
            pattern = args.pattern or DEFAULT_PATTERNS[args.figure]
            bundle = load_bundle(args.in_dir, pattern)
            if args.figure == "loss":
                plot_loss_curves(bundle, args.out, args.normalization)
            else:
                plot_simplex_trajectory(bundle, args.out, args.plane)
    except (ValueError, OSError) as exc:
        print(f"plotkit error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
