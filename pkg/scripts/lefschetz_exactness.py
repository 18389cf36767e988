#!/usr/bin/env python3
"""Fixed-point trace identity without a torus action.

Generic diagonal symmetry, f = 1 on the line and the plane: the exact trace
of the lifted symmetry coincides with the two-point leading sum identically,
so the comparison CSV shows rounding-level differences at every level.
"""

import argparse
import json
import sys
import tempfile

from eqtoeplitz.cli import main as cli_main


def config(out, d, phis):
    return {
        "schema_version": 1,
        "model": {"d": d},
        "action": {"W": []},
        "symmetry": {"phi": phis, "theta_A": 0.0},
        "observable": {"u_terms": [{"beta": [0] * (d + 1), "coef": 1.0}]},
        "isotype": [],
        "k_range": {"min": 1, "max": 200, "step": 1},
        "sampling": {"n_samples": 10000, "seed": 1},
        "fit": {"order": 2},
        "output_dir": out,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/lefschetz")
    args = ap.parse_args()
    for d, phis in ((1, [0.0, 2.2]), (2, [0.0, 0.9, 2.1])):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
            json.dump(config(f"{args.out}_d{d}", d, phis), fh)
            path = fh.name
        code = cli_main(["compare", "--config", path])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
