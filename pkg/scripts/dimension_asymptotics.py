#!/usr/bin/env python3
"""Invariant-isotype dimension growth on the projective plane.

Identity symmetry, f = 1: the trace series is the integer dimension of the
invariant isotype, compared against (k/pi) vol(M0) with Monte-Carlo vol(M0).
"""

import argparse
import json
import sys
import tempfile

from eqtoeplitz.cli import main as cli_main


def config(out, seed, n):
    return {
        "schema_version": 1,
        "model": {"d": 2},
        "action": {"W": [[1, -1, -1]]},
        "symmetry": {"phi": [0.0, 0.0, 0.0]},
        "observable": {"u_terms": [{"beta": [0, 0, 0], "coef": 1.0}]},
        "isotype": [0],
        "k_range": {"min": 20, "max": 400, "step": 2},
        "sampling": {"n_samples": n, "seed": seed},
        "fit": {"order": 4},
        "output_dir": out,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/dimension_asymptotics")
    ap.add_argument("--seed", type=int, default=41)
    ap.add_argument("--samples", type=int, default=1_000_000)
    args = ap.parse_args()
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config(args.out, args.seed, args.samples), fh)
        path = fh.name
    for sub in ("analyze", "compare"):
        code = cli_main([sub, "--config", path])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
