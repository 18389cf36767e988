#!/usr/bin/env python3
"""Kernel-level validators: off-diagonal decay at a point with nonzero
moment map, and the transverse Gaussian of the near-diagonal scaling limit."""

import argparse
import json
import math
import sys
import tempfile

from eqtoeplitz.cli import main as cli_main


def decay_config(out):
    return {
        "schema_version": 1,
        "model": {"d": 2},
        "action": {"W": [[1, -1, -1]]},
        "symmetry": {"phi": [0.0, 0.0, 0.0]},
        "observable": {"u_terms": [{"beta": [0, 0, 0], "coef": 1.0}]},
        "isotype": [0],
        "k_range": {"min": 20, "max": 300, "step": 20},
        "sampling": {"n_samples": 1000, "seed": 1},
        "output_dir": out,
        "kernel_probe": {
            "type": "decay",
            "point": [math.sqrt(0.8), math.sqrt(0.15), math.sqrt(0.05)],
            "k_values": list(range(20, 301, 20)),
        },
    }


def scaling_config(out):
    s = 1.0 / math.sqrt(2)
    return {
        "schema_version": 1,
        "model": {"d": 1},
        "action": {"W": [[1, -1]]},
        "symmetry": {"phi": [0.0, 0.0]},
        "observable": {"u_terms": [{"beta": [0, 0], "coef": 1.0}]},
        "isotype": [0],
        "k_range": {"min": 100, "max": 500, "step": 100},
        "sampling": {"n_samples": 1000, "seed": 1},
        "output_dir": out,
        "kernel_probe": {
            "type": "scaling",
            "point": [s, s],
            "displacement_w": [[-s, 0.0], [s, 0.0]],
            "displacement_v": [[-s, 0.0], [s, 0.0]],
            "k_values": [100, 200, 300, 400, 500],
        },
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/kernel_probes")
    args = ap.parse_args()
    for cfg in (decay_config(args.out), scaling_config(args.out)):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
            json.dump(cfg, fh)
            path = fh.name
        code = cli_main(["kernel", "--config", path])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
