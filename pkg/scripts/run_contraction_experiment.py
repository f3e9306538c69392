#!/usr/bin/env python3
"""Run the demo contraction experiment end to end.

Builds the wave, runs the perturbed simulation, checks the identity suite,
and scans the Poincare threshold, writing everything under one output
directory.  Any CLI flag can be appended, e.g.

    python scripts/run_contraction_experiment.py --override solver.t_end=10
"""

import sys
from pathlib import Path

from contraction_lab.cli import main

CONFIG = Path(__file__).parent / "configs" / "contraction_demo.json"


def run(argv):
    out = "out/contraction_demo"
    extra = list(argv)
    base = ["--config", str(CONFIG), "--out", out]
    for command in ("wave", "identities", "poincare", "simulate"):
        code = main(base + extra + [command])
        if code != 0:
            print(f"{command} exited with {code}", file=sys.stderr)
            return code
    print(f"all outputs in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
