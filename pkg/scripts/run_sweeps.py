"""Threshold sweeps (0.00 to 1.00, step 0.01) for every shipped config.

Usage: python scripts/run_sweeps.py [--data DIR] [--out DIR] [config ...]

Writes sweep_<model>_<phase>.csv next to the usual reports under
OUT/<config stem>/. Each series comes from one trained model per
(model, phase); only the decision threshold varies.
"""
import argparse
import sys
from pathlib import Path

from fairaudit import cli, fetch

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CONFIGS = ["adult_race", "adult_sex", "compas_race", "compas_sex"]


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("configs", nargs="*", default=DEFAULT_CONFIGS)
    p.add_argument("--data", default=str(ROOT / "data"))
    p.add_argument("--out", default=str(ROOT / "out" / "sweeps"))
    args = p.parse_args(argv)

    for dataset in ("adult", "compas"):
        fetch.fetch(dataset, args.data)
    for name in args.configs:
        path = Path(name) if name.endswith(".cfg") else ROOT / "configs" / f"{name}.cfg"
        code = cli.main(["sweep", str(path), "--data", args.data, "--out", str(Path(args.out) / path.stem)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
