"""Run the before/after reweighing experiment for every shipped config.

Usage: python scripts/reproduce_tables.py [--data DIR] [--out DIR] [config ...]

Raw files are fetched into --data first if missing. Each config writes its
reports to OUT/<config stem>/ and the markdown tables are echoed to stdout.
"""
import argparse
import sys
import time
from pathlib import Path

from fairaudit import cli, fetch

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CONFIGS = ["adult_race", "adult_sex", "compas_race", "compas_sex"]


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("configs", nargs="*", default=DEFAULT_CONFIGS, help="config names under configs/ or paths")
    p.add_argument("--data", default=str(ROOT / "data"))
    p.add_argument("--out", default=str(ROOT / "out" / "tables"))
    args = p.parse_args(argv)

    for dataset in ("adult", "compas"):
        fetch.fetch(dataset, args.data)
    for name in args.configs:
        path = Path(name) if name.endswith(".cfg") else ROOT / "configs" / f"{name}.cfg"
        start = time.perf_counter()
        code = cli.main(["run", str(path), "--data", args.data, "--out", str(Path(args.out) / path.stem)])
        print(f"[{path.stem}: exit {code}, {time.perf_counter() - start:.0f}s]\n", file=sys.stderr)
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
