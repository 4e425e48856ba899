"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 runtime error (training, metrics, network).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import data as tabular
from . import experiment, fetch, metrics, reweighing
from .errors import ConfigError, DataError, FairAuditError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("fairaudit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this CLI reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt():
    return argparse.ArgumentDefaultsHelpFormatter


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", help="flat key = value experiment config file")
    p.add_argument("--dataset", choices=("adult", "compas"), default=None, help="dataset (config: dataset; fallback adult)")
    p.add_argument("--protected", choices=tabular.PROTECTED_ATTRS, default=None, help="protected attribute (fallback race)")
    p.add_argument("--models", default=None, help="comma-separated model kinds (fallback: all five)")
    p.add_argument("--seed", type=int, default=None, help=f"seed for split and models (fallback {tabular.DEFAULT_SEED})")
    p.add_argument("--test-fraction", type=float, default=None, help=f"held-out fraction (fallback {tabular.DEFAULT_TEST_FRACTION})")
    p.add_argument("--eval-split", choices=experiment.EVAL_SPLITS, default=None, help="split to evaluate on (fallback test)")
    p.add_argument("--grid", default=None, help="threshold grid: start:stop:step, comma list, 'default' or 'none'")
    p.add_argument("--data", default=None, help="raw-data directory or prepared dataset CSV (fallback ./data)")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = _Parser(prog="fairaudit", description="Reweighing bias-mitigation audits.",
                     formatter_class=_fmt(), parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fetch", help="download raw dataset files", formatter_class=_fmt(), parents=[common])
    p.add_argument("--dataset", choices=("adult", "compas"), required=True)
    p.add_argument("--out", default="data", help="files land under OUT/<dataset>/")
    p.add_argument("--manifest", default=None, help="alternative manifest JSON (default: bundled)")

    p = sub.add_parser("prepare", help="encode raw files into a dataset CSV", formatter_class=_fmt(), parents=[common])
    p.add_argument("--dataset", choices=("adult", "compas"), required=True)
    p.add_argument("--protected", choices=tabular.PROTECTED_ATTRS, default="race")
    p.add_argument("--data", default="data", help="directory holding <dataset>/ raw files")
    p.add_argument("--out", default="data", help="writes OUT/<dataset>_<protected>.csv")

    p = sub.add_parser("reweigh", help="apply reweighing to a dataset CSV", formatter_class=_fmt(), parents=[common])
    p.add_argument("input", help="dataset CSV (features..., label, protected, weight)")
    p.add_argument("--out", default="out", help="writes OUT/<input stem>_reweighed.csv")
    p.add_argument("--json", action="store_true", help="print the four coefficients as JSON")

    p = sub.add_parser("audit", help="fairness report for a predictions CSV", formatter_class=_fmt(), parents=[common])
    p.add_argument("predictions", help="CSV with header pred,label,protected[,weight]")
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("run", help="before/after reweighing experiment", formatter_class=_fmt(), parents=[common])
    _add_experiment_flags(p)

    p = sub.add_parser("sweep", help="threshold sweep of every (model, phase)", formatter_class=_fmt(), parents=[common])
    _add_experiment_flags(p)
    return parser


# ---------------------------------------------------------------------------


def cmd_fetch(args) -> int:
    manifest = fetch.load_manifest(args.manifest) if args.manifest else None
    try:
        outcomes = fetch.fetch(args.dataset, args.out, manifest)
    except fetch.ChecksumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"expected: {exc.expected}\nactual:   {exc.actual}", file=sys.stderr)
        return EXIT_DATA
    for o in outcomes:
        print(f"{o.name}: {o.status} ({o.path})")
    return EXIT_OK


def cmd_prepare(args) -> int:
    raw_dir = Path(args.data) / args.dataset
    if not raw_dir.is_dir():
        raw_dir = Path(args.data)
    raw = tabular.load_raw(args.dataset, raw_dir)
    ds = tabular.prepare(args.dataset, raw, args.protected)
    out = Path(args.out) / f"{args.dataset}_{args.protected}.csv"
    tabular.save_dataset(ds, out)
    counts = tabular.count_groups(ds)
    print(f"wrote {out}: {ds.n} rows, {ds.d} features")
    print(f"privileged {counts.n_p}, unprivileged {counts.n_up}, favorable {counts.n_pos}, unfavorable {counts.n_neg}")
    return EXIT_OK


def cmd_reweigh(args) -> int:
    ds = tabular.load_dataset(args.input)
    coef = reweighing.compute_weights(tabular.count_groups(ds))
    out = Path(args.out) / f"{Path(args.input).stem}_reweighed.csv"
    tabular.save_dataset(reweighing.apply(ds), out)
    if args.json:
        print(json.dumps({"w_pp": coef.w_pp, "w_pup": coef.w_pup, "w_np": coef.w_np, "w_nup": coef.w_nup}))
    else:
        for name in ("w_pp", "w_pup", "w_np", "w_nup"):
            print(f"{name:6s} {getattr(coef, name):.6f}")
        print(f"wrote {out}")
    return EXIT_OK


AUDIT_COLUMNS = ("pred", "label", "protected")


def read_predictions(path):
    raw = tabular.load_csv(path, has_header=True)
    raw.require(AUDIT_COLUMNS)
    try:
        cols = {c: np.array([float(v) for v in raw.column(c)]) for c in AUDIT_COLUMNS}
        weights = np.array([float(v) for v in raw.column("weight")]) if "weight" in raw.columns else None
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric cell: {exc}") from None
    for c, v in cols.items():
        if not np.isin(v, (0, 1)).all():
            raise DataError(f"{path}: column {c!r} must contain only 0/1")
    if weights is not None and not (np.isfinite(weights).all() and (weights > 0).all()):
        raise DataError(f"{path}: weights must be positive")
    return cols["pred"], cols["label"], cols["protected"], weights


def cmd_audit(args) -> int:
    preds, labels, protected, weights = read_predictions(args.predictions)
    report = metrics.full_report(preds, labels, protected, weights)
    if args.json:
        print(report.to_json())
    else:
        print("| Metric | Value |\n|---|---:|")
        for name in metrics.METRIC_NAMES:
            print(f"| {name.upper()} | {experiment._md_number(getattr(report, name))} |")
    return EXIT_OK


def _experiment_config(args, force_grid: bool = False) -> experiment.ExperimentConfig:
    overrides = {
        "dataset": args.dataset, "protected": args.protected, "models": args.models,
        "seed": args.seed, "test_fraction": args.test_fraction,
        "evaluation_split": args.eval_split, "grid": args.grid, "data": args.data,
    }
    if args.config:
        cfg = experiment.load_config(args.config, overrides)
    else:
        cfg = experiment.parse_config("", overrides)
    if force_grid and cfg.threshold_grid is None:
        cfg = dataclasses.replace(cfg, threshold_grid=tuple(experiment.default_grid()))
    return cfg


def _run(args, sweep: bool) -> int:
    cfg = _experiment_config(args, force_grid=sweep)
    ds = experiment.load_data(cfg)
    results, series = experiment.run_all(cfg, ds)
    title = f"{cfg.dataset} / {cfg.protected_attr} (evaluated on {cfg.evaluation_split} split, seed {cfg.seed})"
    formats = ("json", "csv", "markdown")
    written = experiment.emit_report(results, series, formats, args.out, cfg.to_dict(), title)
    print(experiment.render_markdown(results, title), end="")
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_run(args) -> int:
    return _run(args, sweep=False)


def cmd_sweep(args) -> int:
    return _run(args, sweep=True)


COMMANDS = {
    "fetch": cmd_fetch, "prepare": cmd_prepare, "reweigh": cmd_reweigh,
    "audit": cmd_audit, "run": cmd_run, "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FairAuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
