"""Before/after reweighing experiments, threshold sweeps and report files.

For every model two cells are run: "before" trains on the original training
split, "after" on the reweighed one. Both are scored on the evaluation split
(held-out test rows by default, or the training rows themselves) with unit
weights.

Configuration files are flat ``key = value`` text::

    dataset = adult            # adult | compas
    protected = race           # race | sex
    models = dtree, gnb, knn, logreg, rforest
    seed = 42
    test_fraction = 0.3
    evaluation_split = test    # test | train
    grid = 0:1:0.01            # start:stop:step, a comma list, or none
    data = data                # raw-data directory or a prepared dataset CSV
    rforest.n_trees = 100      # optional <kind>.<hyperparameter> overrides

Lines starting with ``#`` or ``;`` are comments.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import data as tabular
from . import reweighing
from .classifiers import DEFAULTS, DISPLAY_NAMES, MODEL_KINDS, ModelSpec, TrainedModel, predict_scores, threshold_labels, train
from .data import Dataset
from .errors import ConfigError, FairAuditError, UndefinedMetricError
from .metrics import METRIC_NAMES, FairnessReport, full_report
from . import metrics

log = logging.getLogger(__name__)

PHASES = ("before", "after")
EVAL_SPLITS = ("test", "train")


def default_grid() -> list[float]:
    return [round(i / 100, 2) for i in range(101)]


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "adult"
    protected_attr: str = "race"
    models: tuple[ModelSpec, ...] = ()
    test_fraction: float = tabular.DEFAULT_TEST_FRACTION
    seed: int = tabular.DEFAULT_SEED
    evaluation_split: str = "test"
    threshold_grid: tuple[float, ...] | None = None
    data: str = "data"

    def __post_init__(self):
        if self.dataset not in ("adult", "compas"):
            raise ConfigError(f"unknown dataset {self.dataset!r}")
        if self.protected_attr not in tabular.PROTECTED_ATTRS:
            raise ConfigError(f"unknown protected attribute {self.protected_attr!r}")
        if not self.models:
            raise ConfigError("at least one model is required")
        if not 0 < self.test_fraction < 1:
            raise ConfigError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.evaluation_split not in EVAL_SPLITS:
            raise ConfigError(f"evaluation_split must be one of {EVAL_SPLITS}, got {self.evaluation_split!r}")
        if self.threshold_grid is not None:
            grid = tuple(float(t) for t in self.threshold_grid)
            if any(not 0 <= t <= 1 for t in grid):
                raise ConfigError("threshold grid values must lie in [0, 1]")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("threshold grid must be strictly increasing")
            object.__setattr__(self, "threshold_grid", grid)
        kinds = [m.kind for m in self.models]
        if len(set(kinds)) != len(kinds):
            raise ConfigError(f"duplicate model kinds in {kinds}")
        object.__setattr__(self, "models", tuple(sorted(self.models, key=lambda m: m.kind)))

    @classmethod
    def build(cls, models: Sequence[str] = MODEL_KINDS, hyperparameters: dict | None = None,
              seed: int = tabular.DEFAULT_SEED, **kwargs) -> "ExperimentConfig":
        """Config whose model specs all share ``seed``."""
        hyperparameters = hyperparameters or {}
        specs = tuple(ModelSpec(k, hyperparameters.get(k, {}), seed) for k in models)
        return cls(models=specs, seed=seed, **kwargs)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed, models=tuple(replace(m, seed=seed) for m in self.models))

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "protected": self.protected_attr,
            "models": [{"kind": m.kind, "hyperparameters": m.hyperparameters, "seed": m.seed} for m in self.models],
            "test_fraction": self.test_fraction,
            "seed": self.seed,
            "evaluation_split": self.evaluation_split,
            "grid": list(self.threshold_grid) if self.threshold_grid is not None else None,
        }


@dataclass(frozen=True)
class RunResult:
    model: str
    phase: str
    report: FairnessReport


@dataclass(frozen=True)
class SweepSeries:
    model: str
    phase: str
    points: tuple[tuple[float, FairnessReport], ...] = field(default=())


# ---------------------------------------------------------------------------
# config files


def _parse_value(raw: str):
    low = raw.strip().lower()
    if low in ("none", "null", ""):
        return None
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw.strip()


def parse_grid(text: str | None) -> tuple[float, ...] | None:
    if text is None or text.strip().lower() in ("", "none", "off"):
        return None
    text = text.strip()
    if text.lower() == "default":
        return tuple(default_grid())
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ConfigError("grid step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            decimals = max(0, -int(math.floor(math.log10(step))) + 1)
            return tuple(round(start + i * step, decimals) for i in range(count))
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from None


CONFIG_KEYS = ("dataset", "protected", "models", "seed", "test_fraction", "evaluation_split", "grid", "data")


def parse_config(text: str = "", overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from file text; ``overrides`` (config keys to string
    values) win over the text."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    items = dict(parser["experiment"])
    items.update({k: str(v) for k, v in (overrides or {}).items() if v is not None})

    hyper: dict[str, dict] = {}
    for key in [k for k in items if "." in k]:
        kind, name = key.split(".", 1)
        if kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {kind!r} in key {key!r}")
        if name not in DEFAULTS[kind]:
            raise ConfigError(f"unknown {kind} hyperparameter {name!r}")
        hyper.setdefault(kind, {})[name] = _parse_value(items.pop(key))
    unknown = set(items) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")

    models = [m.strip() for m in items.get("models", ",".join(MODEL_KINDS)).split(",") if m.strip()]
    for m in models:
        if m not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {m!r}; expected one of {MODEL_KINDS}")
    try:
        seed = int(items.get("seed", tabular.DEFAULT_SEED))
        test_fraction = float(items.get("test_fraction", tabular.DEFAULT_TEST_FRACTION))
    except ValueError as exc:
        raise ConfigError(f"bad numeric value: {exc}") from None
    return ExperimentConfig.build(
        models=models,
        hyperparameters=hyper,
        seed=seed,
        dataset=items.get("dataset", "adult"),
        protected_attr=items.get("protected", "race"),
        test_fraction=test_fraction,
        evaluation_split=items.get("evaluation_split", "test"),
        threshold_grid=parse_grid(items.get("grid")),
        data=items.get("data", "data"),
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a config file. A relative ``data`` path is resolved against the
    current directory, not the config file's."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, overrides)


def load_data(cfg: ExperimentConfig) -> Dataset:
    """Resolve ``cfg.data``: a prepared CSV, a directory holding the raw files,
    or a directory with a ``<dataset>/`` subdirectory of raw files."""
    path = Path(cfg.data)
    if path.is_file():
        return tabular.load_dataset(path, provenance=f"{cfg.dataset}/{cfg.protected_attr}")
    raw_dir = path / cfg.dataset if (path / cfg.dataset).is_dir() else path
    raw = tabular.load_raw(cfg.dataset, raw_dir)
    return tabular.prepare(cfg.dataset, raw, cfg.protected_attr)


# ---------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class Splits:
    train: Dataset
    reweighed: Dataset
    evaluation: Dataset


def make_splits(cfg: ExperimentConfig, ds: Dataset) -> Splits:
    train_part, test_part = tabular.split(ds, cfg.test_fraction, cfg.seed)
    train_part, test_part = tabular.standardize(train_part, test_part)
    reweighed = reweighing.apply(train_part)
    evaluation = train_part if cfg.evaluation_split == "train" else test_part
    # fairness is judged on the real population: unit weights
    evaluation = evaluation.with_weights(np.ones(evaluation.n))
    return Splits(train_part, reweighed, evaluation)


def _tagged(exc: FairAuditError, kind: str, phase: str) -> FairAuditError:
    try:
        return type(exc)(f"[{kind}/{phase}] {exc}")
    except TypeError:
        return exc


def _cells(cfg: ExperimentConfig, ds: Dataset) -> Iterator[tuple[str, str, TrainedModel, Dataset]]:
    splits = make_splits(cfg, ds)
    for spec in cfg.models:
        for phase in PHASES:
            train_data = splits.train if phase == "before" else splits.reweighed
            try:
                model = train(spec, train_data)
            except FairAuditError as exc:
                raise _tagged(exc, spec.kind, phase) from exc
            log.info("trained %s/%s", spec.kind, phase)
            yield spec.kind, phase, model, splits.evaluation


def _report(kind, phase, scores, ev: Dataset, threshold: float) -> FairnessReport:
    preds = threshold_labels(scores, threshold)
    try:
        return full_report(preds, ev.labels, ev.protected, ev.weights)
    except FairAuditError as exc:
        raise _tagged(exc, kind, phase) from exc


def lenient_report(preds, labels, protected, weights=None) -> FairnessReport:
    """Like :func:`full_report` but an undefined metric becomes NaN."""
    conf = metrics.confusion(preds, labels, protected, weights)
    fns = {
        "ba": lambda: metrics.balanced_accuracy(preds, labels, weights),
        "spd": lambda: metrics.statistical_parity_difference(preds, protected, weights),
        "aod": lambda: metrics.average_odds_difference(conf),
        "di": lambda: metrics.disparate_impact(preds, protected, weights),
        "eod": lambda: metrics.equal_opportunity_difference(conf),
        "ti": lambda: metrics.theil_index(preds, labels),
    }
    values = {}
    for name in METRIC_NAMES:
        try:
            values[name] = fns[name]()
        except UndefinedMetricError:
            values[name] = math.nan
    return FairnessReport(**values)


def _sweep(kind, phase, scores, ev: Dataset, grid) -> SweepSeries:
    points = tuple(
        (t, lenient_report(threshold_labels(scores, t), ev.labels, ev.protected, ev.weights))
        for t in grid
    )
    return SweepSeries(kind, phase, points)


def run_all(cfg: ExperimentConfig, ds: Dataset, sweep: bool | None = None) -> tuple[list[RunResult], list[SweepSeries]]:
    """Train each (model, phase) cell once; produce its 0.5-threshold report
    and, when a grid is configured, its threshold sweep."""
    if sweep is None:
        sweep = cfg.threshold_grid is not None
    results, series = [], []
    for kind, phase, model, ev in _cells(cfg, ds):
        scores = predict_scores(model, ev.features)
        results.append(RunResult(kind, phase, _report(kind, phase, scores, ev, 0.5)))
        if sweep:
            series.append(_sweep(kind, phase, scores, ev, cfg.threshold_grid or default_grid()))
    return results, series


def run_experiment(cfg: ExperimentConfig, ds: Dataset) -> list[RunResult]:
    return run_all(cfg, ds, sweep=False)[0]


def threshold_sweep(cfg: ExperimentConfig, ds: Dataset) -> list[SweepSeries]:
    if cfg.threshold_grid is None:
        raise ConfigError("threshold_sweep needs a threshold grid")
    return run_all(cfg, ds, sweep=True)[1]


# ---------------------------------------------------------------------------
# reports


def _csv_number(v: float) -> str:
    if math.isnan(v):
        return ""
    if v == math.inf:
        return "inf"
    return repr(float(v))


def _md_number(v: float) -> str:
    if math.isnan(v):
        return "n/a"
    if v == math.inf:
        return "∞"
    return f"{v:.4f}"


def render_markdown(results: Sequence[RunResult], title: str = "") -> str:
    out = io.StringIO()
    if title:
        out.write(f"# {title}\n\n")
    header = "| Model | " + " | ".join(m.upper() for m in METRIC_NAMES) + " |\n"
    rule = "|---|" + "---:|" * len(METRIC_NAMES) + "\n"
    for phase in PHASES:
        rows = [r for r in results if r.phase == phase]
        if not rows:
            continue
        out.write(f"## Performance {phase} reweighing\n\n")
        out.write(header)
        out.write(rule)
        for r in rows:
            cells = " | ".join(_md_number(getattr(r.report, m)) for m in METRIC_NAMES)
            out.write(f"| {DISPLAY_NAMES.get(r.model, r.model)} | {cells} |\n")
        out.write("\n")
    return out.getvalue()


def render_csv(results: Sequence[RunResult]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("model", "phase", *METRIC_NAMES))
    for r in results:
        writer.writerow((r.model, r.phase, *(_csv_number(getattr(r.report, m)) for m in METRIC_NAMES)))
    return out.getvalue()


def render_sweep_csv(s: SweepSeries) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("threshold", *METRIC_NAMES))
    for t, rep in s.points:
        writer.writerow((repr(float(t)), *(_csv_number(getattr(rep, m)) for m in METRIC_NAMES)))
    return out.getvalue()


def to_json(results: Sequence[RunResult], series: Sequence[SweepSeries], config: dict | None = None) -> dict:
    return {
        "config": config,
        "results": [{"model": r.model, "phase": r.phase, "report": r.report.to_json_dict()} for r in results],
        "sweeps": [
            {"model": s.model, "phase": s.phase,
             "points": [{"threshold": t, "report": rep.to_json_dict()} for t, rep in s.points]}
            for s in series
        ],
    }


def emit_report(results: Sequence[RunResult], series: Sequence[SweepSeries], formats: Sequence[str] = ("json", "csv", "markdown"),
                out_dir=".", config: dict | None = None, title: str = "") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def write(name: str, text: str):
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    for fmt in formats:
        if fmt == "markdown":
            write("report.md", render_markdown(results, title))
        elif fmt == "csv":
            write("report.csv", render_csv(results))
            for s in series:
                write(f"sweep_{s.model}_{s.phase}.csv", render_sweep_csv(s))
        elif fmt == "json":
            write("report.json", json.dumps(to_json(results, series, config), indent=2, allow_nan=False) + "\n")
        else:
            raise ConfigError(f"unknown report format {fmt!r}")
    return written
