"""Tabular data model, CSV ingestion and Adult/COMPAS preparation.

Prepared datasets keep numeric columns in their original units; call
:func:`standardize` after :func:`split` so that scaling statistics come from the
training rows only.

Expected raw schemas
--------------------
Adult (UCI ``adult.data`` + ``adult.test``, header-less) is read with the
column names in :data:`ADULT_COLUMNS`.  COMPAS is ProPublica's
``compas-scores-two-years.csv``, which carries its own header; the columns used
are listed in :data:`COMPAS_REQUIRED`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError

ADULT_COLUMNS = (
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country", "income",
)
ADULT_NUMERIC = ("age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week")
ADULT_CATEGORICAL = (
    "workclass", "education", "marital-status", "occupation",
    "relationship", "race", "sex", "native-country",
)

COMPAS_NUMERIC = ("age", "juv_fel_count", "juv_misd_count", "juv_other_count", "priors_count")
COMPAS_CATEGORICAL = ("sex", "age_cat", "race", "c_charge_degree", "c_charge_desc")
COMPAS_REQUIRED = COMPAS_NUMERIC + COMPAS_CATEGORICAL + (
    "days_b_screening_arrest", "is_recid", "score_text", "two_year_recid",
)

PROTECTED_ATTRS = ("race", "sex")
# value of the protected column that marks the privileged group
ADULT_PRIVILEGED = {"race": "White", "sex": "Male"}
COMPAS_PRIVILEGED = {"race": "Caucasian", "sex": "Female"}

DEFAULT_TEST_FRACTION = 0.3
DEFAULT_SEED = 42


@dataclass(frozen=True)
class RawTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise DataError(f"duplicate column names in {self.columns}")
        width = len(self.columns)
        for i, row in enumerate(self.rows, start=1):
            if len(row) != width:
                raise DataError(f"row {i} has {len(row)} cells, expected {width}")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise DataError(f"missing expected column {name!r}") from None

    def column(self, name: str) -> list[str]:
        j = self.index(name)
        return [row[j] for row in self.rows]

    def require(self, names: Iterable[str]) -> None:
        missing = [c for c in names if c not in self.columns]
        if missing:
            raise DataError(f"schema mismatch: missing expected column(s) {missing}")


def _dedupe(names: Sequence[str]) -> tuple[str, ...]:
    # pandas convention: second "x" becomes "x.1"
    seen: dict[str, int] = {}
    out = []
    for name in names:
        if name in seen:
            seen[name] += 1
            out.append(f"{name}.{seen[name]}")
        else:
            seen[name] = 0
            out.append(name)
    return tuple(out)


def load_csv(path, has_header: bool = True, skip_rows: int = 0) -> RawTable:
    """Read an RFC-4180 CSV file into a :class:`RawTable`.

    Cells are stripped of surrounding whitespace and blank lines are ignored.
    ``skip_rows`` lines are discarded before the header (or first data row).
    Repeated header names get a ``.1``, ``.2`` suffix. Without a header the
    columns are named ``col0`` .. ``colK``.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            lines = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    lines = lines[skip_rows:]
    records = [tuple(c.strip() for c in line) for line in lines if any(c.strip() for c in line)]
    if has_header:
        if not records:
            raise DataError(f"{path}: missing header")
        columns = _dedupe(records[0])
        body = records[1:]
    else:
        width = len(records[0]) if records else 0
        columns = tuple(f"col{j}" for j in range(width))
        body = records
    for i, row in enumerate(body, start=1):
        if len(row) != len(columns):
            raise DataError(f"{path}: row {i} has {len(row)} cells, expected {len(columns)}")
    return RawTable(columns, tuple(body))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded features with binary labels (1 = favorable) and protected
    membership (1 = privileged). Arrays are read-only."""

    features: np.ndarray
    labels: np.ndarray
    protected: np.ndarray
    weights: np.ndarray | None = None
    feature_names: tuple[str, ...] = ()
    provenance: str = ""
    numeric_columns: tuple[int, ...] = field(default=())

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        n = X.shape[0]
        y = np.asarray(self.labels)
        s = np.asarray(self.protected)
        w = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=np.float64)
        if not (len(y) == len(s) == len(w) == n):
            raise DataError(
                f"length mismatch: features {n}, labels {len(y)}, protected {len(s)}, weights {len(w)}"
            )
        for name, v in (("labels", y), ("protected", s)):
            if n and not np.isin(v, (0, 1)).all():
                raise DataError(f"{name} must contain only 0 or 1")
        if n and not (np.isfinite(w).all() and (w > 0).all()):
            raise DataError("weights must be finite and strictly positive")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y.astype(np.int8)))
        object.__setattr__(self, "protected", _frozen(s.astype(np.int8)))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "numeric_columns", tuple(int(j) for j in self.numeric_columns))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def replace(self, **changes) -> "Dataset":
        fields = dict(
            features=self.features, labels=self.labels, protected=self.protected,
            weights=self.weights, feature_names=self.feature_names,
            provenance=self.provenance, numeric_columns=self.numeric_columns,
        )
        fields.update(changes)
        return Dataset(**fields)

    def with_weights(self, weights) -> "Dataset":
        return self.replace(weights=weights)

    def take(self, idx, provenance: str | None = None) -> "Dataset":
        idx = np.asarray(idx, dtype=np.intp)
        return self.replace(
            features=self.features[idx], labels=self.labels[idx],
            protected=self.protected[idx], weights=self.weights[idx],
            provenance=self.provenance if provenance is None else provenance,
        )


@dataclass(frozen=True)
class GroupCounts:
    n_p: int
    n_up: int
    n_pp: int
    n_np: int
    n_pup: int
    n_nup: int
    n_pos: int
    n_neg: int
    n_total: int


@dataclass(frozen=True)
class SyntheticSpec:
    n_total: int = 200
    privileged_fraction: float = 0.5
    positive_rate_privileged: float = 0.5
    positive_rate_unprivileged: float = 0.5
    feature_dim: int = 2
    class_separation: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n_total < 4:
            raise ConfigError("n_total must be >= 4")
        if self.feature_dim < 1:
            raise ConfigError("feature_dim must be >= 1")
        if not 0 < self.privileged_fraction < 1:
            raise ConfigError("privileged_fraction must lie in (0, 1)")
        for rate in (self.positive_rate_privileged, self.positive_rate_unprivileged):
            if not 0 <= rate <= 1:
                raise ConfigError("positive rates must lie in [0, 1]")
        if self.class_separation < 0:
            raise ConfigError("class_separation must be non-negative")


# ---------------------------------------------------------------------------
# encoding


def _encode(
    raw: RawTable, numeric: Sequence[str], categorical: Sequence[str]
) -> tuple[np.ndarray, tuple[str, ...], tuple[int, ...]]:
    blocks, names, numeric_idx = [], [], []
    for col in numeric:
        try:
            values = np.array([float(v) for v in raw.column(col)], dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"non-numeric value in column {col!r}: {exc}") from None
        numeric_idx.append(len(names))
        names.append(col)
        blocks.append(values[:, None])
    for col in categorical:
        values = np.array(raw.column(col), dtype=object)
        levels = sorted(set(values))
        onehot = np.zeros((raw.n_rows, len(levels)))
        lookup = {v: j for j, v in enumerate(levels)}
        onehot[np.arange(raw.n_rows), [lookup[v] for v in values]] = 1.0
        names.extend(f"{col}={level}" for level in levels)
        blocks.append(onehot)
    X = np.hstack(blocks) if blocks else np.zeros((raw.n_rows, 0))
    return X, tuple(names), tuple(numeric_idx)


def _filter_rows(raw: RawTable, keep) -> RawTable:
    return RawTable(raw.columns, tuple(r for r in raw.rows if keep(r)))


def _check_protected(protected_attr: str) -> None:
    if protected_attr not in PROTECTED_ATTRS:
        raise ConfigError(f"unknown protected attribute {protected_attr!r}; expected one of {PROTECTED_ATTRS}")


def read_adult(raw_dir) -> RawTable:
    """Concatenate the UCI ``adult.data`` and ``adult.test`` files (48,842 rows)."""
    raw_dir = Path(raw_dir)
    parts = []
    for name, skip in (("adult.data", 0), ("adult.test", 1)):
        table = load_csv(raw_dir / name, has_header=False, skip_rows=skip)
        if len(table.columns) != len(ADULT_COLUMNS):
            raise DataError(f"{name}: expected {len(ADULT_COLUMNS)} columns, found {len(table.columns)}")
        parts.extend(table.rows)
    return RawTable(ADULT_COLUMNS, tuple(parts))


def prepare_adult(raw: RawTable, protected_attr: str) -> Dataset:
    _check_protected(protected_attr)
    raw.require(ADULT_COLUMNS)
    raw = _filter_rows(raw, lambda r: "?" not in r)
    income = raw.column("income")
    # adult.test writes ">50K." with a trailing period
    labels = np.array([v.rstrip(".") == ">50K" for v in income], dtype=np.int8)
    privileged = ADULT_PRIVILEGED[protected_attr]
    protected = np.array([v == privileged for v in raw.column(protected_attr)], dtype=np.int8)
    X, names, numeric = _encode(raw, ADULT_NUMERIC, ADULT_CATEGORICAL)
    return Dataset(X, labels, protected, None, names, f"adult/{protected_attr}", numeric)


def read_compas(raw_dir) -> RawTable:
    return load_csv(Path(raw_dir) / "compas-scores-two-years.csv", has_header=True)


def _compas_valid(raw: RawTable):
    j_days = raw.index("days_b_screening_arrest")
    j_recid = raw.index("is_recid")
    j_degree = raw.index("c_charge_degree")
    j_score = raw.index("score_text")
    needed = [raw.index(c) for c in COMPAS_NUMERIC + COMPAS_CATEGORICAL + ("two_year_recid",)]

    def keep(row) -> bool:
        days = row[j_days]
        if days == "" or not -30 <= float(days) <= 30:
            return False
        if row[j_recid] == "-1" or row[j_degree] == "O" or row[j_score] in ("N/A", ""):
            return False
        return all(row[j] != "" for j in needed)

    return keep


def prepare_compas(raw: RawTable, protected_attr: str) -> Dataset:
    _check_protected(protected_attr)
    raw.require(COMPAS_REQUIRED)
    raw = _filter_rows(raw, _compas_valid(raw))
    labels = np.array([v == "0" for v in raw.column("two_year_recid")], dtype=np.int8)
    privileged = COMPAS_PRIVILEGED[protected_attr]
    protected = np.array([v == privileged for v in raw.column(protected_attr)], dtype=np.int8)
    X, names, numeric = _encode(raw, COMPAS_NUMERIC, COMPAS_CATEGORICAL)
    return Dataset(X, labels, protected, None, names, f"compas/{protected_attr}", numeric)


def load_raw(dataset: str, raw_dir) -> RawTable:
    if dataset == "adult":
        return read_adult(raw_dir)
    if dataset == "compas":
        return read_compas(raw_dir)
    raise ConfigError(f"unknown dataset {dataset!r}; expected 'adult' or 'compas'")


def prepare(dataset: str, raw: RawTable, protected_attr: str) -> Dataset:
    if dataset == "adult":
        return prepare_adult(raw, protected_attr)
    if dataset == "compas":
        return prepare_compas(raw, protected_attr)
    raise ConfigError(f"unknown dataset {dataset!r}; expected 'adult' or 'compas'")


# ---------------------------------------------------------------------------
# splitting and scaling


def split(ds: Dataset, test_fraction: float = DEFAULT_TEST_FRACTION, seed: int = DEFAULT_SEED) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split. Both parts keep the original row order."""
    if not 0 < test_fraction < 1:
        raise ConfigError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = round(ds.n * test_fraction)
    if n_test == 0 or n_test == ds.n:
        raise ConfigError(f"test_fraction {test_fraction} on {ds.n} rows leaves an empty part")
    perm = np.random.default_rng(seed).permutation(ds.n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return ds.take(train_idx, f"{ds.provenance}/train"), ds.take(test_idx, f"{ds.provenance}/test")


def standardize(train: Dataset, *others: Dataset) -> tuple[Dataset, ...]:
    """Scale numeric columns to zero mean / unit variance using ``train`` statistics."""
    cols = list(train.numeric_columns)
    if not cols:
        return (train, *others)
    mean = train.features[:, cols].mean(axis=0)
    std = train.features[:, cols].std(axis=0)
    std[std == 0] = 1.0

    def scale(ds: Dataset) -> Dataset:
        X = ds.features.copy()
        X[:, cols] = (X[:, cols] - mean) / std
        return ds.replace(features=X)

    return tuple(scale(ds) for ds in (train, *others))


def count_groups(ds: Dataset) -> GroupCounts:
    y = ds.labels.astype(bool)
    s = ds.protected.astype(bool)
    n_pp = int(np.sum(y & s))
    n_np = int(np.sum(~y & s))
    n_pup = int(np.sum(y & ~s))
    n_nup = int(np.sum(~y & ~s))
    return GroupCounts(
        n_p=n_pp + n_np, n_up=n_pup + n_nup,
        n_pp=n_pp, n_np=n_np, n_pup=n_pup, n_nup=n_nup,
        n_pos=n_pp + n_pup, n_neg=n_np + n_nup, n_total=ds.n,
    )


def synthesize(spec: SyntheticSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    protected = (rng.random(spec.n_total) < spec.privileged_fraction).astype(np.int8)
    rate = np.where(protected == 1, spec.positive_rate_privileged, spec.positive_rate_unprivileged)
    labels = (rng.random(spec.n_total) < rate).astype(np.int8)
    # class means at +/- separation/2 along the diagonal
    direction = np.ones(spec.feature_dim) / math.sqrt(spec.feature_dim)
    offset = (labels[:, None] - 0.5) * spec.class_separation * direction
    X = rng.standard_normal((spec.n_total, spec.feature_dim)) + offset
    return Dataset(X, labels, protected, None, (), f"synthetic/seed{spec.seed}", tuple(range(spec.feature_dim)))


# ---------------------------------------------------------------------------
# CSV-with-weights serialization: feature columns, then label, protected, weight.
# One-hot columns are named "column=level"; any other feature column is numeric.

_TRAILER = ("label", "protected", "weight")


def save_dataset(ds: Dataset, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow((*ds.feature_names, *_TRAILER))
        for x, y, s, w in zip(ds.features, ds.labels, ds.protected, ds.weights):
            writer.writerow((*(repr(float(v)) for v in x), int(y), int(s), repr(float(w))))


def load_dataset(path, provenance: str | None = None) -> Dataset:
    raw = load_csv(path, has_header=True)
    if raw.columns[-3:] != _TRAILER:
        raise DataError(f"{path}: last three columns must be {_TRAILER}, found {raw.columns[-3:]}")
    try:
        values = np.array([[float(c) for c in row] for row in raw.rows], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    values = values.reshape(raw.n_rows, len(raw.columns))
    names = raw.columns[:-3]
    numeric = tuple(j for j, name in enumerate(names) if "=" not in name)
    return Dataset(
        values[:, :-3], values[:, -3], values[:, -2], values[:, -1], names,
        provenance if provenance is not None else Path(path).stem, numeric,
    )
