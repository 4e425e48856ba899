"""Balanced accuracy and group-fairness metrics.

Group encoding: ``protected == 1`` is the privileged group. Every rate is a
weighted rate; unit weights give the ordinary counting definitions. The Theil
index is the exception and is always unweighted.

Sign conventions follow the formulas: SPD = P(yhat=1 | unpriv) - P(yhat=1 | priv),
so a negative SPD means the privileged group receives the favorable outcome
more often.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError, UndefinedMetricError

METRIC_NAMES = ("ba", "spd", "aod", "di", "eod", "ti")


@dataclass(frozen=True)
class Confusion:
    tp: float
    fp: float
    tn: float
    fn: float

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.tn + self.fn

    def tpr(self) -> float:
        pos = self.tp + self.fn
        if pos <= 0:
            raise UndefinedMetricError("true positive rate undefined: no positive-label mass")
        return self.tp / pos

    def fpr(self) -> float:
        neg = self.fp + self.tn
        if neg <= 0:
            raise UndefinedMetricError("false positive rate undefined: no negative-label mass")
        return self.fp / neg


@dataclass(frozen=True)
class GroupConfusion:
    privileged: Confusion
    unprivileged: Confusion


@dataclass(frozen=True)
class FairnessReport:
    ba: float
    spd: float
    aod: float
    di: float
    eod: float
    ti: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def to_json_dict(self) -> dict:
        return {k: _json_number(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "FairnessReport":
        return cls(**{k: _from_json_number(d[k]) for k in METRIC_NAMES})


def _json_number(v: float):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    if v == math.inf:
        return "inf"
    return v


def _from_json_number(v) -> float:
    if v is None:
        return math.nan
    if v == "inf":
        return math.inf
    return float(v)


def _as_arrays(*vectors, weights=None):
    arrays = [np.asarray(v).astype(np.int64).ravel() for v in vectors]
    n = len(arrays[0])
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64).ravel()
    lengths = {len(a) for a in arrays} | {len(w)}
    if len(lengths) != 1:
        raise DataError(f"length mismatch: {sorted(lengths)}")
    for a in arrays:
        if n and not np.isin(a, (0, 1)).all():
            raise DataError("predictions, labels and groups must be binary 0/1")
    return (*arrays, w)


def _tally(preds, labels, w) -> Confusion:
    p = preds == 1
    y = labels == 1
    return Confusion(
        tp=float(w[p & y].sum()), fp=float(w[p & ~y].sum()),
        tn=float(w[~p & ~y].sum()), fn=float(w[~p & y].sum()),
    )


def confusion(preds, labels, protected, weights=None) -> GroupConfusion:
    preds, labels, protected, w = _as_arrays(preds, labels, protected, weights=weights)
    priv = protected == 1
    return GroupConfusion(
        privileged=_tally(preds[priv], labels[priv], w[priv]),
        unprivileged=_tally(preds[~priv], labels[~priv], w[~priv]),
    )


def balanced_accuracy(preds, labels, weights=None) -> float:
    preds, labels, w = _as_arrays(preds, labels, weights=weights)
    pooled = _tally(preds, labels, w)
    tpr = pooled.tpr()
    tnr = 1.0 - pooled.fpr()
    return (tpr + tnr) / 2


def _positive_rates(preds, protected, weights) -> tuple[float, float]:
    """Weighted favorable-prediction rate of (unprivileged, privileged)."""
    preds, protected, w = _as_arrays(preds, protected, weights=weights)
    rates = []
    for mask, name in ((protected == 0, "unprivileged"), (protected == 1, "privileged")):
        mass = w[mask].sum()
        if mass <= 0:
            raise UndefinedMetricError(f"{name} group is empty")
        rates.append(float(w[mask & (preds == 1)].sum() / mass))
    return rates[0], rates[1]


def disparate_impact(preds, protected, weights=None) -> float:
    """Unprivileged over privileged favorable rate; ``inf`` when only the
    denominator is zero."""
    p_unpriv, p_priv = _positive_rates(preds, protected, weights)
    if p_priv == 0:
        if p_unpriv > 0:
            return math.inf
        raise UndefinedMetricError("disparate impact undefined: both groups have zero favorable rate")
    return p_unpriv / p_priv


def statistical_parity_difference(preds, protected, weights=None) -> float:
    p_unpriv, p_priv = _positive_rates(preds, protected, weights)
    return p_unpriv - p_priv


def average_odds_difference(conf: GroupConfusion) -> float:
    up, p = conf.unprivileged, conf.privileged
    return ((up.fpr() - p.fpr()) + (up.tpr() - p.tpr())) / 2


def equal_opportunity_difference(conf: GroupConfusion) -> float:
    return conf.unprivileged.tpr() - conf.privileged.tpr()


def theil_index(preds, labels) -> float:
    preds, labels, _ = _as_arrays(preds, labels)
    if len(preds) == 0:
        raise UndefinedMetricError("Theil index undefined on zero rows")
    b = (preds - labels + 1).astype(np.float64)
    mu = b.mean()
    if mu == 0:
        raise UndefinedMetricError("Theil index undefined: mean benefit is zero")
    r = b / mu
    # 0 * ln 0 is taken as 0
    terms = np.zeros_like(r)
    nz = r > 0
    terms[nz] = r[nz] * np.log(r[nz])
    return float(terms.mean())


def full_report(preds, labels, protected, weights=None) -> FairnessReport:
    conf = confusion(preds, labels, protected, weights)
    values = {}
    steps = (
        ("ba", lambda: balanced_accuracy(preds, labels, weights)),
        ("spd", lambda: statistical_parity_difference(preds, protected, weights)),
        ("aod", lambda: average_odds_difference(conf)),
        ("di", lambda: disparate_impact(preds, protected, weights)),
        ("eod", lambda: equal_opportunity_difference(conf)),
        ("ti", lambda: theil_index(preds, labels)),
    )
    for name, compute in steps:
        try:
            values[name] = compute()
        except UndefinedMetricError as exc:
            raise UndefinedMetricError(f"{name}: {exc}") from exc
    return FairnessReport(**values)
