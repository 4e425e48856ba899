"""Brute-force recomputation of every metric, one row at a time.

Shares no code with :mod:`fairaudit.metrics`; used only to cross-check it.
"""
from __future__ import annotations

import math

from .errors import UndefinedMetricError
from .metrics import FairnessReport


def naive_oracle(preds, labels, protected, weights=None) -> FairnessReport:
    preds = [int(v) for v in preds]
    labels = [int(v) for v in labels]
    protected = [int(v) for v in protected]
    weights = [1.0] * len(preds) if weights is None else [float(v) for v in weights]

    # cells[group][label][pred] -> weighted mass
    cells = {g: {y: {p: 0.0 for p in (0, 1)} for y in (0, 1)} for g in (0, 1)}
    for p, y, g, w in zip(preds, labels, protected, weights):
        cells[g][y][p] += w

    def rate(num, den, what):
        if den <= 0:
            raise UndefinedMetricError(what)
        return num / den

    pooled = {y: {p: cells[0][y][p] + cells[1][y][p] for p in (0, 1)} for y in (0, 1)}
    sens = rate(pooled[1][1], pooled[1][1] + pooled[1][0], "ba: no positives")
    spec = rate(pooled[0][0], pooled[0][0] + pooled[0][1], "ba: no negatives")
    ba = (sens + spec) / 2

    fav = {}
    for g in (0, 1):
        mass = cells[g][0][0] + cells[g][0][1] + cells[g][1][0] + cells[g][1][1]
        fav[g] = rate(cells[g][0][1] + cells[g][1][1], mass, "spd: empty group")
    spd = fav[0] - fav[1]

    tpr = {g: rate(cells[g][1][1], cells[g][1][1] + cells[g][1][0], "tpr") for g in (0, 1)}
    fpr = {g: rate(cells[g][0][1], cells[g][0][1] + cells[g][0][0], "fpr") for g in (0, 1)}
    aod = 0.5 * ((fpr[0] - fpr[1]) + (tpr[0] - tpr[1]))
    eod = tpr[0] - tpr[1]

    if fav[1] == 0:
        if fav[0] == 0:
            raise UndefinedMetricError("di: 0/0")
        di = math.inf
    else:
        di = fav[0] / fav[1]

    b = [p - y + 1 for p, y in zip(preds, labels)]
    if not b:
        raise UndefinedMetricError("ti: no rows")
    mu = sum(b) / len(b)
    if mu == 0:
        raise UndefinedMetricError("ti: zero mean benefit")
    total = 0.0
    for bi in b:
        if bi:
            total += (bi / mu) * math.log(bi / mu)
    ti = total / len(b)

    return FairnessReport(ba=ba, spd=spd, aod=aod, di=di, eod=eod, ti=ti)
