"""Gaussian naive Bayes with weighted priors, means and variances.

Variances are weighted population variances, so an integer weight on a row is
equivalent to that many copies of it. Every variance is padded by
``var_smoothing`` times the largest weighted per-feature variance of the
training matrix.

Moments come from the sums (sum s, sum s*z, sum s*z^2) of the shifted values
``z = x - min(x)``. Those sums do not depend on row order or on whether a
weight is stored or expanded into copies, so on exactly representable data the
replication equivalence holds bit for bit.
"""
from __future__ import annotations

import numpy as np


def _weighted_moments(X, s):
    shift = X.min(axis=0)
    Z = X - shift
    total = s.sum()
    m1 = s @ Z / total
    m2 = s @ (Z * Z) / total
    return shift + m1, np.maximum(m2 - m1 * m1, 0.0)


def fit(X, y, s, var_smoothing=1e-9):
    _, overall_var = _weighted_moments(X, s)
    eps = var_smoothing * (overall_var.max() if overall_var.size else 0.0)
    if eps <= 0:
        eps = var_smoothing
    means, variances, masses = [], [], []
    for c in (0, 1):
        mask = y == c
        mean, var = _weighted_moments(X[mask], s[mask])
        means.append(mean)
        variances.append(var + eps)
        masses.append(s[mask].sum())
    masses = np.array(masses)
    params = {
        "log_prior": np.log(masses / masses.sum()),
        "mean": np.vstack(means),
        "var": np.vstack(variances),
    }
    return params, {"epsilon": float(eps)}


def joint_log_likelihood(params, X):
    var = params["var"]
    out = np.empty((X.shape[0], 2))
    for c in (0, 1):
        norm = -0.5 * np.sum(np.log(2.0 * np.pi * var[c]))
        dev = -0.5 * np.sum((X - params["mean"][c]) ** 2 / var[c], axis=1)
        out[:, c] = params["log_prior"][c] + norm + dev
    return out


def scores(params, X):
    jll = joint_log_likelihood(params, X)
    # P(class 1 | x) = sigmoid(jll1 - jll0)
    return np.exp(-np.logaddexp(0.0, jll[:, 0] - jll[:, 1]))
