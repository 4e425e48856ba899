"""Random forest: weighted bootstrap plus per-split feature subsampling.

Sample weights enter only through the bootstrap, where each row is drawn with
probability proportional to its weight. Inside a tree, a row's weight is its
multiplicity in the bootstrap sample.
"""
from __future__ import annotations

import math

import numpy as np

from . import tree as cart

_FIELDS = ("feature", "threshold", "left", "right", "value", "mass")


def fit(X, y, s, n_trees=100, max_features="sqrt", max_depth=None, min_samples_leaf=1, seed=0):
    n, d = X.shape
    if max_features == "sqrt":
        max_features = math.ceil(math.sqrt(d))
    max_features = int(max_features)
    rng = np.random.default_rng(seed)
    Xf = np.asfortranarray(X, dtype=np.float64)
    is_binary = cart.binary_columns(Xf)
    p = s / s.sum()
    trees = []
    for _ in range(n_trees):
        draw = rng.choice(n, size=n, replace=True, p=p)
        counts = np.bincount(draw, minlength=n).astype(np.float64)
        rows = np.flatnonzero(counts)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        trees.append(cart.grow(
            Xf, y, counts, rows=rows, max_depth=max_depth,
            min_samples_leaf=min_samples_leaf, max_features=max_features,
            seed=tree_seed, is_binary=is_binary,
        ))
    params = {name: np.concatenate([t[name] for t in trees]) for name in _FIELDS}
    sizes = np.array([len(t["value"]) for t in trees], dtype=np.int64)
    params["roots"] = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    # child pointers become global offsets into the concatenated arrays
    for name in ("left", "right"):
        offsets = np.repeat(params["roots"], sizes)
        params[name] = np.where(params[name] == cart.LEAF, cart.LEAF, params[name] + offsets)
    meta = {"n_trees": n_trees, "max_features": max_features,
            "mean_depth": float(np.mean([cart.depth(t) for t in trees]))}
    return params, meta


def scores(params, X):
    """Fraction of trees voting for class 1 (leaf fraction >= 0.5)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    votes = np.zeros(X.shape[0])
    for root in params["roots"]:
        votes += cart.leaf_values(params, X, int(root)) >= 0.5
    return votes / len(params["roots"])
