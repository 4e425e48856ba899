"""CART classification tree grown on weighted Gini impurity.

The builder works on a shared row-index array partitioned in place, like most
array-based CART implementations. Split candidates are midpoints between
consecutive distinct values of a feature inside the node; columns that hold
only 0/1 values (one-hot indicators) get the single candidate 0.5 without a
sort.

Nodes are stored as flat arrays. A node with ``left == -1`` is a leaf;
``value`` is the weighted fraction of class 1 among the training rows that
reached it.
"""
from __future__ import annotations

import numba
import numpy as np

LEAF = -1
# relative margin below which two split scores count as a tie
_TIE_EPS = 1e-12


@numba.njit(cache=True)
def _split_score(w1l, wl, w1r, wr):
    # Minimizing the summed weighted Gini of the children equals maximizing this.
    w0l = wl - w1l
    w0r = wr - w1r
    return (w1l * w1l + w0l * w0l) / wl + (w1r * w1r + w0r * w0r) / wr


@numba.njit(cache=True)
def _best_split_on_feature(X, y, w, idx, start, end, f, is_binary, w1_node, w_node,
                           min_leaf, min_weight_leaf, vals, order):
    """Best (score, threshold) for feature ``f``; score is -inf if there is
    no admissible split. Returns also whether the feature is constant."""
    m = end - start
    best_score = -np.inf
    best_thr = 0.0
    if is_binary:
        wl = 0.0
        w1l = 0.0
        nl = 0
        for i in range(start, end):
            r = idx[i]
            if X[r, f] < 0.5:
                wl += w[r]
                w1l += w[r] * y[r]
                nl += 1
        if nl == 0 or nl == m:
            return best_score, best_thr, True
        wr = w_node - wl
        if nl >= min_leaf and m - nl >= min_leaf and wl >= min_weight_leaf and wr >= min_weight_leaf:
            best_score = _split_score(w1l, wl, w1_node - w1l, wr)
            best_thr = 0.5
        return best_score, best_thr, False

    for i in range(m):
        vals[i] = X[idx[start + i], f]
    o = np.argsort(vals[:m])
    for i in range(m):
        order[i] = idx[start + o[i]]
    if vals[o[0]] == vals[o[m - 1]]:
        return best_score, best_thr, True
    wl = 0.0
    w1l = 0.0
    for i in range(m - 1):
        r = order[i]
        wl += w[r]
        w1l += w[r] * y[r]
        v = vals[o[i]]
        v_next = vals[o[i + 1]]
        if v_next <= v:
            continue
        nl = i + 1
        if nl < min_leaf or m - nl < min_leaf:
            continue
        wr = w_node - wl
        if wl < min_weight_leaf or wr < min_weight_leaf:
            continue
        score = _split_score(w1l, wl, w1_node - w1l, wr)
        if score > best_score + _TIE_EPS * abs(best_score) or best_score == -np.inf:
            best_score = score
            thr = 0.5 * (v + v_next)
            if thr >= v_next:
                thr = v
            best_thr = thr
    return best_score, best_thr, False


@numba.njit(cache=True)
def _build(X, y, w, rows, is_binary, max_depth, min_leaf, min_weight_leaf, max_features, seed):
    n_rows = rows.shape[0]
    d = X.shape[1]
    cap = 2 * n_rows + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, LEAF, np.int64)
    right = np.full(cap, LEAF, np.int64)
    value = np.zeros(cap, np.float64)
    mass = np.zeros(cap, np.float64)

    idx = rows.copy()
    vals = np.empty(n_rows, np.float64)
    order = np.empty(n_rows, np.int64)
    feats = np.arange(d)
    if max_features > 0:
        np.random.seed(seed)

    # stack entries: node id, start, end, depth
    stack = np.empty((cap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_rows
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]

        w_node = 0.0
        w1_node = 0.0
        for i in range(start, end):
            r = idx[i]
            w_node += w[r]
            w1_node += w[r] * y[r]
        value[node] = w1_node / w_node
        mass[node] = w_node

        m = end - start
        if w1_node <= 0.0 or w1_node >= w_node:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue
        if m < 2 * min_leaf:
            continue

        if max_features > 0:
            # Fisher-Yates shuffle of the feature visiting order
            for j in range(d - 1, 0, -1):
                k = np.random.randint(0, j + 1)
                tmp = feats[j]
                feats[j] = feats[k]
                feats[k] = tmp
            budget = max_features
        else:
            budget = d

        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        visited = 0
        for jj in range(d):
            if visited >= budget:
                break
            f = feats[jj]
            score, thr, constant = _best_split_on_feature(
                X, y, w, idx, start, end, f, is_binary[f], w1_node, w_node,
                min_leaf, min_weight_leaf, vals, order)
            if constant:
                continue
            visited += 1
            if score == -np.inf:
                continue
            if best_f == -1 or score > best_score + _TIE_EPS * abs(best_score):
                best_score = score
                best_f = f
                best_thr = thr
        if best_f == -1:
            continue

        # partition idx[start:end] so rows going left come first, order kept
        nl = 0
        for i in range(start, end):
            if X[idx[i], best_f] <= best_thr:
                order[nl] = idx[i]
                nl += 1
        nr = nl
        for i in range(start, end):
            if X[idx[i], best_f] > best_thr:
                order[nr] = idx[i]
                nr += 1
        for i in range(m):
            idx[start + i] = order[i]

        l_id = n_nodes
        r_id = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = l_id
        right[node] = r_id
        # push right first so the left subtree is numbered first
        stack[top, 0] = r_id
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = l_id
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), mass[:n_nodes].copy())


@numba.njit(cache=True)
def _apply(feature, threshold, left, right, X, root):
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = root
        while left[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def binary_columns(X: np.ndarray) -> np.ndarray:
    return np.array([np.isin(X[:, j], (0.0, 1.0)).all() for j in range(X.shape[1])], dtype=np.bool_)


def grow(X, y, w, *, rows=None, max_depth=None, min_samples_leaf=1,
         min_weight_leaf=0.0, max_features=None, seed=0, is_binary=None) -> dict:
    """Grow one tree and return its node arrays.

    ``max_features=None`` visits every feature in index order, so ties go to
    the lowest feature index and then the lowest threshold. With an integer,
    features are visited in a random order per node until that many
    non-constant ones have been scored.
    """
    X = np.asfortranarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    rows = np.arange(X.shape[0], dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    if is_binary is None:
        is_binary = binary_columns(X)
    feature, threshold, left, right, value, mass = _build(
        X, y, w, rows, is_binary,
        -1 if max_depth is None else int(max_depth),
        int(min_samples_leaf), float(min_weight_leaf),
        -1 if max_features is None else int(max_features),
        int(seed),
    )
    return {"feature": feature, "threshold": threshold, "left": left,
            "right": right, "value": value, "mass": mass}


def leaf_values(tree: dict, X: np.ndarray, root: int = 0) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    leaves = _apply(tree["feature"], tree["threshold"], tree["left"], tree["right"], X, root)
    return tree["value"][leaves]


def depth(tree: dict) -> int:
    left, right = tree["left"], tree["right"]
    best = 0
    stack = [(0, 0)]
    while stack:
        node, dep = stack.pop()
        if left[node] == LEAF:
            best = max(best, dep)
        else:
            stack.append((left[node], dep + 1))
            stack.append((right[node], dep + 1))
    return best
