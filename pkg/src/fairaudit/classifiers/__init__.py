"""Five weight-aware binary classifiers behind one train / score / predict API.

=========  ==========================================================
kind       how sample weights are used
=========  ==========================================================
logreg     multiply each row's log-likelihood term
dtree      weighted Gini tallies and weighted leaf fractions
knn        ignored (unweighted nearest-neighbor vote)
gnb        weighted class priors, means and variances
rforest    bootstrap draws with probability proportional to weight
=========  ==========================================================
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..data import Dataset
from ..errors import ConfigError, TrainingError
from . import forest, knn, logreg, naive_bayes, tree

MODEL_KINDS = ("dtree", "gnb", "knn", "logreg", "rforest")

DEFAULTS: dict[str, dict[str, Any]] = {
    "logreg": {"l2": 1.0, "max_iter": 100, "tol": 1e-8},
    "dtree": {"max_depth": None, "min_samples_leaf": 1, "min_weight_leaf": 0.0},
    "knn": {"k": 5},
    "gnb": {"var_smoothing": 1e-9},
    "rforest": {"n_trees": 100, "max_features": "sqrt", "max_depth": None, "min_samples_leaf": 1},
}

DISPLAY_NAMES = {
    "dtree": "Decision Tree",
    "gnb": "Gaussian Naive Bayes",
    "knn": "K Nearest Neighbor",
    "logreg": "Logistic Regression",
    "rforest": "Random Forest",
}

FORMAT_VERSION = 1


def _check_hyperparameters(kind: str, hp: dict) -> None:
    def positive_int(name):
        if not isinstance(hp[name], (int, np.integer)) or hp[name] < 1:
            raise ConfigError(f"{kind}.{name} must be an integer >= 1, got {hp[name]!r}")

    def optional_depth(name):
        if hp[name] is not None:
            positive_int(name)

    if kind == "logreg":
        if not hp["l2"] >= 0:
            raise ConfigError("logreg.l2 must be >= 0")
        positive_int("max_iter")
        if not hp["tol"] > 0:
            raise ConfigError("logreg.tol must be > 0")
    elif kind == "dtree":
        optional_depth("max_depth")
        positive_int("min_samples_leaf")
        if not hp["min_weight_leaf"] >= 0:
            raise ConfigError("dtree.min_weight_leaf must be >= 0")
    elif kind == "knn":
        positive_int("k")
    elif kind == "gnb":
        if not hp["var_smoothing"] >= 0:
            raise ConfigError("gnb.var_smoothing must be >= 0")
    elif kind == "rforest":
        positive_int("n_trees")
        optional_depth("max_depth")
        positive_int("min_samples_leaf")
        if hp["max_features"] != "sqrt":
            positive_int("max_features")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        unknown = set(self.hyperparameters) - set(DEFAULTS[self.kind])
        if unknown:
            raise ConfigError(f"unknown {self.kind} hyperparameter(s): {sorted(unknown)}")
        merged = {**DEFAULTS[self.kind], **self.hyperparameters}
        _check_hyperparameters(self.kind, merged)
        object.__setattr__(self, "hyperparameters", merged)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: str
    d: int
    params: dict[str, np.ndarray]
    meta: dict


def _check_dim(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise TrainingError(f"dimension mismatch: model expects {model.d} features, got {X.shape[-1]}")
    return X


def train(spec: ModelSpec, data: Dataset) -> TrainedModel:
    if data.n < 2:
        raise TrainingError(f"need at least 2 training rows, got {data.n}")
    y = data.labels.astype(np.int64)
    if len(np.unique(y)) < 2:
        raise TrainingError("training data contains a single class")
    X, s = data.features, data.weights
    hp = spec.hyperparameters
    if spec.kind == "logreg":
        params, meta = logreg.fit(X, y, s, l2=hp["l2"], max_iter=hp["max_iter"], tol=hp["tol"])
    elif spec.kind == "dtree":
        params = tree.grow(X, y, s, max_depth=hp["max_depth"], min_samples_leaf=hp["min_samples_leaf"],
                           min_weight_leaf=hp["min_weight_leaf"])
        meta = {"n_nodes": int(len(params["value"])), "depth": tree.depth(params)}
    elif spec.kind == "knn":
        params, meta = knn.fit(X, y, k=hp["k"])
    elif spec.kind == "gnb":
        params, meta = naive_bayes.fit(X, y, s, var_smoothing=hp["var_smoothing"])
    else:
        params, meta = forest.fit(X, y, s, n_trees=hp["n_trees"], max_features=hp["max_features"],
                                  max_depth=hp["max_depth"], min_samples_leaf=hp["min_samples_leaf"],
                                  seed=spec.seed)
    meta = {"n": data.n, "d": data.d, "hyperparameters": hp, "seed": spec.seed, **meta}
    return TrainedModel(spec.kind, data.d, params, meta)


def predict_scores(model: TrainedModel, features) -> np.ndarray:
    """Estimated probability of the favorable class, one value per row."""
    X = _check_dim(model, features)
    if model.kind == "logreg":
        out = logreg.scores(model.params, X)
    elif model.kind == "dtree":
        out = tree.leaf_values(model.params, X)
    elif model.kind == "knn":
        out = knn.scores(model.params, X, model.meta["k"])
    elif model.kind == "gnb":
        out = naive_bayes.scores(model.params, X)
    else:
        out = forest.scores(model.params, X)
    return np.clip(out, 0.0, 1.0)


def threshold_labels(scores, threshold: float = 0.5) -> np.ndarray:
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold}")
    return (np.asarray(scores) >= threshold).astype(np.int8)


def predict_labels(model: TrainedModel, features, threshold: float = 0.5) -> np.ndarray:
    """Label 1 where the score is at least ``threshold``."""
    return threshold_labels(predict_scores(model, features), threshold)


# Serialized models are .npz archives: every fitted array under "param:<name>"
# plus a JSON header under "header" holding format version, kind, d and meta.

def save_model(model: TrainedModel, path) -> None:
    header = {"format": "fairaudit-model", "version": FORMAT_VERSION,
              "kind": model.kind, "d": model.d, "meta": model.meta}
    arrays = {f"param:{k}": np.asarray(v) for k, v in model.params.items()}
    with Path(path).open("wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header, sort_keys=True)), **arrays)


def load_model(path) -> TrainedModel:
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive["header"]))
        if header.get("format") != "fairaudit-model" or header.get("version") != FORMAT_VERSION:
            raise TrainingError(f"{path}: unsupported model format {header.get('format')!r} v{header.get('version')}")
        params = {k.split(":", 1)[1]: archive[k] for k in archive.files if k.startswith("param:")}
    return TrainedModel(header["kind"], int(header["d"]), params, header["meta"])
