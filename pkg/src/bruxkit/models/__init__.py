"""The five classifiers explored for event detection, behind one train/predict
surface, with per-model feature standardization and deterministic seeding.

Labels are binary throughout: 1 = positive event, 0 = silent. Every
prediction tie (leaf majority, forest vote, zero decision value) resolves
to silent.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .svm import fit_svm, rbf_kernel, resolve_gamma, smo_solve, svm_decision, SmoResult, dual_objective
from .tree import (
    TreeNode,
    build_tree,
    forest_fit,
    forest_predict,
    tree_from_obj,
    tree_predict,
    tree_to_obj,
)

MODEL_FORMAT_VERSION = "bruxkit-model-v1"

KINDS = ("decision_tree", "knn", "logistic_regression", "random_forest", "svm")

DEFAULT_HYPERPARAMETERS = {
    "decision_tree": {"max_depth": None, "min_leaf": 1},
    "knn": {"k": 5},
    "logistic_regression": {"l2": 1e-3, "epochs": 500, "step": 0.1},
    "random_forest": {"n_trees": 100, "max_features": "sqrt", "max_depth": None, "min_leaf": 1},
    # max_passes None means 10 * n_training_rows, resolved at fit time
    "svm": {"C": 1.0, "gamma": "scale", "tol": 1e-3, "max_passes": None},
}

STD_FLOOR = 1e-12


class ModelError(ValueError):
    pass


class EmptyTrainingSet(ModelError):
    pass


class SingleClassTraining(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class ModelFormatError(ModelError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    @staticmethod
    def make(kind: str, seed: int = 0, **overrides) -> "ModelSpec":
        if kind not in KINDS:
            raise ModelError(f"unknown model kind {kind!r}; expected one of {KINDS}")
        params = dict(DEFAULT_HYPERPARAMETERS[kind])
        for key, value in overrides.items():
            if key not in params:
                raise ModelError(f"unknown hyperparameter {key!r} for {kind}")
            params[key] = value
        return ModelSpec(kind=kind, hyperparameters=params, seed=int(seed) & (2**64 - 1))


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray  # floored at STD_FLOOR

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.means) / self.stds


def fit_standardizer(X: np.ndarray) -> Standardizer:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit a standardizer on an empty matrix")
    stds = X.std(axis=0)
    return Standardizer(means=X.mean(axis=0), stds=np.maximum(stds, STD_FLOOR))


def apply(std: Standardizer, X: np.ndarray) -> np.ndarray:
    return std.transform(X)


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    standardizer: Standardizer
    parameters: object
    n_features: int


def _fit_logistic(X, y, *, l2, epochs, step):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(int(epochs)):
        z = X @ w + b
        p = 1.0 / (1.0 + np.exp(-z))
        residual = p - y
        w -= step * (X.T @ residual / n + l2 * w)
        b -= step * residual.mean()
    return {"weights": w, "bias": b}


def train(spec: ModelSpec, X: np.ndarray, y: np.ndarray) -> TrainedModel:
    """Fit a model of spec.kind; deterministic given (spec.seed, X, y)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) == 0:
        raise EmptyTrainingSet("empty training matrix")
    if len(X) != len(y):
        raise DimensionMismatch(f"{len(X)} rows vs {len(y)} labels")
    if len(X) < 2:
        raise EmptyTrainingSet("need at least 2 training rows")
    classes = np.unique(y)
    if len(classes) < 2 and spec.kind != "knn":
        raise SingleClassTraining(f"{spec.kind} requires both classes in training data")

    std = fit_standardizer(X)
    Xs = std.transform(X)
    hp = spec.hyperparameters

    if spec.kind == "decision_tree":
        params = build_tree(Xs, y, max_depth=hp["max_depth"], min_leaf=hp["min_leaf"])
    elif spec.kind == "random_forest":
        mf = hp["max_features"]
        if mf == "sqrt":
            mf = max(1, int(np.sqrt(X.shape[1])))
        params = forest_fit(
            Xs,
            y,
            seed=spec.seed,
            n_trees=hp["n_trees"],
            max_features=int(mf),
            max_depth=hp["max_depth"],
            min_leaf=hp["min_leaf"],
        )
    elif spec.kind == "knn":
        params = {"X": Xs, "y": y}
    elif spec.kind == "logistic_regression":
        params = _fit_logistic(Xs, y, l2=hp["l2"], epochs=hp["epochs"], step=hp["step"])
    elif spec.kind == "svm":
        params = fit_svm(
            Xs,
            y,
            C=hp["C"],
            gamma=hp["gamma"],
            tol=hp["tol"],
            seed=spec.seed,
            max_passes=hp["max_passes"],
        )
        if not params["converged"]:
            warnings.warn("SMO hit its pass budget before meeting tol; model kept as-is")
    else:
        raise ModelError(f"unknown model kind {spec.kind!r}")
    return TrainedModel(spec=spec, standardizer=std, parameters=params, n_features=X.shape[1])


def _predict_knn(params, Xs, k):
    train_X, train_y = params["X"], params["y"]
    k = min(int(k), len(train_y))
    d2 = (
        (Xs**2).sum(axis=1)[:, None]
        + (train_X**2).sum(axis=1)[None, :]
        - 2.0 * Xs @ train_X.T
    )
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    votes = train_y[order].sum(axis=1)
    return (votes * 2 > k).astype(int)


def predict(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected {model.n_features} feature columns, got {X.shape}"
        )
    Xs = model.standardizer.transform(X)
    kind = model.spec.kind
    if kind == "decision_tree":
        return tree_predict(model.parameters, Xs)
    if kind == "random_forest":
        return forest_predict(model.parameters, Xs)
    if kind == "knn":
        return _predict_knn(model.parameters, Xs, model.spec.hyperparameters["k"])
    if kind == "logistic_regression":
        z = Xs @ model.parameters["weights"] + model.parameters["bias"]
        return (z > 0).astype(int)
    if kind == "svm":
        return (svm_decision(model.parameters, Xs) > 0).astype(int)
    raise ModelError(f"unknown model kind {kind!r}")


def _parameters_to_obj(model: TrainedModel):
    kind = model.spec.kind
    p = model.parameters
    if kind == "decision_tree":
        return {"tree": tree_to_obj(p)}
    if kind == "random_forest":
        return {"trees": [tree_to_obj(t) for t in p]}
    if kind == "knn":
        return {"X": p["X"].tolist(), "y": p["y"].tolist()}
    if kind == "logistic_regression":
        return {"weights": p["weights"].tolist(), "bias": p["bias"]}
    if kind == "svm":
        return {
            "gamma": p["gamma"],
            "support": p["support"].tolist(),
            "coef": p["coef"].tolist(),
            "bias": p["bias"],
            "converged": p["converged"],
        }
    raise ModelError(f"unknown model kind {kind!r}")


def _parameters_from_obj(kind: str, obj):
    if kind == "decision_tree":
        return tree_from_obj(obj["tree"])
    if kind == "random_forest":
        return [tree_from_obj(t) for t in obj["trees"]]
    if kind == "knn":
        return {"X": np.asarray(obj["X"], dtype=float), "y": np.asarray(obj["y"], dtype=int)}
    if kind == "logistic_regression":
        return {"weights": np.asarray(obj["weights"], dtype=float), "bias": float(obj["bias"])}
    if kind == "svm":
        return {
            "gamma": float(obj["gamma"]),
            "support": np.asarray(obj["support"], dtype=float),
            "coef": np.asarray(obj["coef"], dtype=float),
            "bias": float(obj["bias"]),
            "converged": bool(obj["converged"]),
        }
    raise ModelError(f"unknown model kind {kind!r}")


def model_to_json(model: TrainedModel) -> str:
    doc = {
        "format": MODEL_FORMAT_VERSION,
        "spec": {
            "kind": model.spec.kind,
            "hyperparameters": model.spec.hyperparameters,
            "seed": model.spec.seed,
        },
        "standardizer": {
            "means": model.standardizer.means.tolist(),
            "stds": model.standardizer.stds.tolist(),
        },
        "n_features": model.n_features,
        "parameters": _parameters_to_obj(model),
    }
    return json.dumps(doc, indent=2)


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"model format {doc.get('format')!r}, expected {MODEL_FORMAT_VERSION!r}"
        )
    spec = ModelSpec(
        kind=doc["spec"]["kind"],
        hyperparameters=doc["spec"]["hyperparameters"],
        seed=doc["spec"]["seed"],
    )
    std = Standardizer(
        means=np.asarray(doc["standardizer"]["means"], dtype=float),
        stds=np.asarray(doc["standardizer"]["stds"], dtype=float),
    )
    return TrainedModel(
        spec=spec,
        standardizer=std,
        parameters=_parameters_from_obj(spec.kind, doc["parameters"]),
        n_features=int(doc["n_features"]),
    )
