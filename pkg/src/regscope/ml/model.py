"""
Trained model container, prediction and the JSON model file.

Model file::

    {"version": 1, "kind": ..., "classes": [codes...],
     "hyperparameters": {...}, "parameters": {...}}

Trees are nested ``{"feature": i, "left": node, "right": node}`` objects
with ``{"leaf": [p_0, ..., p_K-1]}`` leaves; ``left`` is the branch where
the feature bit is 0.  Boosting trees carry a raw score in ``{"value": v}``.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..dataset import Class
from ..errors import DimensionMismatch

MODEL_VERSION = 1

LOGISTIC = "logistic"
NEURAL_NET = "neural_net"
DECISION_TREE = "decision_tree"
RANDOM_FOREST = "random_forest"
BOOSTED_TREE = "boosted_tree"
KINDS = (LOGISTIC, NEURAL_NET, DECISION_TREE, RANDOM_FOREST, BOOSTED_TREE)


@dataclass
class TriageModel:
    kind: str
    classes: tuple
    hyperparameters: dict
    parameters: dict
    n_features: int = 47
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self):
        return {
            "version": MODEL_VERSION,
            "kind": self.kind,
            "classes": [int(c) for c in self.classes],
            "n_features": self.n_features,
            "hyperparameters": self.hyperparameters,
            "parameters": self.parameters,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc):
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')!r}")
        if doc.get("kind") not in KINDS:
            raise ValueError(f"unknown model kind {doc.get('kind')!r}")
        return cls(
            kind=doc["kind"],
            classes=tuple(Class(int(c)) for c in doc["classes"]),
            hyperparameters=doc.get("hyperparameters", {}),
            parameters=doc["parameters"],
            n_features=int(doc.get("n_features", 47)),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @property
    def model_id(self):
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()[:12]

    def array(self, key):
        """Parameter ``key`` as a cached float64 array."""
        if key not in self._cache:
            self._cache[key] = np.asarray(self.parameters[key], dtype=np.float64)
        return self._cache[key]


def tree_apply(node, X, idx, out):
    """Write each row's leaf payload (``leaf`` list or ``value``) into ``out``."""
    if "feature" not in node:
        out[idx] = node["leaf"] if "leaf" in node else node["value"]
        return
    mask = X[idx, node["feature"]]
    if (~mask).any():
        tree_apply(node["left"], X, idx[~mask], out)
    if mask.any():
        tree_apply(node["right"], X, idx[mask], out)


def tree_leaves(X, node, width):
    out = np.zeros((len(X), width)) if width else np.zeros(len(X))
    tree_apply(node, X, np.arange(len(X)), out)
    return out


def softmax(S):
    S = S - S.max(axis=1, keepdims=True)
    E = np.exp(S)
    return E / E.sum(axis=1, keepdims=True)


def sigmoid(A):
    return 0.5 * (1.0 + np.tanh(0.5 * A))


def predict_proba(model, X):
    """Class-probability matrix (n x K), columns in ``model.classes`` order."""
    X = np.asarray(X, dtype=bool)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {X.shape[1]}")
    K = len(model.classes)
    p = model.parameters
    if model.kind == LOGISTIC:
        return softmax(X @ model.array("weights").T + model.array("bias"))
    if model.kind == NEURAL_NET:
        H = sigmoid(X @ model.array("W1").T + model.array("b1"))
        return softmax(H @ model.array("W2").T + model.array("b2"))
    if model.kind == DECISION_TREE:
        return tree_leaves(X, p["tree"], K)
    if model.kind == RANDOM_FOREST:
        votes = np.zeros((len(X), K))
        rows = np.arange(len(X))
        for tree in p["trees"]:
            votes[rows, tree_leaves(X, tree, K).argmax(axis=1)] += 1.0
        return votes / len(p["trees"])
    if model.kind == BOOSTED_TREE:
        S = np.tile(np.asarray(p["base_score"], dtype=np.float64), (len(X), 1))
        lr = p["learning_rate"]
        for round_trees in p["rounds"]:
            for k, tree in enumerate(round_trees):
                S[:, k] += lr * tree_leaves(X, tree, 0)
        return softmax(S)
    raise ValueError(f"unknown model kind {model.kind!r}")


@dataclass(frozen=True)
class Prediction:
    label: Class
    probabilities: dict  # Class -> probability, in class order

    def to_dict(self):
        return {
            "label": int(self.label),
            "class": self.label.name.lower(),
            "probabilities": {c.name.lower(): p for c, p in self.probabilities.items()},
        }


def predict_labels(model, X):
    P = predict_proba(model, X)
    codes = np.array([int(c) for c in model.classes])
    # argmax keeps the first maximum, i.e. the earliest class in class order.
    return codes[P.argmax(axis=1)], P


def predict(model, features):
    """Predict one feature vector; ties go to the earliest class."""
    bits = features.bits if hasattr(features, "bits") else features
    P = predict_proba(model, np.asarray(bits, dtype=bool))[0]
    k = int(P.argmax())
    return Prediction(model.classes[k], {c: float(P[i]) for i, c in enumerate(model.classes)})
