"""
Softmax regression and a one-hidden-layer sigmoid network, both trained by
full-batch gradient descent on mean cross-entropy.

The ``*_loss_grad`` functions take a dict of parameter arrays and return
``(loss, grads)`` with grads keyed like the parameters; they are what the
trainers step on and what gradient checks probe.
"""

import numpy as np

from ..errors import EmptyDataset
from ..rng import SplitMix64
from .model import LOGISTIC, NEURAL_NET, TriageModel, sigmoid, softmax
from .tree import one_hot


def _xent(P, Y):
    return float(-np.log(np.clip((P * Y).sum(axis=1), 1e-300, None)).mean())


def logistic_loss_grad(params, X, Y, l2=0.0):
    W, b = params["weights"], params["bias"]
    n = len(X)
    P = softmax(X @ W.T + b)
    loss = _xent(P, Y) + 0.5 * l2 * float((W * W).sum())
    D = (P - Y) / n
    return loss, {"weights": D.T @ X + l2 * W, "bias": D.sum(axis=0)}


def mlp_loss_grad(params, X, Y):
    W1, b1, W2, b2 = params["W1"], params["b1"], params["W2"], params["b2"]
    n = len(X)
    Hd = sigmoid(X @ W1.T + b1)
    P = softmax(Hd @ W2.T + b2)
    loss = _xent(P, Y)
    dS = (P - Y) / n
    dA = (dS @ W2) * Hd * (1.0 - Hd)
    return loss, {"W1": dA.T @ X, "b1": dA.sum(axis=0), "W2": dS.T @ Hd, "b2": dS.sum(axis=0)}


def _descend(loss_grad, params, epochs, step_size, history):
    for _ in range(epochs):
        loss, grads = loss_grad(params)
        if history is not None:
            history.append(loss)
        for key, g in grads.items():
            params[key] = params[key] - step_size * g
    return params


def _arrays(train):
    if len(train) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    return train.X.astype(np.float64), one_hot(train).astype(np.float64)


def train_logistic(train, epochs=500, step_size=0.5, l2=1e-4, seed=0, history=None):
    """Multinomial logistic regression from zero weights; ``seed`` is recorded only."""
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    X, Y = _arrays(train)
    K, d = Y.shape[1], X.shape[1]
    params = {"weights": np.zeros((K, d)), "bias": np.zeros(K)}
    params = _descend(lambda p: logistic_loss_grad(p, X, Y, l2), params, epochs, step_size, history)
    return TriageModel(
        kind=LOGISTIC,
        classes=tuple(train.classes),
        hyperparameters={
            "epochs": epochs,
            "step_size": step_size,
            "l2": l2,
            "seed": int(seed),
            "class_set": train.class_set.value,
        },
        parameters={k: v.tolist() for k, v in params.items()},
        n_features=d,
    )


def init_mlp(d, hidden, K, seed):
    """Weights and biases uniform in [-0.5, 0.5) drawn in W1, b1, W2, b2 order."""
    rng = SplitMix64(seed)
    shapes = {"W1": (hidden, d), "b1": (hidden,), "W2": (K, hidden), "b2": (K,)}
    return {k: rng.uniform(int(np.prod(s))).reshape(s) - 0.5 for k, s in shapes.items()}


def train_mlp(train, hidden=16, epochs=2000, step_size=0.5, seed=0, history=None):
    """47 -> hidden (sigmoid) -> classes (softmax) network."""
    if hidden < 1:
        raise ValueError("hidden must be >= 1")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    X, Y = _arrays(train)
    params = init_mlp(X.shape[1], hidden, Y.shape[1], seed)
    params = _descend(lambda p: mlp_loss_grad(p, X, Y), params, epochs, step_size, history)
    return TriageModel(
        kind=NEURAL_NET,
        classes=tuple(train.classes),
        hyperparameters={
            "hidden": hidden,
            "epochs": epochs,
            "step_size": step_size,
            "seed": int(seed),
            "class_set": train.class_set.value,
        },
        parameters={k: v.tolist() for k, v in params.items()},
        n_features=X.shape[1],
    )
