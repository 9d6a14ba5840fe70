"""Multiclass gradient boosting with softmax log-loss."""

import numpy as np

from ..errors import EmptyDataset
from .model import BOOSTED_TREE, TriageModel, softmax, tree_leaves
from .tree import grow_newton_tree, one_hot


def log_loss(P, Y):
    return float(-np.log(np.clip((P * Y).sum(axis=1), 1e-300, None)).mean())


def train_boosted(
    train,
    n_rounds=100,
    learning_rate=0.1,
    max_depth=3,
    seed=0,
    reg_lambda=1.0,
    history=None,
):
    """
    Each round fits one regression tree per class to the log-loss gradient
    ``p_k - y_k`` with hessian ``p_k (1 - p_k)``; leaf values are Newton
    steps ``-G / (H + reg_lambda)`` scaled by ``learning_rate``.

    Scores start at zero (uniform prediction).  If ``history`` is a list,
    the training log-loss after every round is appended to it.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    if not 0 < learning_rate <= 1:
        raise ValueError("learning_rate must be in (0, 1]")
    if len(train) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    X = train.X
    Y = one_hot(train).astype(np.float64)
    n, K = Y.shape
    S = np.zeros((n, K))
    rounds = []
    for _ in range(n_rounds):
        P = softmax(S)
        G = P - Y
        H = P * (1.0 - P)
        trees = [grow_newton_tree(X, G[:, k], H[:, k], max_depth, reg_lambda) for k in range(K)]
        for k, tree in enumerate(trees):
            S[:, k] += learning_rate * tree_leaves(X, tree, 0)
        rounds.append(trees)
        if history is not None:
            history.append(log_loss(softmax(S), Y))
    return TriageModel(
        kind=BOOSTED_TREE,
        classes=tuple(train.classes),
        hyperparameters={
            "n_rounds": n_rounds,
            "learning_rate": learning_rate,
            "max_depth": max_depth,
            "reg_lambda": reg_lambda,
            "seed": int(seed),
            "class_set": train.class_set.value,
        },
        parameters={
            "learning_rate": learning_rate,
            "base_score": [0.0] * K,
            "rounds": rounds,
        },
        n_features=train.n_features,
    )
