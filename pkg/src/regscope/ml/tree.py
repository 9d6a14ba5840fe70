"""
Greedy binary trees on boolean features: Gini classification trees, the
random forest built from them, and the second-order regression trees used
by boosting.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import EmptyDataset
from ..rng import SplitMix64, derive_seed
from .model import DECISION_TREE, RANDOM_FOREST, TriageModel

TIE_TOL = 1e-12


def gini(counts):
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    return 0.0 if n == 0 else 1.0 - float(((counts / n) ** 2).sum())


def gini_gains(X, Y, features, min_leaf=1):
    """
    Gini impurity reduction of splitting on each feature in ``features``.

    ``Y`` is an (m, K) integer count matrix (one-hot rows).  Splits leaving
    fewer than ``min_leaf`` rows on a side get ``-inf``.
    """
    m = len(Y)
    # Integer matmul: exact and independent of BLAS threading.
    right = (X[:, features].T.astype(np.int64) @ Y).astype(np.float64)
    total = Y.sum(axis=0).astype(np.float64)
    left = total - right
    n_r = right.sum(axis=1)
    n_l = m - n_r
    with np.errstate(divide="ignore", invalid="ignore"):
        imp_l = np.where(n_l > 0, n_l - (left**2).sum(axis=1) / n_l, 0.0)
        imp_r = np.where(n_r > 0, n_r - (right**2).sum(axis=1) / n_r, 0.0)
    parent = m - float((total**2).sum()) / m
    gains = (parent - imp_l - imp_r) / m
    lo = max(min_leaf, 1)
    return np.where((n_l >= lo) & (n_r >= lo), gains, -np.inf)


def _pick(gains, features):
    """Highest gain; within TIE_TOL the lowest feature index wins."""
    best = gains.max()
    if not np.isfinite(best):
        return None
    for g, f in sorted(zip(gains, features), key=lambda t: t[1]):
        if g >= best - TIE_TOL:
            return int(f)
    return None


def grow_gini_tree(X, Y, max_depth, min_leaf=1, choose_features=None):
    """
    Build a classification tree as nested dicts.

    ``Y`` holds one-hot integer rows; leaves store class frequencies.
    ``choose_features`` (called once per internal-node candidate, in
    depth-first order) returns the sorted feature subset to search.
    """
    d = X.shape[1]

    def build(rows, depth):
        counts = Y[rows].sum(axis=0)
        n = len(rows)
        if depth >= max_depth or np.count_nonzero(counts) <= 1 or n < 2 * max(min_leaf, 1):
            return {"leaf": (counts / n).tolist()}
        feats = choose_features() if choose_features else np.arange(d)
        f = _pick(gini_gains(X[rows], Y[rows], feats, min_leaf), feats)
        if f is None:
            return {"leaf": (counts / n).tolist()}
        mask = X[rows, f]
        return {
            "feature": f,
            "left": build(rows[~mask], depth + 1),
            "right": build(rows[mask], depth + 1),
        }

    return build(np.arange(len(Y)), 0)


def newton_gains(X, g, h, lam, features):
    G, H = g.sum(), h.sum()
    Xs = X[:, features]
    # Masked column sums along axis 0 have a fixed summation order.
    G_r = np.where(Xs, g[:, None], 0.0).sum(axis=0)
    H_r = np.where(Xs, h[:, None], 0.0).sum(axis=0)
    n_r = Xs.sum(axis=0)
    G_l, H_l = G - G_r, H - H_r
    gains = G_l**2 / (H_l + lam) + G_r**2 / (H_r + lam) - G**2 / (H + lam)
    return np.where((n_r > 0) & (n_r < len(g)), gains, -np.inf)


def grow_newton_tree(X, g, h, max_depth, lam=1.0):
    """
    Regression tree on gradient ``g`` / hessian ``h``: splits maximise the
    second-order gain, leaves hold ``-G / (H + lam)``.
    """
    feats = np.arange(X.shape[1])

    def build(rows, depth):
        gr, hr = g[rows], h[rows]
        leaf = {"value": float(-gr.sum() / (hr.sum() + lam))}
        if depth >= max_depth or len(rows) < 2:
            return leaf
        gains = newton_gains(X[rows], gr, hr, lam, feats)
        f = _pick(gains, feats)
        if f is None or gains[f] <= TIE_TOL:
            return leaf
        mask = X[rows, f]
        return {
            "feature": f,
            "left": build(rows[~mask], depth + 1),
            "right": build(rows[mask], depth + 1),
        }

    return build(np.arange(len(g)), 0)


def one_hot(train):
    idx = train.class_index()
    Y = np.zeros((len(idx), len(train.classes)), dtype=np.int64)
    Y[np.arange(len(idx)), idx] = 1
    return Y


def train_decision_tree(train, max_depth=6, min_leaf=1, seed=0):
    """
    CART on boolean features with Gini gain; ties go to the lowest feature
    index.  Growth stops at ``max_depth``, at pure nodes, or when no split
    leaves ``min_leaf`` samples per side.  ``seed`` is recorded only.
    """
    if len(train) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    tree = grow_gini_tree(train.X, one_hot(train), max_depth, min_leaf)
    return TriageModel(
        kind=DECISION_TREE,
        classes=tuple(train.classes),
        hyperparameters={
            "max_depth": max_depth,
            "min_leaf": min_leaf,
            "seed": int(seed),
            "class_set": train.class_set.value,
        },
        parameters={"tree": tree},
        n_features=train.n_features,
    )


def _forest_member(X, Y, tree_seed, max_depth, min_leaf, k, bootstrap):
    rng = SplitMix64(tree_seed)
    n, d = X.shape
    rows = rng.integers(n, n) if bootstrap else np.arange(n)
    if k >= d:
        chooser = None
    else:
        def chooser():
            return np.sort(rng.permutation(d)[:k])
    return grow_gini_tree(X[rows], Y[rows], max_depth, min_leaf, chooser)


def train_random_forest(
    train,
    n_trees=100,
    max_depth=6,
    min_leaf=1,
    feature_frac=0.33,
    seed=0,
    bootstrap=True,
    n_jobs=1,
):
    """
    Bagged Gini trees with ``ceil(feature_frac * d)`` candidate features per
    split.  Tree ``t`` draws from the stream seeded ``derive_seed(seed, t)``;
    seeds are fixed before any parallel dispatch and trees are collected in
    index order, so ``n_jobs`` never changes the result.
    """
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if not 0 < feature_frac <= 1:
        raise ValueError("feature_frac must be in (0, 1]")
    if len(train) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    X, Y = train.X, one_hot(train)
    k = math.ceil(feature_frac * train.n_features)
    seeds = [derive_seed(seed, t) for t in range(n_trees)]

    def fit(s):
        return _forest_member(X, Y, s, max_depth, min_leaf, k, bootstrap)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(fit, seeds))
    else:
        trees = [fit(s) for s in seeds]
    return TriageModel(
        kind=RANDOM_FOREST,
        classes=tuple(train.classes),
        hyperparameters={
            "n_trees": n_trees,
            "max_depth": max_depth,
            "min_leaf": min_leaf,
            "feature_frac": feature_frac,
            "bootstrap": bootstrap,
            "seed": int(seed),
            "class_set": train.class_set.value,
        },
        parameters={"trees": trees},
        n_features=train.n_features,
    )
