"""Train/test splitting, metrics and the ratio x classifier experiment grid."""

import io
import csv
import json
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDataset
from ..rng import SplitMix64, derive_seed
from .boost import train_boosted
from .linear import train_logistic, train_mlp
from .model import (
    BOOSTED_TREE,
    DECISION_TREE,
    KINDS,
    LOGISTIC,
    NEURAL_NET,
    RANDOM_FOREST,
    predict_labels,
)
from .tree import train_decision_tree, train_random_forest

DEFAULT_RATIOS = ((80, 20), (70, 30), (60, 40), (50, 50))

DEFAULT_HYPERPARAMETERS = {
    DECISION_TREE: {"max_depth": 6, "min_leaf": 1},
    RANDOM_FOREST: {"n_trees": 100, "max_depth": 6, "min_leaf": 1, "feature_frac": 0.33},
    BOOSTED_TREE: {"n_rounds": 100, "learning_rate": 0.1, "max_depth": 3},
    LOGISTIC: {"epochs": 500, "step_size": 0.5, "l2": 1e-4},
    NEURAL_NET: {"hidden": 16, "epochs": 2000, "step_size": 0.5},
}

TRAINERS = {
    LOGISTIC: train_logistic,
    NEURAL_NET: train_mlp,
    DECISION_TREE: train_decision_tree,
    RANDOM_FOREST: train_random_forest,
    BOOSTED_TREE: train_boosted,
}


def parse_ratio(text):
    """``"80/20"`` -> ``(80, 20)``."""
    if isinstance(text, (tuple, list)):
        a, b = text
    else:
        a, _, b = str(text).partition("/")
    a, b = int(a), int(b)
    if a <= 0 or b <= 0:
        raise ValueError(f"ratio parts must be positive: {text!r}")
    return a, b


def format_ratio(ratio):
    return f"{ratio[0]}/{ratio[1]}"


def _round_half_up(num, den):
    return (2 * num + den) // (2 * den)


@dataclass
class Split:
    train: object
    test: object
    ratio: tuple
    seed: int
    train_index: np.ndarray
    test_index: np.ndarray


def split_dataset(d, ratio=(80, 20), seed=0, stratified=False):
    """
    Shuffle under ``seed`` and cut into train/test at ``ratio``.

    The train size is ``round(n * a / (a + b))``.  When stratified, each
    class gets the floor of its proportional share and the leftover train
    slots go to the largest fractional remainders (ties in class order),
    which keeps the total exact.
    """
    if len(d) == 0:
        raise EmptyDataset("cannot split an empty dataset")
    a, b = parse_ratio(ratio)
    n = len(d)
    n_train = _round_half_up(n * a, a + b)
    rng = SplitMix64(derive_seed(seed, 0))
    if not stratified:
        perm = rng.permutation(n)
        tr, te = perm[:n_train], perm[n_train:]
    else:
        codes = [int(c) for c in d.classes]
        groups = [np.flatnonzero(d.y == c) for c in codes]
        exact = [len(g) * a / (a + b) for g in groups]
        quota = [(len(g) * a) // (a + b) for g in groups]
        leftover = n_train - sum(quota)
        order = sorted(range(len(groups)), key=lambda i: (-(exact[i] - quota[i]), i))
        for i in order[:leftover]:
            quota[i] += 1
        tr, te = [], []
        for g, q in zip(groups, quota):
            g = g[rng.permutation(len(g))]
            tr.append(g[:q])
            te.append(g[q:])
        tr, te = np.concatenate(tr), np.concatenate(te)
    tr, te = np.sort(tr), np.sort(te)
    return Split(d.subset(tr), d.subset(te), (a, b), int(seed), tr, te)


@dataclass
class Metrics:
    accuracy: float
    confusion: np.ndarray  # rows true class, columns predicted, in class order
    n_test: int
    classes: tuple

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "n_test": self.n_test,
            "classes": [int(c) for c in self.classes],
            "confusion": self.confusion.tolist(),
        }


def confusion_matrix(true_codes, pred_codes, classes):
    lookup = {int(c): i for i, c in enumerate(classes)}
    C = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true_codes, pred_codes):
        C[lookup[int(t)], lookup[int(p)]] += 1
    return C


def evaluate(model, test):
    """Accuracy and confusion matrix of ``model`` on ``test``."""
    if len(test) == 0:
        raise EmptyDataset("cannot evaluate on an empty dataset")
    pred, _ = predict_labels(model, test.X)
    C = confusion_matrix(test.y, pred, model.classes)
    return Metrics(float(np.trace(C)) / len(test), C, len(test), tuple(model.classes))


def train_model(kind, train, seed=0, **overrides):
    params = dict(DEFAULT_HYPERPARAMETERS[kind])
    params.update({k: v for k, v in overrides.items() if v is not None})
    return TRAINERS[kind](train, seed=seed, **params)


@dataclass
class GridCell:
    ratio: tuple
    kind: str
    metrics: Metrics


class Grid:
    def __init__(self, cells, seed):
        self.cells = cells
        self.seed = seed

    def accuracy(self, ratio, kind):
        ratio = parse_ratio(ratio)
        for c in self.cells:
            if c.ratio == ratio and c.kind == kind:
                return c.metrics.accuracy
        raise KeyError((ratio, kind))

    def table(self):
        """Rows per ratio, columns in classifier order."""
        ratios = list(dict.fromkeys(c.ratio for c in self.cells))
        return [[self.accuracy(r, k) for k in KINDS] for r in ratios]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ratio", "classifier", "accuracy"])
        for c in self.cells:
            w.writerow([format_ratio(c.ratio), c.kind, f"{c.metrics.accuracy:.6f}"])
        return buf.getvalue()

    def confusion_json(self):
        doc = {}
        for c in self.cells:
            doc.setdefault(format_ratio(c.ratio), {})[c.kind] = c.metrics.to_dict()
        return json.dumps(doc, indent=2) + "\n"


def run_grid(d, ratios=DEFAULT_RATIOS, seed=0, stratified=True, hyperparameters=None, kinds=KINDS):
    """Train and score every classifier at every ratio, same seed throughout."""
    if not ratios:
        raise ValueError("at least one ratio is required")
    hyperparameters = hyperparameters or {}
    cells = []
    for ratio in ratios:
        split = split_dataset(d, ratio, seed, stratified)
        for kind in kinds:
            model = train_model(kind, split.train, seed, **hyperparameters.get(kind, {}))
            cells.append(GridCell(split.ratio, kind, evaluate(model, split.test)))
    return Grid(cells, seed)
