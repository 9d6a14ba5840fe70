"""Classifiers, evaluation harness and the experiment grid."""

from .boost import train_boosted
from .harness import (
    DEFAULT_HYPERPARAMETERS,
    DEFAULT_RATIOS,
    Grid,
    Metrics,
    Split,
    evaluate,
    parse_ratio,
    run_grid,
    split_dataset,
    train_model,
)
from .linear import logistic_loss_grad, mlp_loss_grad, train_logistic, train_mlp
from .model import (
    BOOSTED_TREE,
    DECISION_TREE,
    KINDS,
    LOGISTIC,
    NEURAL_NET,
    RANDOM_FOREST,
    Prediction,
    TriageModel,
    predict,
    predict_labels,
    predict_proba,
)
from .tree import train_decision_tree, train_random_forest
