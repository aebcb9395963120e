from ._evaluation import (
    AUC_MODE,
    AVERAGING,
    DEFAULT_FOLDS,
    ClassifierReport,
    ClassMeasures,
    Confusion,
    EvalReport,
    auc,
    default_params,
    evaluate,
    evaluate_all,
    load_model,
    save_model,
    stratified_kfold,
    train_model,
)
from ._forest import train_random_forest
from ._mlp import loss_and_gradients, standardize, train_mlp
from ._models import (
    ClassifierKind,
    ClassifierParams,
    DimensionMismatchError,
    FeatureMismatchError,
    FoldTrainingError,
    ForestParams,
    ForestStructure,
    MlpParams,
    NetworkStructure,
    NonFiniteLossError,
    SingleClassInputError,
    TooFewPerClassError,
    TrainedModel,
    TreeParams,
    TreeStructure,
    label_of,
    predict,
)
from ._tree import best_split, grow_tree, train_decision_tree

__all__ = [
    "AUC_MODE",
    "AVERAGING",
    "DEFAULT_FOLDS",
    "ClassMeasures",
    "ClassifierKind",
    "ClassifierParams",
    "ClassifierReport",
    "Confusion",
    "DimensionMismatchError",
    "EvalReport",
    "FeatureMismatchError",
    "FoldTrainingError",
    "ForestParams",
    "ForestStructure",
    "MlpParams",
    "NetworkStructure",
    "NonFiniteLossError",
    "SingleClassInputError",
    "TooFewPerClassError",
    "TrainedModel",
    "TreeParams",
    "TreeStructure",
    "auc",
    "best_split",
    "default_params",
    "evaluate",
    "evaluate_all",
    "grow_tree",
    "label_of",
    "load_model",
    "loss_and_gradients",
    "predict",
    "save_model",
    "standardize",
    "stratified_kfold",
    "train_decision_tree",
    "train_mlp",
    "train_model",
    "train_random_forest",
]
