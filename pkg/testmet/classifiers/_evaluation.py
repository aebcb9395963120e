from __future__ import annotations

import typing as t
from pathlib import Path

import joblib
import numpy as np
import pydantic
import rich.progress
from loguru import logger
from sklearn.metrics import (
    accuracy_score,
    confusion_matrix,
    precision_recall_fscore_support,
    roc_auc_score,
)
from sklearn.model_selection import StratifiedKFold

from testmet import utils
from testmet.classifiers._forest import train_random_forest
from testmet.classifiers._mlp import train_mlp
from testmet.classifiers._models import (
    ClassifierKind,
    ClassifierParams,
    FoldTrainingError,
    ForestParams,
    MlpParams,
    SingleClassInputError,
    TooFewPerClassError,
    TrainedModel,
    TreeParams,
    label_of,
)
from testmet.classifiers._tree import train_decision_tree
from testmet.exc import InputError, TrainingError
from testmet.models import EffectivenessLabel, TestmetModel

if t.TYPE_CHECKING:
    import collections.abc as c
    import os

    from testmet.models import FeatureMatrix

type Fold = tuple[np.ndarray[t.Any, t.Any], np.ndarray[t.Any, t.Any]]

DEFAULT_FOLDS = 10
AVERAGING: t.Final = "weighted"
AUC_MODE: t.Final = "pooled"

_PARAM_TYPES: dict[ClassifierKind, type[ClassifierParams]] = {
    ClassifierKind.DECISION_TREE: TreeParams,
    ClassifierKind.RANDOM_FOREST: ForestParams,
    ClassifierKind.MULTILAYER_PERCEPTRON: MlpParams,
}


def default_params(kind: ClassifierKind) -> ClassifierParams:
    return _PARAM_TYPES[kind]()


def train_model(
    matrix: FeatureMatrix,
    kind: ClassifierKind,
    params: ClassifierParams | None = None,
    *,
    seed: int,
    jobs: int = 1,
) -> TrainedModel:
    """Train one classifier of ``kind``.

    Raises:
        TypeError: ``params`` belong to another kind of classifier.
        SingleClassInputError: ``matrix`` has a single class.
        NonFiniteLossError: Network training diverged.
    """
    params = params or default_params(kind)
    if not isinstance(params, _PARAM_TYPES[kind]):
        raise TypeError(f"{type(params).__name__} cannot configure {kind}")
    match params:
        case TreeParams():
            return train_decision_tree(matrix, params, seed=seed)
        case ForestParams():
            return train_random_forest(matrix, params, seed=seed, jobs=jobs)
        case MlpParams():
            return train_mlp(matrix, params, seed=seed)


def _as_ints(
    labels: c.Iterable[EffectivenessLabel | int],
) -> np.ndarray[t.Any, t.Any]:
    return np.array(
        [
            label.as_int()
            if isinstance(label, EffectivenessLabel)
            else int(label)
            for label in labels
        ],
        dtype=np.int8,
    )


def stratified_kfold(
    matrix: FeatureMatrix, k: int = DEFAULT_FOLDS, *, seed: int
) -> list[Fold]:
    """Split row indices into ``k`` stratified, shuffled folds.

    Raises:
        TooFewPerClassError: A class has fewer than ``k`` rows.
    """
    counts = np.bincount(matrix.targets, minlength=2)
    if counts.min() < k:
        raise TooFewPerClassError(
            f"{k}-fold cross-validation needs {k} rows per class,"
            + f" got {counts[0]} non-effective and {counts[1]} effective"
        )
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return [
        (np.sort(train), np.sort(test))
        for train, test in splitter.split(matrix.rows, matrix.targets)
    ]


def auc(
    scores: c.Sequence[float], labels: c.Sequence[EffectivenessLabel | int]
) -> float:
    """Area under the ROC curve; tied scores count half a correct ranking.

    Raises:
        SingleClassInputError: ``labels`` hold a single class.
    """
    targets = _as_ints(labels)
    if len(np.unique(targets)) < 2:  # noqa: PLR2004 # binary task
        raise SingleClassInputError("labels")
    return float(roc_auc_score(targets, np.asarray(scores, dtype=np.float64)))


class ClassMeasures(TestmetModel, frozen=True):
    label: EffectivenessLabel
    precision: float
    recall: float
    f_measure: float
    support: int


class Confusion(TestmetModel, frozen=True):
    """Pooled out-of-fold counts; effective is the positive class."""

    true_negative: int
    false_positive: int
    false_negative: int
    true_positive: int

    @property
    def total(self) -> int:
        return (
            self.true_negative
            + self.false_positive
            + self.false_negative
            + self.true_positive
        )


class ClassifierReport(TestmetModel, frozen=True):
    kind: ClassifierKind
    params: dict[str, t.Any]
    accuracy: float
    precision: float
    recall: float
    f_measure: float
    auc: float
    per_class: tuple[ClassMeasures, ...]
    confusion: Confusion
    out_of_fold_scores: tuple[float, ...]
    """Score of every row, in matrix order, from the fold that held it out."""


class EvalReport(TestmetModel, frozen=True):
    classifiers: tuple[ClassifierReport, ...]
    folds: int
    seed: int
    rows: int
    averaging: t.Literal["weighted"] = AVERAGING
    auc_mode: t.Literal["pooled"] = AUC_MODE

    def __getitem__(self, kind: ClassifierKind) -> ClassifierReport:
        for report in self.classifiers:
            if report.kind is kind:
                return report
        raise KeyError(kind)


def _fold_scores(
    matrix: FeatureMatrix,
    kind: ClassifierKind,
    params: ClassifierParams,
    fold: Fold,
    seed: int,
) -> np.ndarray[t.Any, t.Any] | str:
    train, test = fold
    try:
        model = train_model(matrix.subset(train), kind, params, seed=seed)
    except TrainingError as e:
        return str(e)
    return model.scores(matrix.rows[test])


def _summarize(
    kind: ClassifierKind,
    params: ClassifierParams,
    targets: np.ndarray[t.Any, t.Any],
    scores: np.ndarray[t.Any, t.Any],
) -> ClassifierReport:
    predicted = np.array([label_of(s).as_int() for s in scores], dtype=np.int8)
    precision, recall, f_measure, _ = precision_recall_fscore_support(
        targets, predicted, average=AVERAGING, zero_division=0
    )
    per_precision, per_recall, per_f, per_support = (
        precision_recall_fscore_support(
            targets, predicted, labels=[0, 1], average=None, zero_division=0
        )
    )
    tn, fp, fn, tp = confusion_matrix(targets, predicted, labels=[0, 1]).ravel()
    return ClassifierReport(
        kind=kind,
        params=params.model_dump(mode="json"),
        accuracy=float(accuracy_score(targets, predicted)),
        precision=float(precision),
        recall=float(recall),
        f_measure=float(f_measure),
        auc=auc(scores.tolist(), targets.tolist()),
        per_class=tuple(
            ClassMeasures(
                label=EffectivenessLabel.from_int(value),
                precision=float(per_precision[value]),
                recall=float(per_recall[value]),
                f_measure=float(per_f[value]),
                support=int(per_support[value]),
            )
            for value in (0, 1)
        ),
        confusion=Confusion(
            true_negative=int(tn),
            false_positive=int(fp),
            false_negative=int(fn),
            true_positive=int(tp),
        ),
        out_of_fold_scores=tuple(float(s) for s in scores),
    )


def _cross_validate(
    matrix: FeatureMatrix,
    kind: ClassifierKind,
    params: ClassifierParams,
    folds: c.Sequence[Fold],
    *,
    seed: int,
    jobs: int,
) -> ClassifierReport:
    pooled = np.full(len(matrix), np.nan)
    fold_seeds = utils.derive_seeds(seed, len(folds))
    with rich.progress.Progress(
        *utils.get_formatted_progress_bar(),
        console=utils.console,
        transient=True,
    ) as progress:
        task_id = progress.add_task(f"Evaluating {kind}", total=len(folds))
        results = joblib.Parallel(n_jobs=jobs, return_as="generator")(
            joblib.delayed(_fold_scores)(matrix, kind, params, fold, fold_seed)
            for fold, fold_seed in zip(folds, fold_seeds, strict=True)
        )
        for number, (result, (_, test)) in enumerate(
            zip(results, folds, strict=True), start=1
        ):
            if isinstance(result, str):
                raise FoldTrainingError(number, TrainingError(result))
            pooled[test] = result
            progress.advance(task_id)

    report = _summarize(kind, params, np.asarray(matrix.targets), pooled)
    logger.info(
        f"{kind}: accuracy {report.accuracy:.3f},"
        + f" F-measure {report.f_measure:.3f}, AUC {report.auc:.3f}"
    )
    return report


def evaluate_all(
    matrix: FeatureMatrix,
    classifiers: c.Mapping[ClassifierKind, ClassifierParams | None],
    *,
    k: int = DEFAULT_FOLDS,
    seed: int,
    jobs: int = 1,
) -> EvalReport:
    """Stratified ``k``-fold cross-validation of several classifiers.

    All classifiers see the same folds. Fold models train on sub-seeds
    derived from ``seed``; out-of-fold scores are pooled before measuring.

    Raises:
        TooFewPerClassError: A class has fewer than ``k`` rows.
        FoldTrainingError: Training failed on some fold.
    """
    folds = stratified_kfold(matrix, k, seed=seed)
    logger.info(
        f"Cross-validating {len(classifiers)} classifier(s) over {k} folds"
        + f" of {len(matrix)} row(s)"
    )
    reports = [
        _cross_validate(
            matrix,
            kind,
            params or default_params(kind),
            folds,
            seed=seed,
            jobs=jobs,
        )
        for kind, params in classifiers.items()
    ]
    return EvalReport(
        classifiers=tuple(reports), folds=k, seed=seed, rows=len(matrix)
    )


def evaluate(
    matrix: FeatureMatrix,
    kind: ClassifierKind,
    params: ClassifierParams | None = None,
    *,
    k: int = DEFAULT_FOLDS,
    seed: int,
    jobs: int = 1,
) -> EvalReport:
    """Cross-validate a single classifier; see :func:`evaluate_all`."""
    return evaluate_all(matrix, {kind: params}, k=k, seed=seed, jobs=jobs)


def save_model(model: TrainedModel, path: os.PathLike[str]) -> None:
    with utils.atomic_write(path) as f:
        _ = f.write(model.model_dump_json(indent=2))
        _ = f.write("\n")


def load_model(path: os.PathLike[str]) -> TrainedModel:
    """Read a model written by :func:`save_model`.

    Raises:
        InputError: The file is unreadable or not a trained model.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
        return TrainedModel.model_validate_json(text)
    except (OSError, UnicodeDecodeError, pydantic.ValidationError) as e:
        raise InputError(f"cannot load model from {path}: {e}") from e
