from __future__ import annotations

import enum
import functools
import math
import typing as t

import numpy as np
import pydantic
from scipy.special import expit, softmax

from testmet.exc import PredictionSchemaError, TrainingError
from testmet.models import EffectivenessLabel, MetricId, TestmetModel

if t.TYPE_CHECKING:
    import collections.abc as c

type FloatArray = np.ndarray[t.Any, np.dtype[np.float64]]


class ClassifierKind(enum.StrEnum):
    DECISION_TREE = "DecisionTree"
    RANDOM_FOREST = "RandomForest"
    MULTILAYER_PERCEPTRON = "MultilayerPerceptron"


class SingleClassInputError(TrainingError):
    def __init__(self, what: str = "training data") -> None:
        super().__init__(f"{what} contains only one class")


class NonFiniteLossError(TrainingError):
    def __init__(self, epoch: int) -> None:
        super().__init__(f"loss became non-finite in epoch {epoch}")
        self.epoch = epoch


class TooFewPerClassError(TrainingError): ...


class FoldTrainingError(TrainingError):
    def __init__(self, fold: int, cause: Exception) -> None:
        super().__init__(f"fold {fold}: {cause}")
        self.fold = fold


class DimensionMismatchError(PredictionSchemaError):
    def __init__(self, expected: int, got: int) -> None:
        super().__init__(f"expected {expected} feature value(s), got {got}")


class FeatureMismatchError(PredictionSchemaError):
    def __init__(self, missing: c.Iterable[str]) -> None:
        self.missing = tuple(missing)
        super().__init__(
            f"input lacks model feature(s): {', '.join(self.missing)}"
        )


class TreeParams(TestmetModel, frozen=True):
    min_leaf: t.Annotated[int, pydantic.Field(ge=1)] = 2
    max_depth: t.Annotated[int, pydantic.Field(ge=0)] | None = None
    """``None`` grows until purity or ``min_leaf``."""


class ForestParams(TestmetModel, frozen=True):
    trees: t.Annotated[int, pydantic.Field(ge=1)] = 100
    features_per_split: t.Annotated[int, pydantic.Field(ge=1)] | None = None
    """``None`` means ``ceil(sqrt(d))``."""
    min_leaf: t.Annotated[int, pydantic.Field(ge=1)] = 1
    max_depth: t.Annotated[int, pydantic.Field(ge=0)] | None = None
    bootstrap: bool = True

    def split_features(self, dimensions: int) -> int:
        wanted = self.features_per_split or math.ceil(math.sqrt(dimensions))
        return max(1, min(dimensions, wanted))


class MlpParams(TestmetModel, frozen=True):
    hidden: t.Annotated[int, pydantic.Field(ge=1)] | None = None
    """``None`` means ``ceil((d + 2) / 2)``."""
    learning_rate: t.Annotated[float, pydantic.Field(gt=0)] = 0.3
    momentum: t.Annotated[float, pydantic.Field(ge=0, lt=1)] = 0.2
    epochs: t.Annotated[int, pydantic.Field(ge=0)] = 500
    batch_size: t.Annotated[int, pydantic.Field(ge=0)] = 32
    """``0`` trains on the full training split per step."""

    def hidden_units(self, dimensions: int) -> int:
        return self.hidden or math.ceil((dimensions + 2) / 2)


type ClassifierParams = TreeParams | ForestParams | MlpParams


class TreeStructure(TestmetModel, frozen=True):
    """Nodes in preorder; node 0 is the root.

    Leaves have ``feature == -1``; ``distribution`` holds the training
    counts of (non-effective, effective) rows that reached each node.
    """

    kind: t.Literal["DecisionTree"] = "DecisionTree"
    feature: tuple[int, ...]
    threshold: tuple[float, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    distribution: tuple[tuple[float, float], ...]

    @functools.cached_property
    def _arrays(self) -> tuple[np.ndarray[t.Any, t.Any], ...]:
        counts = np.asarray(self.distribution, dtype=np.float64).reshape(-1, 2)
        totals = counts.sum(axis=1)
        return (
            np.asarray(self.feature, dtype=np.intp),
            np.asarray(self.threshold, dtype=np.float64),
            np.asarray(self.left, dtype=np.intp),
            np.asarray(self.right, dtype=np.intp),
            np.divide(
                counts[:, 1],
                totals,
                out=np.zeros_like(totals),
                where=totals > 0,
            ),
        )

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depths = [0] * self.node_count
        for node, feature in enumerate(self.feature):
            if feature >= 0:
                child_depth = depths[node] + 1
                depths[self.left[node]] = depths[self.right[node]] = child_depth
        return max(depths)

    def scores(self, rows: FloatArray) -> FloatArray:
        """Probability of effective: the effective share of the reached leaf."""
        feature, threshold, left, right, leaf_score = self._arrays
        node = np.zeros(rows.shape[0], dtype=np.intp)
        active = feature[node] >= 0
        while active.any():
            current = node[active]
            goes_left = rows[active, feature[current]] <= threshold[current]
            node[active] = np.where(goes_left, left[current], right[current])
            active = feature[node] >= 0
        return leaf_score[node]


class ForestStructure(TestmetModel, frozen=True):
    kind: t.Literal["RandomForest"] = "RandomForest"
    trees: tuple[TreeStructure, ...]
    features_per_split: int
    bootstrap: bool

    def scores(self, rows: FloatArray) -> FloatArray:
        """Fraction of trees voting effective."""
        votes = np.zeros(rows.shape[0], dtype=np.float64)
        for tree in self.trees:
            votes += tree.scores(rows) >= 0.5  # noqa: PLR2004 # majority threshold
        return votes / len(self.trees)


class NetworkStructure(TestmetModel, frozen=True):
    """One sigmoid hidden layer feeding a two-unit softmax output."""

    kind: t.Literal["MultilayerPerceptron"] = "MultilayerPerceptron"
    mean: tuple[float, ...]
    scale: tuple[float, ...]
    hidden_weights: tuple[tuple[float, ...], ...]
    """``inputs x hidden``."""
    hidden_bias: tuple[float, ...]
    output_weights: tuple[tuple[float, ...], ...]
    """``hidden x 2``; column 1 is effective."""
    output_bias: tuple[float, float]

    @functools.cached_property
    def _arrays(self) -> tuple[FloatArray, ...]:
        inputs = len(self.mean)
        return (
            np.asarray(self.mean, dtype=np.float64),
            np.asarray(self.scale, dtype=np.float64),
            np.asarray(self.hidden_weights, dtype=np.float64).reshape(
                inputs, -1
            ),
            np.asarray(self.hidden_bias, dtype=np.float64),
            np.asarray(self.output_weights, dtype=np.float64).reshape(-1, 2),
            np.asarray(self.output_bias, dtype=np.float64),
        )

    def scores(self, rows: FloatArray) -> FloatArray:
        mean, scale, w1, b1, w2, b2 = self._arrays
        hidden = expit(((rows - mean) / scale) @ w1 + b1)
        return softmax(hidden @ w2 + b2, axis=1)[:, 1]


type Structure = t.Annotated[
    TreeStructure | ForestStructure | NetworkStructure,
    pydantic.Field(discriminator="kind"),
]


class TrainedModel(TestmetModel, frozen=True):
    """A trained classifier, self-describing when serialized."""

    feature_ids: tuple[MetricId, ...]
    seed: int
    params: dict[str, t.Any]
    """Hyperparameters the model was trained with."""
    structure: Structure

    @property
    def kind(self) -> ClassifierKind:
        return ClassifierKind(self.structure.kind)

    def scores(self, rows: t.Any) -> FloatArray:
        """Probability of effective for each row of ``rows``.

        Raises:
            DimensionMismatchError: Rows do not have one value per feature.
        """
        matrix = np.asarray(rows, dtype=np.float64)
        if matrix.ndim != 2:  # noqa: PLR2004 # a matrix
            matrix = matrix.reshape(1, -1)
        if matrix.shape[1] != len(self.feature_ids):
            raise DimensionMismatchError(len(self.feature_ids), matrix.shape[1])
        return np.clip(self.structure.scores(matrix), 0.0, 1.0)


def label_of(score: float) -> EffectivenessLabel:
    return EffectivenessLabel.from_int(int(score >= 0.5))  # noqa: PLR2004 # decision threshold


def predict(
    model: TrainedModel, row: c.Sequence[float]
) -> tuple[EffectivenessLabel, float]:
    """Classify one row; effective iff the score is at least 0.5.

    Raises:
        DimensionMismatchError: ``row`` has the wrong length.
    """
    if len(row) != len(model.feature_ids):
        raise DimensionMismatchError(len(model.feature_ids), len(row))
    score = float(model.scores([list(row)])[0])
    return label_of(score), score
