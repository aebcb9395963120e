from __future__ import annotations

import dataclasses
import math
import typing as t

import numpy as np
from loguru import logger
from scipy.special import entr

from testmet.classifiers._models import (
    SingleClassInputError,
    TrainedModel,
    TreeParams,
    TreeStructure,
)

if t.TYPE_CHECKING:
    import collections.abc as c

    from testmet.classifiers._models import FloatArray
    from testmet.models import FeatureMatrix

type FeatureChooser = c.Callable[[int], c.Sequence[int]]

# gains within this of zero are rounding noise
_MIN_GAIN = 1e-12


def _binary_entropy(first: FloatArray, second: FloatArray) -> FloatArray:
    """Entropy in bits of two-way partitions given as count arrays."""
    total = first + second
    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(total > 0, first / np.where(total > 0, total, 1), 0.0)
    return (entr(share) + entr(1.0 - share)) / math.log(2)


@dataclasses.dataclass(frozen=True, slots=True)
class Split:
    feature: int
    threshold: float
    gain_ratio: float


def best_split(
    column: FloatArray, targets: FloatArray, *, feature: int, min_leaf: int
) -> Split | None:
    """Best ``x <= threshold`` split of one column by gain ratio.

    Candidate thresholds sit between consecutive distinct sorted values;
    the threshold is the lower value of that pair. A candidate needs
    ``min_leaf`` rows on each side. Zero-gain candidates stay valid, so an
    impure node can still be split when only an interaction of features
    separates it (XOR). Among equal gain ratios the lowest threshold wins.
    """
    count = column.shape[0]
    order = np.argsort(column, kind="stable")
    values = column[order]
    effective_left = np.cumsum(targets[order])[:-1]
    rows_left = np.arange(1, count, dtype=np.float64)
    rows_right = count - rows_left
    effective_total = float(targets.sum())

    node_entropy = _binary_entropy(
        np.array([count - effective_total]), np.array([effective_total])
    )[0]
    left_entropy = _binary_entropy(rows_left - effective_left, effective_left)
    right_entropy = _binary_entropy(
        rows_right - (effective_total - effective_left),
        effective_total - effective_left,
    )
    children = rows_left * left_entropy + rows_right * right_entropy
    gain = node_entropy - children / count
    gain = np.where(np.abs(gain) > _MIN_GAIN, gain, 0.0)
    split_info = _binary_entropy(rows_left, rows_right)

    valid = (
        (values[:-1] < values[1:])
        & (rows_left >= min_leaf)
        & (rows_right >= min_leaf)
        & (gain >= 0.0)
    )
    if not valid.any():
        return None
    ratio = np.where(
        valid, gain / np.where(split_info > 0, split_info, 1.0), -1.0
    )
    position = int(np.argmax(ratio))
    return Split(
        feature=feature,
        threshold=float(values[position]),
        gain_ratio=float(ratio[position]),
    )


def _all_features(dimensions: int) -> range:
    return range(dimensions)


def grow_tree(
    rows: FloatArray,
    targets: FloatArray,
    *,
    min_leaf: int,
    max_depth: int | None = None,
    choose_features: FeatureChooser = _all_features,
) -> TreeStructure:
    """Grow an unpruned binary tree, numbering nodes in preorder.

    ``choose_features`` is asked once per node for the feature indices
    that may be split on there; ties between features go to the one
    offered first.
    """
    targets = np.asarray(targets, dtype=np.float64)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    distribution: list[tuple[float, float]] = []

    # (row indices, depth, parent node, attach as left child)
    stack: list[tuple[np.ndarray[t.Any, t.Any], int, int, bool]] = [
        (np.arange(rows.shape[0]), 0, -1, True)
    ]
    while stack:
        index, depth, parent, as_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if as_left else right)[parent] = node

        node_targets = targets[index]
        effective = float(node_targets.sum())
        distribution.append((len(index) - effective, effective))
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)

        if (
            effective in {0.0, float(len(index))}
            or len(index) < 2 * min_leaf
            or (max_depth is not None and depth >= max_depth)
        ):
            continue

        best: Split | None = None
        node_rows = rows[index]
        for candidate in choose_features(rows.shape[1]):
            split = best_split(
                node_rows[:, candidate],
                node_targets,
                feature=int(candidate),
                min_leaf=min_leaf,
            )
            if split is None:
                continue
            if best is None or split.gain_ratio > best.gain_ratio:
                best = split
        if best is None:
            continue

        feature[node] = best.feature
        threshold[node] = best.threshold
        goes_left = node_rows[:, best.feature] <= best.threshold
        stack.append((index[~goes_left], depth + 1, node, False))
        stack.append((index[goes_left], depth + 1, node, True))

    return TreeStructure(
        feature=tuple(feature),
        threshold=tuple(threshold),
        left=tuple(left),
        right=tuple(right),
        distribution=tuple(distribution),
    )


def check_both_classes(targets: np.ndarray[t.Any, t.Any]) -> None:
    """Raises:
        SingleClassInputError: ``targets`` hold fewer than two classes.
    """
    if len(np.unique(targets)) < 2:  # noqa: PLR2004 # binary task
        raise SingleClassInputError


def train_decision_tree(
    matrix: FeatureMatrix, params: TreeParams | None = None, *, seed: int = 0
) -> TrainedModel:
    """Train a gain-ratio decision tree.

    ``seed`` is recorded only; tree growth is deterministic.

    Raises:
        SingleClassInputError: ``matrix`` has a single class.
    """
    params = params or TreeParams()
    check_both_classes(matrix.targets)
    structure = grow_tree(
        matrix.rows,
        matrix.targets,
        min_leaf=params.min_leaf,
        max_depth=params.max_depth,
    )
    logger.debug(
        f"Grew a decision tree with {structure.node_count} node(s),"
        + f" depth {structure.depth}, on {len(matrix)} row(s)"
    )
    return TrainedModel(
        feature_ids=matrix.feature_ids,
        seed=seed,
        params=params.model_dump(mode="json"),
        structure=structure,
    )
