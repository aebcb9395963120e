from __future__ import annotations

import typing as t

import joblib
import numpy as np
from loguru import logger

from testmet import utils
from testmet.classifiers._models import (
    ForestParams,
    ForestStructure,
    TrainedModel,
    TreeStructure,
)
from testmet.classifiers._tree import check_both_classes, grow_tree

if t.TYPE_CHECKING:
    from testmet.classifiers._models import FloatArray
    from testmet.models import FeatureMatrix


def _grow_member(
    rows: FloatArray,
    targets: np.ndarray[t.Any, t.Any],
    params: ForestParams,
    split_features: int,
    seed: int,
) -> TreeStructure:
    rng = np.random.default_rng(seed)
    count = rows.shape[0]
    sample = (
        rng.integers(0, count, count)
        if params.bootstrap
        else np.arange(count)
    )

    def choose_features(dimensions: int) -> list[int]:
        picked = rng.choice(dimensions, size=split_features, replace=False)
        return sorted(int(i) for i in picked)

    return grow_tree(
        rows[sample],
        targets[sample],
        min_leaf=params.min_leaf,
        max_depth=params.max_depth,
        choose_features=choose_features,
    )


def train_random_forest(
    matrix: FeatureMatrix,
    params: ForestParams | None = None,
    *,
    seed: int,
    jobs: int = 1,
) -> TrainedModel:
    """Train a random forest of gain-ratio trees.

    Every tree draws its own bootstrap sample and per-split feature subsets
    from a sub-seed derived from ``seed``, so the forest does not depend on
    ``jobs``.

    Raises:
        SingleClassInputError: ``matrix`` has a single class.
    """
    params = params or ForestParams()
    check_both_classes(matrix.targets)
    split_features = params.split_features(len(matrix.feature_ids))

    trees: list[TreeStructure] = joblib.Parallel(n_jobs=jobs)(
        joblib.delayed(_grow_member)(
            matrix.rows, matrix.targets, params, split_features, tree_seed
        )
        for tree_seed in utils.derive_seeds(seed, params.trees)
    )
    logger.debug(
        f"Grew {len(trees)} tree(s) on {len(matrix)} row(s),"
        + f" {split_features} feature(s) per split"
    )
    return TrainedModel(
        feature_ids=matrix.feature_ids,
        seed=seed,
        params=params.model_dump(mode="json"),
        structure=ForestStructure(
            trees=tuple(trees),
            features_per_split=split_features,
            bootstrap=params.bootstrap,
        ),
    )
