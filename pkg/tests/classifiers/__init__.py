import numpy as np

from testmet.models import FeatureMatrix, MetricId

TWO_FEATURES = (MetricId.LOC, MetricId.WMC)


def separable_matrix(rows: int = 400, *, seed: int = 0) -> FeatureMatrix:
    """LOC decides the label with a margin around 50; WMC is noise."""
    rng = np.random.default_rng(seed)
    loc = np.concatenate(
        [rng.uniform(0, 45, rows // 2), rng.uniform(55, 100, rows - rows // 2)]
    )
    wmc = rng.uniform(0, 100, rows)
    targets = (loc < 50).astype(np.int8)
    return FeatureMatrix.from_arrays(
        TWO_FEATURES, np.column_stack([loc, wmc]), targets
    )


def shuffled(matrix: FeatureMatrix, *, seed: int = 1) -> FeatureMatrix:
    rng = np.random.default_rng(seed)
    return FeatureMatrix.from_arrays(
        matrix.feature_ids, matrix.rows, rng.permutation(matrix.targets)
    )


def xor_matrix() -> FeatureMatrix:
    return FeatureMatrix.from_arrays(
        TWO_FEATURES, [[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0]
    )
