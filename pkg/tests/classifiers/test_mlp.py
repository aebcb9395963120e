import numpy as np
import pytest

from testmet.classifiers import (
    MlpParams,
    NetworkStructure,
    SingleClassInputError,
    loss_and_gradients,
    standardize,
    train_mlp,
)
from testmet.models import FeatureMatrix, MetricId
from tests.classifiers import separable_matrix


def _numeric_gradient(
    weights: list[np.ndarray],
    inputs: np.ndarray,
    targets: np.ndarray,
    *,
    eps: float,
) -> list[np.ndarray]:
    gradients: list[np.ndarray] = []
    for array in weights:
        gradient = np.zeros_like(array)
        for index in np.ndindex(array.shape):
            original = array[index]
            array[index] = original + eps
            plus, _ = loss_and_gradients(tuple(weights), inputs, targets)  # pyright: ignore[reportArgumentType]
            array[index] = original - eps
            minus, _ = loss_and_gradients(tuple(weights), inputs, targets)  # pyright: ignore[reportArgumentType]
            array[index] = original
            gradient[index] = (plus - minus) / (2 * eps)
        gradients.append(gradient)
    return gradients


def test_gradients_match_finite_differences() -> None:
    rng = np.random.default_rng(42)
    inputs = rng.normal(size=(10, 4))
    targets = rng.integers(0, 2, 10)
    weights = [
        rng.uniform(-1, 1, size=(4, 3)),
        rng.uniform(-1, 1, size=3),
        rng.uniform(-1, 1, size=(3, 2)),
        rng.uniform(-1, 1, size=2),
    ]

    _, analytic = loss_and_gradients(tuple(weights), inputs, targets)  # pyright: ignore[reportArgumentType]
    numeric = _numeric_gradient(weights, inputs, targets, eps=1e-6)

    for got, expected in zip(analytic, numeric, strict=True):
        np.testing.assert_allclose(got, expected, rtol=1e-5, atol=1e-9)


def test_standardize_constant_column() -> None:
    rows = np.array([[1.0, 5.0], [3.0, 5.0]])

    mean, scale = standardize(rows)

    np.testing.assert_array_equal(mean, [2.0, 5.0])
    np.testing.assert_array_equal(scale, [1.0, 1.0])


def test_learns_separable_data() -> None:
    matrix = separable_matrix(200)

    model = train_mlp(matrix, MlpParams(epochs=100), seed=3)

    structure = model.structure
    assert isinstance(structure, NetworkStructure)
    assert len(structure.hidden_bias) == 2
    assert structure.mean == pytest.approx(tuple(matrix.rows.mean(axis=0)))
    predicted = model.scores(matrix.rows) >= 0.5
    accuracy = (predicted == matrix.targets.astype(bool)).mean()
    assert accuracy >= 0.95


def test_same_seed_same_network() -> None:
    matrix = separable_matrix(60)
    params = MlpParams(epochs=5)

    first = train_mlp(matrix, params, seed=8)
    second = train_mlp(matrix, params, seed=8)

    assert first.model_dump_json() == second.model_dump_json()


def test_full_batch_and_hidden_size() -> None:
    matrix = separable_matrix(40)

    model = train_mlp(
        matrix, MlpParams(hidden=5, epochs=3, batch_size=0), seed=0
    )

    structure = model.structure
    assert isinstance(structure, NetworkStructure)
    assert len(structure.hidden_weights) == 2
    assert len(structure.hidden_weights[0]) == 5
    assert model.params["batch_size"] == 0


def test_scores_are_probabilities() -> None:
    matrix = separable_matrix(60)
    model = train_mlp(matrix, MlpParams(epochs=10), seed=1)

    scores = model.scores(np.array([[-1e6, 0.0], [1e6, 1e6], [50.0, 50.0]]))

    assert ((scores >= 0.0) & (scores <= 1.0)).all()


def test_single_class_is_rejected() -> None:
    matrix = FeatureMatrix.from_arrays((MetricId.LOC,), [1, 2, 3], [1, 1, 1])

    with pytest.raises(SingleClassInputError):
        _ = train_mlp(matrix, seed=0)
