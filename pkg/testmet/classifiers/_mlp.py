from __future__ import annotations

import typing as t

import numpy as np
from loguru import logger
from scipy.special import expit, log_softmax

from testmet.classifiers._models import (
    MlpParams,
    NetworkStructure,
    NonFiniteLossError,
    TrainedModel,
)
from testmet.classifiers._tree import check_both_classes

if t.TYPE_CHECKING:
    from testmet.classifiers._models import FloatArray
    from testmet.models import FeatureMatrix

type Weights = tuple[FloatArray, FloatArray, FloatArray, FloatArray]
"""Hidden weights, hidden bias, output weights, output bias."""

INITIAL_WEIGHT_RANGE = 0.05


def standardize(rows: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Column means and standard deviations; constant columns get scale 1."""
    mean = rows.mean(axis=0)
    scale = rows.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def initial_weights(
    rng: np.random.Generator, inputs: int, hidden: int
) -> Weights:
    def draw(*shape: int) -> FloatArray:
        return rng.uniform(
            -INITIAL_WEIGHT_RANGE, INITIAL_WEIGHT_RANGE, size=shape
        )

    return draw(inputs, hidden), draw(hidden), draw(hidden, 2), draw(2)


def loss_and_gradients(
    weights: Weights, inputs: FloatArray, targets: np.ndarray[t.Any, t.Any]
) -> tuple[float, Weights]:
    """Mean cross-entropy of the network on ``inputs`` and its gradients.

    ``targets`` are class indices (0 non-effective, 1 effective); the
    gradients are ordered like ``weights``.
    """
    hidden_weights, hidden_bias, output_weights, output_bias = weights
    count = inputs.shape[0]
    rows = np.arange(count)
    classes = np.asarray(targets, dtype=np.intp)

    hidden = expit(inputs @ hidden_weights + hidden_bias)
    log_probs = log_softmax(hidden @ output_weights + output_bias, axis=1)
    loss = float(-log_probs[rows, classes].mean())

    output_delta = np.exp(log_probs)
    output_delta[rows, classes] -= 1.0
    output_delta /= count
    hidden_delta = (output_delta @ output_weights.T) * hidden * (1.0 - hidden)
    return loss, (
        inputs.T @ hidden_delta,
        hidden_delta.sum(axis=0),
        hidden.T @ output_delta,
        output_delta.sum(axis=0),
    )


def _batches(
    rng: np.random.Generator, count: int, size: int
) -> list[np.ndarray[t.Any, t.Any]]:
    order = rng.permutation(count)
    if size == 0 or size >= count:
        return [order]
    return [order[start : start + size] for start in range(0, count, size)]


def train_mlp(
    matrix: FeatureMatrix, params: MlpParams | None = None, *, seed: int
) -> TrainedModel:
    """Train a one-hidden-layer perceptron by momentum gradient descent.

    Inputs are standardized with the training rows' statistics, which are
    stored in the model and reapplied at prediction time.

    Raises:
        SingleClassInputError: ``matrix`` has a single class.
        NonFiniteLossError: Training diverged.
    """
    params = params or MlpParams()
    check_both_classes(matrix.targets)
    rng = np.random.default_rng(seed)
    mean, scale = standardize(matrix.rows)
    inputs = (matrix.rows - mean) / scale
    hidden = params.hidden_units(len(matrix.feature_ids))

    weights = initial_weights(rng, inputs.shape[1], hidden)
    velocity = tuple(np.zeros_like(w) for w in weights)
    loss = float("nan")
    for epoch in range(1, params.epochs + 1):
        for batch in _batches(rng, len(matrix), params.batch_size):
            loss, gradients = loss_and_gradients(
                weights, inputs[batch], matrix.targets[batch]
            )
            if not np.isfinite(loss):
                raise NonFiniteLossError(epoch)
            velocity = tuple(
                params.momentum * v - params.learning_rate * g
                for v, g in zip(velocity, gradients, strict=True)
            )
            weights = t.cast(
                "Weights",
                tuple(w + v for w, v in zip(weights, velocity, strict=True)),
            )
        logger.trace(f"Epoch {epoch}: loss {loss:.6f}")
    if not all(np.isfinite(w).all() for w in weights):
        raise NonFiniteLossError(params.epochs)

    logger.debug(
        f"Trained a {inputs.shape[1]}-{hidden}-2 network for {params.epochs}"
        + f" epoch(s) on {len(matrix)} row(s)"
    )
    hidden_weights, hidden_bias, output_weights, output_bias = weights
    return TrainedModel(
        feature_ids=matrix.feature_ids,
        seed=seed,
        params=params.model_dump(mode="json"),
        structure=NetworkStructure(
            mean=tuple(mean.tolist()),
            scale=tuple(scale.tolist()),
            hidden_weights=tuple(map(tuple, hidden_weights.tolist())),
            hidden_bias=tuple(hidden_bias.tolist()),
            output_weights=tuple(map(tuple, output_weights.tolist())),
            output_bias=(float(output_bias[0]), float(output_bias[1])),
        ),
    )
