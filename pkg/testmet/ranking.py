"""Entropy-based and one-rule feature rankings over a labeled feature matrix."""

from __future__ import annotations

import dataclasses
import enum
import math
import typing as t

import numpy as np
import pydantic
from loguru import logger
from scipy.stats import entropy

from testmet.models import EffectivenessLabel, MetricId, TestmetModel

if t.TYPE_CHECKING:
    import collections.abc as c

    from testmet.models import FeatureMatrix

type IntArray = np.ndarray[t.Any, np.dtype[np.intp]]
type Labels = c.Sequence[EffectivenessLabel | int] | np.ndarray[t.Any, t.Any]
type Values = c.Sequence[float] | np.ndarray[t.Any, t.Any]

ONER_MIN_BUCKET = 6


class RankingAlgorithm(enum.StrEnum):
    GAIN_RATIO = "GainRatio"
    INFO_GAIN = "InfoGain"
    SYMMETRIC_UNCERTAINTY = "SymmetricUncertainty"
    ONER = "OneR"

    @property
    def uses_mdl(self) -> bool:
        return self is not RankingAlgorithm.ONER


ALL_ALGORITHMS = tuple(RankingAlgorithm)


class DiscretizationMethod(enum.StrEnum):
    MDL = "MDL"
    EQUAL_FREQUENCY = "EqualFrequency"


class Discretization(TestmetModel, frozen=True):
    """Cut points splitting a numeric feature into ``len(cut_points) + 1`` bins.

    A value equal to a cut point falls into the upper bin.
    """

    cut_points: tuple[float, ...]
    method: DiscretizationMethod
    bins: int | None = None
    """Requested bin count, for equal-frequency discretization only."""

    @pydantic.field_validator("cut_points")
    @classmethod
    def _strictly_increasing(cls, cuts: tuple[float, ...]) -> tuple[float, ...]:
        if any(a >= b for a, b in zip(cuts, cuts[1:], strict=False)):
            raise ValueError("cut points must be strictly increasing")
        return cuts

    def assign(self, values: Values) -> IntArray:
        """Bin index of every value."""
        return np.digitize(
            np.asarray(values, dtype=np.float64), self.cut_points
        )


def _targets(labels: Labels) -> IntArray:
    return np.array(
        [
            label.as_int()
            if isinstance(label, EffectivenessLabel)
            else int(label)
            for label in labels
        ],
        dtype=np.intp,
    )


def _cut_between(low: float, high: float) -> float:
    middle = (low + high) / 2
    return middle if low < middle <= high else high


def _check_lengths(feature: c.Sized, labels: c.Sized) -> None:
    if len(feature) != len(labels):
        raise ValueError(f"{len(feature)} values but {len(labels)} labels")


def mdl_discretize(feature: Values, labels: Labels) -> Discretization:
    """Supervised entropy-minimizing discretization with an MDL stop rule.

    Each interval is cut at the boundary that minimizes the weighted class
    entropy of its two halves, provided the information gained pays for
    the cost of encoding the cut; both halves are then cut the same way.
    """
    _check_lengths(feature, labels)
    values = np.asarray(feature, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    values = values[order]
    targets = _targets(labels)[order]

    cuts: list[float] = []
    intervals = [(0, len(values))]
    while intervals:
        start, stop = intervals.pop()
        position = _accepted_cut(values[start:stop], targets[start:stop])
        if position is None:
            continue
        split = start + position
        cuts.append(_cut_between(values[split - 1], values[split]))
        intervals.extend([(start, split), (split, stop)])
    return Discretization(
        cut_points=tuple(sorted(cuts)), method=DiscretizationMethod.MDL
    )


def _accepted_cut(
    values: np.ndarray[t.Any, t.Any], targets: IntArray
) -> int | None:
    """Row count of the lower half of the best acceptable cut, if any."""
    count = len(values)
    if count < 2:  # noqa: PLR2004 # a cut needs two rows
        return None
    lower = np.flatnonzero(values[:-1] < values[1:]) + 1
    if lower.size == 0:
        return None

    effective_below = np.cumsum(targets)[lower - 1]
    below = np.column_stack([lower - effective_below, effective_below]).astype(
        np.float64
    )
    total = np.bincount(targets, minlength=2).astype(np.float64)
    above = total - below

    below_entropy = entropy(below, base=2, axis=1)
    above_entropy = entropy(above, base=2, axis=1)
    weighted = (lower * below_entropy + (count - lower) * above_entropy) / count
    best = int(np.argmin(weighted))

    whole_entropy = float(entropy(total, base=2))
    gain = whole_entropy - float(weighted[best])
    classes = int(np.count_nonzero(total))
    classes_below = int(np.count_nonzero(below[best]))
    classes_above = int(np.count_nonzero(above[best]))
    delta = math.log2(3**classes - 2) - (
        classes * whole_entropy
        - classes_below * float(below_entropy[best])
        - classes_above * float(above_entropy[best])
    )
    if gain > (math.log2(count - 1) + delta) / count:
        return int(lower[best])
    return None


def equal_frequency_discretize(feature: Values, bins: int) -> Discretization:
    """Cut at the interior quantiles so bins hold roughly equal row counts.

    Quantiles that coincide, or fall on the minimum, are dropped.
    """
    if bins < 1:
        raise ValueError("bins must be positive")
    values = np.asarray(feature, dtype=np.float64)
    quantiles = (
        np.quantile(values, np.arange(1, bins) / bins) if bins > 1 else []
    )
    cuts = sorted({float(q) for q in quantiles if q > values.min()})
    return Discretization(
        cut_points=tuple(cuts),
        method=DiscretizationMethod.EQUAL_FREQUENCY,
        bins=bins,
    )


def _contingency(bins: Labels, labels: Labels) -> np.ndarray[t.Any, t.Any]:
    _check_lengths(bins, labels)
    _, bin_index = np.unique(np.asarray(bins), return_inverse=True)
    table = np.zeros((int(bin_index.max(initial=-1)) + 1, 2), dtype=np.float64)
    np.add.at(table, (bin_index, _targets(labels)), 1.0)
    return table


def _entropies(table: np.ndarray[t.Any, t.Any]) -> tuple[float, float, float]:
    """Class entropy, feature entropy and conditional class entropy, in bits."""
    count = table.sum()
    if count == 0:
        return 0.0, 0.0, 0.0
    per_bin = table.sum(axis=1)
    conditional = float((per_bin / count) @ entropy(table, base=2, axis=1))
    return (
        float(entropy(table.sum(axis=0), base=2)),
        float(entropy(per_bin, base=2)),
        conditional,
    )


def info_gain(bins: Labels, labels: Labels) -> float:
    """Class entropy minus class entropy given the bin."""
    class_entropy, _, conditional = _entropies(_contingency(bins, labels))
    return max(0.0, class_entropy - conditional)


def gain_ratio(bins: Labels, labels: Labels) -> float:
    """Information gain over the bin entropy; 0 for a single bin."""
    class_entropy, feature_entropy, conditional = _entropies(
        _contingency(bins, labels)
    )
    if feature_entropy == 0:
        return 0.0
    return max(0.0, class_entropy - conditional) / feature_entropy


def symmetric_uncertainty(bins: Labels, labels: Labels) -> float:
    class_entropy, feature_entropy, conditional = _entropies(
        _contingency(bins, labels)
    )
    if class_entropy + feature_entropy == 0:
        return 0.0
    gain = max(0.0, class_entropy - conditional)
    return min(1.0, 2 * gain / (class_entropy + feature_entropy))


class OneRRule(TestmetModel, frozen=True):
    """Predicts ``classes[i]`` for values in bin ``i`` of ``cut_points``."""

    cut_points: tuple[float, ...]
    classes: tuple[EffectivenessLabel, ...]
    accuracy: float
    """Training accuracy of the rule."""

    def predict(self, values: c.Sequence[float]) -> list[EffectivenessLabel]:
        bins = np.digitize(
            np.asarray(values, dtype=np.float64), self.cut_points
        )
        return [self.classes[int(b)] for b in bins]


@dataclasses.dataclass
class _Bucket:
    first: int
    stop: int
    counts: list[int]

    @property
    def majority(self) -> int:
        # ties go to non-effective
        return int(self.counts[1] > self.counts[0])


def _buckets(
    values: np.ndarray[t.Any, t.Any], targets: IntArray, min_bucket: int
) -> list[_Bucket]:
    buckets: list[_Bucket] = []
    index, count = 0, len(values)
    while index < count:
        bucket = _Bucket(first=index, stop=index, counts=[0, 0])
        while index < count and max(bucket.counts) < min_bucket:
            bucket.counts[targets[index]] += 1
            index += 1
        majority = bucket.majority
        while index < count and (
            values[index] == values[index - 1] or targets[index] == majority
        ):
            bucket.counts[targets[index]] += 1
            index += 1
        bucket.stop = index
        if buckets and buckets[-1].majority == bucket.majority:
            previous = buckets[-1]
            previous.stop = bucket.stop
            previous.counts = [
                a + b
                for a, b in zip(previous.counts, bucket.counts, strict=True)
            ]
        else:
            buckets.append(bucket)
    return buckets


def oner_rule(
    feature: Values,
    labels: Labels,
    *,
    min_bucket: int = ONER_MIN_BUCKET,
) -> OneRRule:
    """Learn a one-feature rule over buckets of sorted values.

    A bucket grows until its majority class has ``min_bucket`` rows, then
    absorbs following rows of equal value or of the majority class.
    Neighbouring buckets with the same majority are merged.
    """
    _check_lengths(feature, labels)
    values = np.asarray(feature, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    values = values[order]
    targets = _targets(labels)[order]
    if len(values) == 0:
        return OneRRule(
            cut_points=(),
            classes=(EffectivenessLabel.NON_EFFECTIVE,),
            accuracy=0.0,
        )

    buckets = _buckets(values, targets, min_bucket)
    correct = sum(bucket.counts[bucket.majority] for bucket in buckets)
    return OneRRule(
        cut_points=tuple(
            _cut_between(values[before.stop - 1], values[after.first])
            for before, after in zip(buckets, buckets[1:], strict=False)
        ),
        classes=tuple(EffectivenessLabel.from_int(b.majority) for b in buckets),
        accuracy=correct / len(values),
    )


def oner_score(feature: Values, labels: Labels) -> float:
    """Training accuracy of :func:`oner_rule`."""
    return oner_rule(feature, labels).accuracy


class RankingEntry(TestmetModel, frozen=True):
    metric: MetricId
    score: float


class RankingTable(TestmetModel, frozen=True):
    algorithm: RankingAlgorithm
    entries: tuple[RankingEntry, ...]
    """Best first; equal scores in alphabetical metric order."""

    def top(self, count: int) -> tuple[RankingEntry, ...]:
        return self.entries[:count]

    def rank_of(self, metric: MetricId) -> int:
        """1-based rank of ``metric``."""
        for rank, entry in enumerate(self.entries, start=1):
            if entry.metric is metric:
                return rank
        raise KeyError(metric)


_ENTROPY_MEASURES: dict[
    RankingAlgorithm, c.Callable[[Labels, Labels], float]
] = {
    RankingAlgorithm.GAIN_RATIO: gain_ratio,
    RankingAlgorithm.INFO_GAIN: info_gain,
    RankingAlgorithm.SYMMETRIC_UNCERTAINTY: symmetric_uncertainty,
}


def _table(
    matrix: FeatureMatrix,
    algorithm: RankingAlgorithm,
    binned: c.Mapping[MetricId, IntArray],
) -> RankingTable:
    entries: list[RankingEntry] = []
    for metric in matrix.feature_ids:
        if algorithm is RankingAlgorithm.ONER:
            score = oner_score(matrix.column(metric), matrix.targets)
        else:
            score = _ENTROPY_MEASURES[algorithm](binned[metric], matrix.targets)
        entries.append(RankingEntry(metric=metric, score=score))
    entries.sort(key=lambda e: (-e.score, e.metric.value))
    logger.debug(
        f"{algorithm} top 3: "
        + ", ".join(f"{e.metric} ({e.score:.4f})" for e in entries[:3])
    )
    return RankingTable(algorithm=algorithm, entries=tuple(entries))


def _mdl_bins(matrix: FeatureMatrix) -> dict[MetricId, IntArray]:
    bins: dict[MetricId, IntArray] = {}
    for metric in matrix.feature_ids:
        column = matrix.column(metric)
        discretization = mdl_discretize(column, matrix.targets)
        logger.trace(f"{metric}: {len(discretization.cut_points)} MDL cut(s)")
        bins[metric] = discretization.assign(column)
    return bins


def rank_all(
    matrix: FeatureMatrix,
    algorithms: c.Sequence[RankingAlgorithm] = ALL_ALGORITHMS,
) -> list[RankingTable]:
    """One table per algorithm; entropy measures share the MDL bins."""
    logger.info(
        f"Ranking {len(matrix.feature_ids)} feature(s)"
        + f" over {len(matrix)} row(s)"
        + f" with {', '.join(algorithms)}"
    )
    binned = _mdl_bins(matrix) if any(a.uses_mdl for a in algorithms) else {}
    return [_table(matrix, algorithm, binned) for algorithm in algorithms]


def rank_features(
    matrix: FeatureMatrix, algorithm: RankingAlgorithm
) -> RankingTable:
    """Score every feature of ``matrix`` with ``algorithm``."""
    return rank_all(matrix, [algorithm])[0]
