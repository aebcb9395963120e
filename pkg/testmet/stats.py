"""Tie-aware Spearman rank correlation of metrics against the mutation score."""

from __future__ import annotations

import enum
import typing as t

import numpy as np
from loguru import logger
from scipy.stats import rankdata

from testmet.exc import InputError
from testmet.models import (
    INDEPENDENT_METRICS,
    DesignProperty,
    MetricId,
    TestmetModel,
)

if t.TYPE_CHECKING:
    import collections.abc as c

    from testmet.models import ClassRecord

DEFAULT_THRESHOLD = 0.5


class DegenerateInputError(InputError): ...


class LengthMismatchError(InputError): ...


class Population(enum.StrEnum):
    """Records a correlation table is computed over."""

    RAW = "raw"
    LABELED = "labeled"


def average_ranks(values: c.Sequence[float]) -> list[float]:
    """1-based ranks; ties share the mean of the positions they occupy.

    Raises:
        DegenerateInputError: ``values`` is empty.
    """
    if len(values) == 0:
        raise DegenerateInputError("cannot rank an empty sequence")
    return [float(rank) for rank in rankdata(values, method="average")]


def spearman(x: c.Sequence[float], y: c.Sequence[float]) -> float:
    """Pearson correlation of the average ranks of ``x`` and ``y``.

    Raises:
        LengthMismatchError: ``x`` and ``y`` differ in length.
        DegenerateInputError: Fewer than 3 pairs, or a constant sequence.
    """
    if len(x) != len(y):
        raise LengthMismatchError(
            f"sequences differ in length: {len(x)} != {len(y)}"
        )
    if len(x) < 3:
        raise DegenerateInputError(f"at least 3 pairs are needed, got {len(x)}")
    for name, values in (("x", x), ("y", y)):
        if len(np.unique(np.asarray(values, dtype=np.float64))) < 2:
            raise DegenerateInputError(f"{name} is constant")

    ranks = np.vstack(
        [rankdata(x, method="average"), rankdata(y, method="average")]
    )
    rho = float(np.corrcoef(ranks)[0, 1])
    return min(1.0, max(-1.0, rho))


class CorrelationEntry(TestmetModel, frozen=True):
    metric: MetricId
    rho: float

    @property
    def design_property(self) -> DesignProperty:
        return self.metric.design_property


class SkippedMetric(TestmetModel, frozen=True):
    metric: MetricId
    reason: str


class CorrelationReport(TestmetModel, frozen=True):
    entries: tuple[CorrelationEntry, ...]
    """Entries with ``|rho| >= threshold``, strongest first."""
    full: tuple[CorrelationEntry, ...]
    """Every computed entry, in canonical metric order."""
    skipped: tuple[SkippedMetric, ...]
    target: MetricId
    threshold: float
    population: int
    population_kind: Population


def _strength_order(entry: CorrelationEntry) -> tuple[float, str]:
    return -abs(entry.rho), entry.metric.value


def correlation_table(
    records: c.Sequence[ClassRecord],
    *,
    target: MetricId = MetricId.M,
    threshold: float = DEFAULT_THRESHOLD,
    features: c.Sequence[MetricId] = INDEPENDENT_METRICS,
    population_kind: Population = Population.RAW,
) -> CorrelationReport:
    """Correlate every feature with ``target`` over ``records``.

    Constant or absent metrics are reported as skipped instead of failing
    the whole table.

    Raises:
        DegenerateInputError: Fewer than 3 records, or ``target`` is
            constant.
    """
    if len(records) < 3:
        raise DegenerateInputError(
            f"at least 3 records are needed, got {len(records)}"
        )
    if any(target not in record.metrics for record in records):
        raise DegenerateInputError(f"{target} is missing from some records")
    scores = [record[target] for record in records]
    if len(set(scores)) < 2:
        raise DegenerateInputError(f"{target} is constant")

    full: list[CorrelationEntry] = []
    skipped: list[SkippedMetric] = []
    for metric in features:
        if any(metric not in record.metrics for record in records):
            skipped.append(SkippedMetric(metric=metric, reason="missing"))
            continue
        try:
            rho = spearman([record[metric] for record in records], scores)
        except DegenerateInputError:
            skipped.append(SkippedMetric(metric=metric, reason="constant"))
            continue
        full.append(CorrelationEntry(metric=metric, rho=rho))

    for skip in skipped:
        logger.debug(f"Skipping {skip.metric}: {skip.reason}")
    entries = sorted(
        (e for e in full if abs(e.rho) >= threshold), key=_strength_order
    )
    logger.info(
        f"{len(entries)} of {len(full)} metric(s) correlate with {target}"
        + f" at |rho| >= {threshold:g} over {len(records)} record(s)"
    )
    return CorrelationReport(
        entries=tuple(entries),
        full=tuple(full),
        skipped=tuple(skipped),
        target=target,
        threshold=threshold,
        population=len(records),
        population_kind=population_kind,
    )
