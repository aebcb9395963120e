from __future__ import annotations

import dataclasses
import enum
import math
import typing as t

import numpy as np
from pydantic import BaseModel

from testmet.utils import FrozenDict  # noqa: TC001 # needed at runtime

if t.TYPE_CHECKING:
    import collections.abc as c


class TestmetModel(BaseModel, frozen=True, extra="forbid"): ...


class DesignProperty(enum.StrEnum):
    SIZE = "Size"
    COMPLEXITY = "Complexity"
    INHERITANCE = "Inheritance"
    COUPLING = "Coupling"
    COHESION = "Cohesion"
    ENCAPSULATION = "Encapsulation"
    TEST_EFFORT = "TestEffort"
    TEST_QUALITY = "TestQuality"


class MetricId(enum.StrEnum):
    """Every metric of the dataset, in canonical column order.

    Values are the canonical CSV column names.
    """

    LOC = "LOC"
    NBI = "NBI"
    LOCCOM = "LOCCOM"
    NPM = "NPM"
    NSTAM = "NSTAM"
    NOF = "NOF"
    NSTAF = "NSTAF"
    NMC = "NMC"
    NMCI = "NMCI"
    NMCE = "NMCE"
    WMC = "WMC"
    AMC = "AMC"
    RFC = "RFC"
    DIT = "DIT"
    NOC = "NOC"
    MFA = "MFA"
    CBO = "CBO"
    IC = "IC"
    CBM = "CBM"
    CA = "Ca"
    CE = "Ce"
    LCOM = "LCOM"
    LCOM3 = "LCOM3"
    CAM = "CAM"
    DAM = "DAM"
    NPRIF = "NPRIF"
    NPRIM = "NPRIM"
    NPROM = "NPROM"
    T_LOC = "T-LOC"
    T_NOT = "T-NOT"
    T_NOA = "T-NOA"
    T_NMC = "T-NMC"
    T_WMC = "T-WMC"
    T_AMC = "T-AMC"
    L = "L"
    B = "B"
    M = "M"

    @property
    def design_property(self) -> DesignProperty:
        return _DESIGN_PROPERTIES[self]

    @property
    def is_independent(self) -> bool:
        """Whether the metric may be a feature, i.e. is not a test quality."""
        return self.design_property is not DesignProperty.TEST_QUALITY


_GROUPS: dict[DesignProperty, tuple[MetricId, ...]] = {
    DesignProperty.SIZE: (
        MetricId.LOC,
        MetricId.NBI,
        MetricId.LOCCOM,
        MetricId.NPM,
        MetricId.NSTAM,
        MetricId.NOF,
        MetricId.NSTAF,
        MetricId.NMC,
        MetricId.NMCI,
        MetricId.NMCE,
    ),
    DesignProperty.COMPLEXITY: (MetricId.WMC, MetricId.AMC, MetricId.RFC),
    DesignProperty.INHERITANCE: (MetricId.DIT, MetricId.NOC, MetricId.MFA),
    DesignProperty.COUPLING: (
        MetricId.CBO,
        MetricId.IC,
        MetricId.CBM,
        MetricId.CA,
        MetricId.CE,
    ),
    DesignProperty.COHESION: (MetricId.LCOM, MetricId.LCOM3, MetricId.CAM),
    DesignProperty.ENCAPSULATION: (
        MetricId.DAM,
        MetricId.NPRIF,
        MetricId.NPRIM,
        MetricId.NPROM,
    ),
    DesignProperty.TEST_EFFORT: (
        MetricId.T_LOC,
        MetricId.T_NOT,
        MetricId.T_NOA,
        MetricId.T_NMC,
        MetricId.T_WMC,
        MetricId.T_AMC,
    ),
    DesignProperty.TEST_QUALITY: (MetricId.L, MetricId.B, MetricId.M),
}
_DESIGN_PROPERTIES: dict[MetricId, DesignProperty] = {
    metric: group for group, metrics in _GROUPS.items() for metric in metrics
}


def metrics_of(design_property: DesignProperty) -> tuple[MetricId, ...]:
    return _GROUPS[design_property]


TEST_EFFORT_METRICS = _GROUPS[DesignProperty.TEST_EFFORT]
TEST_QUALITY_METRICS = _GROUPS[DesignProperty.TEST_QUALITY]
CODE_METRICS = tuple(
    metric
    for metric in MetricId
    if metric not in TEST_EFFORT_METRICS and metric not in TEST_QUALITY_METRICS
)
INDEPENDENT_METRICS = CODE_METRICS + TEST_EFFORT_METRICS
"""The 34 independent variables: 28 code metrics and 6 test-effort metrics."""

COUNT_METRICS = frozenset(
    {
        MetricId.LOC,
        MetricId.NBI,
        MetricId.NPM,
        MetricId.NSTAM,
        MetricId.NOF,
        MetricId.NSTAF,
        MetricId.NMC,
        MetricId.NMCI,
        MetricId.NMCE,
        MetricId.WMC,
        MetricId.RFC,
        MetricId.DIT,
        MetricId.NOC,
        MetricId.CBO,
        MetricId.IC,
        MetricId.CBM,
        MetricId.CA,
        MetricId.CE,
        MetricId.LCOM,
        MetricId.NPRIF,
        MetricId.NPRIM,
        MetricId.NPROM,
        MetricId.T_LOC,
        MetricId.T_NOT,
        MetricId.T_NOA,
        MetricId.T_NMC,
        MetricId.T_WMC,
    }
)
RATIO_METRICS = frozenset(
    {
        MetricId.MFA,
        MetricId.DAM,
        MetricId.CAM,
        MetricId.L,
        MetricId.B,
        MetricId.M,
    }
)
_RANGES: dict[MetricId, tuple[float, float]] = {
    **dict.fromkeys(RATIO_METRICS, (0.0, 1.0)),
    MetricId.LCOM3: (0.0, 2.0),
}


class FeatureSet(enum.StrEnum):
    """Presets for the independent variables used as features."""

    ALL = "all"
    CODE = "code"
    TEST_EFFORT = "test-effort"

    @property
    def metrics(self) -> tuple[MetricId, ...]:
        match self:
            case FeatureSet.ALL:
                return INDEPENDENT_METRICS
            case FeatureSet.CODE:
                return CODE_METRICS
            case FeatureSet.TEST_EFFORT:
                return TEST_EFFORT_METRICS


class EffectivenessLabel(enum.StrEnum):
    EFFECTIVE = "Effective"
    NON_EFFECTIVE = "NonEffective"

    def as_int(self) -> int:
        """Encoding used by feature matrices: 1 is effective."""
        return int(self is EffectivenessLabel.EFFECTIVE)

    @classmethod
    def from_int(cls, value: int) -> EffectivenessLabel:
        return cls.EFFECTIVE if value else cls.NON_EFFECTIVE


class ClassRecord(TestmetModel, frozen=True):
    """One production class together with its test class."""

    class_id: str
    """Fully qualified name of the production class."""
    test_id: str
    metrics: FrozenDict[MetricId, float]

    def __getitem__(self, metric: MetricId) -> float:
        return self.metrics[metric]

    @property
    def key(self) -> tuple[str, str]:
        return self.class_id, self.test_id


def validate_record(
    record: ClassRecord, *, require_nbi: bool = False
) -> tuple[str, ...]:
    """Collect every invariant violation of ``record``.

    Violations are data, so nothing is raised; an empty result means the
    record is valid. Test-quality metrics are optional, but checked when
    present.
    """
    violations: list[str] = []
    metrics = record.metrics

    for metric in INDEPENDENT_METRICS:
        optional = metric is MetricId.NBI and not require_nbi
        if metric not in metrics and not optional:
            violations.append(f"{metric} missing")

    for metric, value in metrics.items():
        if not math.isfinite(value):
            violations.append(f"{metric} is not finite")
            continue
        if metric in COUNT_METRICS and (value < 0 or not value.is_integer()):
            violations.append(f"{metric} must be a non-negative integer")
        if metric in _RANGES:
            low, high = _RANGES[metric]
            if not low <= value <= high:
                violations.append(
                    f"{metric} out of [{low:g},{high:g}]"
                )
        if metric in {MetricId.AMC, MetricId.T_AMC} and value < 0:
            violations.append(f"{metric} must not be negative")

    if (
        {MetricId.NMC, MetricId.NMCI, MetricId.NMCE} <= metrics.keys()
        and metrics[MetricId.NMC]
        != metrics[MetricId.NMCI] + metrics[MetricId.NMCE]
    ):
        violations.append("NMC != NMCI + NMCE")

    return tuple(violations)


@dataclasses.dataclass(frozen=True)
class FeatureMatrix:
    """Rows of feature values with the aligned binary targets.

    ``targets`` encodes :class:`EffectivenessLabel` with
    :meth:`EffectivenessLabel.as_int`. Both arrays are read-only.
    """

    feature_ids: tuple[MetricId, ...]
    rows: np.ndarray[tuple[int, int], np.dtype[np.float64]]
    targets: np.ndarray[tuple[int], np.dtype[np.int8]]
    record_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.feature_ids):
            raise ValueError(
                f"rows must be a {len(self.feature_ids)}-column matrix, "
                + f"got shape {self.rows.shape}"
            )
        if self.targets.shape != (self.rows.shape[0],):
            raise ValueError("targets must align with rows")
        if not np.isfinite(self.rows).all():
            raise ValueError("feature matrix must not contain missing values")
        if any(not metric.is_independent for metric in self.feature_ids):
            raise ValueError("test-quality metrics cannot be features")

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @property
    def labels(self) -> tuple[EffectivenessLabel, ...]:
        return tuple(EffectivenessLabel.from_int(int(v)) for v in self.targets)

    def subset(
        self, indices: c.Sequence[int] | np.ndarray[t.Any, t.Any]
    ) -> FeatureMatrix:
        index = np.asarray(indices, dtype=np.intp)
        rows = self.rows[index]
        targets = self.targets[index]
        rows.flags.writeable = False
        targets.flags.writeable = False
        return FeatureMatrix(
            feature_ids=self.feature_ids,
            rows=rows,
            targets=targets,
            record_ids=tuple(self.record_ids[i] for i in index)
            if self.record_ids
            else (),
        )

    def column(
        self, metric: MetricId
    ) -> np.ndarray[tuple[int], np.dtype[np.float64]]:
        return self.rows[:, self.feature_ids.index(metric)]

    @classmethod
    def from_arrays(
        cls,
        feature_ids: c.Sequence[MetricId],
        rows: t.Any,
        targets: t.Any,
        record_ids: c.Sequence[str] = (),
    ) -> FeatureMatrix:
        matrix_rows = np.array(rows, dtype=np.float64).reshape(
            -1, len(feature_ids)
        )
        matrix_targets = np.array(targets, dtype=np.int8)
        matrix_rows.flags.writeable = False
        matrix_targets.flags.writeable = False
        return cls(
            feature_ids=tuple(feature_ids),
            rows=matrix_rows,
            targets=matrix_targets,
            record_ids=tuple(record_ids),
        )
