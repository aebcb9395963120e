"""Dataset ingestion, quartile labeling and feature matrix construction."""

from __future__ import annotations

import math
import typing as t
from pathlib import Path

import numpy as np
from loguru import logger

from testmet.classifiers import FeatureMismatchError
from testmet.exc import InputError, LabelingError
from testmet.inputs.csv import CsvInput, read_rows, write_rows
from testmet.models import (
    INDEPENDENT_METRICS,
    ClassRecord,
    EffectivenessLabel,
    FeatureMatrix,
    MetricId,
    TestmetModel,
    validate_record,
)
from testmet.utils import format_number

if t.TYPE_CHECKING:
    import collections.abc as c
    import os

METADATA_COLUMNS = frozenset(
    {"project", "url", "commit", "class_path", "test_path"}
)
ID_COLUMNS = ("class_id", "test_id")
LABEL_COLUMN = "label"
_IGNORED_COLUMNS = frozenset({*METADATA_COLUMNS, *ID_COLUMNS, LABEL_COLUMN})


class MissingColumnError(InputError):
    def __init__(self, columns: c.Iterable[str]) -> None:
        self.columns = tuple(columns)
        super().__init__(
            f"missing required column(s): {', '.join(self.columns)}"
        )


class BadCellError(InputError):
    def __init__(self, row: int, column: str, content: str) -> None:
        super().__init__(
            f"row {row}, column {column}: not a number: {content!r}"
        )
        self.row = row
        self.column = column
        self.content = content


class DuplicateRecordError(InputError):
    def __init__(self, key: tuple[str, str], rows: tuple[int, int]) -> None:
        super().__init__(
            f"rows {rows[0]} and {rows[1]} both describe {key[0]} / {key[1]}"
        )
        self.key = key


class InvalidRecordError(InputError):
    def __init__(self, violations: c.Mapping[str, c.Sequence[str]]) -> None:
        self.violations = dict(violations)
        lines = [
            f"  {record}: {'; '.join(problems)}"
            for record, problems in self.violations.items()
        ]
        super().__init__(
            "\n".join([f"{len(self.violations)} invalid record(s)", *lines])
        )


class ForbiddenFeatureError(InputError):
    def __init__(self, metrics: c.Iterable[MetricId]) -> None:
        self.metrics = tuple(metrics)
        super().__init__(
            "test-quality metrics cannot be features: "
            + ", ".join(self.metrics)
        )


class MissingFeatureError(InputError): ...


class TooFewValuesError(LabelingError): ...


class DegenerateSplitError(LabelingError):
    def __init__(self, q1: float, q3: float) -> None:
        super().__init__(
            f"first and third quartile coincide ({q1:g}, {q3:g}),"
            + " labeling is impossible"
        )
        self.q1 = q1
        self.q3 = q3


class RawDataset(TestmetModel, frozen=True):
    records: tuple[ClassRecord, ...]
    provenance: str

    def __len__(self) -> int:
        return len(self.records)


class LabeledRecord(TestmetModel, frozen=True):
    record: ClassRecord
    label: EffectivenessLabel


class LabeledDataset(TestmetModel, frozen=True):
    records: tuple[LabeledRecord, ...]
    q1_threshold: float
    q3_threshold: float
    discarded_count: int

    def __len__(self) -> int:
        return len(self.records)

    @property
    def class_records(self) -> tuple[ClassRecord, ...]:
        return tuple(labeled.record for labeled in self.records)

    def count(self, label: EffectivenessLabel) -> int:
        return sum(1 for labeled in self.records if labeled.label is label)


def required_metrics(*, require_nbi: bool = True) -> frozenset[MetricId]:
    """Columns every ingested dataset must have."""
    required = {*INDEPENDENT_METRICS, MetricId.M}
    if not require_nbi:
        required.discard(MetricId.NBI)
    return frozenset(required)


def _record_id(
    cells: c.Mapping[str, str], id_column: str, path_column: str, row: int
) -> str:
    value = cells.get(id_column, "").strip()
    if not value:
        value = cells.get(path_column, "").strip()
        if project := cells.get("project", "").strip():
            value = f"{project}:{value}"
    if not value:
        raise BadCellError(row, id_column, "")
    return value


def parse_metric_cells(
    cells: c.Mapping[str, str], columns: c.Iterable[MetricId], row: int
) -> dict[MetricId, float]:
    """Convert metric cells to floats, rejecting empty and non-numeric ones."""
    metrics: dict[MetricId, float] = {}
    for metric in columns:
        content = cells[metric.value]
        try:
            value = float(content)
        except ValueError:
            raise BadCellError(row, metric.value, content) from None
        if not math.isfinite(value):
            raise BadCellError(row, metric.value, content)
        metrics[metric] = value
    return metrics


def _metric_columns(header: c.Sequence[str]) -> list[MetricId]:
    known = {metric.value for metric in MetricId}
    unknown = [
        name
        for name in header
        if name not in known and name not in _IGNORED_COLUMNS
    ]
    if unknown:
        logger.warning(f"Ignoring unknown column(s): {', '.join(unknown)}")
    return [MetricId(name) for name in header if name in known]


def ingest_csv(
    stream: c.Iterable[str],
    *,
    provenance: str = "<stream>",
    require_nbi: bool = True,
    lenient: bool = False,
) -> RawDataset:
    """Read a metrics dataset, dropping metadata columns.

    Record ids come from ``class_id``/``test_id``, or from
    ``class_path``/``test_path`` (prefixed with ``project`` when present).

    Raises:
        MissingColumnError: A required metric column is absent.
        BadCellError: A metric cell is empty or not a finite number.
        DuplicateRecordError: Two rows share the same class and test id.
        InvalidRecordError: Records violate metric invariants and
            ``lenient`` is not set.
    """
    columns: list[MetricId] = []

    def check_header(header: c.Sequence[str]) -> None:
        columns.extend(_metric_columns(header))
        missing = [
            metric.value
            for metric in MetricId
            if metric in required_metrics(require_nbi=require_nbi)
            and metric not in columns
        ]
        if missing:
            raise MissingColumnError(missing)
        dropped = sorted(METADATA_COLUMNS & set(header))
        if dropped:
            logger.debug(f"Dropping metadata column(s): {', '.join(dropped)}")

    def parse(row: int, cells: c.Mapping[str, str]) -> tuple[int, ClassRecord]:
        return row, ClassRecord(
            class_id=_record_id(cells, "class_id", "class_path", row),
            test_id=_record_id(cells, "test_id", "test_path", row),
            metrics=parse_metric_cells(cells, columns, row),
        )

    records: list[ClassRecord] = []
    seen: dict[tuple[str, str], int] = {}
    violations: dict[str, tuple[str, ...]] = {}
    for row, record in read_rows(stream, parse, check_header=check_header):
        if record.key in seen:
            raise DuplicateRecordError(record.key, (seen[record.key], row))
        seen[record.key] = row
        if problems := validate_record(record, require_nbi=require_nbi):
            violations[f"row {row} ({record.class_id})"] = problems
        records.append(record)

    if violations:
        if not lenient:
            raise InvalidRecordError(violations)
        for where, problems in violations.items():
            logger.warning(
                f"Keeping invalid record {where}: {'; '.join(problems)}"
            )

    logger.info(f"Ingested {len(records)} record(s) from {provenance}")
    return RawDataset(records=tuple(records), provenance=provenance)


def read_dataset(
    path: os.PathLike[str], *, require_nbi: bool = True, lenient: bool = False
) -> RawDataset:
    try:
        with Path(path).open("r", newline="", encoding="utf-8") as f:
            return ingest_csv(
                f,
                provenance=str(path),
                require_nbi=require_nbi,
                lenient=lenient,
            )
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read dataset {path}: {e}") from e


def _shared_columns(records: c.Sequence[ClassRecord]) -> list[MetricId]:
    return [
        metric
        for metric in MetricId
        if all(metric in record.metrics for record in records)
    ]


def write_records_csv(
    records: c.Sequence[ClassRecord],
    stream: t.TextIO,
    *,
    labels: c.Sequence[EffectivenessLabel] | None = None,
    preamble: c.Iterable[str] = (),
) -> None:
    """Write records in the canonical schema.

    Columns are ``class_id,test_id`` followed by every metric present in all
    records, in canonical order, and ``label`` when ``labels`` are given.
    """
    columns = _shared_columns(records)
    fieldnames = [*ID_COLUMNS, *(m.value for m in columns)]
    if labels is not None:
        fieldnames.append(LABEL_COLUMN)

    def serialize(item: tuple[int, ClassRecord]) -> dict[str, str]:
        position, record = item
        row = {"class_id": record.class_id, "test_id": record.test_id}
        row.update({m.value: format_number(record[m]) for m in columns})
        if labels is not None:
            row[LABEL_COLUMN] = labels[position].value
        return row

    write_rows(
        stream,
        enumerate(records),
        serialize,
        fieldnames=fieldnames,
        preamble=preamble,
    )


def compute_quartiles(scores: c.Sequence[float]) -> tuple[float, float]:
    """First and third quartile by linear interpolation between closest ranks.

    Raises:
        TooFewValuesError: Fewer than 4 values.
    """
    if len(scores) < 4:
        raise TooFewValuesError(
            f"at least 4 values are needed for quartiles, got {len(scores)}"
        )
    q1, q3 = np.quantile(
        np.asarray(scores, dtype=np.float64), [0.25, 0.75], method="linear"
    )
    return float(q1), float(q3)


def _mutation_scores(records: c.Iterable[ClassRecord]) -> list[float]:
    scores: list[float] = []
    for record in records:
        if MetricId.M not in record.metrics:
            raise MissingColumnError([MetricId.M.value])
        scores.append(record[MetricId.M])
    return scores


def label_with_thresholds(
    records: c.Iterable[ClassRecord], q1: float, q3: float
) -> LabeledDataset:
    """Label ``M <= q1`` non-effective and ``M >= q3`` effective, drop the rest.

    Raises:
        DegenerateSplitError: ``q1 >= q3``.
    """
    if not q1 < q3:
        raise DegenerateSplitError(q1, q3)
    labeled: list[LabeledRecord] = []
    discarded = 0
    for record in records:
        score = record[MetricId.M]
        if score <= q1:
            label = EffectivenessLabel.NON_EFFECTIVE
        elif score >= q3:
            label = EffectivenessLabel.EFFECTIVE
        else:
            discarded += 1
            continue
        labeled.append(LabeledRecord(record=record, label=label))
    return LabeledDataset(
        records=tuple(labeled),
        q1_threshold=q1,
        q3_threshold=q3,
        discarded_count=discarded,
    )


def label_by_quartiles(
    data: RawDataset, *, thresholds: tuple[float, float] | None = None
) -> LabeledDataset:
    """Label records by the quartiles of their mutation scores.

    Arguments:
        thresholds: Use these ``(q1, q3)`` instead of computing quartiles.

    Raises:
        TooFewValuesError: Fewer than 4 records.
        DegenerateSplitError: The quartiles coincide.
    """
    scores = _mutation_scores(data.records)
    if thresholds is None:
        q1, q3 = compute_quartiles(scores)
        logger.info(f"Mutation score quartiles: q1={q1:g}, q3={q3:g}")
    else:
        q1, q3 = thresholds
        logger.info(f"Using configured thresholds: q1={q1:g}, q3={q3:g}")
    if q1 == q3:
        raise DegenerateSplitError(q1, q3)

    labeled = label_with_thresholds(data.records, q1, q3)
    logger.info(
        f"Kept {len(labeled)} of {len(data)} record(s)"
        + f" ({labeled.count(EffectivenessLabel.EFFECTIVE)} effective,"
        + f" {labeled.count(EffectivenessLabel.NON_EFFECTIVE)} non-effective),"
        + f" discarded {labeled.discarded_count}"
    )
    return labeled


def check_features(features: c.Sequence[MetricId]) -> tuple[MetricId, ...]:
    """Validate a feature selection.

    Raises:
        ForbiddenFeatureError: A test-quality metric is requested.
        InputError: The selection is empty or repeats a metric.
    """
    forbidden = [m for m in features if not m.is_independent]
    if forbidden:
        raise ForbiddenFeatureError(forbidden)
    if not features:
        raise InputError("at least one feature is required")
    if len(set(features)) != len(features):
        raise InputError("features must not repeat")
    return tuple(features)


def to_feature_matrix(
    data: LabeledDataset, features: c.Sequence[MetricId]
) -> FeatureMatrix:
    """Rows in dataset order, columns in ``features`` order.

    Raises:
        ForbiddenFeatureError: ``M``, ``L`` or ``B`` is requested.
        MissingFeatureError: A record lacks a requested feature.
    """
    features = check_features(features)
    rows: list[list[float]] = []
    for labeled in data.records:
        missing = [m.value for m in features if m not in labeled.record.metrics]
        if missing:
            raise MissingFeatureError(
                f"{labeled.record.class_id} lacks feature(s)"
                + f" {', '.join(missing)}"
            )
        rows.append([labeled.record[m] for m in features])
    return FeatureMatrix.from_arrays(
        features,
        rows,
        [labeled.label.as_int() for labeled in data.records],
        [labeled.record.class_id for labeled in data.records],
    )


def available_features(
    records: c.Sequence[ClassRecord], wanted: c.Sequence[MetricId]
) -> tuple[MetricId, ...]:
    """``wanted`` without the metrics some record lacks.

    NBI is the usual casualty, on runs without class files.
    """
    present = set(_shared_columns(records))
    dropped = [m for m in wanted if m not in present]
    if dropped:
        logger.warning(
            f"Feature(s) {', '.join(dropped)} missing from the data,"
            + " not using them"
        )
    return tuple(m for m in wanted if m in present)


def read_feature_rows(
    path: os.PathLike[str], features: c.Sequence[MetricId]
) -> list[tuple[str, list[float]]]:
    """Read ``(class id, feature values)`` rows for prediction.

    Only the ``features`` columns are read, in that order; a row without
    ``class_id`` or ``class_path`` is named by its row number.

    Raises:
        FeatureMismatchError: The file lacks some of ``features``.
        BadCellError: A feature cell is empty or not a finite number.
    """

    def check_header(header: c.Sequence[str]) -> None:
        if missing := [m.value for m in features if m.value not in header]:
            raise FeatureMismatchError(missing)

    def parse(row: int, cells: c.Mapping[str, str]) -> tuple[str, list[float]]:
        try:
            name = _record_id(cells, "class_id", "class_path", row)
        except BadCellError:
            name = f"row {row}"
        metrics = parse_metric_cells(cells, features, row)
        return name, [metrics[m] for m in features]

    return list(CsvInput(path).read(parse, check_header=check_header))
