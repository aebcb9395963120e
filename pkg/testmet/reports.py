"""Report bundle: CSV and Markdown tables stamped with a run manifest hash."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import typing as t
from pathlib import Path

from loguru import logger

from testmet import utils
from testmet.dataset import write_records_csv
from testmet.inputs.csv import write_rows
from testmet.models import (
    DesignProperty,
    EffectivenessLabel,
    MetricId,
    TestmetModel,
)

if t.TYPE_CHECKING:
    import collections.abc as c

    from testmet.classifiers import EvalReport
    from testmet.dataset import LabeledDataset
    from testmet.ranking import RankingTable
    from testmet.stats import CorrelationEntry, CorrelationReport

MANIFEST_FILE = "manifest.json"
DEFAULT_TOP = 10


class RunManifest(TestmetModel, frozen=True):
    """What a report bundle was computed from."""

    command: str
    source: str
    seed: int | None = None
    ingested: int | None = None
    labeled: int | None = None
    effective: int | None = None
    non_effective: int | None = None
    discarded: int | None = None
    thresholds: tuple[float, float] | None = None
    features: tuple[MetricId, ...] = ()
    parameters: dict[str, t.Any] = {}

    def canonical_json(self) -> str:
        return json.dumps(
            self.model_dump(mode="json"), sort_keys=True, separators=(",", ":")
        )

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def with_labeling(self, data: LabeledDataset, ingested: int) -> RunManifest:
        return utils.replace(
            self,
            ingested=ingested,
            labeled=len(data),
            effective=data.count(EffectivenessLabel.EFFECTIVE),
            non_effective=data.count(EffectivenessLabel.NON_EFFECTIVE),
            discarded=data.discarded_count,
            thresholds=(data.q1_threshold, data.q3_threshold),
        )


class PredictionRow(TestmetModel, frozen=True):
    class_id: str
    score: float
    label: EffectivenessLabel


def _markdown_table(
    header: c.Sequence[str], rows: c.Iterable[c.Sequence[str]]
) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines)


def _fixed(value: float) -> str:
    return f"{value:.3f}"


@dataclasses.dataclass
class ReportWriter:
    """Writes the files of one run into ``out``, stamped with its manifest."""

    out: Path
    manifest: RunManifest

    @property
    def stamp(self) -> str:
        return f"manifest {self.manifest.digest}"

    def _csv[T](
        self,
        name: str,
        entries: c.Iterable[T],
        serialize: c.Callable[[T], c.Mapping[str, str]],
        *,
        fieldnames: c.Sequence[str],
        preamble: c.Sequence[str] = (),
    ) -> Path:
        path = self.out / name
        with utils.atomic_write(path, newline="") as f:
            write_rows(
                f,
                entries,
                serialize,
                fieldnames=fieldnames,
                preamble=[self.stamp, *preamble],
            )
        logger.debug(f"Wrote {path}")
        return path

    def _markdown(self, name: str, title: str, body: str) -> Path:
        path = self.out / name
        with utils.atomic_write(path) as f:
            _ = f.write(f"# {title}\n\n{body}\n\n{self.stamp}\n")
        logger.debug(f"Wrote {path}")
        return path

    def write_manifest(self) -> Path:
        path = self.out / MANIFEST_FILE
        with utils.atomic_write(path) as f:
            manifest = self.manifest.model_dump(mode="json")
            _ = f.write(json.dumps(manifest, sort_keys=True, indent=2))
            _ = f.write("\n")
        return path

    def write_correlations(self, report: CorrelationReport) -> list[Path]:
        def strong(item: tuple[int, CorrelationEntry]) -> dict[str, str]:
            rank, entry = item
            return {
                "rank": str(rank),
                "metric": entry.metric.value,
                "design_property": entry.design_property.value,
                "rho": utils.format_number(entry.rho),
            }

        by_metric = {entry.metric: entry for entry in report.full}
        skipped = {skip.metric: skip.reason for skip in report.skipped}
        grouped = [
            (prop, metric)
            for prop in DesignProperty
            for metric in MetricId
            if metric.design_property is prop
            and (metric in by_metric or metric in skipped)
        ]

        def full(item: tuple[DesignProperty, MetricId]) -> dict[str, str]:
            prop, metric = item
            entry = by_metric.get(metric)
            return {
                "design_property": prop.value,
                "metric": metric.value,
                "rho": "" if entry is None else utils.format_number(entry.rho),
                "skipped": skipped.get(metric, ""),
            }

        preamble = [
            f"target {report.target}",
            f"population {report.population_kind} {report.population}",
            f"threshold {utils.format_number(report.threshold)}",
        ]
        markdown = _markdown_table(
            ["Rank", "Metric", "Design property", "rho"],
            (
                [
                    str(rank),
                    e.metric.value,
                    e.design_property.value,
                    _fixed(e.rho),
                ]
                for rank, e in enumerate(report.entries, start=1)
            ),
        )
        return [
            self._csv(
                "correlations.csv",
                enumerate(report.entries, start=1),
                strong,
                fieldnames=["rank", "metric", "design_property", "rho"],
                preamble=preamble,
            ),
            self._csv(
                "correlations_full.csv",
                grouped,
                full,
                fieldnames=["design_property", "metric", "rho", "skipped"],
                preamble=preamble,
            ),
            self._markdown(
                "correlations.md",
                f"Spearman correlation with {report.target}",
                f"{report.population} {report.population_kind} record(s),"
                + f" |rho| >= {report.threshold:g}.\n\n{markdown}",
            ),
        ]

    def write_classification(self, report: EvalReport) -> list[Path]:
        fieldnames = [
            "classifier",
            "accuracy",
            "precision",
            "recall",
            "f_measure",
            "auc",
            "true_negative",
            "false_positive",
            "false_negative",
            "true_positive",
        ]
        markdown = _markdown_table(
            [
                "Classifier",
                "Accuracy",
                "Precision",
                "Recall",
                "F-measure",
                "AUC",
            ],
            (
                [
                    clf.kind.value,
                    _fixed(clf.accuracy),
                    _fixed(clf.precision),
                    _fixed(clf.recall),
                    _fixed(clf.f_measure),
                    _fixed(clf.auc),
                ]
                for clf in report.classifiers
            ),
        )
        return [
            self._csv(
                "classification.csv",
                report.classifiers,
                lambda clf: {
                    "classifier": clf.kind.value,
                    "accuracy": utils.format_number(clf.accuracy),
                    "precision": utils.format_number(clf.precision),
                    "recall": utils.format_number(clf.recall),
                    "f_measure": utils.format_number(clf.f_measure),
                    "auc": utils.format_number(clf.auc),
                    "true_negative": str(clf.confusion.true_negative),
                    "false_positive": str(clf.confusion.false_positive),
                    "false_negative": str(clf.confusion.false_negative),
                    "true_positive": str(clf.confusion.true_positive),
                },
                fieldnames=fieldnames,
                preamble=[
                    f"folds {report.folds}",
                    f"averaging {report.averaging}",
                    f"auc {report.auc_mode}",
                ],
            ),
            self._markdown(
                "classification.md",
                "Classification results",
                f"{report.folds}-fold cross-validation"
                + f" over {report.rows} row(s),"
                + f" seed {report.seed}; precision, recall and F-measure are"
                + f" {report.averaging} averages, AUC is computed over"
                + f" {report.auc_mode} out-of-fold scores.\n\n{markdown}",
            ),
        ]

    def write_ranking(
        self, tables: c.Sequence[RankingTable], *, top: int = DEFAULT_TOP
    ) -> list[Path]:
        algorithms = [table.algorithm for table in tables]
        longest = max((len(table.entries) for table in tables), default=0)
        depth = min(top, longest)

        def cell(table: RankingTable, rank: int) -> str:
            if rank < len(table.entries):
                return table.entries[rank].metric.value
            return ""

        def scored(table: RankingTable, rank: int) -> str:
            if rank < len(table.entries):
                entry = table.entries[rank]
                return f"{entry.metric} ({entry.score:.4f})"
            return ""

        def wide(rank: int) -> dict[str, str]:
            row = {"rank": str(rank + 1)}
            row.update(
                {table.algorithm.value: cell(table, rank) for table in tables}
            )
            return row

        long_rows = [
            (table.algorithm, rank, entry)
            for table in tables
            for rank, entry in enumerate(table.entries, start=1)
        ]
        markdown = _markdown_table(
            ["Rank", *algorithms],
            (
                [str(rank + 1), *(scored(table, rank) for table in tables)]
                for rank in range(depth)
            ),
        )
        return [
            self._csv(
                "ranking.csv",
                range(depth),
                wide,
                fieldnames=["rank", *(a.value for a in algorithms)],
            ),
            self._csv(
                "ranking_full.csv",
                long_rows,
                lambda item: {
                    "algorithm": item[0].value,
                    "rank": str(item[1]),
                    "metric": item[2].metric.value,
                    "score": utils.format_number(item[2].score),
                },
                fieldnames=["algorithm", "rank", "metric", "score"],
            ),
            self._markdown("ranking.md", f"Top {depth} features", markdown),
        ]

    def write_labeled(self, data: LabeledDataset) -> Path:
        path = self.out / "labeled.csv"
        with utils.atomic_write(path, newline="") as f:
            write_records_csv(
                data.class_records,
                f,
                labels=[labeled.label for labeled in data.records],
                preamble=[
                    self.stamp,
                    f"thresholds {utils.format_number(data.q1_threshold)}"
                    + f" {utils.format_number(data.q3_threshold)}",
                ],
            )
        return path

    def write_predictions(self, rows: c.Sequence[PredictionRow]) -> Path:
        counts = {
            label: sum(1 for row in rows if row.label is label)
            for label in EffectivenessLabel
        }
        return self._csv(
            "predictions.csv",
            rows,
            lambda row: {
                "class_id": row.class_id,
                "score": utils.format_number(row.score),
                "label": row.label.value,
            },
            fieldnames=["class_id", "score", "label"],
            preamble=[
                ", ".join(f"{label} {count}" for label, count in counts.items())
            ],
        )

