from __future__ import annotations

import dataclasses
import functools
import typing as t
from pathlib import Path

import inject
from loguru import logger

from testmet import utils
from testmet.classifiers import (
    ClassifierKind,
    evaluate_all,
    load_model,
    predict,
    save_model,
    train_model,
)
from testmet.config import RunConfig
from testmet.dataset import (
    LabeledDataset,
    RawDataset,
    available_features,
    label_by_quartiles,
    read_dataset,
    read_feature_rows,
    to_feature_matrix,
    write_records_csv,
)
from testmet.exc import InputError
from testmet.java import extract_corpus, read_quality_scores
from testmet.models import (
    INDEPENDENT_METRICS,
    EffectivenessLabel,
    FeatureMatrix,
)
from testmet.ranking import rank_all
from testmet.reports import PredictionRow, ReportWriter, RunManifest
from testmet.stats import Population, correlation_table

if t.TYPE_CHECKING:
    import os

    from testmet.classifiers import EvalReport
    from testmet.ranking import RankingTable
    from testmet.stats import CorrelationReport

METRICS_FILE = "metrics.csv"
MODEL_FILE = "model.json"


@t.final
@dataclasses.dataclass
class Testmet:
    """Runs the commands against the injected :class:`RunConfig`."""

    config: RunConfig = dataclasses.field(
        default_factory=lambda: inject.instance(RunConfig)
    )

    @functools.cached_property
    def out(self) -> Path:
        return Path(self.config.out).resolve()

    def _extract(self) -> RawDataset:
        config = self.config
        scores = read_quality_scores(config.scores) if config.scores else None
        records = extract_corpus(
            config.src,
            class_paths=config.classes,
            pairing_file=config.pairs,
            scores=scores,
            jobs=config.jobs,
            max_class_version=config.max_class_version,
        )
        return RawDataset(
            records=tuple(records),
            provenance=",".join(str(p) for p in config.src),
        )

    def load_records(self) -> RawDataset:
        """The configured metric source: a dataset CSV or extracted sources.

        Raises:
            InputError: Neither or both sources are configured.
        """
        if self.config.dataset is not None:
            return read_dataset(
                self.config.dataset,
                require_nbi=self.config.require_nbi,
                lenient=self.config.lenient,
            )
        if self.config.src:
            return self._extract()
        raise InputError(
            "no metric source: give a dataset or source directories"
        )

    def label(self, raw: RawDataset) -> LabeledDataset:
        return label_by_quartiles(raw, thresholds=self.config.quartiles)

    def feature_matrix(self, data: LabeledDataset) -> FeatureMatrix:
        """Labeled records as a matrix over the configured features.

        Preset features absent from the data (NBI without class files) are
        left out; explicitly listed ones are required.
        """
        features = self.config.feature_ids
        if self.config.features is None:
            features = available_features(data.class_records, features)
        return to_feature_matrix(data, features)

    def correlations(
        self, raw: RawDataset, labeled: LabeledDataset | None
    ) -> CorrelationReport:
        if self.config.population is Population.LABELED:
            records = (labeled or self.label(raw)).class_records
        else:
            records = raw.records
        return correlation_table(
            records,
            threshold=self.config.threshold,
            features=INDEPENDENT_METRICS,
            population_kind=self.config.population,
        )

    def evaluation(self, matrix: FeatureMatrix, seed: int) -> EvalReport:
        return evaluate_all(
            matrix,
            {
                kind: self.config.params_for(kind)
                for kind in self.config.classifiers
            },
            k=self.config.k,
            seed=seed,
            jobs=self.config.jobs,
        )

    def ranking(self, matrix: FeatureMatrix) -> list[RankingTable]:
        return rank_all(matrix, self.config.ranking_algorithms)

    def _writer(
        self,
        command: str,
        raw: RawDataset,
        labeled: LabeledDataset | None = None,
        **fields: t.Any,
    ) -> ReportWriter:
        manifest = RunManifest(
            command=command,
            source=raw.provenance,
            seed=self.config.seed,
            ingested=len(raw),
            parameters=self.config.manifest_parameters(),
            **fields,
        )
        if labeled is not None:
            manifest = manifest.with_labeling(labeled, len(raw))
        return ReportWriter(self.out, manifest)

    def extract_cmd(self, output: os.PathLike[str] | None = None) -> Path:
        if not self.config.src:
            raise InputError("extract needs at least one source directory")
        raw = self._extract()
        path = Path(output) if output is not None else self.out / METRICS_FILE
        with utils.atomic_write(path, newline="") as f:
            write_records_csv(raw.records, f)
        logger.success(f"Wrote {len(raw)} record(s) to {path}")
        return path

    def label_cmd(self) -> Path:
        raw = self.load_records()
        labeled = self.label(raw)
        writer = self._writer("label", raw, labeled)
        path = writer.write_labeled(labeled)
        _ = writer.write_manifest()
        logger.success(f"Wrote {len(labeled)} labeled record(s) to {path}")
        return path

    def correlate_cmd(self) -> list[Path]:
        raw = self.load_records()
        labeled = (
            self.label(raw)
            if self.config.population is Population.LABELED
            else None
        )
        report = self.correlations(raw, labeled)

        writer = self._writer("correlate", raw, labeled)
        paths = writer.write_correlations(report)
        _ = writer.write_manifest()
        for entry in report.entries:
            logger.info(f"{entry.metric}: rho = {entry.rho:+.3f}")
        return paths

    def train_cmd(
        self, kind: ClassifierKind, output: os.PathLike[str] | None = None
    ) -> Path:
        seed = self.config.require_seed("train")
        matrix = self.feature_matrix(self.label(self.load_records()))
        model = train_model(
            matrix,
            kind,
            self.config.params_for(kind),
            seed=seed,
            jobs=self.config.jobs,
        )
        path = Path(output) if output is not None else self.out / MODEL_FILE
        save_model(model, path)
        logger.success(
            f"Saved {kind} over {len(matrix.feature_ids)} feature(s) to {path}"
        )
        return path

    def evaluate_cmd(self) -> list[Path]:
        seed = self.config.require_seed("evaluate")
        raw = self.load_records()
        labeled = self.label(raw)
        matrix = self.feature_matrix(labeled)
        report = self.evaluation(matrix, seed)

        writer = self._writer(
            "evaluate", raw, labeled, features=matrix.feature_ids
        )
        paths = writer.write_classification(report)
        _ = writer.write_manifest()
        return paths

    def rank_cmd(self) -> list[Path]:
        raw = self.load_records()
        labeled = self.label(raw)
        matrix = self.feature_matrix(labeled)
        tables = self.ranking(matrix)

        writer = self._writer(
            "rank", raw, labeled, features=matrix.feature_ids
        )
        paths = writer.write_ranking(tables, top=self.config.top)
        _ = writer.write_manifest()
        for table in tables:
            leaders = ", ".join(entry.metric for entry in table.top(3))
            logger.info(f"{table.algorithm}: {leaders}")
        return paths

    def predict_cmd(
        self, model_path: os.PathLike[str], input_path: os.PathLike[str]
    ) -> Path:
        model = load_model(model_path)
        rows = read_feature_rows(input_path, model.feature_ids)
        predictions: list[PredictionRow] = []
        for class_id, values in rows:
            label, score = predict(model, values)
            predictions.append(
                PredictionRow(class_id=class_id, score=score, label=label)
            )

        manifest = RunManifest(
            command="predict",
            source=str(input_path),
            seed=model.seed,
            features=model.feature_ids,
            parameters={"model": str(model_path), "kind": model.kind.value},
        )
        writer = ReportWriter(self.out, manifest)
        path = writer.write_predictions(predictions)
        _ = writer.write_manifest()
        counts = {
            label: sum(1 for row in predictions if row.label is label)
            for label in EffectivenessLabel
        }
        logger.success(
            f"Predicted {len(predictions)} class(es): "
            + ", ".join(f"{count} {label}" for label, count in counts.items())
        )
        return path

    def pipeline_cmd(self) -> list[Path]:
        """Correlations, cross-validated classifiers and rankings in one bundle.

        Everything is computed before the first file is written.
        """
        seed = self.config.require_seed("pipeline")
        raw = self.load_records()
        labeled = self.label(raw)
        correlations = self.correlations(raw, labeled)
        matrix = self.feature_matrix(labeled)
        evaluation = self.evaluation(matrix, seed)
        tables = self.ranking(matrix)

        writer = self._writer(
            "pipeline", raw, labeled, features=matrix.feature_ids
        )
        paths = [
            *writer.write_correlations(correlations),
            *writer.write_classification(evaluation),
            *writer.write_ranking(tables, top=self.config.top),
            writer.write_manifest(),
        ]
        logger.success(f"Wrote {len(paths)} report file(s) to {self.out}")
        return paths
