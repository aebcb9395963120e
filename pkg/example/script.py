"""Cross-validate the lightweight code-only model against the full one.

Usage: ``python example/script.py metrics.csv``
"""

from __future__ import annotations

import sys
from pathlib import Path

import inject
from loguru import logger

from testmet.base import Testmet
from testmet.config import load_config, override
from testmet.injections import inject_configure
from testmet.logs import LoggingLevel, setup_logging
from testmet.models import FeatureSet

ROOT = Path(__file__).parent.resolve()


def main(dataset: Path) -> None:
    setup_logging(LoggingLevel.INFO)
    config = load_config(ROOT / "testmet.conf", {"dataset": dataset, "k": 5})
    _ = inject.configure(inject_configure(config), allow_override=True)

    raw = Testmet().load_records()
    for preset in (FeatureSet.CODE, FeatureSet.ALL):
        runner = Testmet(config=override(config, feature_set=preset))
        matrix = runner.feature_matrix(runner.label(raw))
        report = runner.evaluation(matrix, seed=config.seed or 0)
        for clf in report.classifiers:
            logger.info(
                f"{preset:>11} {clf.kind}: F-measure {clf.f_measure:.3f},"
                + f" AUC {clf.auc:.3f}"
            )


if __name__ == "__main__":
    main(Path(sys.argv[1]))
