from pathlib import Path

import pytest

from testmet.base import Testmet
from testmet.config import RunConfig
from testmet.dataset import MissingFeatureError, RawDataset, write_records_csv
from testmet.exc import InputError
from testmet.models import ClassRecord, FeatureSet, MetricId
from tests.conftest import MOCK_INJECT, make_record


def _raw(*, nbi: bool = True) -> RawDataset:
    records = [
        make_record(f"org.x.C{i}", i / 19, seed=i, LOC=100 - i)
        for i in range(20)
    ]
    if not nbi:
        records = [
            ClassRecord(
                class_id=r.class_id,
                test_id=r.test_id,
                metrics={k: v for k, v in r.metrics.items() if k != "NBI"},
            )
            for r in records
        ]
    return RawDataset(records=tuple(records), provenance="test")


def test_config_comes_from_inject(
    mock_inject: MOCK_INJECT, tmp_path: Path
) -> None:
    dataset = tmp_path / "metrics.csv"
    with dataset.open("w", newline="") as f:
        write_records_csv(_raw().records, f)
    mock_inject(
        RunConfig, RunConfig(dataset=dataset, out=tmp_path / "out", jobs=1)
    )

    testmet = Testmet()
    path = testmet.label_cmd()

    assert testmet.out == (tmp_path / "out").resolve()
    assert path == testmet.out / "labeled.csv"
    assert (testmet.out / "manifest.json").exists()


def test_load_records_without_source() -> None:
    testmet = Testmet(config=RunConfig(jobs=1))

    with pytest.raises(InputError, match="no metric source"):
        _ = testmet.load_records()


def test_preset_features_skip_missing_nbi() -> None:
    testmet = Testmet(config=RunConfig(feature_set=FeatureSet.CODE, jobs=1))

    matrix = testmet.feature_matrix(testmet.label(_raw(nbi=False)))

    assert MetricId.NBI not in matrix.feature_ids
    assert MetricId.LOC in matrix.feature_ids


def test_explicit_features_are_required() -> None:
    testmet = Testmet(
        config=RunConfig(features=(MetricId.NBI, MetricId.LOC), jobs=1)
    )

    with pytest.raises(MissingFeatureError, match="NBI"):
        _ = testmet.feature_matrix(testmet.label(_raw(nbi=False)))
