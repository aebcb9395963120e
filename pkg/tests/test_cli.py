import collections.abc as c
import json
from pathlib import Path

import inject
import pytest
from loguru import logger

from testmet.cli import app
from testmet.config import RunConfig
from testmet.dataset import write_records_csv
from testmet.injections import inject_configure
from testmet.models import ClassRecord
from tests.conftest import make_record
from tests.java import CORPUS, MAIN, TEST

FAST_CONFIG = "trees = 5\nepochs = 30\nk = 3\n"


@pytest.fixture(autouse=True)
def restore_injections() -> c.Iterator[None]:
    yield
    _ = inject.configure(
        inject_configure(RunConfig(out=Path("/nonexistent/out"), jobs=1)),
        clear=True,
    )


def run(*args: str | Path) -> int:
    """Exit code of the command line, ``0`` when it returns normally."""
    try:
        app.meta([str(arg) for arg in args])
    except SystemExit as e:
        return int(e.code or 0)
    return 0


def _write_dataset(path: Path, records: list[ClassRecord]) -> Path:
    with path.open("w", newline="") as f:
        write_records_csv(records, f)
    return path


@pytest.fixture
def dataset(tmp_path: Path) -> Path:
    records = [
        make_record(f"org.x.C{i}", i / 59, seed=i, LOC=100 - i)
        for i in range(60)
    ]
    return _write_dataset(tmp_path / "metrics.csv", records)


@pytest.fixture
def config(tmp_path: Path) -> Path:
    path = tmp_path / "testmet.conf"
    _ = path.write_text(FAST_CONFIG)
    return path


def test_label(dataset: Path, tmp_path: Path) -> None:
    out = tmp_path / "out"

    assert run("--out", out, "label", "--dataset", dataset) == 0

    assert (out / "labeled.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "label"
    assert manifest["ingested"] == 60
    assert manifest["labeled"] + manifest["discarded"] == 60


def test_log_file(dataset: Path, tmp_path: Path) -> None:
    log = tmp_path / "logs" / "run.log"

    code = run(
        "-o", tmp_path / "out", "--log-file", log, "label", "--dataset", dataset
    )
    logger.remove()  # closes the file sink

    assert code == 0
    assert "labeled record(s)" in log.read_text()


def test_correlate(dataset: Path, tmp_path: Path) -> None:
    out = tmp_path / "out"

    code = run(
        "-o", out, "correlate", "--dataset", dataset, "--population", "labeled"
    )

    assert code == 0
    lines = (out / "correlations.csv").read_text().splitlines()
    assert lines[2].startswith("# population labeled ")
    rank, metric, prop, rho = lines[5].split(",")
    assert (rank, metric, prop) == ("1", "LOC", "Size")
    assert float(rho) == pytest.approx(-1.0)


def test_rank(dataset: Path, tmp_path: Path) -> None:
    out = tmp_path / "out"

    code = run(
        "-o", out, "rank", "--dataset", dataset,
        "--ranking", "OneR", "--top", "3",
    )  # fmt: skip

    assert code == 0
    lines = (out / "ranking.csv").read_text().splitlines()
    assert lines[1] == "rank,OneR"
    assert len(lines) == 5


def test_pipeline_is_reproducible(
    dataset: Path, config: Path, tmp_path: Path
) -> None:
    first, second = tmp_path / "first", tmp_path / "second"

    for out, jobs in ((first, "1"), (second, "2")):
        code = run(
            "-c", config, "--seed", "42", "-o", out, "-j", jobs,
            "pipeline", "--dataset", dataset,
        )  # fmt: skip
        assert code == 0

    names = sorted(path.name for path in first.iterdir())
    assert names == sorted(path.name for path in second.iterdir())
    assert {
        "manifest.json",
        "correlations.csv",
        "correlations_full.csv",
        "correlations.md",
        "classification.csv",
        "classification.md",
        "ranking.csv",
        "ranking_full.csv",
        "ranking.md",
    } <= set(names)
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_manifest_hash_stamps_every_file(
    dataset: Path, config: Path, tmp_path: Path
) -> None:
    out = tmp_path / "out"
    code = run(
        "-c", config, "--seed", "1", "-o", out, "evaluate", "--dataset", dataset
    )
    assert code == 0

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 1
    assert manifest["parameters"]["k"] == 3
    text = (out / "classification.csv").read_text()
    assert text.startswith("# manifest ")
    assert "MultilayerPerceptron" in text


def test_train_and_predict(dataset: Path, config: Path, tmp_path: Path) -> None:
    out = tmp_path / "out"
    model = tmp_path / "model.json"

    code = run(
        "-c", config, "--seed", "3", "-o", out,
        "train", "--dataset", dataset, "--classifier", "DecisionTree",
        "--features", "LOC,WMC", "--output", model,
    )  # fmt: skip
    assert code == 0
    assert json.loads(model.read_text())["structure"]["kind"] == "DecisionTree"

    assert run("-o", out, "predict", "--model", model, "--input", dataset) == 0
    lines = (out / "predictions.csv").read_text().splitlines()
    assert lines[2] == "class_id,score,label"
    assert len(lines) == 63
    assert lines[3].endswith(",NonEffective")
    assert lines[-1].endswith(",Effective")


def test_predict_schema_mismatch(
    dataset: Path, config: Path, tmp_path: Path
) -> None:
    model = tmp_path / "model.json"
    narrow = tmp_path / "narrow.csv"
    _ = narrow.write_text("class_id,WMC\na,1\n")
    code = run(
        "-c", config, "--seed", "3", "train", "--dataset", dataset,
        "--features", "LOC,WMC", "--output", model,
    )  # fmt: skip
    assert code == 0

    code = run("-o", tmp_path, "predict", "--model", model, "--input", narrow)
    assert code == 5


def test_missing_seed(dataset: Path, tmp_path: Path) -> None:
    assert run("-o", tmp_path, "evaluate", "--dataset", dataset) == 2


def test_missing_source(tmp_path: Path) -> None:
    assert run("-o", tmp_path, "label") == 2


def test_unknown_classifier(dataset: Path, tmp_path: Path) -> None:
    code = run(
        "--seed", "1", "-o", tmp_path,
        "train", "--dataset", dataset, "--classifier", "NaiveBayes",
    )  # fmt: skip
    assert code == 2


def test_invalid_config_value(dataset: Path, tmp_path: Path) -> None:
    config = tmp_path / "bad.conf"
    _ = config.write_text("threshold = 3\n")

    assert run("-c", config, "label", "--dataset", dataset) == 2


def test_degenerate_labeling(tmp_path: Path) -> None:
    dataset = _write_dataset(
        tmp_path / "flat.csv",
        [make_record(f"C{i}", 0.5, seed=i) for i in range(10)],
    )

    assert run("-o", tmp_path, "label", "--dataset", dataset) == 3


def test_too_few_rows_for_folds(tmp_path: Path) -> None:
    dataset = _write_dataset(
        tmp_path / "small.csv",
        [make_record(f"C{i}", i / 11, seed=i) for i in range(12)],
    )

    code = run("--seed", "1", "-o", tmp_path, "evaluate", "--dataset", dataset)

    assert code == 4


def test_extract(tmp_path: Path) -> None:
    out = tmp_path / "out"

    assert run("-o", out, "extract", "--src", MAIN, "--src", TEST) == 0

    written = (out / "metrics.csv").read_bytes().splitlines(keepends=True)
    expected = (CORPUS / "expected_metrics.csv").read_bytes()
    assert b"".join(ln for ln in written if not ln.startswith(b"#")) == expected


def test_extract_and_dataset_together(dataset: Path, tmp_path: Path) -> None:
    code = run("-o", tmp_path, "label", "--dataset", dataset, "--src", MAIN)

    assert code == 2
