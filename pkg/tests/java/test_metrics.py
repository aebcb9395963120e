import pytest

from testmet.java import (
    CorpusIndex,
    build_corpus_index,
    compute_code_metrics,
    compute_test_effort_metrics,
    cyclomatic_complexity,
    parse_source,
)
from testmet.java._index import ClassUnit
from testmet.models import CODE_METRICS, MetricId
from tests.java import TEST, corpus_index, parse_file


@pytest.fixture(scope="module")
def index() -> CorpusIndex:
    return corpus_index()


SHAPE = {
    "LOC": 23,
    "LOCCOM": 2,
    "NPM": 2,
    "NSTAM": 0,
    "NOF": 4,
    "NSTAF": 1,
    "NMC": 2,
    "NMCI": 1,
    "NMCE": 1,
    "WMC": 8,
    "AMC": 2.0,
    "RFC": 5,
    "DIT": 1,
    "NOC": 1,
    "MFA": 0.4,
    "CBO": 2,
    "IC": 1,
    "CBM": 1,
    "Ca": 1,
    "Ce": 3,
    "LCOM": 4,
    "LCOM3": 3.5 / 3,
    "CAM": 0.5,
    "DAM": 0.5,
    "NPRIF": 1,
    "NPRIM": 1,
    "NPROM": 0,
}
SQUARE = {
    "LOC": 9,
    "LOCCOM": 0,
    "NPM": 2,
    "NSTAM": 0,
    "NOF": 0,
    "NSTAF": 0,
    "NMC": 2,
    "NMCI": 0,
    "NMCE": 2,
    "WMC": 2,
    "AMC": 1.0,
    "RFC": 3,
    "DIT": 2,
    "NOC": 0,
    "MFA": 0.5,
    "CBO": 1,
    "IC": 2,
    "CBM": 1,
    "Ca": 0,
    "Ce": 1,
    "LCOM": 1,
    "LCOM3": 0.0,
    "CAM": 0.5,
    "DAM": 1.0,
    "NPRIF": 0,
    "NPRIM": 0,
    "NPROM": 0,
}
POINT = {
    "LOC": 9,
    "LOCCOM": 0,
    "NPM": 2,
    "NSTAM": 0,
    "NOF": 1,
    "NSTAF": 0,
    "NMC": 0,
    "NMCI": 0,
    "NMCE": 0,
    "WMC": 2,
    "AMC": 1.0,
    "RFC": 2,
    "DIT": 0,
    "NOC": 0,
    "MFA": 0.0,
    "CBO": 3,
    "IC": 0,
    "CBM": 0,
    "Ca": 3,
    "Ce": 0,
    "LCOM": 0,
    "LCOM3": 0.0,
    "CAM": 0.5,
    "DAM": 1.0,
    "NPRIF": 1,
    "NPRIM": 0,
    "NPROM": 0,
}
REGISTRY = {
    "LOC": 16,
    "LOCCOM": 0,
    "NPM": 2,
    "NSTAM": 0,
    "NOF": 1,
    "NSTAF": 0,
    "NMC": 3,
    "NMCI": 0,
    "NMCE": 3,
    "WMC": 4,
    "AMC": 2.0,
    "RFC": 4,
    "DIT": 0,
    "NOC": 0,
    "MFA": 0.0,
    "CBO": 1,
    "IC": 0,
    "CBM": 0,
    "Ca": 0,
    "Ce": 3,
    "LCOM": 0,
    "LCOM3": 0.0,
    "CAM": 0.5,
    "DAM": 1.0,
    "NPRIF": 1,
    "NPRIM": 0,
    "NPROM": 0,
}
COLOR = {
    "LOC": 7,
    "LOCCOM": 0,
    "NPM": 1,
    "NSTAM": 0,
    "NOF": 0,
    "NSTAF": 0,
    "NMC": 0,
    "NMCI": 0,
    "NMCE": 0,
    "WMC": 2,
    "AMC": 2.0,
    "RFC": 1,
    "DIT": 0,
    "NOC": 0,
    "MFA": 0.0,
    "CBO": 0,
    "IC": 0,
    "CBM": 0,
    "Ca": 0,
    "Ce": 0,
    "LCOM": 0,
    "LCOM3": 0.0,
    "CAM": 1.0,
    "DAM": 1.0,
    "NPRIF": 0,
    "NPRIM": 0,
    "NPROM": 0,
}
BASE = {
    "LOC": 10,
    "LOCCOM": 0,
    "NPM": 2,
    "NSTAM": 0,
    "NOF": 1,
    "NSTAF": 0,
    "NMC": 1,
    "NMCI": 0,
    "NMCE": 1,
    "WMC": 3,
    "AMC": 1.0,
    "RFC": 4,
    "DIT": 0,
    "NOC": 1,
    "MFA": 0.0,
    "CBO": 1,
    "IC": 0,
    "CBM": 0,
    "Ca": 0,
    "Ce": 2,
    "LCOM": 3,
    "LCOM3": 1.0,
    "CAM": 1 / 3,
    "DAM": 1.0,
    "NPRIF": 0,
    "NPRIM": 0,
    "NPROM": 0,
}
STRINGS = {
    "LOC": 7,
    "LOCCOM": 0,
    "NPM": 1,
    "NSTAM": 1,
    "NOF": 0,
    "NSTAF": 0,
    "NMC": 1,
    "NMCI": 0,
    "NMCE": 1,
    "WMC": 2,
    "AMC": 1.0,
    "RFC": 3,
    "DIT": 0,
    "NOC": 0,
    "MFA": 0.0,
    "CBO": 0,
    "IC": 0,
    "CBM": 0,
    "Ca": 0,
    "Ce": 1,
    "LCOM": 1,
    "LCOM3": 0.0,
    "CAM": 0.5,
    "DAM": 1.0,
    "NPRIF": 0,
    "NPRIM": 1,
    "NPROM": 0,
}


@pytest.mark.parametrize(
    ("name", "expected"),
    [
        ("org.x.Shape", SHAPE),
        ("org.x.Square", SQUARE),
        ("org.x.Point", POINT),
        ("org.x.util.Registry", REGISTRY),
        ("org.x.Color", COLOR),
        ("org.x.Base", BASE),
        ("org.x.util.Strings", STRINGS),
    ],
)
def test_code_metrics(
    index: CorpusIndex, name: str, expected: dict[str, float]
) -> None:
    metrics = compute_code_metrics(index[name], index)

    assert set(metrics) == set(CODE_METRICS) - {MetricId.NBI}
    actual = {metric.value: value for metric, value in metrics.items()}
    assert actual == pytest.approx(expected)
    assert (
        metrics[MetricId.NMC]
        == metrics[MetricId.NMCI] + metrics[MetricId.NMCE]
    )


def _effort(*values: float) -> dict[str, float]:
    names = ("T-LOC", "T-NOT", "T-NOA", "T-NMC", "T-WMC", "T-AMC")
    return dict(zip(names, values, strict=True))


@pytest.mark.parametrize(
    ("path", "expected"),
    [
        ("org/x/ShapeTest.java", _effort(18, 2, 3, 6, 4, 4 / 3)),
        ("org/x/SquareTest.java", _effort(8, 1, 2, 4, 1, 1.0)),
        ("org/x/TestPoint.java", _effort(13, 2, 3, 5, 4, 4 / 3)),
        ("org/x/util/RegistryTest.java", _effort(8, 1, 1, 3, 1, 1.0)),
        ("org/x/ColorTest.java", _effort(6, 1, 1, 2, 1, 1.0)),
    ],
)
def test_test_effort_metrics(path: str, expected: dict[str, float]) -> None:
    tree = parse_file(TEST / path)
    unit = ClassUnit(tree=tree, decl=tree.types[0])

    metrics = compute_test_effort_metrics(unit)

    actual = {metric.value: value for metric, value in metrics.items()}
    assert actual == pytest.approx(expected)


def test_hierarchy(index: CorpusIndex) -> None:
    assert index.ancestors("org.x.Square") == ["org.x.Shape", "org.x.Base"]
    assert index.depth("org.x.Square") == 2
    assert index.children["org.x.Shape"] == {"org.x.Square"}
    assert index.references["org.x.util.Registry"] == {"org.x.Shape"}
    assert index.referenced_by["org.x.Point"] == {
        "org.x.Base",
        "org.x.Shape",
        "org.x.Square",
    }
    assert "org.x.ShapeTest" not in index


def test_unresolved_parent_counts_one_level() -> None:
    tree = parse_source(
        "class Widget extends javax.swing.JPanel { }", "Widget.java"
    )
    index = build_corpus_index([tree])

    metrics = compute_code_metrics(index["Widget"], index)

    assert metrics[MetricId.DIT] == 1
    assert metrics[MetricId.MFA] == 0.0
    assert metrics[MetricId.LOC] == 1
    assert metrics[MetricId.CAM] == 1.0
    assert metrics[MetricId.AMC] == 0.0


def test_cyclomatic_complexity() -> None:
    source = """\
class Flow {
    int decide(int a, boolean b) {
        while (a > 0 || b) {
            a--;
        }
        do { a++; } while (a < 3);
        try {
            return a;
        } catch (RuntimeException e) {
            return b && a > 1 ? 1 : 0;
        }
    }
}
"""
    (flow,) = parse_source(source, "Flow.java").types

    # while, ||, do, catch, &&, ?:
    assert cyclomatic_complexity(flow.methods[0]) == 7


def test_anonymous_class_methods_fold_into_top_level() -> None:
    source = """\
class Job {
    void schedule(boolean now) {
        Runnable task = new Runnable() {
            public void run() {
                if (now) {
                    tick();
                }
            }
        };
        Runnable later = () -> {
            if (!now) {
                task.run();
            }
        };
        later.run();
    }

    void tick() { }
}
"""
    index = build_corpus_index([parse_source(source, "Job.java")])
    unit = index["Job"]

    complexity = {m.name: cyclomatic_complexity(m) for m in unit.methods}
    metrics = compute_code_metrics(unit, index)

    # the lambda's if belongs to schedule, the anonymous run keeps its own
    assert complexity == {"schedule": 2, "run": 2, "tick": 1}
    assert metrics[MetricId.WMC] == 5
    assert metrics[MetricId.AMC] == pytest.approx(5 / 3)
    assert metrics[MetricId.NPM] == 1
