from pathlib import Path

import pytest

from testmet.exc import InputError
from testmet.java import (
    CyclicHierarchyError,
    DuplicateClassError,
    ExtractionError,
    build_corpus_index,
    discover_sources,
    extract_corpus,
    parse_source,
    read_quality_scores,
)
from testmet.models import MetricId, validate_record
from tests.classfile import INIT_CODE, RETURN_CODE, class_bytes
from tests.java import CORPUS, MAIN, TEST

SCORES = """\
class_id,L,B,M
org.x.Shape,0.9,0.5,0.75
org.x.Square,,,1.0
org.x.Point,1.0,1.0,0.5
org.x.util.Registry,0.2,0.1,0.0
"""


@pytest.fixture
def classes(tmp_path: Path) -> Path:
    root = tmp_path / "classes" / "org" / "x"
    root.mkdir(parents=True)
    methods = [("<init>", "(I)V", INIT_CODE), ("area", "()I", RETURN_CODE)]
    _ = (root / "Shape.class").write_bytes(class_bytes("org.x.Shape", methods))
    _ = (root / "Shape$Inner.class").write_bytes(
        class_bytes("org.x.Shape$Inner", methods[:1])
    )
    _ = (root / "Point.class").write_bytes(
        class_bytes("org.x.Point", methods[1:])
    )
    for name in ("Color", "Square"):
        _ = (root / f"{name}.class").write_bytes(
            class_bytes(f"org.x.{name}", methods[:1])
        )
    (root / "util").mkdir()
    _ = (root / "util" / "Registry.class").write_bytes(
        class_bytes("org.x.util.Registry", methods)
    )
    return tmp_path / "classes"


def test_discover_sources(tmp_path: Path) -> None:
    found = discover_sources([MAIN, TEST, MAIN])

    assert len(found) == 12
    assert found == sorted(found)
    with pytest.raises(InputError, match="does not exist"):
        _ = discover_sources([tmp_path / "absent"])


def test_extract_corpus(classes: Path) -> None:
    records = extract_corpus([MAIN, TEST], class_paths=[classes])

    assert [(r.class_id, r.test_id) for r in records] == [
        ("org.x.Color", "org.x.ColorTest"),
        ("org.x.Point", "org.x.TestPoint"),
        ("org.x.Shape", "org.x.ShapeTest"),
        ("org.x.Square", "org.x.SquareTest"),
        ("org.x.util.Registry", "org.x.util.RegistryTest"),
    ]
    by_id = {record.class_id: record for record in records}
    assert by_id["org.x.Shape"][MetricId.NBI] == 7
    assert by_id["org.x.Point"][MetricId.NBI] == 1
    assert by_id["org.x.Square"][MetricId.NBI] == 3
    assert by_id["org.x.util.Registry"][MetricId.NBI] == 4
    assert by_id["org.x.Shape"][MetricId.T_NOT] == 2
    assert by_id["org.x.Square"][MetricId.DIT] == 2
    for record in records:
        assert MetricId.M not in record.metrics
        assert validate_record(record) == ()


def test_extract_corpus_needs_every_class_file(classes: Path) -> None:
    (classes / "org" / "x" / "Square.class").unlink()
    (classes / "org" / "x" / "util" / "Registry.class").unlink()

    with pytest.raises(ExtractionError, match="no class file for 2") as e:
        _ = extract_corpus([MAIN, TEST], class_paths=[classes])
    assert e.value.failures == ("org.x.Square", "org.x.util.Registry")
    assert e.value.exit_code == 2


def test_extract_corpus_with_scores(tmp_path: Path) -> None:
    scores_path = tmp_path / "scores.csv"
    _ = scores_path.write_text(SCORES)

    scores = read_quality_scores(scores_path)
    records = extract_corpus([MAIN, TEST], scores=scores)

    assert [r.class_id for r in records] == [
        "org.x.Point",
        "org.x.Shape",
        "org.x.Square",
        "org.x.util.Registry",
    ]
    shape, square = records[1], records[2]
    assert shape[MetricId.M] == 0.75
    assert shape[MetricId.L] == 0.9
    assert MetricId.L not in square.metrics
    assert square[MetricId.M] == 1.0


def test_extract_is_independent_of_jobs() -> None:
    assert extract_corpus([CORPUS], jobs=1) == extract_corpus([CORPUS], jobs=2)


def test_extract_with_pairing_file(tmp_path: Path) -> None:
    pairs = tmp_path / "pairs.txt"
    _ = pairs.write_text("org.x.Base,org.x.ShapeTest\n")

    records = extract_corpus([CORPUS], pairing_file=pairs)

    assert ("org.x.Base", "org.x.ShapeTest") in [
        (r.class_id, r.test_id) for r in records
    ]


def test_parse_failures_are_collected(tmp_path: Path) -> None:
    src = tmp_path / "src"
    src.mkdir()
    _ = (src / "Good.java").write_text("class Good { }\n")
    _ = (src / "GoodTest.java").write_text("class GoodTest { }\n")
    _ = (src / "Bad.java").write_text("class Bad { void f( }\n")
    _ = (src / "Worse.java").write_text("class Worse {\n")

    with pytest.raises(ExtractionError, match="failed to parse 2 file") as e:
        _ = extract_corpus([src])
    assert len(e.value.failures) == 2


@pytest.mark.parametrize(
    ("files", "match"),
    [
        ({}, "no classes found"),
        ({"A.java": "class A { }\n"}, "no classes found with a test class"),
    ],
)
def test_nothing_to_extract(
    tmp_path: Path, files: dict[str, str], match: str
) -> None:
    for name, text in files.items():
        _ = (tmp_path / name).write_text(text)

    with pytest.raises(ExtractionError, match=match):
        _ = extract_corpus([tmp_path])


def test_unscored_corpus(tmp_path: Path) -> None:
    with pytest.raises(ExtractionError, match="no classes left"):
        _ = extract_corpus([CORPUS], scores={})


def test_duplicate_class() -> None:
    trees = [
        parse_source("package p; class A { }", "one/A.java"),
        parse_source("package p; class A { }", "two/A.java"),
    ]

    with pytest.raises(
        DuplicateClassError, match="p.A is declared more than once"
    ):
        _ = build_corpus_index(trees)


def test_cyclic_hierarchy() -> None:
    trees = [
        parse_source("class A extends B { }", "A.java"),
        parse_source("class B extends A { }", "B.java"),
    ]

    with pytest.raises(CyclicHierarchyError, match="A -> B -> A"):
        _ = build_corpus_index(trees)


def test_read_quality_scores(tmp_path: Path) -> None:
    path = tmp_path / "scores.csv"
    _ = path.write_text("class_id,M\na.B,0.5\n")

    assert read_quality_scores(path) == {"a.B": {MetricId.M: 0.5}}


@pytest.mark.parametrize(
    ("text", "match"),
    [
        ("class_id,L\na.B,0.5\n", "missing column"),
        ("class_id,M\na.B,\n", "row 1: M is empty"),
        ("class_id,M\na.B,x\n", "row 1: M is not a number"),
        ("class_id,M\na.B,inf\n", "row 1: M is not finite"),
        ("class_id,M\na.B,1\na.B,0\n", "a.B is scored twice"),
    ],
)
def test_read_quality_scores_errors(
    tmp_path: Path, text: str, match: str
) -> None:
    path = tmp_path / "scores.csv"
    _ = path.write_text(text)

    with pytest.raises(InputError, match=match):
        _ = read_quality_scores(path)
