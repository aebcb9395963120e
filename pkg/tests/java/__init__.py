from pathlib import Path

from testmet.java import (
    CorpusIndex,
    SyntaxTree,
    build_corpus_index,
    parse_source,
)

CORPUS = Path(__file__).parent / "corpus"
MAIN = CORPUS / "main"
TEST = CORPUS / "test"
TEST_CLASSES = frozenset(
    {
        "org.x.ShapeTest",
        "org.x.SquareTest",
        "org.x.TestPoint",
        "org.x.ColorTest",
        "org.x.util.RegistryTest",
    }
)


def parse_file(path: Path) -> SyntaxTree:
    return parse_source(path.read_text(encoding="utf-8"), str(path))


def corpus_trees() -> list[SyntaxTree]:
    return [parse_file(path) for path in sorted(CORPUS.rglob("*.java"))]


def corpus_index() -> CorpusIndex:
    return build_corpus_index(corpus_trees(), exclude=TEST_CLASSES)
