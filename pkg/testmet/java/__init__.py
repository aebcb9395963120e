from ._extract import (
    ExtractionError,
    QualityScores,
    discover_sources,
    extract_corpus,
    parse_files,
    read_quality_scores,
)
from ._index import (
    ClassUnit,
    CorpusIndex,
    CyclicHierarchyError,
    DuplicateClassError,
    ParentLink,
    build_corpus_index,
)
from ._metrics import (
    compute_code_metrics,
    compute_cohesion_metrics,
    compute_complexity_metrics,
    compute_coupling_metrics,
    compute_encapsulation_metrics,
    compute_inheritance_metrics,
    compute_size_metrics,
    compute_test_effort_metrics,
    cyclomatic_complexity,
)
from ._pairing import pair_tests, read_pairing_file
from ._syntax import (
    CallSite,
    CommentSpan,
    DecisionPoint,
    FieldDecl,
    MethodDecl,
    ParseError,
    SyntaxTree,
    TypeDecl,
    parse_source,
)

__all__ = [
    "CallSite",
    "ClassUnit",
    "CommentSpan",
    "CorpusIndex",
    "CyclicHierarchyError",
    "DecisionPoint",
    "DuplicateClassError",
    "ExtractionError",
    "FieldDecl",
    "MethodDecl",
    "ParentLink",
    "ParseError",
    "QualityScores",
    "SyntaxTree",
    "TypeDecl",
    "build_corpus_index",
    "compute_code_metrics",
    "compute_cohesion_metrics",
    "compute_complexity_metrics",
    "compute_coupling_metrics",
    "compute_encapsulation_metrics",
    "compute_inheritance_metrics",
    "compute_size_metrics",
    "compute_test_effort_metrics",
    "cyclomatic_complexity",
    "discover_sources",
    "extract_corpus",
    "pair_tests",
    "parse_files",
    "parse_source",
    "read_pairing_file",
    "read_quality_scores",
]
