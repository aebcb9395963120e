from __future__ import annotations

import collections
import math
import typing as t
from pathlib import Path

import joblib
import rich.progress
from loguru import logger

from testmet import utils
from testmet.classfile import (
    DEFAULT_MAX_MAJOR_VERSION,
    nbi_by_top_level_class,
    read_classfiles,
)
from testmet.exc import InputError
from testmet.inputs.csv import CsvInput
from testmet.java._index import (
    ClassUnit,
    DuplicateClassError,
    build_corpus_index,
)
from testmet.java._metrics import (
    compute_code_metrics,
    compute_test_effort_metrics,
)
from testmet.java._pairing import pair_tests, read_pairing_file
from testmet.java._syntax import ParseError, SyntaxTree, parse_source
from testmet.models import ClassRecord, MetricId

if t.TYPE_CHECKING:
    import collections.abc as c
    import os

type QualityScores = c.Mapping[str, c.Mapping[MetricId, float]]

_SCORE_COLUMNS = (MetricId.L, MetricId.B, MetricId.M)


class ExtractionError(InputError):
    """One or more inputs of an extraction run failed."""

    def __init__(self, message: str, failures: c.Sequence[str] = ()) -> None:
        super().__init__("\n".join([message, *(f"  {f}" for f in failures)]))
        self.failures = tuple(failures)


def discover_sources(dirs: c.Iterable[os.PathLike[str]]) -> list[Path]:
    """Every ``.java`` file below ``dirs``, sorted.

    Raises:
        InputError: A directory does not exist.
    """
    found: set[Path] = set()
    for directory in map(Path, dirs):
        if not directory.is_dir():
            raise InputError(f"source directory {directory} does not exist")
        found.update(
            p.resolve() for p in directory.rglob("*.java") if p.is_file()
        )
    return sorted(found)


def _parse_path(path: Path) -> SyntaxTree | str:
    try:
        return parse_source(path.read_text(encoding="utf-8"), str(path))
    except ParseError as e:
        return str(e)
    except (OSError, UnicodeDecodeError) as e:
        return f"{path}: {e}"


def parse_files(paths: c.Sequence[Path], *, jobs: int = 1) -> list[SyntaxTree]:
    """Parse ``paths`` in parallel, keeping their order.

    Raises:
        ExtractionError: Listing every file that failed to parse.
    """
    logger.info(f"Parsing {len(paths)} Java file(s) with {jobs} job(s)")
    trees: list[SyntaxTree] = []
    failures: list[str] = []
    with rich.progress.Progress(
        *utils.get_formatted_progress_bar(),
        console=utils.console,
        transient=True,
    ) as progress:
        task_id = progress.add_task("Parsing sources", total=len(paths))
        results = joblib.Parallel(n_jobs=jobs, return_as="generator")(
            joblib.delayed(_parse_path)(path) for path in paths
        )
        for result in results:
            if isinstance(result, str):
                logger.error(result)
                failures.append(result)
            else:
                trees.append(result)
            progress.advance(task_id)

    if failures:
        raise ExtractionError(
            f"failed to parse {len(failures)} file(s)", failures
        )
    return trees


def _parse_score(value: str, metric: MetricId, row: int) -> float | None:
    if not value.strip():
        return None
    try:
        score = float(value)
    except ValueError:
        raise InputError(
            f"row {row}: {metric} is not a number: {value!r}"
        ) from None
    if not math.isfinite(score):
        raise InputError(f"row {row}: {metric} is not finite")
    return score


def read_quality_scores(
    path: os.PathLike[str],
) -> dict[str, dict[MetricId, float]]:
    """Read ``class_id,L,B,M`` rows produced from a mutation testing report.

    ``L`` and ``B`` may be empty (or missing as columns); ``M`` is required.
    """

    def check_header(header: c.Sequence[str]) -> None:
        missing = {"class_id", MetricId.M.value} - set(header)
        if missing:
            raise InputError(
                f"{path}: missing column(s) {', '.join(sorted(missing))}"
            )

    def parse(
        row: int, cells: c.Mapping[str, str]
    ) -> tuple[str, dict[MetricId, float]]:
        scores: dict[MetricId, float] = {}
        for metric in _SCORE_COLUMNS:
            value = _parse_score(cells.get(metric.value, ""), metric, row)
            if value is not None:
                scores[metric] = value
        if MetricId.M not in scores:
            raise InputError(f"row {row}: M is empty")
        return cells["class_id"].strip(), scores

    result: dict[str, dict[MetricId, float]] = {}
    rows = CsvInput(path).read(parse, check_header=check_header)
    for class_id, scores in rows:
        if class_id in result:
            raise InputError(f"{path}: {class_id} is scored twice")
        result[class_id] = scores
    return result


def _collect_units(trees: c.Iterable[SyntaxTree]) -> dict[str, ClassUnit]:
    declared: dict[str, list[ClassUnit]] = collections.defaultdict(list)
    for tree in trees:
        for decl in tree.types:
            unit = ClassUnit(tree=tree, decl=decl)
            declared[unit.qualified_name].append(unit)
    for name, found in declared.items():
        if len(found) > 1:
            raise DuplicateClassError(name, (u.tree.path for u in found))
    return {name: found[0] for name, found in sorted(declared.items())}


def extract_corpus(
    src_dirs: c.Iterable[os.PathLike[str]],
    *,
    class_paths: c.Sequence[os.PathLike[str]] = (),
    pairing_file: os.PathLike[str] | None = None,
    scores: QualityScores | None = None,
    jobs: int = 1,
    max_class_version: int = DEFAULT_MAX_MAJOR_VERSION,
) -> list[ClassRecord]:
    """Compute one :class:`ClassRecord` per paired production class.

    NBI is attached only when ``class_paths`` are given, and then every
    extracted class needs a class file. Test-quality metrics are attached
    only when ``scores`` are given, in which case classes without a score
    are dropped.

    Raises:
        ExtractionError: Nothing to extract, some files failed to parse or
            a class has no class file.
        DuplicateClassError: Two files declare the same class.
        CyclicHierarchyError: Production classes inherit from each other in
            a cycle.
    """
    paths = discover_sources(src_dirs)
    if not paths:
        raise ExtractionError("no classes found")
    trees = parse_files(paths, jobs=jobs)

    units = _collect_units(trees)
    overrides = read_pairing_file(pairing_file) if pairing_file else None
    pairs = pair_tests(units, overrides)
    if not pairs:
        raise ExtractionError("no classes found with a test class")
    logger.info(f"Paired {len(pairs)} production class(es) with tests")

    index = build_corpus_index(trees, exclude=frozenset(pairs.values()))
    nbi: dict[str, int] | None = None
    if class_paths:
        nbi = nbi_by_top_level_class(
            read_classfiles(class_paths, max_major_version=max_class_version)
        )

    records: list[ClassRecord] = []
    uncompiled: list[str] = []
    for production, test in pairs.items():
        metrics: dict[MetricId, float] = {
            **compute_code_metrics(index[production], index),
            **compute_test_effort_metrics(units[test]),
        }
        if scores is not None:
            if production not in scores:
                logger.warning(
                    f"No test-quality scores for {production}, dropping it"
                )
                continue
            metrics.update(scores[production])
        if nbi is not None:
            if production not in nbi:
                uncompiled.append(production)
                continue
            metrics[MetricId.NBI] = nbi[production]
        records.append(
            ClassRecord(class_id=production, test_id=test, metrics=metrics)
        )
        logger.trace(f"Extracted {production} <- {test}")

    if uncompiled:
        raise ExtractionError(
            f"no class file for {len(uncompiled)} class(es);"
            + " NBI needs one for every extracted class",
            uncompiled,
        )
    if not records:
        raise ExtractionError(
            "no classes left after merging test-quality scores"
        )
    logger.success(f"Extracted metrics for {len(records)} class(es)")
    return records
