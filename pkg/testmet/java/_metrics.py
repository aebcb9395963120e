"""Per-class metric computations over a :class:`ClassUnit`.

Every ``compute_*`` function returns a partial metric mapping; the extractor
merges them into one :class:`testmet.models.ClassRecord`.
"""

from __future__ import annotations

import itertools
import typing as t

from testmet.models import MetricId

if t.TYPE_CHECKING:
    import collections.abc as c

    from testmet.java._index import ClassUnit, CorpusIndex
    from testmet.java._syntax import CallSite, MethodDecl, TypeDecl

type PartialMetrics = dict[MetricId, float]

_SELF_RECEIVERS = frozenset({None, "this"})
_SUPER_RECEIVERS = frozenset({None, "this", "super"})


def cyclomatic_complexity(method: MethodDecl) -> int:
    """``1 + decision points``; methods without a body have no decisions."""
    return 1 + len(method.decision_points)


def _line_coverage(unit: ClassUnit) -> tuple[int, int]:
    """Count code lines and comment lines inside the class extent."""
    first, last = unit.decl.start_line, unit.decl.end_line
    lines = [line.encode("utf-8") for line in unit.tree.lines[first - 1 : last]]
    masked = [bytearray(line) for line in lines]
    comment_lines: set[int] = set()

    for span in unit.tree.comments:
        if span.end_line < first or span.start_line > last:
            continue
        for number in range(
            max(span.start_line, first), min(span.end_line, last) + 1
        ):
            comment_lines.add(number)
            row = masked[number - first]
            start = span.start_column if number == span.start_line else 0
            end = span.end_column if number == span.end_line else len(row)
            row[start:end] = b" " * (min(end, len(row)) - start)

    code_lines = sum(1 for row in masked if row.strip())
    return code_lines, len(comment_lines)


def _declared_call_signatures(unit: ClassUnit) -> set[tuple[str, int]]:
    return {m.signature for m in unit.methods if not m.is_constructor}


def _is_internal(
    call: CallSite, declared: c.Container[tuple[str, int]]
) -> bool:
    return (
        call.receiver in _SELF_RECEIVERS
        and (call.name, call.arity) in declared
    )


def compute_size_metrics(unit: ClassUnit) -> PartialMetrics:
    methods = unit.methods
    fields = unit.fields
    calls = unit.calls
    declared = _declared_call_signatures(unit)
    loc, loccom = _line_coverage(unit)
    nmci = sum(1 for call in calls if _is_internal(call, declared))
    return {
        MetricId.LOC: loc,
        MetricId.LOCCOM: loccom,
        MetricId.NPM: sum(1 for m in methods if "public" in m.modifiers),
        MetricId.NSTAM: sum(1 for m in methods if "static" in m.modifiers),
        MetricId.NOF: len(fields),
        MetricId.NSTAF: sum(1 for f in fields if "static" in f.modifiers),
        MetricId.NMC: len(calls),
        MetricId.NMCI: nmci,
        MetricId.NMCE: len(calls) - nmci,
    }


def compute_complexity_metrics(unit: ClassUnit) -> PartialMetrics:
    methods = unit.methods
    wmc = sum(cyclomatic_complexity(m) for m in methods)
    declared = _declared_call_signatures(unit)
    invoked = {(call.name, call.arity) for call in unit.calls} - declared
    return {
        MetricId.WMC: wmc,
        MetricId.AMC: wmc / len(methods) if methods else 0.0,
        MetricId.RFC: len(methods) + len(invoked),
    }


def _inheritable(decl: TypeDecl) -> set[tuple[str, int]]:
    return {
        m.signature
        for m in decl.methods
        if not m.is_constructor and "private" not in m.modifiers
    }


def _declaring_ancestor(
    signature: tuple[str, int],
    chain: c.Sequence[tuple[str, set[tuple[str, int]]]],
) -> str | None:
    for ancestor, signatures in chain:
        if signature in signatures:
            return ancestor
    return None


def _ancestor_chain(
    unit: ClassUnit, index: CorpusIndex
) -> list[tuple[str, set[tuple[str, int]]]]:
    return [
        (name, _inheritable(index[name].decl))
        for name in index.ancestors(unit.qualified_name)
    ]


def compute_inheritance_metrics(
    unit: ClassUnit, index: CorpusIndex
) -> PartialMetrics:
    """DIT, NOC and MFA.

    Inheritance concerns the top-level type itself, so members of nested
    types take no part in MFA.
    """
    name = unit.qualified_name
    chain = _ancestor_chain(unit, index)
    own = {m.signature for m in unit.decl.methods if not m.is_constructor}
    inherited: set[tuple[str, int]] = set()
    for _, signatures in chain:
        inherited |= signatures - own

    declared = len(unit.decl.methods)
    total = len(inherited) + declared
    return {
        MetricId.DIT: index.depth(name),
        MetricId.NOC: len(index.children.get(name, ())),
        MetricId.MFA: len(inherited) / total if chain and total else 0.0,
    }


def compute_coupling_metrics(
    unit: ClassUnit, index: CorpusIndex
) -> PartialMetrics:
    name = unit.qualified_name
    chain = _ancestor_chain(unit, index)
    own = {m.signature for m in unit.decl.methods if not m.is_constructor}

    coupled_ancestors: set[str] = set()
    overriding = 0
    for method in unit.decl.methods:
        ancestor = (
            None
            if method.is_constructor or "private" in method.modifiers
            else _declaring_ancestor(method.signature, chain)
        )
        calls_super = any(
            call.receiver is not None
            and (call.receiver == "super" or call.receiver.endswith(".super"))
            for call in method.calls
        )
        if ancestor is not None:
            coupled_ancestors.add(ancestor)
        if ancestor is not None or calls_super:
            overriding += 1

    own_calls = (
        *unit.decl.initializers.calls,
        *(call for m in unit.decl.methods for call in m.calls),
    )
    for call in own_calls:
        signature = (call.name, call.arity)
        if call.receiver not in _SUPER_RECEIVERS:
            continue
        if call.receiver != "super" and signature in own:
            continue
        if (ancestor := _declaring_ancestor(signature, chain)) is not None:
            coupled_ancestors.add(ancestor)

    references = index.references.get(name, frozenset())
    referencing = index.referenced_by.get(name, frozenset())
    return {
        MetricId.CBO: len(references | referencing),
        MetricId.IC: len(coupled_ancestors),
        MetricId.CBM: overriding,
        MetricId.CA: len(referencing),
        MetricId.CE: len(unit.type_refs),
    }


def compute_cohesion_metrics(unit: ClassUnit) -> PartialMetrics:
    methods = unit.methods
    field_names = {f.name for f in unit.fields}
    accesses = [m.accessed_names & field_names for m in methods]
    m = len(methods)

    sharing = sum(1 for a, b in itertools.combinations(accesses, 2) if a & b)
    disjoint = m * (m - 1) // 2 - sharing

    if m < 2 or not field_names:
        lcom3 = 0.0
    else:
        mean_accessors = sum(
            sum(1 for accessed in accesses if field in accessed)
            for field in field_names
        ) / len(field_names)
        lcom3 = (m - mean_accessors) / (m - 1)

    parameter_sets = [frozenset(method.parameter_types) for method in methods]
    union = frozenset().union(*parameter_sets)
    cam = (
        sum(len(types) for types in parameter_sets) / (m * len(union))
        if m and union
        else 1.0
    )
    return {
        MetricId.LCOM: max(0, disjoint - sharing),
        MetricId.LCOM3: lcom3,
        MetricId.CAM: cam,
    }


def compute_encapsulation_metrics(unit: ClassUnit) -> PartialMetrics:
    fields = unit.fields
    methods = unit.methods
    hidden = sum(
        1 for f in fields if f.modifiers & {"private", "protected"}
    )
    return {
        MetricId.DAM: hidden / len(fields) if fields else 1.0,
        MetricId.NPRIF: sum(1 for f in fields if "private" in f.modifiers),
        MetricId.NPRIM: sum(1 for m in methods if "private" in m.modifiers),
        MetricId.NPROM: sum(1 for m in methods if "protected" in m.modifiers),
    }


def _is_test_method(method: MethodDecl) -> bool:
    return "Test" in method.annotations or method.name.startswith("test")


def _is_assertion(call: CallSite) -> bool:
    return call.name.startswith("assert") or call.name == "fail"


def compute_test_effort_metrics(unit: ClassUnit) -> PartialMetrics:
    size = compute_size_metrics(unit)
    complexity = compute_complexity_metrics(unit)
    return {
        MetricId.T_LOC: size[MetricId.LOC],
        MetricId.T_NOT: sum(1 for m in unit.methods if _is_test_method(m)),
        MetricId.T_NOA: sum(1 for call in unit.calls if _is_assertion(call)),
        MetricId.T_NMC: size[MetricId.NMC],
        MetricId.T_WMC: complexity[MetricId.WMC],
        MetricId.T_AMC: complexity[MetricId.AMC],
    }


def compute_code_metrics(unit: ClassUnit, index: CorpusIndex) -> PartialMetrics:
    """Every source-level code metric; NBI comes from class files."""
    return {
        **compute_size_metrics(unit),
        **compute_complexity_metrics(unit),
        **compute_inheritance_metrics(unit, index),
        **compute_coupling_metrics(unit, index),
        **compute_cohesion_metrics(unit),
        **compute_encapsulation_metrics(unit),
    }
