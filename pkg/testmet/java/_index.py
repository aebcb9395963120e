from __future__ import annotations

import collections
import dataclasses
import functools
import typing as t

from frozendict import frozendict
from loguru import logger

from testmet.exc import InputError
from testmet.java._syntax import (
    CallSite,
    FieldDecl,
    MethodDecl,
    SyntaxTree,
    TypeDecl,
)
from testmet.models import TestmetModel

if t.TYPE_CHECKING:
    import collections.abc as c

_OBJECT = frozenset({"Object", "java.lang.Object"})


class DuplicateClassError(InputError):
    def __init__(self, name: str, paths: c.Iterable[str]) -> None:
        super().__init__(
            f"{name} is declared more than once: {', '.join(sorted(paths))}"
        )
        self.name = name


class CyclicHierarchyError(InputError):
    def __init__(self, cycle: c.Sequence[str]) -> None:
        super().__init__(f"cyclic inheritance: {' -> '.join(cycle)}")
        self.cycle = tuple(cycle)


class ClassUnit(TestmetModel, frozen=True):
    """A top-level type together with the file it was declared in.

    Nested, local and anonymous types are folded into the top-level type:
    :attr:`methods`, :attr:`fields` and :attr:`calls` include theirs.
    """

    tree: SyntaxTree
    decl: TypeDecl

    @property
    def qualified_name(self) -> str:
        return self.tree.qualify(self.decl.name)

    @functools.cached_property
    def folded(self) -> tuple[TypeDecl, ...]:
        return tuple(self.decl.walk())

    @property
    def methods(self) -> tuple[MethodDecl, ...]:
        return tuple(m for d in self.folded for m in d.methods)

    @property
    def fields(self) -> tuple[FieldDecl, ...]:
        return tuple(f for d in self.folded for f in d.fields)

    @property
    def calls(self) -> tuple[CallSite, ...]:
        return tuple(
            call
            for d in self.folded
            for call in (
                *d.initializers.calls,
                *(site for m in d.methods for site in m.calls),
            )
        )

    @property
    def own_names(self) -> frozenset[str]:
        """Simple names of this type, its nested types and type parameters."""
        names: set[str] = set()
        for decl in self.folded:
            if decl.name:
                names.add(decl.name)
            names |= decl.type_parameters
        return frozenset(names)

    @property
    def type_refs(self) -> frozenset[str]:
        """Distinct simple names of other types this class mentions."""
        refs: set[str] = set()
        for decl in self.folded:
            refs |= decl.initializers.type_refs
            for field in decl.fields:
                refs |= field.type_refs
            for method in decl.methods:
                refs |= method.type_refs
        return frozenset(refs - self.own_names)


class ParentLink(TestmetModel, frozen=True):
    name: str
    """Qualified name when resolved, the name as written otherwise."""
    resolved: bool


@dataclasses.dataclass(frozen=True)
class CorpusIndex:
    """Read-only view of every production class of a corpus."""

    units: frozendict[str, ClassUnit]
    parents: frozendict[str, ParentLink | None]
    children: frozendict[str, frozenset[str]]
    references: frozendict[str, frozenset[str]]
    """Class -> corpus classes it mentions."""
    referenced_by: frozendict[str, frozenset[str]]
    """Class -> corpus classes mentioning it."""

    def __contains__(self, name: object) -> bool:
        return name in self.units

    def __getitem__(self, name: str) -> ClassUnit:
        return self.units[name]

    def ancestors(self, name: str) -> list[str]:
        """Corpus-resolved superclasses, nearest first."""
        chain: list[str] = []
        link = self.parents.get(name)
        while link is not None and link.resolved:
            chain.append(link.name)
            link = self.parents.get(link.name)
        return chain

    def depth(self, name: str) -> int:
        depth = 0
        link = self.parents.get(name)
        while link is not None:
            depth += 1
            if not link.resolved:
                break
            link = self.parents.get(link.name)
        return depth


@dataclasses.dataclass(frozen=True)
class _Resolver:
    qualified: frozenset[str]
    by_simple_name: c.Mapping[str, tuple[str, ...]]

    def resolve(self, written: str, tree: SyntaxTree) -> str | None:
        if written in self.qualified:
            return written
        simple = written.rsplit(".", 1)[-1]
        for imported in tree.imports:
            if imported.endswith(f".{simple}"):
                return imported if imported in self.qualified else None
        if (candidate := tree.qualify(simple)) in self.qualified:
            return candidate
        for imported in tree.imports:
            if imported.endswith(".*"):
                candidate = f"{imported.removesuffix('*')}{simple}"
                if candidate in self.qualified:
                    return candidate
        matches = self.by_simple_name.get(simple, ())
        return matches[0] if len(matches) == 1 else None


def build_corpus_index(
    trees: c.Iterable[SyntaxTree], *, exclude: c.Container[str] = frozenset()
) -> CorpusIndex:
    """Index every top-level type of ``trees``.

    Arguments:
        exclude: Qualified names to leave out of the index (test classes).

    Raises:
        DuplicateClassError: Two files declare the same qualified name.
        CyclicHierarchyError: Superclasses resolved inside the corpus form
            a cycle.
    """
    declared: dict[str, list[ClassUnit]] = collections.defaultdict(list)
    for tree in trees:
        for decl in tree.types:
            unit = ClassUnit(tree=tree, decl=decl)
            if unit.qualified_name not in exclude:
                declared[unit.qualified_name].append(unit)

    for name, found in declared.items():
        if len(found) > 1:
            raise DuplicateClassError(name, (u.tree.path for u in found))

    units = {name: found[0] for name, found in sorted(declared.items())}
    by_simple_name: dict[str, list[str]] = collections.defaultdict(list)
    for name, unit in units.items():
        by_simple_name[unit.decl.name].append(name)
    resolver = _Resolver(
        qualified=frozenset(units),
        by_simple_name={k: tuple(v) for k, v in by_simple_name.items()},
    )

    parents: dict[str, ParentLink | None] = {}
    children: dict[str, set[str]] = {name: set() for name in units}
    references: dict[str, frozenset[str]] = {}
    referenced_by: dict[str, set[str]] = {name: set() for name in units}
    for name, unit in units.items():
        superclass = unit.decl.superclass
        if superclass is None or superclass in _OBJECT:
            parents[name] = None
        elif (parent := resolver.resolve(superclass, unit.tree)) is not None:
            parents[name] = ParentLink(name=parent, resolved=True)
            children[parent].add(name)
        else:
            parents[name] = ParentLink(name=superclass, resolved=False)

        mentioned = {
            resolved
            for ref in unit.type_refs
            if (resolved := resolver.resolve(ref, unit.tree)) is not None
            and resolved != name
        }
        references[name] = frozenset(mentioned)
        for other in mentioned:
            referenced_by[other].add(name)

    _check_acyclic(parents)
    logger.debug(f"Indexed {len(units)} production class(es)")
    return CorpusIndex(
        units=frozendict(units),
        parents=frozendict(parents),
        children=frozendict({k: frozenset(v) for k, v in children.items()}),
        references=frozendict(references),
        referenced_by=frozendict(
            {k: frozenset(v) for k, v in referenced_by.items()}
        ),
    )


def _check_acyclic(parents: c.Mapping[str, ParentLink | None]) -> None:
    finished: set[str] = set()
    for start in sorted(parents):
        path: list[str] = []
        on_path: set[str] = set()
        current: str | None = start
        while current is not None and current not in finished:
            if current in on_path:
                cycle = path[path.index(current) :]
                raise CyclicHierarchyError([*cycle, current])
            path.append(current)
            on_path.add(current)
            link = parents.get(current)
            current = link.name if link is not None and link.resolved else None
        finished.update(path)
