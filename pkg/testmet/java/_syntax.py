"""Java source to an immutable :class:`SyntaxTree`.

Parsing is done by tree-sitter; this module only keeps the facts the metric
computations need and drops the concrete syntax tree afterwards, so trees can
be pickled and shipped between worker processes.
"""

from __future__ import annotations

import dataclasses
import functools
import re
import typing as t

import tree_sitter_java
from loguru import logger
from tree_sitter import Language, Node, Parser

from testmet.exc import InputError
from testmet.models import TestmetModel

if t.TYPE_CHECKING:
    import collections.abc as c

JAVA = Language(tree_sitter_java.language())

type TypeKind = t.Literal["class", "interface", "enum", "record", "annotation"]

_TYPE_DECLARATIONS: dict[str, TypeKind] = {
    "class_declaration": "class",
    "interface_declaration": "interface",
    "enum_declaration": "enum",
    "record_declaration": "record",
    "annotation_type_declaration": "annotation",
}
_COMMENTS = frozenset({"line_comment", "block_comment", "comment"})
_MODIFIER_KEYWORDS = frozenset(
    {
        "public",
        "protected",
        "private",
        "abstract",
        "static",
        "final",
        "strictfp",
        "default",
        "synchronized",
        "native",
        "transient",
        "volatile",
        "sealed",
        "non-sealed",
    }
)
_DECISIONS = {
    "if_statement": "if",
    "for_statement": "for",
    "enhanced_for_statement": "for",
    "while_statement": "while",
    "do_statement": "do",
    "catch_clause": "catch",
    "ternary_expression": "?:",
}
_LOGICAL_OPERATORS = frozenset({"&&", "||"})
_TYPE_IDENTIFIERS = frozenset({"type_identifier", "scoped_type_identifier"})
_TYPED_EXPRESSIONS = frozenset(
    {"local_variable_declaration", "object_creation_expression"}
)
_WHITESPACE = re.compile(r"\s+")


class ParseError(InputError):
    def __init__(self, path: str, line: int, column: int, message: str) -> None:
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = path
        self.line = line
        self.column = column


class CommentSpan(TestmetModel, frozen=True):
    """A comment; lines are 1-based, columns are 0-based byte offsets."""

    start_line: int
    start_column: int
    end_line: int
    end_column: int


class CallSite(TestmetModel, frozen=True):
    receiver: str | None
    """Source text before the dot; ``None`` for an unqualified call."""
    name: str
    arity: int
    line: int


class DecisionPoint(TestmetModel, frozen=True):
    kind: str
    line: int


class FieldDecl(TestmetModel, frozen=True):
    name: str
    type_name: str
    modifiers: frozenset[str]
    type_refs: frozenset[str]


class MethodDecl(TestmetModel, frozen=True):
    name: str
    is_constructor: bool
    modifiers: frozenset[str]
    annotations: tuple[str, ...]
    parameter_types: tuple[str, ...]
    return_type: str | None
    has_body: bool
    calls: tuple[CallSite, ...]
    decision_points: tuple[DecisionPoint, ...]
    accessed_names: frozenset[str]
    """Simple names read or written that may refer to fields of the class."""
    type_refs: frozenset[str]
    start_line: int
    end_line: int

    @property
    def arity(self) -> int:
        return len(self.parameter_types)

    @property
    def signature(self) -> tuple[str, int]:
        return self.name, self.arity


class BodyFacts(TestmetModel, frozen=True):
    """Calls and references found outside of methods (initializers)."""

    calls: tuple[CallSite, ...] = ()
    decision_points: tuple[DecisionPoint, ...] = ()
    type_refs: frozenset[str] = frozenset()


class TypeDecl(TestmetModel, frozen=True):
    name: str
    kind: TypeKind
    modifiers: frozenset[str]
    superclass: str | None
    """Superclass as written, without type arguments."""
    interfaces: tuple[str, ...]
    type_parameters: frozenset[str]
    fields: tuple[FieldDecl, ...]
    methods: tuple[MethodDecl, ...]
    member_types: tuple[TypeDecl, ...]
    initializers: BodyFacts
    start_line: int
    end_line: int

    def walk(self) -> c.Iterator[TypeDecl]:
        """Yield this type and every nested type, depth first."""
        yield self
        for member in self.member_types:
            yield from member.walk()


class SyntaxTree(TestmetModel, frozen=True):
    path: str
    package: str | None
    imports: tuple[str, ...]
    types: tuple[TypeDecl, ...]
    comments: tuple[CommentSpan, ...]
    lines: tuple[str, ...]

    def qualify(self, name: str) -> str:
        return f"{self.package}.{name}" if self.package else name


@functools.cache
def _parser() -> Parser:
    return Parser(JAVA)


def parse_source(text: str, path: str) -> SyntaxTree:
    """Parse one Java compilation unit.

    Raises:
        ParseError: When tree-sitter had to recover from a syntax error.
    """
    source = text.encode("utf-8")
    root = _parser().parse(source).root_node
    if root.has_error:
        node = _first_error(root)
        line, column = node.start_point
        what = (
            f"missing {node.type!r}"
            if node.is_missing
            else f"unexpected {_text(node)[:20]!r}"
        )
        raise ParseError(path, line + 1, column + 1, what)

    package: str | None = None
    imports: list[str] = []
    types: list[TypeDecl] = []
    for child in root.named_children:
        match child.type:
            case "package_declaration":
                name = _first_named(
                    child, exclude={"annotation", "marker_annotation"}
                )
                package = _text(name)
            case "import_declaration":
                imports.append(_import_path(child))
            case kind if kind in _TYPE_DECLARATIONS:
                types.append(_type_decl(child, inside_interface=False))
            case _:
                pass

    logger.trace(f"Parsed {path}: {len(types)} top-level type(s)")
    return SyntaxTree(
        path=path,
        package=package,
        imports=tuple(imports),
        types=tuple(types),
        comments=tuple(_comments(root)),
        lines=tuple(line.removesuffix("\r") for line in text.split("\n")),
    )


def _first_error(root: Node) -> Node:
    stack = [root]
    best: Node | None = None
    while stack:
        node = stack.pop()
        if node.is_error or node.is_missing:
            if best is None or node.start_byte < best.start_byte:
                best = node
            continue
        if node.has_error:
            stack.extend(node.children)
    return best or root


def _text(node: Node | None) -> str:
    if node is None or node.text is None:
        return ""
    return node.text.decode("utf-8", errors="replace")


def _squash(node: Node | None) -> str:
    return _WHITESPACE.sub("", _text(node))


def _line(node: Node) -> int:
    return node.start_point[0] + 1


def _same(a: Node | None, b: Node | None) -> bool:
    return (
        a is not None
        and b is not None
        and a.start_byte == b.start_byte
        and a.end_byte == b.end_byte
        and a.type == b.type
    )


def _first_named(node: Node, *, exclude: c.Container[str] = ()) -> Node | None:
    for child in node.named_children:
        if child.type not in exclude and child.type not in _COMMENTS:
            return child
    return None


def _child_of_type(node: Node, *types: str) -> Node | None:
    for child in node.children:
        if child.type in types:
            return child
    return None


def _import_path(node: Node) -> str:
    name = _squash(_first_named(node, exclude={"asterisk"}))
    if _child_of_type(node, "asterisk") is not None:
        return f"{name}.*"
    return name


def _comments(root: Node) -> c.Iterator[CommentSpan]:
    stack = [root]
    spans: list[CommentSpan] = []
    while stack:
        node = stack.pop()
        if node.type in _COMMENTS:
            spans.append(
                CommentSpan(
                    start_line=node.start_point[0] + 1,
                    start_column=node.start_point[1],
                    end_line=node.end_point[0] + 1,
                    end_column=node.end_point[1],
                )
            )
            continue
        stack.extend(node.children)
    yield from sorted(spans, key=lambda s: (s.start_line, s.start_column))


def _modifiers(node: Node) -> tuple[set[str], list[str]]:
    keywords: set[str] = set()
    annotations: list[str] = []
    modifiers = _child_of_type(node, "modifiers")
    if modifiers is None:
        return keywords, annotations
    for child in modifiers.children:
        if child.type in _MODIFIER_KEYWORDS:
            keywords.add(child.type)
        elif child.type in {"marker_annotation", "annotation"}:
            name = _text(child.child_by_field_name("name"))
            annotations.append(name.rsplit(".", 1)[-1])
    return keywords, annotations


def _base_type_name(node: Node | None) -> str | None:
    """``java.util.List<String>`` -> ``java.util.List``."""
    if node is None:
        return None
    if node.type == "generic_type":
        return _base_type_name(_first_named(node))
    return _squash(node) or None


def type_names(node: Node | None) -> set[str]:
    """Simple names of every class type mentioned in a type expression."""
    names: set[str] = set()
    if node is None:
        return names
    stack = [node]
    while stack:
        current = stack.pop()
        match current.type:
            case "type_identifier":
                names.add(_text(current))
            case "scoped_type_identifier":
                last = [
                    c
                    for c in current.named_children
                    if c.type == "type_identifier"
                ]
                if last:
                    names.add(_text(last[-1]))
                stack.extend(
                    c
                    for c in current.named_children
                    if c.type not in _TYPE_IDENTIFIERS
                )
            case _:
                stack.extend(current.named_children)
    names.discard("var")
    return names


@dataclasses.dataclass
class _BodyScan:
    """Mutable accumulator for everything found while walking code."""

    calls: list[CallSite] = dataclasses.field(default_factory=list)
    decisions: list[DecisionPoint] = dataclasses.field(default_factory=list)
    type_refs: set[str] = dataclasses.field(default_factory=set)
    plain_names: set[str] = dataclasses.field(default_factory=set)
    this_names: set[str] = dataclasses.field(default_factory=set)
    locals: set[str] = dataclasses.field(default_factory=set)
    anonymous_types: list[TypeDecl] = dataclasses.field(default_factory=list)

    def scan(self, root: Node | None) -> None:
        if root is None:
            return
        stack = [root]
        while stack:
            node = stack.pop()
            self._visit(node)
            if node.type in _TYPE_DECLARATIONS and not _same(node, root):
                # local classes fold into the enclosing type as member types
                self.anonymous_types.append(
                    _type_decl(node, inside_interface=False)
                )
                continue
            if node.type == "class_body":
                self.anonymous_types.append(_anonymous_type(node))
                continue
            stack.extend(reversed(node.children))

    def _decision(self, kind: str, node: Node) -> None:
        self.decisions.append(DecisionPoint(kind=kind, line=_line(node)))

    def _visit(self, node: Node) -> None:
        kind = node.type
        if kind in _DECISIONS:
            self._decision(_DECISIONS[kind], node)
        elif kind == "switch_label":
            first = node.child(0)
            if first is not None and first.type == "case":
                self._decision("case", node)
        elif kind == "binary_expression":
            operator = node.child_by_field_name("operator")
            if operator is not None and operator.type in _LOGICAL_OPERATORS:
                self._decision(operator.type, node)
        elif kind == "method_invocation":
            self.calls.append(_call_site(node))
        elif kind in _TYPED_EXPRESSIONS:
            self.type_refs |= type_names(node.child_by_field_name("type"))
        elif kind == "cast_expression":
            for type_node in node.children_by_field_name("type"):
                self.type_refs |= type_names(type_node)
        elif kind == "enhanced_for_statement":
            self.type_refs |= type_names(node.child_by_field_name("type"))
        elif kind == "identifier":
            self._identifier(node)

        if kind in {
            "variable_declarator",
            "formal_parameter",
            "catch_formal_parameter",
            "enhanced_for_statement",
            "resource",
            "spread_parameter",
        }:
            name = node.child_by_field_name("name")
            if name is not None:
                self.locals.add(_text(name))
        elif kind == "inferred_parameters":
            self.locals.update(_text(c) for c in node.named_children)
        elif kind == "lambda_expression":
            parameters = node.child_by_field_name("parameters")
            if parameters is not None and parameters.type == "identifier":
                self.locals.add(_text(parameters))

    def _identifier(self, node: Node) -> None:
        parent = node.parent
        if parent is None:
            return
        name = _text(node)
        match parent.type:
            case "field_access":
                if _same(parent.child_by_field_name("field"), node):
                    target = parent.child_by_field_name("object")
                    if target is not None and target.type == "this":
                        self.this_names.add(name)
                    return
            case "method_invocation":
                if _same(parent.child_by_field_name("name"), node):
                    return
            case (
                "variable_declarator"
                | "formal_parameter"
                | "catch_formal_parameter"
                | "enhanced_for_statement"
                | "resource"
                | "spread_parameter"
            ):
                if _same(parent.child_by_field_name("name"), node):
                    return
            case "lambda_expression":
                if _same(parent.child_by_field_name("parameters"), node):
                    return
            case (
                "inferred_parameters"
                | "labeled_statement"
                | "break_statement"
                | "continue_statement"
                | "scoped_identifier"
                | "marker_annotation"
                | "annotation"
                | "element_value_pair"
            ):
                return
            case "method_reference":
                if not _same(_first_named(parent), node):
                    return
            case _:
                pass
        self.plain_names.add(name)

    def facts(self) -> BodyFacts:
        return BodyFacts(
            calls=tuple(self.calls),
            decision_points=tuple(self.decisions),
            type_refs=frozenset(self.type_refs),
        )


def _call_site(node: Node) -> CallSite:
    target = node.child_by_field_name("object")
    receiver = _squash(target) if target is not None else None
    # `Outer.super.m()` keeps the super keyword outside of the object field
    if (
        target is not None
        and target.type != "super"
        and _child_of_type(node, "super") is not None
    ):
        receiver = f"{receiver}.super"
    arguments = node.child_by_field_name("arguments")
    arity = (
        sum(1 for a in arguments.named_children if a.type not in _COMMENTS)
        if arguments is not None
        else 0
    )
    return CallSite(
        receiver=receiver,
        name=_text(node.child_by_field_name("name")),
        arity=arity,
        line=_line(node),
    )


def _type_parameters(node: Node) -> set[str]:
    parameters = node.child_by_field_name("type_parameters")
    if parameters is None:
        return set()
    return {
        _text(_first_named(p, exclude={"annotation", "marker_annotation"}))
        for p in parameters.named_children
        if p.type == "type_parameter"
    }


def _parameters(node: Node | None) -> tuple[list[str], set[str]]:
    types: list[str] = []
    refs: set[str] = set()
    if node is None:
        return types, refs
    for parameter in node.named_children:
        if parameter.type == "formal_parameter":
            type_node = parameter.child_by_field_name("type")
            types.append(_squash(type_node))
            refs |= type_names(type_node)
        elif parameter.type == "spread_parameter":
            type_node = _first_named(
                parameter, exclude={"modifiers", "variable_declarator"}
            )
            types.append(_squash(type_node) + "...")
            refs |= type_names(type_node)
    return types, refs


def _method_decl(
    node: Node, *, inside_interface: bool
) -> tuple[MethodDecl, list[TypeDecl]]:
    keywords, annotations = _modifiers(node)
    is_constructor = node.type in {
        "constructor_declaration",
        "compact_constructor_declaration",
    }
    if inside_interface and "private" not in keywords:
        keywords.add("public")

    body = node.child_by_field_name("body")
    parameter_types, refs = _parameters(node.child_by_field_name("parameters"))
    return_node = None if is_constructor else node.child_by_field_name("type")
    refs |= type_names(return_node)

    scan = _BodyScan()
    scan.scan(node.child_by_field_name("parameters"))
    # parameter names only shadow; their types are already recorded
    scan.calls.clear()
    scan.plain_names.clear()
    scan.scan(body)
    refs |= scan.type_refs
    refs -= _type_parameters(node)

    accessed = scan.this_names | (scan.plain_names - scan.locals)
    method = MethodDecl(
        name=_text(node.child_by_field_name("name")),
        is_constructor=is_constructor,
        modifiers=frozenset(keywords),
        annotations=tuple(annotations),
        parameter_types=tuple(parameter_types),
        return_type=_squash(return_node) if return_node is not None else None,
        has_body=body is not None,
        calls=tuple(scan.calls),
        decision_points=tuple(scan.decisions),
        accessed_names=frozenset(accessed),
        type_refs=frozenset(refs),
        start_line=_line(node),
        end_line=node.end_point[0] + 1,
    )
    return method, scan.anonymous_types


def _field_decls(
    node: Node, *, inside_interface: bool
) -> tuple[list[FieldDecl], _BodyScan]:
    keywords, _ = _modifiers(node)
    if inside_interface:
        keywords |= {"public", "static", "final"}
    type_node = node.child_by_field_name("type")
    refs = frozenset(type_names(type_node))
    fields: list[FieldDecl] = []
    scan = _BodyScan()
    for declarator in node.children_by_field_name("declarator"):
        fields.append(
            FieldDecl(
                name=_text(declarator.child_by_field_name("name")),
                type_name=_squash(type_node),
                modifiers=frozenset(keywords),
                type_refs=refs,
            )
        )
        scan.scan(declarator.child_by_field_name("value"))
    return fields, scan


def _anonymous_type(body: Node) -> TypeDecl:
    return _type_from_body(
        name="",
        kind="class",
        node=body,
        body=body,
        keywords=set(),
        superclass=None,
        interfaces=(),
        type_parameters=frozenset(),
        inside_interface=False,
    )


def _type_decl(node: Node, *, inside_interface: bool) -> TypeDecl:
    kind = _TYPE_DECLARATIONS[node.type]
    keywords, _ = _modifiers(node)
    if inside_interface:
        keywords |= {"public", "static"}

    superclass_node = node.child_by_field_name("superclass")
    superclass = (
        _base_type_name(_first_named(superclass_node))
        if superclass_node is not None
        else None
    )
    interfaces: list[str] = []
    interfaces_node = node.child_by_field_name("interfaces") or _child_of_type(
        node, "extends_interfaces"
    )
    if interfaces_node is not None:
        type_list = _child_of_type(interfaces_node, "type_list")
        for type_node in (type_list or interfaces_node).named_children:
            if name := _base_type_name(type_node):
                interfaces.append(name)

    type_parameters = frozenset(_type_parameters(node))
    return _type_from_body(
        name=_text(node.child_by_field_name("name")),
        kind=kind,
        node=node,
        body=node.child_by_field_name("body"),
        keywords=keywords,
        superclass=superclass,
        interfaces=tuple(interfaces),
        type_parameters=type_parameters,
        inside_interface=kind in {"interface", "annotation"},
    )


def _type_from_body(
    *,
    name: str,
    kind: TypeKind,
    node: Node,
    body: Node | None,
    keywords: set[str],
    superclass: str | None,
    interfaces: tuple[str, ...],
    type_parameters: frozenset[str],
    inside_interface: bool,
) -> TypeDecl:
    fields: list[FieldDecl] = []
    methods: list[MethodDecl] = []
    members: list[TypeDecl] = []
    initializers = _BodyScan()

    declarations: list[Node] = []
    if body is not None:
        for child in body.named_children:
            if child.type == "enum_body_declarations":
                declarations.extend(child.named_children)
            elif child.type == "enum_constant":
                initializers.scan(child.child_by_field_name("arguments"))
                constant_body = child.child_by_field_name("body")
                if constant_body is not None:
                    members.append(_anonymous_type(constant_body))
            else:
                declarations.append(child)

    for child in declarations:
        match child.type:
            case "field_declaration" | "constant_declaration":
                new_fields, scan = _field_decls(
                    child, inside_interface=inside_interface
                )
                fields.extend(new_fields)
                initializers.calls.extend(scan.calls)
                initializers.decisions.extend(scan.decisions)
                initializers.type_refs |= scan.type_refs
                members.extend(scan.anonymous_types)
            case (
                "method_declaration"
                | "constructor_declaration"
                | "compact_constructor_declaration"
                | "annotation_type_element_declaration"
            ):
                method, local_types = _method_decl(
                    child, inside_interface=inside_interface
                )
                methods.append(method)
                members.extend(local_types)
            case "block" | "static_initializer":
                initializers.scan(child)
                members.extend(initializers.anonymous_types)
                initializers.anonymous_types.clear()
            case declaration if declaration in _TYPE_DECLARATIONS:
                members.append(
                    _type_decl(child, inside_interface=inside_interface)
                )
            case _:
                pass

    members.extend(initializers.anonymous_types)
    return TypeDecl(
        name=name,
        kind=kind,
        modifiers=frozenset(keywords),
        superclass=superclass,
        interfaces=interfaces,
        type_parameters=type_parameters,
        fields=tuple(fields),
        methods=tuple(methods),
        member_types=tuple(members),
        initializers=initializers.facts(),
        start_line=_line(node),
        end_line=node.end_point[0] + 1,
    )
