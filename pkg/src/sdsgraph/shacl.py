"""SHACL-core subset: shape graph parsing and data graph validation.

Supported constraint components: minCount, maxCount, class, datatype,
nodeKind, in, hasValue, node, or, languageIn, uniqueLang, closed.
Anything else found in a shapes graph is collected as a warning and
ignored. Validation is a pure function over immutable graphs and emits
deterministically ordered results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from sdsgraph.graph import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    Term,
    term_sort_key,
    term_to_ntriples,
)
from sdsgraph.vocab import RDF_FIRST, RDF_NIL, RDF_REST, RDF_TYPE, SH

SH_NODE_SHAPE = SH + "NodeShape"
SH_TARGET_CLASS = SH + "targetClass"
SH_PROPERTY = SH + "property"
SH_PATH = SH + "path"
SH_MIN_COUNT = SH + "minCount"
SH_MAX_COUNT = SH + "maxCount"
SH_CLASS = SH + "class"
SH_DATATYPE = SH + "datatype"
SH_NODE_KIND = SH + "nodeKind"
SH_IN = SH + "in"
SH_HAS_VALUE = SH + "hasValue"
SH_NODE = SH + "node"
SH_OR = SH + "or"
SH_LANGUAGE_IN = SH + "languageIn"
SH_UNIQUE_LANG = SH + "uniqueLang"
SH_CLOSED = SH + "closed"

NODEKIND_IRI = SH + "IRI"
NODEKIND_LITERAL = SH + "Literal"
NODEKIND_BLANK_OR_IRI = SH + "BlankNodeOrIRI"

# constraint component IRIs used in reports
COMP_MIN_COUNT = SH + "MinCountConstraintComponent"
COMP_MAX_COUNT = SH + "MaxCountConstraintComponent"
COMP_CLASS = SH + "ClassConstraintComponent"
COMP_DATATYPE = SH + "DatatypeConstraintComponent"
COMP_NODE_KIND = SH + "NodeKindConstraintComponent"
COMP_IN = SH + "InConstraintComponent"
COMP_HAS_VALUE = SH + "HasValueConstraintComponent"
COMP_NODE = SH + "NodeConstraintComponent"
COMP_OR = SH + "OrConstraintComponent"
COMP_LANGUAGE_IN = SH + "LanguageInConstraintComponent"
COMP_UNIQUE_LANG = SH + "UniqueLangConstraintComponent"
COMP_CLOSED = SH + "ClosedConstraintComponent"

SEVERITY_VIOLATION = "Violation"
SEVERITY_WARNING = "Warning"

MAX_NODE_DEPTH = 32


class MalformedShapeError(ValueError):
    """A shapes graph entry violates the shape metamodel."""


@dataclass
class ValueConstraints:
    """Per-value constraints, usable directly or as one sh:or group."""

    class_iri: str | None = None
    datatype: str | None = None
    node_kind: str | None = None
    in_values: list[Term] | None = None
    has_value: Term | None = None
    node_shape: str | None = None
    language_in: list[str] | None = None


@dataclass
class PropertyShape:
    path: str
    min_count: int | None = None
    max_count: int | None = None
    constraints: ValueConstraints = field(default_factory=ValueConstraints)
    or_groups: list[ValueConstraints] = field(default_factory=list)
    unique_lang: bool = False


@dataclass
class NodeShape:
    iri: str
    target_classes: list[str] = field(default_factory=list)
    property_shapes: list[PropertyShape] = field(default_factory=list)
    closed: bool = False


@dataclass
class ParsedShapes:
    shapes: list[NodeShape]
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ValidationResult:
    focus_node: Term
    path: str | None
    constraint_component: str
    value: Term | None
    message: str
    severity: str = SEVERITY_VIOLATION

    def sort_key(self):
        return (
            term_sort_key(self.focus_node),
            self.path or "",
            self.constraint_component,
            term_sort_key(self.value) if self.value is not None else "",
            self.message,
        )


@dataclass
class ValidationReport:
    conforms: bool
    results: list[ValidationResult]

    @property
    def violations(self) -> list[ValidationResult]:
        return [r for r in self.results if r.severity == SEVERITY_VIOLATION]


# ---------------------------------------------------------------------------
# shapes graph parsing


def _read_list(graph: Graph, head: Term, warnings: list[str]) -> list[Term]:
    items: list[Term] = []
    seen: set[Term] = set()
    node = head
    while True:
        if isinstance(node, Iri) and node.value == RDF_NIL:
            return items
        if node in seen:
            warnings.append("cyclic RDF list in shapes graph")
            return items
        seen.add(node)
        firsts = graph.objects(node, Iri(RDF_FIRST))
        rests = graph.objects(node, Iri(RDF_REST))
        if not firsts or not rests:
            warnings.append(f"malformed RDF list at {term_to_ntriples(node)}")
            return items
        items.append(firsts[0])
        node = rests[0]


def _natural(term: Term, what: str) -> int:
    if not isinstance(term, Literal):
        raise MalformedShapeError(f"{what} must be a literal, got {term_to_ntriples(term)}")
    try:
        value = int(term.lexical)
    except ValueError:
        raise MalformedShapeError(f"{what} must be a natural number, got {term.lexical!r}")
    if value < 0:
        raise MalformedShapeError(f"{what} must be non-negative, got {value}")
    return value


_VALUE_CONSTRAINT_PREDICATES = {
    SH_CLASS,
    SH_DATATYPE,
    SH_NODE_KIND,
    SH_IN,
    SH_HAS_VALUE,
    SH_NODE,
    SH_LANGUAGE_IN,
}

_KNOWN_PROPERTY_PREDICATES = _VALUE_CONSTRAINT_PREDICATES | {
    SH_PATH,
    SH_MIN_COUNT,
    SH_MAX_COUNT,
    SH_OR,
    SH_UNIQUE_LANG,
    RDF_TYPE,
}


def _read_value_constraints(
    graph: Graph, node: Term, warnings: list[str], context: str
) -> ValueConstraints:
    vc = ValueConstraints()
    for pred, setter in (
        (SH_CLASS, "class_iri"),
        (SH_DATATYPE, "datatype"),
        (SH_NODE_KIND, "node_kind"),
        (SH_NODE, "node_shape"),
    ):
        values = graph.objects(node, Iri(pred))
        if values:
            value = values[0]
            if not isinstance(value, Iri):
                raise MalformedShapeError(f"{pred} on {context} must be an IRI")
            setattr(vc, setter, value.value)
    in_heads = graph.objects(node, Iri(SH_IN))
    if in_heads:
        vc.in_values = _read_list(graph, in_heads[0], warnings)
    has_values = graph.objects(node, Iri(SH_HAS_VALUE))
    if has_values:
        vc.has_value = has_values[0]
    lang_heads = graph.objects(node, Iri(SH_LANGUAGE_IN))
    if lang_heads:
        tags = _read_list(graph, lang_heads[0], warnings)
        vc.language_in = [t.lexical for t in tags if isinstance(t, Literal)]
    return vc


def _read_property_shape(graph: Graph, node: Term, warnings: list[str]) -> PropertyShape:
    paths = graph.objects(node, Iri(SH_PATH))
    if not paths:
        raise MalformedShapeError(f"property shape {term_to_ntriples(node)} has no sh:path")
    path = paths[0]
    if not isinstance(path, Iri):
        raise MalformedShapeError(
            "only single forward predicate paths are supported, got "
            + term_to_ntriples(path)
        )
    ps = PropertyShape(path=path.value)
    min_counts = graph.objects(node, Iri(SH_MIN_COUNT))
    if min_counts:
        ps.min_count = _natural(min_counts[0], "sh:minCount")
    max_counts = graph.objects(node, Iri(SH_MAX_COUNT))
    if max_counts:
        ps.max_count = _natural(max_counts[0], "sh:maxCount")
    if ps.min_count is not None and ps.max_count is not None and ps.min_count > ps.max_count:
        raise MalformedShapeError(
            f"sh:minCount {ps.min_count} exceeds sh:maxCount {ps.max_count} on {path.value}"
        )
    ps.constraints = _read_value_constraints(graph, node, warnings, path.value)
    or_heads = graph.objects(node, Iri(SH_OR))
    if or_heads:
        groups = _read_list(graph, or_heads[0], warnings)
        if not groups:
            raise MalformedShapeError(f"empty sh:or group on {path.value}")
        ps.or_groups = [
            _read_value_constraints(graph, group, warnings, path.value)
            for group in groups
        ]
    uniques = graph.objects(node, Iri(SH_UNIQUE_LANG))
    if uniques:
        ps.unique_lang = (
            isinstance(uniques[0], Literal) and uniques[0].lexical == "true"
        )
    for triple in graph.sorted_triples():
        if triple.subject == node and triple.predicate.value not in _KNOWN_PROPERTY_PREDICATES:
            warnings.append(
                f"unsupported constraint component {triple.predicate.value} "
                f"on property shape for {path.value}"
            )
    return ps


def parse_shapes(graph: Graph) -> ParsedShapes:
    """Extract every node shape; unknown components warn, never fail."""
    warnings: list[str] = []
    shapes: list[NodeShape] = []
    shape_nodes = graph.subjects(Iri(RDF_TYPE), Iri(SH_NODE_SHAPE))
    for node in shape_nodes:
        if not isinstance(node, Iri):
            warnings.append("blank node shapes without IRIs are skipped")
            continue
        shape = NodeShape(iri=node.value)
        for target in graph.objects(node, Iri(SH_TARGET_CLASS)):
            if isinstance(target, Iri):
                shape.target_classes.append(target.value)
            else:
                raise MalformedShapeError(f"sh:targetClass on {node.value} must be an IRI")
        closed = graph.objects(node, Iri(SH_CLOSED))
        if closed:
            shape.closed = isinstance(closed[0], Literal) and closed[0].lexical == "true"
        for prop_node in graph.objects(node, Iri(SH_PROPERTY)):
            shape.property_shapes.append(_read_property_shape(graph, prop_node, warnings))
        shape.property_shapes.sort(key=lambda ps: ps.path)
        shapes.append(shape)
    shapes.sort(key=lambda s: s.iri)
    return ParsedShapes(shapes=shapes, warnings=warnings)


# ---------------------------------------------------------------------------
# validation


def _node_kind_ok(value: Term, kind: str) -> bool:
    if kind == NODEKIND_IRI:
        return isinstance(value, Iri)
    if kind == NODEKIND_LITERAL:
        return isinstance(value, Literal)
    if kind == NODEKIND_BLANK_OR_IRI:
        return isinstance(value, (Iri, BlankNode))
    return True


def _has_class(data: Graph, value: Term, class_iri: str) -> bool:
    if isinstance(value, Literal):
        return False
    return Iri(class_iri) in set(data.objects(value, Iri(RDF_TYPE)))


def _value_satisfies(
    data: Graph,
    value: Term,
    vc: ValueConstraints,
    shapes_by_iri: dict[str, NodeShape],
    depth: int,
) -> bool:
    if vc.class_iri is not None and not _has_class(data, value, vc.class_iri):
        return False
    if vc.datatype is not None:
        if not isinstance(value, Literal) or value.datatype != vc.datatype:
            return False
    if vc.node_kind is not None and not _node_kind_ok(value, vc.node_kind):
        return False
    if vc.in_values is not None and value not in vc.in_values:
        return False
    if vc.language_in is not None:
        if not isinstance(value, Literal) or value.language is None:
            return False
        if value.language.lower() not in [t.lower() for t in vc.language_in]:
            return False
    if vc.node_shape is not None:
        target = shapes_by_iri.get(vc.node_shape)
        if target is None or depth >= MAX_NODE_DEPTH:
            return False
        if isinstance(value, Literal):
            return False
        nested = _check_focus_node(data, value, target, shapes_by_iri, depth + 1)
        if nested:
            return False
    return True


def _check_property(
    data: Graph,
    focus: Term,
    shape: NodeShape,
    ps: PropertyShape,
    shapes_by_iri: dict[str, NodeShape],
    depth: int,
) -> list[ValidationResult]:
    results: list[ValidationResult] = []
    values = data.objects(focus, Iri(ps.path))

    def add(component: str, message: str, value: Term | None = None) -> None:
        results.append(
            ValidationResult(
                focus_node=focus,
                path=ps.path,
                constraint_component=component,
                value=value,
                message=message,
            )
        )

    if ps.min_count is not None and len(values) < ps.min_count:
        add(
            COMP_MIN_COUNT,
            f"expected at least {ps.min_count} value(s) for {ps.path}, found {len(values)}",
        )
    if ps.max_count is not None and len(values) > ps.max_count:
        add(
            COMP_MAX_COUNT,
            f"expected at most {ps.max_count} value(s) for {ps.path}, found {len(values)}",
        )

    vc = ps.constraints
    for value in values:
        if vc.class_iri is not None and not _has_class(data, value, vc.class_iri):
            add(COMP_CLASS, f"value is not an instance of {vc.class_iri}", value)
        if vc.datatype is not None and (
            not isinstance(value, Literal) or value.datatype != vc.datatype
        ):
            add(COMP_DATATYPE, f"value does not have datatype {vc.datatype}", value)
        if vc.node_kind is not None and not _node_kind_ok(value, vc.node_kind):
            add(COMP_NODE_KIND, f"value is not of node kind {vc.node_kind}", value)
        if vc.in_values is not None and value not in vc.in_values:
            allowed = ", ".join(term_to_ntriples(t) for t in vc.in_values)
            add(COMP_IN, f"value is not one of [{allowed}]", value)
        if vc.language_in is not None:
            ok = (
                isinstance(value, Literal)
                and value.language is not None
                and value.language.lower() in [t.lower() for t in vc.language_in]
            )
            if not ok:
                add(COMP_LANGUAGE_IN, f"language not in {vc.language_in}", value)
        if vc.node_shape is not None:
            target = shapes_by_iri.get(vc.node_shape)
            if target is None:
                add(
                    COMP_NODE,
                    f"referenced node shape {vc.node_shape} is not defined",
                    value,
                )
            elif depth >= MAX_NODE_DEPTH:
                add(COMP_NODE, "node shape recursion depth cap exceeded", value)
            elif isinstance(value, Literal) or _check_focus_node(
                data, value, target, shapes_by_iri, depth + 1
            ):
                add(COMP_NODE, f"value does not conform to {vc.node_shape}", value)
        if ps.or_groups:
            if not any(
                _value_satisfies(data, value, group, shapes_by_iri, depth)
                for group in ps.or_groups
            ):
                add(COMP_OR, "value satisfies none of the sh:or alternatives", value)

    if vc.has_value is not None and vc.has_value not in values:
        add(
            COMP_HAS_VALUE,
            f"missing required value {term_to_ntriples(vc.has_value)}",
        )
    if ps.unique_lang:
        seen: dict[str, int] = {}
        for value in values:
            if isinstance(value, Literal) and value.language is not None:
                seen[value.language] = seen.get(value.language, 0) + 1
        for lang in sorted(seen):
            if seen[lang] > 1:
                add(COMP_UNIQUE_LANG, f"{seen[lang]} values share language tag {lang!r}")
    return results


def _check_focus_node(
    data: Graph,
    focus: Term,
    shape: NodeShape,
    shapes_by_iri: dict[str, NodeShape],
    depth: int = 0,
) -> list[ValidationResult]:
    results: list[ValidationResult] = []
    for ps in shape.property_shapes:
        results.extend(_check_property(data, focus, shape, ps, shapes_by_iri, depth))
    if shape.closed:
        allowed = {ps.path for ps in shape.property_shapes} | {RDF_TYPE}
        for triple in data.subject_triples(focus):
            if triple.predicate.value not in allowed:
                results.append(
                    ValidationResult(
                        focus_node=focus,
                        path=triple.predicate.value,
                        constraint_component=COMP_CLOSED,
                        value=triple.object,
                        message=f"predicate {triple.predicate.value} is not allowed "
                        f"on closed shape {shape.iri}",
                    )
                )
    return results


def validate(data: Graph, shapes: Iterable[NodeShape]) -> ValidationReport:
    """Check every instance of each shape's target classes. Pure."""
    shape_list = sorted(shapes, key=lambda s: s.iri)
    shapes_by_iri = {s.iri: s for s in shape_list}
    results: list[ValidationResult] = []
    for shape in shape_list:
        focus_nodes: list[Term] = []
        for target_class in sorted(shape.target_classes):
            focus_nodes.extend(data.subjects(Iri(RDF_TYPE), Iri(target_class)))
        seen: set[Term] = set()
        for focus in focus_nodes:
            if focus in seen:
                continue
            seen.add(focus)
            results.extend(_check_focus_node(data, focus, shape, shapes_by_iri))
    unique = sorted(set(results), key=ValidationResult.sort_key)
    return ValidationReport(conforms=not any(
        r.severity == SEVERITY_VIOLATION for r in unique
    ), results=unique)
