"""Shape parsing and validation semantics on constructed fixtures."""

import pytest

from sdsgraph import resources
from sdsgraph.graph import Graph, Iri, Literal, Triple
from sdsgraph.rdfio import FORMAT_TURTLE, parse
from sdsgraph.shacl import (
    COMP_CLASS,
    COMP_CLOSED,
    COMP_DATATYPE,
    COMP_HAS_VALUE,
    COMP_IN,
    COMP_LANGUAGE_IN,
    COMP_MAX_COUNT,
    COMP_MIN_COUNT,
    COMP_NODE,
    COMP_NODE_KIND,
    COMP_OR,
    COMP_UNIQUE_LANG,
    MalformedShapeError,
    parse_shapes,
    validate,
)
from sdsgraph.vocab import RDF_TYPE, SAFED, SH, XSD_DECIMAL, XSD_STRING

EX = "http://example.org/"


def iri(local):
    return Iri(EX + local)


def t(s, p, o):
    return Triple(s if isinstance(s, Iri) else iri(s), iri(p) if not isinstance(p, Iri) else p, o)


SHAPES_TTL = f"""
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix sh: <http://www.w3.org/ns/shacl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix ex: <{EX}> .

ex:WidgetShape a sh:NodeShape ;
    sh:targetClass ex:Widget ;
    sh:closed true ;
    sh:property _:name ;
    sh:property _:grade ;
    sh:property _:part ;
    sh:property _:origin ;
    sh:property _:labels ;
    sh:property _:content .

_:name sh:path ex:name ; sh:minCount 1 ; sh:maxCount 1 ; sh:datatype xsd:string .
_:grade sh:path ex:grade ; sh:in _:g1 .
_:g1 rdf:first "A" ; rdf:rest _:g2 .
_:g2 rdf:first "B" ; rdf:rest rdf:nil .
_:part sh:path ex:part ; sh:node ex:PartShape ; sh:nodeKind sh:IRI .
_:origin sh:path ex:origin ; sh:hasValue ex:factory .
_:labels sh:path ex:label ; sh:uniqueLang true ; sh:languageIn _:l1 .
_:l1 rdf:first "en" ; rdf:rest _:l2 .
_:l2 rdf:first "de" ; rdf:rest rdf:nil .
_:content sh:path ex:content ; sh:or _:o1 .
_:o1 rdf:first _:oa ; rdf:rest _:o2 .
_:o2 rdf:first _:ob ; rdf:rest rdf:nil .
_:oa sh:datatype xsd:string .
_:ob sh:class ex:Marker .

ex:PartShape a sh:NodeShape ;
    sh:property _:kind .
_:kind sh:path ex:kind ; sh:minCount 1 .
"""


@pytest.fixture(scope="module")
def widget_shapes():
    return parse_shapes(parse(SHAPES_TTL, FORMAT_TURTLE)).shapes


def conforming_widget() -> Graph:
    return Graph(
        [
            t("w", RDF_TYPE_IRI, iri("Widget")),
            t("w", "name", Literal("widget one")),
            t("w", "grade", Literal("A")),
            t("w", "part", iri("p1")),
            t("w", "origin", iri("factory")),
            t("w", "label", Literal("widget", language="en")),
            t("w", "label", Literal("Werkstueck", language="de")),
            t("w", "content", Literal("note")),
            t("w", "content", iri("m1")),
            t("p1", "kind", Literal("bolt")),
            t("m1", RDF_TYPE_IRI, iri("Marker")),
        ]
    )


RDF_TYPE_IRI = Iri(RDF_TYPE)


# --- parsing ----------------------------------------------------------------


def test_parse_empty_graph():
    assert parse_shapes(Graph()).shapes == []


def test_parse_widget_shape(widget_shapes):
    assert [s.iri for s in widget_shapes] == [EX + "PartShape", EX + "WidgetShape"]
    widget = widget_shapes[1]
    assert widget.target_classes == [EX + "Widget"]
    assert widget.closed is True
    by_path = {ps.path: ps for ps in widget.property_shapes}
    assert by_path[EX + "name"].min_count == 1
    assert by_path[EX + "grade"].constraints.in_values == [Literal("A"), Literal("B")]
    assert by_path[EX + "content"].or_groups[0].datatype == XSD_STRING
    assert by_path[EX + "content"].or_groups[1].class_iri == EX + "Marker"
    assert by_path[EX + "label"].unique_lang is True


def test_parse_bundled_safed_shapes():
    graph = parse(resources.read_text("shapes/dpg-safed.ttl"), FORMAT_TURTLE)
    parsed = parse_shapes(graph)
    assert parsed.warnings == []
    compound = next(s for s in parsed.shapes if s.iri == SAFED + "CompoundShape")
    classification = next(
        ps for ps in compound.property_shapes if ps.path == SAFED + "classification"
    )
    assert classification.constraints.class_iri == SAFED + "Classification"


def test_unsupported_component_warns_not_fails():
    text = f"""
@prefix sh: <{SH}> .
@prefix ex: <{EX}> .
ex:S a sh:NodeShape ; sh:targetClass ex:T ; sh:property _:p .
_:p sh:path ex:q ; sh:pattern "abc" .
"""
    parsed = parse_shapes(parse(text, FORMAT_TURTLE))
    assert len(parsed.shapes) == 1
    assert any("pattern" in w for w in parsed.warnings)


def test_malformed_min_count():
    text = f"""
@prefix sh: <{SH}> .
@prefix ex: <{EX}> .
ex:S a sh:NodeShape ; sh:targetClass ex:T ; sh:property _:p .
_:p sh:path ex:q ; sh:minCount "soon" .
"""
    with pytest.raises(MalformedShapeError):
        parse_shapes(parse(text, FORMAT_TURTLE))


# --- validation -------------------------------------------------------------


def test_validate_empty_data(widget_shapes):
    report = validate(Graph(), widget_shapes)
    assert report.conforms is True
    assert report.results == []


def test_conforming_widget(widget_shapes):
    report = validate(conforming_widget(), widget_shapes)
    assert report.conforms is True, [r.message for r in report.results]


def drop(graph: Graph, predicate: str) -> Graph:
    return Graph([x for x in graph.triples if x.predicate.value != EX + predicate])


@pytest.mark.parametrize(
    "mutate,component",
    [
        (lambda g: drop(g, "name"), COMP_MIN_COUNT),
        (lambda g: g.insert(t("w", "name", Literal("second name"))), COMP_MAX_COUNT),
        (lambda g: drop(g, "grade").insert(t("w", "grade", Literal("Z"))), COMP_IN),
        (
            lambda g: drop(g, "name").insert(t("w", "name", Literal("5", datatype=XSD_DECIMAL))),
            COMP_DATATYPE,
        ),
        (lambda g: drop(g, "origin").insert(t("w", "origin", iri("elsewhere"))), COMP_HAS_VALUE),
        (lambda g: g.insert(t("w", "label", Literal("zweite", language="de"))), COMP_UNIQUE_LANG),
        (lambda g: g.insert(t("w", "label", Literal("etiquette", language="fr"))), COMP_LANGUAGE_IN),
        (lambda g: g.insert(t("w", "content", iri("unmarked"))), COMP_OR),
        (lambda g: g.insert(t("w", "bogus", Literal("x"))), COMP_CLOSED),
        (lambda g: drop(g, "kind"), COMP_NODE),
    ],
)
def test_single_mutation_yields_expected_component(widget_shapes, mutate, component):
    mutated = mutate(conforming_widget())
    report = validate(mutated, widget_shapes)
    assert report.conforms is False
    components = [r.constraint_component for r in report.violations]
    assert components == [component], components


def test_datatype_mutation_on_name_keeps_count():
    # replacing the name value keeps minCount/maxCount satisfied, so the
    # only violation is the datatype one (checked above); sanity-check
    # that a *literal* part also trips nodeKind
    shapes = parse_shapes(parse(SHAPES_TTL, FORMAT_TURTLE)).shapes
    g = drop(conforming_widget(), "part").insert(t("w", "part", Literal("loose")))
    report = validate(g, shapes)
    comps = {r.constraint_component for r in report.violations}
    # literal fails both sh:nodeKind and sh:node
    assert comps == {COMP_NODE_KIND, COMP_NODE}


def test_class_constraint_against_plain_literal():
    text = f"""
@prefix sh: <{SH}> .
@prefix ex: <{EX}> .
ex:S a sh:NodeShape ; sh:targetClass ex:T ; sh:property _:p .
_:p sh:path ex:ref ; sh:class ex:Marker .
"""
    shapes = parse_shapes(parse(text, FORMAT_TURTLE)).shapes
    data = Graph([t("x", RDF_TYPE_IRI, iri("T")), t("x", "ref", Literal("oops"))])
    report = validate(data, shapes)
    assert [r.constraint_component for r in report.violations] == [COMP_CLASS]
    assert report.violations[0].focus_node == iri("x")


def test_validation_is_pure_and_deterministic(widget_shapes):
    g = drop(conforming_widget(), "name")
    r1 = validate(g, widget_shapes)
    r2 = validate(g, widget_shapes)
    assert r1.results == r2.results
    assert r1.conforms is r2.conforms is False


def test_report_conforms_iff_no_violations(widget_shapes):
    good = validate(conforming_widget(), widget_shapes)
    assert good.conforms is (len(good.violations) == 0)
    bad = validate(drop(conforming_widget(), "name"), widget_shapes)
    assert bad.conforms is (len(bad.violations) == 0)
