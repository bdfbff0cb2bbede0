"""SDS ingestion: JSON/text parsing, annotation, and graph emission."""

import json

import pytest

from sdsgraph import resources
from sdsgraph.fixtures import acetomenophin_sheet, demo_corpus, dumps, mixture_sheet
from sdsgraph.graph import Iri, Literal, Triple
from sdsgraph.rdfio import FORMAT_TURTLE, parse, serialize
from sdsgraph.sds import (
    DOC_MARKER,
    SAFED_CLASSIFICATION,
    DuplicateSectionNumber,
    InvalidDate,
    NoSectionsDetected,
    OutOfRangeConcentration,
    SchemaViolation,
    annotate,
    compound_iri,
    parse_sds_json,
    parse_sds_text,
    record_from_dict,
    record_to_dict,
    sds_iri,
    to_graph,
    validate_record,
)
from sdsgraph.shacl import parse_shapes
from sdsgraph.skos import load_taxonomy
from sdsgraph.sparql import evaluate_query
from sdsgraph.vocab import GHS_TAX, SAFED, SKOS


@pytest.fixture(scope="module")
def taxonomy():
    return load_taxonomy(parse(resources.read_text("taxonomies/dpg-ghs.ttl"), FORMAT_TURTLE))


@pytest.fixture(scope="module")
def taxonomy_graph():
    return parse(resources.read_text("taxonomies/dpg-ghs.ttl"), FORMAT_TURTLE)


@pytest.fixture(scope="module")
def dpg_shapes():
    doc = parse_shapes(parse(resources.read_text("shapes/dpg-doc.ttl"), FORMAT_TURTLE)).shapes
    safed = parse_shapes(parse(resources.read_text("shapes/dpg-safed.ttl"), FORMAT_TURTLE)).shapes
    return doc + safed


def minimal_sheet(**overrides):
    sheet = {
        "compound": {"name": "Test Substance"},
        "manufacturer": "Maker",
        "language": "en",
        "revisionDate": "2024-01-01",
        "sections": [{"number": 1, "heading": "Identification", "text": ""}],
    }
    sheet.update(overrides)
    return sheet


# --- JSON parsing -----------------------------------------------------------


def test_parse_bundled_acetomenophin_fixture():
    record = parse_sds_json(resources.read_text("fixtures/acetomenophin-400.json"))
    assert record.compound_name == "Acetomenophin 400"
    assert len(record.sections) == 16
    assert {h.h_code for h in record.hazard_entries} == {"H319", "H302", None}
    assert record.pictograms == ("GHS07",)


def test_bundled_fixture_file_matches_builder():
    assert resources.read_text("fixtures/acetomenophin-400.json") == dumps(
        acetomenophin_sheet()
    )


def test_parse_minimal_record():
    record = parse_sds_json(json.dumps(minimal_sheet()))
    assert record.compound_name == "Test Substance"
    assert record.hazard_entries == ()


def test_concentration_out_of_range():
    sheet = minimal_sheet(
        ingredients=[{"name": "x", "concentrationPercent": 104.0}]
    )
    with pytest.raises(OutOfRangeConcentration):
        parse_sds_json(json.dumps(sheet))


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"language": None}, "language"),
        ({"revisionDate": "03/04/2021"}, "revisionDate"),
        ({"sections": []}, "sections"),
        ({"pictograms": ["GHS99"]}, "pictograms[0]"),
        (
            {
                "sections": [
                    {"number": 2, "heading": "a", "text": ""},
                    {"number": 2, "heading": "b", "text": ""},
                ]
            },
            "sections[1].number",
        ),
        ({"hazards": [{"hCode": "X99", "statement": "s", "section": 1}]}, "hazards[0].hCode"),
        ({"hazards": [{"hCode": "H319", "statement": "s", "section": 9}]}, "hazards[0].section"),
    ],
)
def test_schema_violations_name_the_field(patch, field):
    sheet = minimal_sheet(**patch)
    if patch.get("language", "x") is None:
        del sheet["language"]
    with pytest.raises(SchemaViolation) as exc:
        parse_sds_json(json.dumps(sheet))
    assert exc.value.field == field


def test_ambiguous_date_rejected():
    with pytest.raises(InvalidDate):
        parse_sds_json(json.dumps(minimal_sheet(revisionDate="03/04/2021")))


# --- text parsing -----------------------------------------------------------


TEXT_FIXTURES = [
    "fixtures/toluene-99-canonical.txt",
    "fixtures/toluene-99-vendor-a.txt",
    "fixtures/ethanol-96-vendor-b.txt",
    "fixtures/acetone-99-vendor-c.txt",
]

SEEDED_CODES = {
    "fixtures/toluene-99-canonical.txt": {"H225", "H315", "H336", "H361"},
    "fixtures/toluene-99-vendor-a.txt": {"H225", "H315"},
    "fixtures/ethanol-96-vendor-b.txt": {"H225", "H319"},
    "fixtures/acetone-99-vendor-c.txt": {"H225", "H319", "H336"},
}


def test_canonical_text_fixture_all_16_headings(taxonomy):
    record = parse_sds_text(resources.read_text(TEXT_FIXTURES[0]), taxonomy)
    assert [s.number for s in record.sections] == list(range(1, 17))
    assert all(s.heading_concept for s in record.sections)
    assert record.compound_name == "Toluene 99"
    assert record.manufacturer == "Vanguard Reagents"
    assert record.revision_date == "2022-05-10"


@pytest.mark.parametrize("path", TEXT_FIXTURES)
def test_vendor_variants_resolve_all_headings(taxonomy, path):
    record = parse_sds_text(resources.read_text(path), taxonomy)
    assert len(record.sections) == 16
    assert all(s.heading_concept for s in record.sections), [
        s.heading_text for s in record.sections if not s.heading_concept
    ]


@pytest.mark.parametrize("path", TEXT_FIXTURES)
def test_h_code_extraction_recovers_seeded_codes(taxonomy, path):
    record = parse_sds_text(resources.read_text(path), taxonomy)
    assert {h.h_code for h in record.hazard_entries} == SEEDED_CODES[path]


def test_variant_heading_resolves_to_same_concept(taxonomy):
    canonical = parse_sds_text(resources.read_text(TEXT_FIXTURES[0]), taxonomy)
    variant = parse_sds_text(resources.read_text(TEXT_FIXTURES[1]), taxonomy)
    by_number = {s.number: s.heading_concept for s in canonical.sections}
    for section in variant.sections:
        assert section.heading_concept == by_number[section.number]


def test_empty_text_raises():
    with pytest.raises(NoSectionsDetected):
        parse_sds_text("", load_taxonomy(parse("", "ntriples")))


def test_duplicate_heading_rejected(taxonomy):
    text = "SECTION 2: Hazard(s) identification\nbody\n2. HAZARDS IDENTIFICATION\n"
    with pytest.raises(DuplicateSectionNumber):
        parse_sds_text(text, taxonomy)


# --- annotation -------------------------------------------------------------


def test_annotate_h319_by_notation(taxonomy):
    record = parse_sds_json(resources.read_text("fixtures/acetomenophin-400.json"))
    result = annotate(record, taxonomy)
    coded = {h.h_code: h.classification_concept for h in result.record.hazard_entries}
    assert coded["H319"] == GHS_TAX + "h319"
    assert coded["H302"] == GHS_TAX + "h302"


def test_annotate_label_path(taxonomy):
    record = parse_sds_json(resources.read_text("fixtures/acetomenophin-400.json"))
    result = annotate(record, taxonomy)
    label_matched = [
        h for h in result.record.hazard_entries if h.h_code is None
    ]
    assert label_matched[0].classification_concept == GHS_TAX + "eye-irritation-2a"
    assert result.misses == []


def test_annotate_counts_misses(taxonomy):
    sheet = minimal_sheet(
        hazards=[{"hCode": None, "statement": "Vendor-specific caution text", "section": 1}]
    )
    result = annotate(parse_sds_json(json.dumps(sheet)), taxonomy)
    assert len(result.misses) == 1
    assert result.record.hazard_entries[0].classification_concept is None


def test_annotate_only_touches_concept_fields(taxonomy):
    record = parse_sds_json(resources.read_text("fixtures/acetomenophin-400.json"))
    result = annotate(record, taxonomy)
    assert result.record.uniqueness_key == record.uniqueness_key
    assert [s.body_text for s in result.record.sections] == [
        s.body_text for s in record.sections
    ]
    assert [h.statement_text for h in result.record.hazard_entries] == [
        h.statement_text for h in record.hazard_entries
    ]


def test_annotate_german_sheet_resolves_headings(taxonomy):
    german = next(s for s in demo_corpus() if s["language"] == "de")
    result = annotate(parse_sds_json(json.dumps(german)), taxonomy)
    assert result.misses == []
    assert all(s.heading_concept for s in result.record.sections)


# --- graph emission ---------------------------------------------------------


def annotated_acetomenophin(taxonomy):
    record = parse_sds_json(resources.read_text("fixtures/acetomenophin-400.json"))
    return annotate(record, taxonomy).record


def test_to_graph_contains_classification_triple(taxonomy):
    record = annotated_acetomenophin(taxonomy)
    graph = to_graph(record)
    compound = Iri(compound_iri("Acetomenophin 400"))
    assert Triple(compound, Iri(SAFED_CLASSIFICATION), Iri(GHS_TAX + "eye-irritation-2a")) in graph
    assert Triple(compound, Iri(SAFED_CLASSIFICATION), Iri(GHS_TAX + "h319")) in graph


def test_to_graph_no_hazards_no_classifications(taxonomy):
    record = annotate(parse_sds_json(json.dumps(minimal_sheet())), taxonomy).record
    graph = to_graph(record)
    assert not [t for t in graph.triples if t.predicate.value == SAFED_CLASSIFICATION]
    # document and compound nodes still emitted
    kinds = {t.object.value for t in graph.triples if t.predicate.value.endswith("#type")}
    assert "https://dpg.example/ns/doc#Document" in kinds
    assert SAFED + "Compound" in kinds


def test_to_graph_deterministic(taxonomy):
    record = annotated_acetomenophin(taxonomy)
    assert serialize(to_graph(record)) == serialize(to_graph(record))


def test_minted_iris_stable_and_injective():
    keys = [
        ("A", "M", "en", "2024-01-01"),
        ("A", "M", "en", "2024-01-02"),
        ("A", "M", "de", "2024-01-01"),
        ("A", "N", "en", "2024-01-01"),
        ("B", "M", "en", "2024-01-01"),
    ]
    iris = [sds_iri(*k) for k in keys]
    assert len(set(iris)) == len(keys)
    assert iris == [sds_iri(*k) for k in keys]


def test_compound_iri_case_insensitive():
    assert compound_iri("Acetomenophin 400") == compound_iri("ACETOMENOPHIN  400")


def test_semantic_round_trip_via_query(taxonomy, taxonomy_graph):
    """JSON -> record -> graph -> query recovers the annotated hazards."""
    record = annotated_acetomenophin(taxonomy)
    graph = to_graph(record).union(taxonomy_graph)
    query = f"""
PREFIX safed: <{SAFED}>
SELECT ?hazard WHERE {{ <{record.compound_id}> safed:classification ?hazard }}
"""
    got = {row["hazard"].value for row in evaluate_query(graph, query)}
    expected = {
        h.classification_concept
        for h in record.hazard_entries
        if h.classification_concept
    }
    assert got == expected


def test_record_dict_round_trip(taxonomy):
    record = annotated_acetomenophin(taxonomy)
    assert record_from_dict(record_to_dict(record)) == record


# --- validation seam --------------------------------------------------------


def test_conforming_record_validates(taxonomy, taxonomy_graph, dpg_shapes):
    record = annotated_acetomenophin(taxonomy)
    graph = to_graph(record).union(taxonomy_graph)
    report = validate_record(graph, dpg_shapes)
    assert report.conforms is True, [r.message for r in report.results]


def test_container_without_marker_violates(taxonomy, taxonomy_graph, dpg_shapes):
    record = annotated_acetomenophin(taxonomy)
    graph = to_graph(record)
    section2_marker = [
        t
        for t in graph.triples
        if t.predicate.value == DOC_MARKER and t.subject.value.endswith("/section/2")
    ]
    from sdsgraph.graph import Graph

    mutated = Graph(graph.triples - set(section2_marker)).union(taxonomy_graph)
    report = validate_record(mutated, dpg_shapes)
    violations = report.violations
    assert len(violations) == 1
    assert violations[0].constraint_component.endswith("MinCountConstraintComponent")
    assert violations[0].path == DOC_MARKER


def test_empty_graph_conforms(dpg_shapes):
    from sdsgraph.graph import Graph

    assert validate_record(Graph(), dpg_shapes).conforms is True


def test_corpus_sheets_all_conform(taxonomy, taxonomy_graph, dpg_shapes):
    for sheet in demo_corpus():
        result = annotate(parse_sds_json(json.dumps(sheet)), taxonomy)
        assert result.misses == [], (sheet["compound"], sheet["language"], result.misses)
        graph = to_graph(result.record).union(taxonomy_graph)
        report = validate_record(graph, dpg_shapes)
        assert report.conforms, (
            sheet["compound"],
            [r.message for r in report.violations],
        )


def test_mixture_sheet_parses(taxonomy):
    result = annotate(parse_sds_json(json.dumps(mixture_sheet())), taxonomy)
    assert result.record.ingredients[0].name == "Acetomenophin 400"
