"""Store pipeline: idempotent ingestion, persistence, fuzzy search."""

import json

import pytest

from sdsgraph import resources
from sdsgraph.fixtures import acetomenophin_sheet, build_sheet, demo_corpus, dumps, mixture_sheet
from sdsgraph.graph import Iri, Triple
from sdsgraph.sds import OutOfRangeConcentration, compound_iri
from sdsgraph.store import Assets, CatalogEntry, Store, StoreCorruptError, _levenshtein_capped, _match_tier
from sdsgraph.vocab import GHS_TAX, SAFED


@pytest.fixture(scope="module")
def assets():
    return Assets.bundled()


@pytest.fixture()
def store(assets, tmp_path):
    return Store(assets, data_dir=tmp_path / "data")


def test_ingest_creates_catalog_entry(store):
    result = store.ingest(dumps(acetomenophin_sheet()))
    assert result.status == "created"
    assert result.report is not None and result.report.conforms
    catalog = store.catalog()
    assert len(catalog) == 1
    assert catalog[0].compound_name == "Acetomenophin 400"
    assert catalog[0].hazard_count == 3


def test_reingest_is_unchanged(store):
    first = store.ingest(dumps(acetomenophin_sheet()))
    second = store.ingest(dumps(acetomenophin_sheet()))
    assert first.status == "created"
    assert second.status == "unchanged"
    assert second.sds_id == first.sds_id
    assert len(store.catalog()) == 1


def test_text_ingest(store):
    result = store.ingest(
        resources.read_text("fixtures/toluene-99-canonical.txt"), content_type="text"
    )
    assert result.status == "created", result.report and [
        r.message for r in result.report.violations
    ]
    assert store.catalog()[0].compound_name == "Toluene 99"


def test_unresolvable_heading_quarantines(store):
    sheet = acetomenophin_sheet()
    sheet["sections"][4]["heading"] = "Totally Nonstandard Heading"
    result = store.ingest(dumps(sheet))
    assert result.status == "quarantined"
    assert result.annotation_misses
    assert store.catalog() == []
    assert result.sds_id in store.quarantine
    # a corrected re-upload is promoted out of quarantine
    fixed = store.ingest(dumps(acetomenophin_sheet()))
    assert fixed.status == "created"
    assert fixed.sds_id not in store.quarantine


def test_mixture_inference_runs_during_ingest(store):
    store.ingest(dumps(acetomenophin_sheet()))
    result = store.ingest(dumps(mixture_sheet()))
    assert result.status == "created"
    assert result.inference_added >= 1
    snapshot = store.snapshot()
    mixture_node = Iri(compound_iri("Calibration Suspension 12"))
    classification = Triple(
        mixture_node, Iri(SAFED + "classification"), Iri(GHS_TAX + "eye-irritation-2a")
    )
    assert classification in snapshot.graph


def test_inference_applies_to_earlier_sheets_too(store):
    # mixture first, substance sheet second: the classification appears
    # once the substance's own sheet lands
    store.ingest(dumps(mixture_sheet()))
    snapshot = store.snapshot()
    mixture_node = Iri(compound_iri("Calibration Suspension 12"))
    classification = Triple(
        mixture_node, Iri(SAFED + "classification"), Iri(GHS_TAX + "eye-irritation-2a")
    )
    assert classification not in snapshot.graph
    store.ingest(dumps(acetomenophin_sheet()))
    assert classification in store.snapshot().graph


def test_snapshot_restore_identical_catalog(assets, tmp_path):
    data_dir = tmp_path / "store"
    store = Store(assets, data_dir=data_dir)
    for sheet in demo_corpus()[:6]:
        store.ingest(dumps(sheet))
    before_catalog = store.catalog()
    before_graph = store.snapshot().graph

    restored = Store(assets, data_dir=data_dir)
    assert restored.catalog() == before_catalog
    assert restored.snapshot().graph == before_graph


def test_fresh_start_empty(assets, tmp_path):
    store = Store(assets, data_dir=tmp_path / "nothing-here")
    assert store.catalog() == []


def test_truncated_graph_refuses_to_start(assets, tmp_path):
    data_dir = tmp_path / "store"
    store = Store(assets, data_dir=data_dir)
    store.ingest(dumps(acetomenophin_sheet()))
    graph_file = data_dir / "graph.nt"
    content = graph_file.read_text(encoding="utf-8")
    graph_file.write_text(content[: len(content) // 2], encoding="utf-8")
    with pytest.raises(StoreCorruptError):
        Store(assets, data_dir=data_dir)


def test_truncated_index_refuses_to_start(assets, tmp_path):
    data_dir = tmp_path / "store"
    store = Store(assets, data_dir=data_dir)
    store.ingest(dumps(acetomenophin_sheet()))
    index_file = data_dir / "records.json"
    index_file.write_text(index_file.read_text(encoding="utf-8")[:40], encoding="utf-8")
    with pytest.raises(StoreCorruptError):
        Store(assets, data_dir=data_dir)


def test_missing_one_snapshot_file_refuses(assets, tmp_path):
    data_dir = tmp_path / "store"
    store = Store(assets, data_dir=data_dir)
    store.ingest(dumps(acetomenophin_sheet()))
    (data_dir / "records.json").unlink()
    with pytest.raises(StoreCorruptError):
        Store(assets, data_dir=data_dir)


def test_schema_error_propagates(store):
    sheet = acetomenophin_sheet()
    sheet["ingredients"][0]["concentrationPercent"] = 104.0
    with pytest.raises(OutOfRangeConcentration):
        store.ingest(dumps(sheet))


# --- fuzzy search -------------------------------------------------------------


@pytest.fixture()
def seeded(assets, tmp_path):
    store = Store(assets, data_dir=tmp_path / "data")
    for sheet in demo_corpus():
        store.ingest(dumps(sheet))
    return store


def test_empty_filter_full_catalog_lexicographic(seeded):
    catalog = seeded.search("")
    assert len(catalog) == 24
    keys = [(e.compound_name, e.manufacturer, e.language, e.revision_date) for e in catalog]
    assert keys == sorted(keys)


def test_prefix_beats_substring(seeded):
    results = seeded.search("aceto")
    assert results[0].compound_name == "Acetomenophin 400"
    assert all(e.compound_name == "Acetomenophin 400" for e in results[:8])


def test_substring_matches_manufacturer(seeded):
    results = seeded.search("chem")
    assert results
    assert all("chem" in e.manufacturer.casefold() for e in results)


def test_edit_distance_within_two(seeded):
    # one substitution inside the compound token
    results = seeded.search("acetomenophen")
    assert results
    assert results[0].compound_name == "Acetomenophin 400"


def test_edit_distance_oracle():
    cases = [
        ("acetomenophin", "acetomenophen", 1),
        ("kitten", "sitten", 1),
        ("kitten", "sittin", 2),
        ("kitten", "kitten", 0),
        ("abc", "xyz", None),
        ("short", "muchlongerword", None),
    ]
    for a, b, expected in cases:
        assert _levenshtein_capped(a, b, cap=2) == expected


def test_match_tier_ordering():
    assert _match_tier("aceto", "Acetomenophin 400") == 0
    assert _match_tier("menoph", "Acetomenophin 400") == 1
    assert _match_tier("acetomenophen", "Acetomenophin 400") == 3  # distance 1
    assert _match_tier("zzz", "Acetomenophin 400") is None


def test_search_limit(seeded):
    assert len(seeded.search("", limit=5)) == 5


def test_search_deterministic(seeded):
    assert seeded.search("o") == seeded.search("o")


def test_no_match_empty(seeded):
    assert seeded.search("qqqqqqq") == []
