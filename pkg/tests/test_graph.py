"""Core term/triple/graph semantics, checked against naive oracles."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdsgraph.graph import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    TermError,
    Triple,
    TriplePattern,
    Variable,
    solve_bgp,
    term_to_ntriples,
)
from sdsgraph.vocab import RDF_LANG_STRING, XSD_INTEGER, XSD_STRING

EX = "http://example.org/"


def iri(local: str) -> Iri:
    return Iri(EX + local)


def t(s: str, p: str, o) -> Triple:
    obj = o if not isinstance(o, str) else iri(o)
    return Triple(iri(s), iri(p), obj)


# --- term invariants -------------------------------------------------------


def test_literal_language_implies_langstring():
    lit = Literal("hello", language="en")
    assert lit.datatype == RDF_LANG_STRING


def test_literal_language_with_other_datatype_rejected():
    with pytest.raises(TermError):
        Literal("hello", datatype=XSD_INTEGER, language="en")


def test_langstring_without_tag_rejected():
    with pytest.raises(TermError):
        Literal("hello", datatype=RDF_LANG_STRING)


def test_plain_literal_is_xsd_string():
    assert Literal("x").datatype == XSD_STRING


@pytest.mark.parametrize("bad", ["", "has space", "tab\there", "nl\nhere"])
def test_bad_iris_rejected(bad):
    with pytest.raises(TermError):
        Iri(bad)


@pytest.mark.parametrize("bad", ["", "0start", "-x", "sp ace"])
def test_bad_blank_labels_rejected(bad):
    with pytest.raises(TermError):
        BlankNode(bad)


def test_literal_subject_rejected():
    with pytest.raises(TermError):
        Triple(Literal("x"), iri("p"), iri("o"))


def test_non_iri_predicate_rejected():
    with pytest.raises(TermError):
        Triple(iri("s"), BlankNode("b"), iri("o"))


# --- insert / set semantics ------------------------------------------------


def test_insert_into_empty():
    g = Graph().insert(t("s", "p", "o"))
    assert len(g) == 1
    assert t("s", "p", "o") in g


def test_insert_idempotent():
    g = Graph().insert(t("s", "p", "o"))
    g2 = g.insert(t("s", "p", "o"))
    assert len(g2) == 1


def test_insert_preserves_prior_triples():
    g = Graph([t("a", "p", "b")]).insert(t("c", "p", "d"))
    assert t("a", "p", "b") in g and t("c", "p", "d") in g


def test_insert_500_with_50_duplicates_matches_set_oracle():
    rng = random.Random(7)
    pool = [
        t(f"s{rng.randrange(40)}", f"p{rng.randrange(5)}", f"o{rng.randrange(40)}")
        for _ in range(450)
    ]
    # ensure distinctness of the base pool, then append 50 known duplicates
    pool = list(dict.fromkeys(pool))
    while len(pool) < 450:
        pool.append(t(f"s{len(pool)}", "pX", f"o{len(pool)}"))
    batch = pool + pool[:50]
    rng.shuffle(batch)
    assert len(batch) == 500

    oracle: set[Triple] = set()
    g = Graph()
    for triple in batch:
        oracle.add(triple)
        g = g.insert(triple)
    assert len(g) == len(oracle) == 450
    assert set(g.triples) == oracle


@given(
    st.lists(
        st.tuples(
            st.integers(0, 5), st.integers(0, 3), st.integers(0, 5)
        ),
        max_size=40,
    )
)
def test_insert_matches_set_oracle_property(ids):
    triples = [t(f"s{a}", f"p{b}", f"o{c}") for a, b, c in ids]
    g = Graph()
    for triple in triples:
        g = g.insert(triple)
    assert set(g.triples) == set(triples)
    # size(insert(insert(G,t),t)) == size(insert(G,t))
    if triples:
        once = g.insert(triples[0])
        assert len(once.insert(triples[0])) == len(once)


# --- match ------------------------------------------------------------------


def naive_match(graph: Graph, pattern: TriplePattern):
    """Brute-force oracle: test every triple against the pattern."""
    results = []
    for triple in graph.triples:
        binding = {}
        ok = True
        for slot, term in (
            (pattern.subject, triple.subject),
            (pattern.predicate, triple.predicate),
            (pattern.object, triple.object),
        ):
            if isinstance(slot, Variable):
                if slot.name in binding and binding[slot.name] != term:
                    ok = False
                    break
                binding[slot.name] = term
            elif slot != term:
                ok = False
                break
        if ok:
            results.append(binding)
    return results


def binding_key(binding):
    return sorted((k, term_to_ntriples(v)) for k, v in binding.items())


def test_match_empty_graph():
    pattern = TriplePattern(Variable("s"), Variable("p"), Variable("o"))
    assert Graph().match(pattern) == []


def test_match_ground_hit_yields_one_empty_binding():
    g = Graph([t("s", "p", "o")])
    assert g.match(TriplePattern(iri("s"), iri("p"), iri("o"))) == [{}]


def test_match_against_linear_scan_oracle():
    rng = random.Random(11)
    triples = [
        t(f"s{rng.randrange(20)}", f"p{rng.randrange(4)}", f"o{rng.randrange(20)}")
        for _ in range(200)
    ]
    g = Graph(triples)
    patterns = [
        TriplePattern(Variable("x"), iri("p1"), Variable("c")),
        TriplePattern(Variable("x"), Variable("p"), iri("o3")),
        TriplePattern(iri("s5"), Variable("p"), Variable("o")),
        TriplePattern(Variable("x"), Variable("p"), Variable("x")),
        TriplePattern(Variable("a"), Variable("b"), Variable("c")),
    ]
    for pattern in patterns:
        got = g.match(pattern)
        expected = naive_match(g, pattern)
        assert sorted(map(binding_key, got)) == sorted(map(binding_key, expected))


def test_match_deterministic_order():
    g = Graph([t("b", "p", "x"), t("a", "p", "x"), t("c", "p", "x")])
    rows = g.match(TriplePattern(Variable("s"), iri("p"), Variable("o")))
    subjects = [b["s"].value for b in rows]
    assert subjects == sorted(subjects)


def test_solve_bgp_join():
    g = Graph(
        [
            t("m", "ingredient", "i1"),
            t("m", "ingredient", "i2"),
            t("i1", "substance", "s1"),
            t("i2", "substance", "s2"),
            t("s1", "classified", "c"),
        ]
    )
    solutions = solve_bgp(
        g,
        [
            TriplePattern(Variable("m"), iri("ingredient"), Variable("i")),
            TriplePattern(Variable("i"), iri("substance"), Variable("s")),
            TriplePattern(Variable("s"), iri("classified"), iri("c")),
        ],
    )
    assert len(solutions) == 1
    assert solutions[0]["i"] == iri("i1")


def test_graph_equality_ignores_prefixes():
    g1 = Graph([t("s", "p", "o")], prefixes={"ex": EX})
    g2 = Graph([t("s", "p", "o")])
    assert g1 == g2
