"""SKOS/SKOS-XL taxonomy loading, indexing, integrity checks, and
label-based lookup for document-understanding heuristics.

Integrity constraints mirror the bundled SKOS shapes (presence and
per-language uniqueness of preferred labels, scheme membership) and add
broader-cycle detection, which the SHACL subset cannot express.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable

from sdsgraph.graph import BlankNode, Graph, Iri, Literal, Term, Triple, term_sort_key
from sdsgraph.vocab import (
    DCT,
    RDF_TYPE,
    SAFED,
    SKOS,
    SKOSXL,
)

SKOS_CONCEPT = SKOS + "Concept"
SKOS_CONCEPT_SCHEME = SKOS + "ConceptScheme"
SKOS_PREF_LABEL = SKOS + "prefLabel"
SKOS_ALT_LABEL = SKOS + "altLabel"
SKOS_BROADER = SKOS + "broader"
SKOS_IN_SCHEME = SKOS + "inScheme"
SKOS_TOP_CONCEPT_OF = SKOS + "topConceptOf"
SKOS_HAS_TOP_CONCEPT = SKOS + "hasTopConcept"
SKOS_NOTATION = SKOS + "notation"
SKOSXL_LABEL = SKOSXL + "Label"
SKOSXL_PREF_LABEL = SKOSXL + "prefLabel"
SKOSXL_ALT_LABEL = SKOSXL + "altLabel"
SKOSXL_LITERAL_FORM = SKOSXL + "literalForm"
DCT_TITLE = DCT + "title"
SAFED_LABEL_DISPLAY = SAFED + "labelDisplay"

_ENUMERATOR_RE = re.compile(
    r"^\s*(?:section\s*\d{1,2}\s*[:.\-]?\s*|\d{1,2}\s*[.:]\s*)",
    re.IGNORECASE,
)
_WS_RE = re.compile(r"\s+")


class UnknownConceptError(KeyError):
    """Lookup of a concept IRI that is not in the index."""


def normalize_label(text: str) -> str:
    """Case-fold, trim, collapse whitespace, and strip a leading
    "SECTION <n>:" or "<n>." enumerator (vendor headings vary)."""
    stripped = _ENUMERATOR_RE.sub("", text.strip())
    return _WS_RE.sub(" ", stripped).strip().casefold()


@dataclass
class XLLabel:
    iri: str
    literal_form: str
    language: str | None = None


@dataclass
class Concept:
    iri: str
    pref_labels: dict[str, str] = field(default_factory=dict)
    alt_labels: dict[str, list[str]] = field(default_factory=dict)
    broader: set[str] = field(default_factory=set)
    in_scheme: set[str] = field(default_factory=set)
    kinds: set[str] = field(default_factory=set)
    xl_labels: list[str] = field(default_factory=list)
    notation: str | None = None
    label_display: str | None = None
    # every (language, value) pair seen, for uniqueLang checking
    pref_label_pairs: list[tuple[str, str]] = field(default_factory=list)

    def label(self, language: str = "en") -> str:
        """Best display label: requested language, then any, then IRI tail."""
        if language in self.pref_labels:
            return self.pref_labels[language]
        for lang in sorted(self.pref_labels):
            return self.pref_labels[lang]
        return self.iri.rstrip("/#").rsplit("/", 1)[-1]


@dataclass
class ConceptScheme:
    iri: str
    title: str = ""
    concepts: set[str] = field(default_factory=set)
    top_concepts: set[str] = field(default_factory=set)


@dataclass
class IntegrityViolation:
    kind: str  # missing-preflabel | duplicate-preflabel | broader-cycle | not-in-scheme
    subject: str
    message: str
    cycle: list[str] = field(default_factory=list)


@dataclass
class TaxonomyIndex:
    by_iri: dict[str, Concept] = field(default_factory=dict)
    by_notation: dict[str, str] = field(default_factory=dict)
    # normalized label -> {(concept iri, language-or-None)}
    by_label: dict[str, set[tuple[str, str | None]]] = field(default_factory=dict)
    schemes: dict[str, ConceptScheme] = field(default_factory=dict)
    xl_labels: dict[str, XLLabel] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def concept(self, iri: str) -> Concept:
        try:
            return self.by_iri[iri]
        except KeyError:
            raise UnknownConceptError(iri) from None

    def concepts_of_kind(self, kind: str) -> list[Concept]:
        return [c for _, c in sorted(self.by_iri.items()) if kind in c.kinds]


def _term_id(term: Term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return "_:" + term.label
    raise TypeError(f"expected node term, got {term!r}")


def load_taxonomy(graph: Graph) -> TaxonomyIndex:
    """Index every SKOS concept in ``graph``.

    Dangling broader/inScheme targets are reported as warnings, never
    fatal. Triples are processed in sorted order, so the index is
    insensitive to input ordering.
    """
    index = TaxonomyIndex()
    triples = graph.sorted_triples()

    for t in triples:
        if t.predicate.value == RDF_TYPE and isinstance(t.object, Iri):
            subject_id = _term_id(t.subject)
            if t.object.value == SKOS_CONCEPT:
                index.by_iri.setdefault(subject_id, Concept(iri=subject_id))
            elif t.object.value == SKOS_CONCEPT_SCHEME:
                index.schemes.setdefault(subject_id, ConceptScheme(iri=subject_id))
            elif t.object.value == SKOSXL_LABEL:
                index.xl_labels.setdefault(subject_id, XLLabel(subject_id, ""))

    for t in triples:
        subject_id = _term_id(t.subject)
        pred = t.predicate.value
        concept = index.by_iri.get(subject_id)
        if concept is not None:
            _load_concept_triple(index, concept, pred, t.object)
        if pred == RDF_TYPE and isinstance(t.object, Iri) and concept is not None:
            concept.kinds.add(t.object.value)
        scheme = index.schemes.get(subject_id)
        if scheme is not None:
            if pred == DCT_TITLE and isinstance(t.object, Literal):
                scheme.title = t.object.lexical
            elif pred == SKOS_HAS_TOP_CONCEPT and isinstance(t.object, Iri):
                scheme.top_concepts.add(t.object.value)
        label = index.xl_labels.get(subject_id)
        if label is not None and pred == SKOSXL_LITERAL_FORM and isinstance(t.object, Literal):
            label.literal_form = t.object.lexical
            label.language = t.object.language

    _resolve_references(index)
    _build_label_index(index)
    return index


def _load_concept_triple(index: TaxonomyIndex, concept: Concept, pred: str, obj: Term) -> None:
    if pred == SKOS_PREF_LABEL and isinstance(obj, Literal):
        lang = obj.language or ""
        concept.pref_label_pairs.append((lang, obj.lexical))
        concept.pref_labels.setdefault(lang, obj.lexical)
    elif pred == SKOS_ALT_LABEL and isinstance(obj, Literal):
        lang = obj.language or ""
        values = concept.alt_labels.setdefault(lang, [])
        if obj.lexical not in values:
            values.append(obj.lexical)
    elif pred == SKOS_BROADER and isinstance(obj, Iri):
        concept.broader.add(obj.value)
    elif pred == SKOS_IN_SCHEME and isinstance(obj, Iri):
        concept.in_scheme.add(obj.value)
    elif pred == SKOS_TOP_CONCEPT_OF and isinstance(obj, Iri):
        concept.in_scheme.add(obj.value)
    elif pred == SKOS_NOTATION and isinstance(obj, Literal):
        concept.notation = obj.lexical
    elif pred == SAFED_LABEL_DISPLAY and isinstance(obj, Literal):
        concept.label_display = obj.lexical
    elif pred in (SKOSXL_PREF_LABEL, SKOSXL_ALT_LABEL):
        concept.xl_labels.append(_term_id(obj))


def _resolve_references(index: TaxonomyIndex) -> None:
    for iri, concept in sorted(index.by_iri.items()):
        if concept.notation is not None:
            index.by_notation.setdefault(concept.notation, iri)
        for target in sorted(concept.broader):
            if target not in index.by_iri:
                index.warnings.append(f"dangling broader target {target} from {iri}")
        for scheme_iri in sorted(concept.in_scheme):
            scheme = index.schemes.get(scheme_iri)
            if scheme is None:
                index.warnings.append(f"dangling scheme {scheme_iri} from {iri}")
            else:
                scheme.concepts.add(iri)
    for scheme_iri, scheme in sorted(index.schemes.items()):
        for top in sorted(scheme.top_concepts):
            if top not in index.by_iri:
                index.warnings.append(f"dangling top concept {top} in {scheme_iri}")
            else:
                index.by_iri[top].in_scheme.add(scheme_iri)
                scheme.concepts.add(top)


def _build_label_index(index: TaxonomyIndex) -> None:
    def add(label: str, language: str | None, iri: str) -> None:
        normalized = normalize_label(label)
        if normalized:
            index.by_label.setdefault(normalized, set()).add((iri, language))

    for iri, concept in sorted(index.by_iri.items()):
        for lang, value in concept.pref_label_pairs:
            add(value, lang or None, iri)
        for lang, values in concept.alt_labels.items():
            for value in values:
                add(value, lang or None, iri)
        for label_id in concept.xl_labels:
            label = index.xl_labels.get(label_id)
            if label is None:
                index.warnings.append(f"dangling XL label {label_id} on {iri}")
            elif label.literal_form:
                add(label.literal_form, label.language, iri)


def lookup_by_label(
    index: TaxonomyIndex, text: str, language: str | None = None
) -> set[str]:
    """Concepts whose normalized pref/alt/XL label equals normalized(text)."""
    normalized = normalize_label(text)
    if not normalized:
        return set()
    hits = index.by_label.get(normalized, set())
    if language is None:
        return {iri for iri, _ in hits}
    return {iri for iri, lang in hits if lang == language}


def broader_closure(index: TaxonomyIndex, concept_iri: str) -> set[str]:
    """Transitive broader ancestors, excluding the concept itself.

    Terminates on cyclic input by tracking visited nodes; cycles are a
    reported integrity violation, not a crash.
    """
    start = index.concept(concept_iri)
    closure: set[str] = set()
    stack = sorted(start.broader)
    while stack:
        current = stack.pop()
        if current in closure or current == concept_iri:
            continue
        closure.add(current)
        parent = index.by_iri.get(current)
        if parent is not None:
            stack.extend(sorted(parent.broader))
    return closure


def check_integrity(index: TaxonomyIndex) -> list[IntegrityViolation]:
    """SkoHub-style integrity report; empty iff the taxonomy is clean."""
    violations: list[IntegrityViolation] = []
    for iri, concept in sorted(index.by_iri.items()):
        if not concept.pref_label_pairs:
            violations.append(
                IntegrityViolation("missing-preflabel", iri, f"{iri} has no prefLabel")
            )
        seen: dict[str, set[str]] = {}
        for lang, value in concept.pref_label_pairs:
            seen.setdefault(lang, set()).add(value)
        for lang in sorted(seen):
            if len(seen[lang]) > 1:
                violations.append(
                    IntegrityViolation(
                        "duplicate-preflabel",
                        iri,
                        f"{iri} has {len(seen[lang])} prefLabels for language {lang or '(none)'}",
                    )
                )
        if not concept.in_scheme:
            violations.append(
                IntegrityViolation("not-in-scheme", iri, f"{iri} is in no concept scheme")
            )
    violations.extend(_find_cycles(index))
    violations.sort(key=lambda v: (v.kind, v.subject, v.message))
    return violations


def _find_cycles(index: TaxonomyIndex) -> list[IntegrityViolation]:
    # Iterative DFS with an explicit path; each cycle reported once,
    # canonicalized by rotating to its least IRI.
    seen_cycles: set[tuple[str, ...]] = set()
    violations: list[IntegrityViolation] = []
    visited: set[str] = set()

    def visit(root: str) -> None:
        path: list[str] = []
        on_path: set[str] = set()

        def dfs(node: str) -> None:
            if node in on_path:
                i = path.index(node)
                cycle = path[i:]
                pivot = min(range(len(cycle)), key=lambda k: cycle[k])
                canon = tuple(cycle[pivot:] + cycle[:pivot])
                if canon not in seen_cycles:
                    seen_cycles.add(canon)
                    violations.append(
                        IntegrityViolation(
                            "broader-cycle",
                            canon[0],
                            "broader cycle: " + " -> ".join(canon + (canon[0],)),
                            cycle=list(canon),
                        )
                    )
                return
            if node in visited:
                return
            visited.add(node)
            path.append(node)
            on_path.add(node)
            concept = index.by_iri.get(node)
            if concept is not None:
                for target in sorted(concept.broader):
                    if target in index.by_iri:
                        dfs(target)
            path.pop()
            on_path.remove(node)

        dfs(root)

    for iri in sorted(index.by_iri):
        if iri not in visited:
            visit(iri)
    return violations


# ---------------------------------------------------------------------------
# JSON authoring format -> triples
#
# {
#   "scheme": {"iri": "...", "title": "..."},
#   "namespace": "https://.../tax/x/",          # base for relative "id"s
#   "kindAliases": {"marker": "https://...#MarkerConcept", ...},
#   "concepts": [
#     {"id": "eye-irritation-2a",               # or absolute "iri"
#      "prefLabel": {"en": "...", "de": "..."},
#      "altLabels": {"en": ["..."]},
#      "broader": ["eye-irritation-2"],
#      "notation": "H319",
#      "kinds": ["classification"],
#      "labelDisplay": "H319",
#      "xlLabels": [{"literalForm": "...", "language": "en"}],
#      "topConcept": true}
#   ]
# }


class TaxonomyFormatError(ValueError):
    """The JSON taxonomy document violates the authoring schema."""


def compile_taxonomy(document: dict) -> Graph:
    """Compile the JSON authoring format into SKOS triples."""
    try:
        scheme = document["scheme"]
        scheme_iri = scheme["iri"]
    except (KeyError, TypeError) as exc:
        raise TaxonomyFormatError(f"missing scheme declaration: {exc}") from exc
    namespace = document.get("namespace", "")
    aliases = dict(document.get("kindAliases", {}))

    triples: list[Triple] = [
        Triple(Iri(scheme_iri), Iri(RDF_TYPE), Iri(SKOS_CONCEPT_SCHEME))
    ]
    if scheme.get("title"):
        triples.append(Triple(Iri(scheme_iri), Iri(DCT_TITLE), Literal(scheme["title"])))

    def resolve(ref: str) -> str:
        return ref if ":" in ref and "//" in ref else namespace + ref

    for entry in document.get("concepts", []):
        iri = entry.get("iri") or (namespace + entry["id"] if "id" in entry else None)
        if not iri:
            raise TaxonomyFormatError(f"concept without iri or id: {entry!r}")
        node = Iri(iri)
        triples.append(Triple(node, Iri(RDF_TYPE), Iri(SKOS_CONCEPT)))
        triples.append(Triple(node, Iri(SKOS_IN_SCHEME), Iri(scheme_iri)))
        for kind in entry.get("kinds", []):
            kind_iri = aliases.get(kind, kind)
            triples.append(Triple(node, Iri(RDF_TYPE), Iri(kind_iri)))
        for lang, value in sorted(entry.get("prefLabel", {}).items()):
            triples.append(Triple(node, Iri(SKOS_PREF_LABEL), Literal(value, language=lang)))
        for lang, values in sorted(entry.get("altLabels", {}).items()):
            for value in values:
                triples.append(
                    Triple(node, Iri(SKOS_ALT_LABEL), Literal(value, language=lang))
                )
        for target in entry.get("broader", []):
            triples.append(Triple(node, Iri(SKOS_BROADER), Iri(resolve(target))))
        if entry.get("notation"):
            triples.append(Triple(node, Iri(SKOS_NOTATION), Literal(entry["notation"])))
        if entry.get("labelDisplay"):
            triples.append(
                Triple(node, Iri(SAFED_LABEL_DISPLAY), Literal(entry["labelDisplay"]))
            )
        for i, xl in enumerate(entry.get("xlLabels", []), start=1):
            form = xl.get("literalForm", "")
            if not form:
                raise TaxonomyFormatError(f"XL label without literalForm on {iri}")
            label_node = Iri(f"{iri}/xl-{i}")
            triples.append(Triple(label_node, Iri(RDF_TYPE), Iri(SKOSXL_LABEL)))
            triples.append(
                Triple(
                    label_node,
                    Iri(SKOSXL_LITERAL_FORM),
                    Literal(form, language=xl.get("language")),
                )
            )
            triples.append(Triple(node, Iri(SKOSXL_ALT_LABEL), label_node))
        if entry.get("topConcept"):
            triples.append(Triple(Iri(scheme_iri), Iri(SKOS_HAS_TOP_CONCEPT), node))
            triples.append(Triple(node, Iri(SKOS_TOP_CONCEPT_OF), Iri(scheme_iri)))
    return Graph(triples)


def compile_taxonomy_json(text: str) -> Graph:
    return compile_taxonomy(json.loads(text))
