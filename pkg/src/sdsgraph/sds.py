"""Safety data sheet ingestion: JSON and sectioned plain text to records,
taxonomy annotation, and record-to-graph emission.

JSON is the primary ingest format. Plain-text parsing is heuristic:
section boundaries come from matching heading lines against taxonomy
labels, hazard codes from the ``H###`` pattern, and metadata from
labeled lines ("Product name:", "Manufacturer:", "Revision Date:").
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from datetime import date
from decimal import Decimal

from sdsgraph.graph import Graph, Iri, Literal, Triple
from sdsgraph.shacl import NodeShape, ValidationReport, validate
from sdsgraph.skos import TaxonomyIndex, lookup_by_label, normalize_label
from sdsgraph.vocab import (
    DATA,
    DOC,
    RDF_TYPE,
    SAFED,
    XSD_DATE,
    XSD_DECIMAL,
    XSD_INTEGER,
)

H_CODE_RE = re.compile(r"H[0-9]{3}[A-Za-z0-9+]*\Z")
H_CODE_SCAN_RE = re.compile(r"\bH[0-9]{3}\b")
PICTOGRAM_RE = re.compile(r"GHS0[1-9]\Z")
PICTOGRAM_SCAN_RE = re.compile(r"\bGHS0[1-9]\b")
LANG_TAG_RE = re.compile(r"[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*\Z")

MARKER_KIND = DOC + "MarkerConcept"
CLASSIFICATION_KIND = SAFED + "Classification"

DOC_DOCUMENT = DOC + "Document"
DOC_CONTAINER = DOC + "Container"
DOC_ABOUT = DOC + "about"
DOC_TITLE = DOC + "title"
DOC_MANUFACTURER = DOC + "manufacturer"
DOC_LANGUAGE = DOC + "language"
DOC_REVISION_DATE = DOC + "revisionDate"
DOC_CONTAINER_PROP = DOC + "container"
DOC_SECTION_NUMBER = DOC + "sectionNumber"
DOC_HEADING_TEXT = DOC + "headingText"
DOC_MARKER = DOC + "marker"
DOC_CONTENT = DOC + "content"

SAFED_COMPOUND = SAFED + "Compound"
SAFED_MIXTURE = SAFED + "Mixture"
SAFED_INGREDIENT_CLASS = SAFED + "Ingredient"
SAFED_NAME = SAFED + "name"
SAFED_CAS = SAFED + "casNumber"
SAFED_CLASSIFICATION = SAFED + "classification"
SAFED_LABEL_DISPLAY = SAFED + "labelDisplay"
SAFED_INGREDIENT = SAFED + "ingredient"
SAFED_SUBSTANCE = SAFED + "substance"
SAFED_CONCENTRATION = SAFED + "concentrationPercent"
SAFED_PICTOGRAM = SAFED + "pictogram"


class SdsError(ValueError):
    """Base for ingestion problems."""


class SchemaViolation(SdsError):
    def __init__(self, field_name: str, reason: str) -> None:
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


class InvalidDate(SchemaViolation):
    def __init__(self, value: str) -> None:
        super().__init__("revisionDate", f"not an ISO-8601 date: {value!r}")


class OutOfRangeConcentration(SchemaViolation):
    def __init__(self, value) -> None:
        super().__init__(
            "ingredients.concentrationPercent",
            f"must be within [0, 100], got {value}",
        )


class NoSectionsDetected(SdsError):
    pass


class DuplicateSectionNumber(SdsError):
    def __init__(self, number: int) -> None:
        super().__init__(f"duplicate section number {number}")
        self.number = number


@dataclass(frozen=True)
class Ingredient:
    name: str
    concentration_percent: Decimal
    cas_number: str | None = None


@dataclass(frozen=True)
class HazardEntry:
    statement_text: str
    section_number: int
    h_code: str | None = None
    classification_concept: str | None = None


@dataclass(frozen=True)
class SdsSection:
    number: int
    heading_text: str
    body_text: str = ""
    heading_concept: str | None = None


@dataclass(frozen=True)
class SdsRecord:
    compound_name: str
    manufacturer: str
    language: str
    revision_date: str  # ISO-8601
    sections: tuple[SdsSection, ...]
    hazard_entries: tuple[HazardEntry, ...] = ()
    pictograms: tuple[str, ...] = ()
    ingredients: tuple[Ingredient, ...] = ()
    cas_number: str | None = None

    @property
    def uniqueness_key(self) -> tuple[str, str, str, str]:
        return (self.compound_name, self.manufacturer, self.language, self.revision_date)

    @property
    def sds_id(self) -> str:
        return sds_iri(*self.uniqueness_key)

    @property
    def compound_id(self) -> str:
        return compound_iri(self.compound_name)


@dataclass
class AnnotationResult:
    record: SdsRecord
    misses: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# IRI minting: deterministic hashes over the uniqueness key so that
# re-ingesting the same sheet is idempotent in the store.


def _digest(*parts: str) -> str:
    payload = "\x1f".join(parts).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


def normalize_compound_name(name: str) -> str:
    return re.sub(r"\s+", " ", name.strip()).casefold()


def compound_iri(name: str) -> str:
    return DATA + "compound/" + _digest("compound", normalize_compound_name(name))


def substance_iri(name: str) -> str:
    # ingredient substances share the compound namespace so that a pure
    # substance's own sheet classifies the same node mixtures link to
    return compound_iri(name)


def sds_iri(compound_name: str, manufacturer: str, language: str, revision_date: str) -> str:
    return DATA + "sds/" + _digest("sds", compound_name, manufacturer, language, revision_date)


# ---------------------------------------------------------------------------
# JSON ingestion


def _require(obj: dict, key: str, kind, path: str):
    if key not in obj:
        raise SchemaViolation(path, "missing required field")
    value = obj[key]
    if not isinstance(value, kind):
        raise SchemaViolation(path, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _parse_date(value: str) -> str:
    try:
        return date.fromisoformat(value).isoformat()
    except (ValueError, TypeError):
        raise InvalidDate(str(value)) from None


def _parse_language(value: str) -> str:
    if not isinstance(value, str) or not LANG_TAG_RE.match(value):
        raise SchemaViolation("language", f"not a BCP-47 language tag: {value!r}")
    return value


def _parse_concentration(value) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise SchemaViolation(
            "ingredients.concentrationPercent", f"expected a number, got {value!r}"
        )
    dec = value if isinstance(value, Decimal) else Decimal(value)
    if dec < 0 or dec > 100:
        raise OutOfRangeConcentration(dec)
    return dec


def parse_sds_json(text: str) -> SdsRecord:
    """Parse the documented SDS JSON schema into a record.

    Floats are read as decimals so concentration lexicals stay exact.
    """
    try:
        document = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaViolation("$", "top level must be an object")

    compound = _require(document, "compound", dict, "compound")
    name = _require(compound, "name", str, "compound.name")
    if not name.strip():
        raise SchemaViolation("compound.name", "must be non-empty")
    cas = compound.get("cas")
    if cas is not None and not isinstance(cas, str):
        raise SchemaViolation("compound.cas", "must be a string")

    manufacturer = _require(document, "manufacturer", str, "manufacturer")
    language = _parse_language(_require(document, "language", str, "language"))
    revision_date = _parse_date(_require(document, "revisionDate", str, "revisionDate"))

    raw_sections = _require(document, "sections", list, "sections")
    if not raw_sections:
        raise SchemaViolation("sections", "at least one section is required")
    sections: list[SdsSection] = []
    last_number = 0
    for i, raw in enumerate(raw_sections):
        path = f"sections[{i}]"
        if not isinstance(raw, dict):
            raise SchemaViolation(path, "must be an object")
        number = _require(raw, "number", int, path + ".number")
        if isinstance(number, bool) or not 1 <= number <= 16:
            raise SchemaViolation(path + ".number", "must be an integer in 1..16")
        if number <= last_number:
            raise SchemaViolation(
                path + ".number", "section numbers must be strictly increasing"
            )
        last_number = number
        heading = _require(raw, "heading", str, path + ".heading")
        body = raw.get("text", "")
        if not isinstance(body, str):
            raise SchemaViolation(path + ".text", "must be a string")
        sections.append(SdsSection(number=number, heading_text=heading, body_text=body))
    section_numbers = {s.number for s in sections}

    hazards: list[HazardEntry] = []
    for i, raw in enumerate(document.get("hazards", [])):
        path = f"hazards[{i}]"
        if not isinstance(raw, dict):
            raise SchemaViolation(path, "must be an object")
        h_code = raw.get("hCode")
        if h_code is not None and (
            not isinstance(h_code, str) or not H_CODE_RE.match(h_code)
        ):
            raise SchemaViolation(path + ".hCode", f"not an H-code: {h_code!r}")
        statement = _require(raw, "statement", str, path + ".statement")
        section = _require(raw, "section", int, path + ".section")
        if section not in section_numbers:
            raise SchemaViolation(
                path + ".section", f"references undeclared section {section}"
            )
        hazards.append(
            HazardEntry(statement_text=statement, section_number=section, h_code=h_code)
        )

    pictograms: list[str] = []
    for i, code in enumerate(document.get("pictograms", [])):
        if not isinstance(code, str) or not PICTOGRAM_RE.match(code):
            raise SchemaViolation(f"pictograms[{i}]", f"not a GHS pictogram code: {code!r}")
        if code not in pictograms:
            pictograms.append(code)

    ingredients: list[Ingredient] = []
    for i, raw in enumerate(document.get("ingredients", [])):
        path = f"ingredients[{i}]"
        if not isinstance(raw, dict):
            raise SchemaViolation(path, "must be an object")
        ing_name = _require(raw, "name", str, path + ".name")
        ing_cas = raw.get("cas")
        if ing_cas is not None and not isinstance(ing_cas, str):
            raise SchemaViolation(path + ".cas", "must be a string")
        if "concentrationPercent" not in raw:
            raise SchemaViolation(path + ".concentrationPercent", "missing required field")
        concentration = _parse_concentration(raw["concentrationPercent"])
        ingredients.append(
            Ingredient(name=ing_name, concentration_percent=concentration, cas_number=ing_cas)
        )

    return SdsRecord(
        compound_name=name,
        manufacturer=manufacturer,
        language=language,
        revision_date=revision_date,
        sections=tuple(sections),
        hazard_entries=tuple(hazards),
        pictograms=tuple(pictograms),
        ingredients=tuple(ingredients),
        cas_number=cas,
    )


# ---------------------------------------------------------------------------
# plain-text ingestion

_METADATA_LABELS = {
    "product name": "compound_name",
    "manufacturer": "manufacturer",
    "revision date": "revision_date",
}

_SECTION_NOTATION_RE = re.compile(r"S(\d{1,2})\Z")


def _heading_concept_for_line(line: str, headings: TaxonomyIndex) -> tuple[str, int] | None:
    """Resolve a line to (heading concept IRI, section number) or None."""
    candidates = lookup_by_label(headings, line)
    markers = []
    for iri in sorted(candidates):
        concept = headings.by_iri.get(iri)
        if concept is None or MARKER_KIND not in concept.kinds:
            continue
        m = _SECTION_NOTATION_RE.match(concept.notation or "")
        if m:
            markers.append((iri, int(m.group(1))))
    if not markers:
        return None
    return markers[0]


def parse_sds_text(text: str, headings: TaxonomyIndex) -> SdsRecord:
    """Heuristic sectioned-text parser driven by taxonomy heading labels."""
    metadata = {
        "compound_name": "Unknown Product",
        "manufacturer": "Unknown",
        "revision_date": "1970-01-01",
    }
    sections: list[SdsSection] = []
    bodies: dict[int, list[str]] = {}
    current: int | None = None
    seen_numbers: set[int] = set()

    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        resolved = _heading_concept_for_line(line, headings)
        if resolved is not None:
            concept_iri, number = resolved
            if number in seen_numbers:
                raise DuplicateSectionNumber(number)
            seen_numbers.add(number)
            sections.append(
                SdsSection(
                    number=number,
                    heading_text=line,
                    heading_concept=concept_iri,
                )
            )
            bodies[number] = []
            current = number
            continue
        label, _, value = line.partition(":")
        key = _METADATA_LABELS.get(label.strip().casefold())
        if key is not None and value.strip():
            if key == "revision_date":
                metadata[key] = _parse_date(value.strip())
            else:
                metadata[key] = value.strip()
            continue
        if current is not None:
            bodies[current].append(line)

    if not sections:
        raise NoSectionsDetected("no section headings detected")

    sections = [
        replace(s, body_text="\n".join(bodies[s.number])) for s in sections
    ]
    sections.sort(key=lambda s: s.number)

    hazards: list[HazardEntry] = []
    pictograms: list[str] = []
    for section in sections:
        for line in section.body_text.splitlines():
            matches = list(H_CODE_SCAN_RE.finditer(line))
            for i, m in enumerate(matches):
                end = matches[i + 1].start() if i + 1 < len(matches) else len(line)
                statement = line[m.end():end].strip(" \t:;,.-")
                hazards.append(
                    HazardEntry(
                        statement_text=statement,
                        section_number=section.number,
                        h_code=m.group(),
                    )
                )
            for code in PICTOGRAM_SCAN_RE.findall(line):
                if code not in pictograms:
                    pictograms.append(code)

    return SdsRecord(
        compound_name=metadata["compound_name"],
        manufacturer=metadata["manufacturer"],
        language="en",
        revision_date=metadata["revision_date"],
        sections=tuple(sections),
        hazard_entries=tuple(hazards),
        pictograms=tuple(pictograms),
    )


# ---------------------------------------------------------------------------
# annotation


def annotate(record: SdsRecord, taxonomy: TaxonomyIndex) -> AnnotationResult:
    """Attach heading and classification concepts; best effort.

    Only ``heading_concept`` / ``classification_concept`` fields change;
    unmatched items are reported in ``misses``.
    """
    misses: list[str] = []

    sections = []
    for section in record.sections:
        if section.heading_concept is not None:
            sections.append(section)
            continue
        resolved = _heading_concept_for_line(section.heading_text, taxonomy)
        if resolved is not None and resolved[1] == section.number:
            sections.append(replace(section, heading_concept=resolved[0]))
        elif resolved is not None:
            # label matches a different canonical section; trust the label
            sections.append(replace(section, heading_concept=resolved[0]))
        else:
            misses.append(f"section {section.number} heading: {section.heading_text!r}")
            sections.append(section)

    entries = []
    for entry in record.hazard_entries:
        if entry.classification_concept is not None:
            entries.append(entry)
            continue
        concept_iri = None
        if entry.h_code is not None:
            candidate = taxonomy.by_notation.get(entry.h_code)
            if candidate is not None and CLASSIFICATION_KIND in taxonomy.by_iri[candidate].kinds:
                concept_iri = candidate
        if concept_iri is None and entry.statement_text:
            for iri in sorted(lookup_by_label(taxonomy, entry.statement_text)):
                if CLASSIFICATION_KIND in taxonomy.by_iri[iri].kinds:
                    concept_iri = iri
                    break
        if concept_iri is None:
            misses.append(
                f"hazard entry in section {entry.section_number}: "
                f"{entry.h_code or entry.statement_text!r}"
            )
            entries.append(entry)
        else:
            entries.append(replace(entry, classification_concept=concept_iri))

    return AnnotationResult(
        record=replace(record, sections=tuple(sections), hazard_entries=tuple(entries)),
        misses=misses,
    )


# ---------------------------------------------------------------------------
# graph emission


def to_graph(record: SdsRecord) -> Graph:
    """Emit document-structure and safety-data triples for the record.

    All node IRIs are minted deterministically from the uniqueness key,
    so emission is stable and re-ingestion idempotent.
    """
    sds = Iri(record.sds_id)
    compound = Iri(record.compound_id)
    triples: list[Triple] = [
        Triple(sds, Iri(RDF_TYPE), Iri(DOC_DOCUMENT)),
        Triple(sds, Iri(DOC_ABOUT), compound),
        Triple(sds, Iri(DOC_TITLE), Literal(record.compound_name)),
        Triple(sds, Iri(DOC_MANUFACTURER), Literal(record.manufacturer)),
        Triple(sds, Iri(DOC_LANGUAGE), Literal(record.language)),
        Triple(sds, Iri(DOC_REVISION_DATE), Literal(record.revision_date, datatype=XSD_DATE)),
        Triple(compound, Iri(RDF_TYPE), Iri(SAFED_COMPOUND)),
        Triple(compound, Iri(SAFED_NAME), Literal(record.compound_name)),
    ]
    if record.cas_number:
        triples.append(Triple(compound, Iri(SAFED_CAS), Literal(record.cas_number)))
    for code in record.pictograms:
        triples.append(Triple(sds, Iri(SAFED_PICTOGRAM), Literal(code)))

    entries_by_section: dict[int, list[HazardEntry]] = {}
    for entry in record.hazard_entries:
        entries_by_section.setdefault(entry.section_number, []).append(entry)

    for section in record.sections:
        container = Iri(f"{record.sds_id}/section/{section.number}")
        triples.append(Triple(sds, Iri(DOC_CONTAINER_PROP), container))
        triples.append(Triple(container, Iri(RDF_TYPE), Iri(DOC_CONTAINER)))
        triples.append(
            Triple(
                container,
                Iri(DOC_SECTION_NUMBER),
                Literal(str(section.number), datatype=XSD_INTEGER),
            )
        )
        triples.append(Triple(container, Iri(DOC_HEADING_TEXT), Literal(section.heading_text)))
        if section.heading_concept:
            triples.append(Triple(container, Iri(DOC_MARKER), Iri(section.heading_concept)))
        if section.body_text:
            triples.append(Triple(container, Iri(DOC_CONTENT), Literal(section.body_text)))
        for entry in entries_by_section.get(section.number, []):
            if entry.classification_concept:
                triples.append(
                    Triple(container, Iri(DOC_CONTENT), Iri(entry.classification_concept))
                )

    for entry in record.hazard_entries:
        if entry.classification_concept:
            concept = Iri(entry.classification_concept)
            triples.append(Triple(compound, Iri(SAFED_CLASSIFICATION), concept))
            if entry.h_code:
                triples.append(
                    Triple(concept, Iri(SAFED_LABEL_DISPLAY), Literal(entry.h_code))
                )

    if record.ingredients:
        triples.append(Triple(compound, Iri(RDF_TYPE), Iri(SAFED_MIXTURE)))
        for n, ingredient in enumerate(record.ingredients, start=1):
            node = Iri(f"{record.sds_id}/ingredient/{n}")
            triples.append(Triple(compound, Iri(SAFED_INGREDIENT), node))
            triples.append(Triple(node, Iri(RDF_TYPE), Iri(SAFED_INGREDIENT_CLASS)))
            triples.append(Triple(node, Iri(SAFED_NAME), Literal(ingredient.name)))
            if ingredient.cas_number:
                triples.append(Triple(node, Iri(SAFED_CAS), Literal(ingredient.cas_number)))
            triples.append(
                Triple(
                    node,
                    Iri(SAFED_CONCENTRATION),
                    Literal(str(ingredient.concentration_percent), datatype=XSD_DECIMAL),
                )
            )
            triples.append(
                Triple(node, Iri(SAFED_SUBSTANCE), Iri(substance_iri(ingredient.name)))
            )

    return Graph(triples)


def validate_record(graph: Graph, shapes: list[NodeShape]) -> ValidationReport:
    """Pipeline seam: validate an emitted record graph against shapes."""
    return validate(graph, shapes)


# ---------------------------------------------------------------------------
# record (de)serialization for the store catalog


def record_to_dict(record: SdsRecord) -> dict:
    return {
        "compound": {"name": record.compound_name, "cas": record.cas_number},
        "manufacturer": record.manufacturer,
        "language": record.language,
        "revisionDate": record.revision_date,
        "sections": [
            {
                "number": s.number,
                "heading": s.heading_text,
                "text": s.body_text,
                "headingConcept": s.heading_concept,
            }
            for s in record.sections
        ],
        "hazards": [
            {
                "hCode": h.h_code,
                "statement": h.statement_text,
                "section": h.section_number,
                "classificationConcept": h.classification_concept,
            }
            for h in record.hazard_entries
        ],
        "pictograms": list(record.pictograms),
        "ingredients": [
            {
                "name": i.name,
                "cas": i.cas_number,
                "concentrationPercent": str(i.concentration_percent),
            }
            for i in record.ingredients
        ],
    }


def record_from_dict(data: dict) -> SdsRecord:
    return SdsRecord(
        compound_name=data["compound"]["name"],
        cas_number=data["compound"].get("cas"),
        manufacturer=data["manufacturer"],
        language=data["language"],
        revision_date=data["revisionDate"],
        sections=tuple(
            SdsSection(
                number=s["number"],
                heading_text=s["heading"],
                body_text=s.get("text", ""),
                heading_concept=s.get("headingConcept"),
            )
            for s in data["sections"]
        ),
        hazard_entries=tuple(
            HazardEntry(
                statement_text=h["statement"],
                section_number=h["section"],
                h_code=h.get("hCode"),
                classification_concept=h.get("classificationConcept"),
            )
            for h in data.get("hazards", [])
        ),
        pictograms=tuple(data.get("pictograms", [])),
        ingredients=tuple(
            Ingredient(
                name=i["name"],
                cas_number=i.get("cas"),
                concentration_percent=Decimal(i["concentrationPercent"]),
            )
            for i in data.get("ingredients", [])
        ),
    )
