"""Composite shipping cover sheets.

Pipeline: resolve the selected sheets, expand each selected compound to
all of its sheets across every manufacturer, language, and revision,
harvest hazard statements from every section with provenance, intersect
with a general hazard list, and compose the sheet. Harvesting is driven
by the per-compound hazard classification query; provenance and
statement text come from the stored records.
"""

from __future__ import annotations

import html as html_module
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from sdsgraph.graph import Graph
from sdsgraph.sds import SdsRecord, normalize_compound_name
from sdsgraph.skos import TaxonomyIndex, broader_closure, normalize_label
from sdsgraph.sparql import evaluate_query
from sdsgraph.vocab import SAFED, SKOS

H_CODE_KEY_RE = re.compile(r"H[0-9]{3}[A-Za-z0-9+]*\Z")
P_STATEMENT_RE = re.compile(r"P[0-9]{3}\b")

HAZARD_QUERY_TEMPLATE = """\
PREFIX safed: <{safed}>
PREFIX skos: <{skos}>
SELECT ?hazard ?prefLabel ?labelDisplay
WHERE {{
  <{compound}> safed:classification ?hazard .
  ?hazard skos:prefLabel ?prefLabel .
  ?hazard safed:labelDisplay ?labelDisplay .
  FILTER (lang(?prefLabel) = "{lang}")
}}
"""


def compound_hazards_query(compound_iri: str, lang: str = "en") -> str:
    """The per-compound hazard display query (prefix header plus the
    query body with the compound IRI bound)."""
    return HAZARD_QUERY_TEMPLATE.format(
        safed=SAFED, skos=SKOS, compound=compound_iri, lang=lang
    )


class UnknownSdsIdError(KeyError):
    def __init__(self, missing: list[str]) -> None:
        super().__init__(f"unknown SDS id(s): {', '.join(missing)}")
        self.missing = missing


class UnknownHgenListError(KeyError):
    pass


@dataclass(frozen=True)
class Snapshot:
    """Immutable read view the pipeline consumes."""

    records: dict[str, SdsRecord]  # sds IRI -> annotated record
    graph: Graph  # taxonomy + data + inferred triples
    taxonomy: TaxonomyIndex


@dataclass(frozen=True)
class ProductSelection:
    product_name: str
    sds_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.sds_ids:
            raise ValueError("a product selection needs at least one SDS")
        if len(set(self.sds_ids)) != len(self.sds_ids):
            raise ValueError("selection contains duplicate SDS ids")


@dataclass
class HazardSetEntry:
    key: str
    statement_text: str
    h_code: str | None = None
    classification_concept: str | None = None
    pref_label: str | None = None
    label_display: str | None = None
    sources: set[tuple[str, int]] = field(default_factory=set)  # (sds IRI, section)


@dataclass
class HazardSet:
    entries: dict[str, HazardSetEntry] = field(default_factory=dict)

    def sorted_entries(self) -> list[HazardSetEntry]:
        return [self.entries[k] for k in sorted(self.entries)]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class GeneralHazardList:
    label: str
    codes: frozenset[str]


class HgenFormatError(ValueError):
    pass


def load_hgen(text: str, default_label: str = "") -> GeneralHazardList:
    """One H-code per line after a required ``version`` header."""
    label = default_label
    codes: set[str] = set()
    version_seen = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not version_seen:
            parts = line.split()
            if parts[0] != "version" or len(parts) < 2 or parts[1] != "1":
                raise HgenFormatError(
                    f"line {line_no}: expected 'version 1' header, got {line!r}"
                )
            version_seen = True
            continue
        if line.startswith("label "):
            label = line.removeprefix("label ").strip()
            continue
        if not H_CODE_KEY_RE.match(line):
            raise HgenFormatError(f"line {line_no}: not an H-code: {line!r}")
        codes.add(line)
    if not version_seen:
        raise HgenFormatError("missing 'version 1' header")
    return GeneralHazardList(label=label, codes=frozenset(codes))


# ---------------------------------------------------------------------------
# pipeline stages


def collect_sds(store: Snapshot, compound_name: str) -> list[SdsRecord]:
    """Every sheet for the compound across all manufacturers, languages,
    and revisions; no revision filtering."""
    wanted = normalize_compound_name(compound_name)
    return [
        store.records[sds_id]
        for sds_id in sorted(store.records)
        if normalize_compound_name(store.records[sds_id].compound_name) == wanted
    ]


def union_sds(selection: ProductSelection, store: Snapshot) -> list[SdsRecord]:
    """Resolve the selected ids; reports every missing id at once."""
    missing = [sds_id for sds_id in selection.sds_ids if sds_id not in store.records]
    if missing:
        raise UnknownSdsIdError(sorted(missing))
    by_key: dict[tuple, SdsRecord] = {}
    for sds_id in selection.sds_ids:
        record = store.records[sds_id]
        by_key.setdefault(record.uniqueness_key, record)
    return [by_key[k] for k in sorted(by_key)]


def expand_selection(
    selection: ProductSelection, store: Snapshot, latest_only: bool = False
) -> list[SdsRecord]:
    """Selected sheets -> their compounds -> all sheets of those compounds.

    ``latest_only`` keeps only the newest revision per (compound,
    manufacturer, language).
    """
    selected = union_sds(selection, store)
    compounds = sorted({normalize_compound_name(r.compound_name) for r in selected})
    by_id: dict[str, SdsRecord] = {}
    for name in compounds:
        for record in collect_sds(store, name):
            by_id[record.sds_id] = record
    records = [by_id[k] for k in sorted(by_id)]
    if latest_only:
        newest: dict[tuple, SdsRecord] = {}
        for record in records:
            group = (
                normalize_compound_name(record.compound_name),
                record.manufacturer,
                record.language,
            )
            cur = newest.get(group)
            if cur is None or record.revision_date > cur.revision_date:
                newest[group] = record
        keep = {r.sds_id for r in newest.values()}
        records = [r for r in records if r.sds_id in keep]
    return records


def _entry_key(entry) -> str | None:
    """Stable hazard-set key: concept IRI, else H-code, else statement."""
    if entry.classification_concept:
        return entry.classification_concept
    if entry.h_code:
        return "code:" + entry.h_code
    normalized = normalize_label(entry.statement_text)
    return "text:" + normalized if normalized else None


def harvest_hazards(records: list[SdsRecord], store: Snapshot) -> HazardSet:
    """Compile the hazard set over every section of every record.

    The per-compound classification query supplies display labels for
    annotated hazards; record traversal supplies provenance and the raw
    statements. Precautionary (P###) statements are skipped. Entries
    without at least one document source are not part of the set.
    """
    display: dict[str, tuple[str, str]] = {}
    compounds = sorted({r.compound_id for r in records})
    for compound in compounds:
        rows = evaluate_query(store.graph, compound_hazards_query(compound))
        for row in rows:
            display.setdefault(
                row["hazard"].value,
                (row["prefLabel"].lexical, row["labelDisplay"].lexical),
            )

    result = HazardSet()
    for record in sorted(records, key=lambda r: r.sds_id):
        for entry in record.hazard_entries:
            if P_STATEMENT_RE.match(entry.statement_text.strip()):
                continue  # precautionary statements stay off the sheet
            key = _entry_key(entry)
            if key is None:
                continue
            existing = result.entries.get(key)
            if existing is None:
                pref_label, label_display = display.get(
                    entry.classification_concept or "", (None, None)
                )
                h_code = entry.h_code
                concept = (
                    store.taxonomy.by_iri.get(entry.classification_concept or "")
                )
                if concept is not None and concept.notation and H_CODE_KEY_RE.match(
                    concept.notation
                ):
                    h_code = concept.notation
                statement = pref_label or entry.statement_text
                existing = HazardSetEntry(
                    key=key,
                    statement_text=statement,
                    h_code=h_code,
                    classification_concept=entry.classification_concept,
                    pref_label=pref_label,
                    label_display=label_display,
                )
                result.entries[key] = existing
            elif existing.pref_label is None and entry.statement_text < existing.statement_text:
                existing.statement_text = entry.statement_text
            existing.sources.add((record.sds_id, entry.section_number))
    return result


@dataclass
class DroppedStatement:
    key: str
    statement: str
    reason: str  # no-hcode | not-in-general-list


@dataclass
class IntersectionResult:
    hazards: HazardSet
    dropped: list[DroppedStatement] = field(default_factory=list)


def intersect_general(hn: HazardSet, hgen: GeneralHazardList) -> IntersectionResult:
    """Keep entries whose H-code is on the general list; report the rest."""
    kept = HazardSet()
    dropped: list[DroppedStatement] = []
    for entry in hn.sorted_entries():
        if entry.h_code is None:
            dropped.append(DroppedStatement(entry.key, entry.statement_text, "no-hcode"))
        elif entry.h_code in hgen.codes:
            kept.entries[entry.key] = entry
        else:
            dropped.append(
                DroppedStatement(entry.key, entry.statement_text, "not-in-general-list")
            )
    return IntersectionResult(hazards=kept, dropped=dropped)


# ---------------------------------------------------------------------------
# cover sheet composition


@dataclass(frozen=True)
class CompositionRow:
    name: str
    cas: str | None
    concentration_percent: str | None  # decimal lexical; None means "present"


@dataclass(frozen=True)
class SourceSds:
    sds_id: str
    compound: str
    manufacturer: str
    language: str
    revision_date: str


@dataclass(frozen=True)
class DisclosureEntry:
    h_code: str
    statement: str
    classification: str | None


@dataclass(frozen=True)
class OverviewSource:
    sds_id: str
    compound: str
    manufacturer: str
    language: str
    revision_date: str
    section: int


@dataclass(frozen=True)
class OverviewEntry:
    h_code: str
    statement: str
    label_display: str | None
    sources: tuple[OverviewSource, ...]


@dataclass(frozen=True)
class CoverSheet:
    product_name: str
    composition: tuple[CompositionRow, ...]
    hazards_disclosure: tuple[DisclosureEntry, ...]
    hazard_overview: tuple[OverviewEntry, ...]
    pictograms: tuple[str, ...]
    generated_at: str
    source_sds: tuple[SourceSds, ...]
    hgen_label: str
    dropped_statements: tuple[tuple[str, str, str], ...] = ()  # (key, statement, reason)


def build_cover_sheet(
    selection: ProductSelection,
    store: Snapshot,
    hgen: GeneralHazardList,
    latest_only: bool = False,
    generated_at: str | None = None,
) -> CoverSheet:
    """Compose collect/union/harvest/intersect into the final sheet."""
    records = expand_selection(selection, store, latest_only=latest_only)
    harvest = harvest_hazards(records, store)
    intersection = intersect_general(harvest, hgen)

    by_id = {r.sds_id: r for r in records}

    composition: set[CompositionRow] = set()
    for record in records:
        if record.ingredients:
            for ingredient in record.ingredients:
                composition.add(
                    CompositionRow(
                        name=ingredient.name,
                        cas=ingredient.cas_number,
                        concentration_percent=str(ingredient.concentration_percent),
                    )
                )
        else:
            composition.add(
                CompositionRow(
                    name=record.compound_name,
                    cas=record.cas_number,
                    concentration_percent=None,
                )
            )
    composition_rows = tuple(
        sorted(
            composition,
            key=lambda row: (row.name, row.cas or "", row.concentration_percent or ""),
        )
    )

    disclosure = []
    overview = []
    entries = sorted(
        intersection.hazards.entries.values(),
        key=lambda e: (e.h_code or "", e.statement_text),
    )
    for entry in entries:
        disclosure.append(
            DisclosureEntry(
                h_code=entry.h_code or "",
                statement=entry.statement_text,
                classification=entry.classification_concept,
            )
        )
        sources = []
        for sds_id, section in sorted(entry.sources):
            record = by_id[sds_id]
            sources.append(
                OverviewSource(
                    sds_id=sds_id,
                    compound=record.compound_name,
                    manufacturer=record.manufacturer,
                    language=record.language,
                    revision_date=record.revision_date,
                    section=section,
                )
            )
        sources.sort(
            key=lambda s: (s.compound, s.manufacturer, s.language, s.revision_date, s.section)
        )
        overview.append(
            OverviewEntry(
                h_code=entry.h_code or "",
                statement=entry.statement_text,
                label_display=entry.label_display,
                sources=tuple(sources),
            )
        )

    pictograms = tuple(sorted({code for r in records for code in r.pictograms}))
    source_sds = tuple(
        SourceSds(
            sds_id=r.sds_id,
            compound=r.compound_name,
            manufacturer=r.manufacturer,
            language=r.language,
            revision_date=r.revision_date,
        )
        for r in sorted(
            records,
            key=lambda r: (r.compound_name, r.manufacturer, r.language, r.revision_date),
        )
    )

    return CoverSheet(
        product_name=selection.product_name,
        composition=composition_rows,
        hazards_disclosure=tuple(disclosure),
        hazard_overview=tuple(overview),
        pictograms=pictograms,
        generated_at=generated_at
        or datetime.now(timezone.utc).replace(microsecond=0).isoformat(),
        source_sds=source_sds,
        hgen_label=hgen.label,
        dropped_statements=tuple(
            (d.key, d.statement, d.reason) for d in intersection.dropped
        ),
    )


# ---------------------------------------------------------------------------
# renders


def sheet_to_dict(sheet: CoverSheet) -> dict:
    return {
        "productName": sheet.product_name,
        "generatedAt": sheet.generated_at,
        "hgenList": sheet.hgen_label,
        "composition": [
            {
                "name": row.name,
                "cas": row.cas,
                "concentrationPercent": row.concentration_percent,
            }
            for row in sheet.composition
        ],
        "hazardsDisclosure": [
            {
                "hCode": d.h_code,
                "statement": d.statement,
                "classification": d.classification,
            }
            for d in sheet.hazards_disclosure
        ],
        "hazardOverview": [
            {
                "hCode": o.h_code,
                "statement": o.statement,
                "labelDisplay": o.label_display,
                "sources": [
                    {
                        "sdsId": s.sds_id,
                        "compound": s.compound,
                        "manufacturer": s.manufacturer,
                        "language": s.language,
                        "revisionDate": s.revision_date,
                        "section": s.section,
                    }
                    for s in o.sources
                ],
            }
            for o in sheet.hazard_overview
        ],
        "pictograms": list(sheet.pictograms),
        "sourceSds": [
            {
                "sdsId": s.sds_id,
                "compound": s.compound,
                "manufacturer": s.manufacturer,
                "language": s.language,
                "revisionDate": s.revision_date,
            }
            for s in sheet.source_sds
        ],
        "droppedStatements": [
            {"key": key, "statement": statement, "reason": reason}
            for key, statement, reason in sheet.dropped_statements
        ],
    }


def sheet_from_dict(data: dict) -> CoverSheet:
    return CoverSheet(
        product_name=data["productName"],
        generated_at=data["generatedAt"],
        hgen_label=data.get("hgenList", ""),
        composition=tuple(
            CompositionRow(
                name=row["name"],
                cas=row.get("cas"),
                concentration_percent=row.get("concentrationPercent"),
            )
            for row in data["composition"]
        ),
        hazards_disclosure=tuple(
            DisclosureEntry(
                h_code=d["hCode"],
                statement=d["statement"],
                classification=d.get("classification"),
            )
            for d in data["hazardsDisclosure"]
        ),
        hazard_overview=tuple(
            OverviewEntry(
                h_code=o["hCode"],
                statement=o["statement"],
                label_display=o.get("labelDisplay"),
                sources=tuple(
                    OverviewSource(
                        sds_id=s["sdsId"],
                        compound=s["compound"],
                        manufacturer=s["manufacturer"],
                        language=s["language"],
                        revision_date=s["revisionDate"],
                        section=s["section"],
                    )
                    for s in o["sources"]
                ),
            )
            for o in data["hazardOverview"]
        ),
        pictograms=tuple(data["pictograms"]),
        source_sds=tuple(
            SourceSds(
                sds_id=s["sdsId"],
                compound=s["compound"],
                manufacturer=s["manufacturer"],
                language=s["language"],
                revision_date=s["revisionDate"],
            )
            for s in data["sourceSds"]
        ),
        dropped_statements=tuple(
            (d["key"], d["statement"], d["reason"])
            for d in data.get("droppedStatements", [])
        ),
    )


NO_HAZARDS_MARKER = "No applicable hazard statements"


def render_json(sheet: CoverSheet) -> str:
    return json.dumps(sheet_to_dict(sheet), indent=2, ensure_ascii=False) + "\n"


def render_markdown(sheet: CoverSheet) -> str:
    lines = [f"# Shipping Cover Sheet: {sheet.product_name}", ""]
    lines += ["## Composition/Ingredients", ""]
    if sheet.composition:
        lines += ["| Component | CAS | Concentration |", "| --- | --- | --- |"]
        for row in sheet.composition:
            conc = f"{row.concentration_percent}%" if row.concentration_percent else "present"
            lines.append(f"| {row.name} | {row.cas or ''} | {conc} |")
    else:
        lines.append("(no composition data)")
    lines += ["", "## Hazards Disclosure", ""]
    if sheet.hazards_disclosure:
        for d in sheet.hazards_disclosure:
            lines.append(f"- {d.h_code}: {d.statement}")
    else:
        lines.append(NO_HAZARDS_MARKER)
    lines += ["", "## Hazard Statement(s) Overview", ""]
    if sheet.hazard_overview:
        for o in sheet.hazard_overview:
            display = f" [{o.label_display}]" if o.label_display else ""
            lines.append(f"- {o.h_code}: {o.statement}{display}")
            for s in o.sources:
                lines.append(
                    f"  - {s.compound} ({s.manufacturer}, {s.language}, "
                    f"rev {s.revision_date}), section {s.section}"
                )
    else:
        lines.append(NO_HAZARDS_MARKER)
    lines += ["", "## Pictograms", ""]
    lines.append(", ".join(sheet.pictograms) if sheet.pictograms else "(none)")
    lines += ["", "## Source Safety Data Sheets", ""]
    for s in sheet.source_sds:
        lines.append(
            f"- {s.compound}: {s.manufacturer}, {s.language}, rev {s.revision_date}"
        )
    if sheet.dropped_statements:
        lines += ["", "## Statements Not Disclosed", ""]
        for key, statement, reason in sheet.dropped_statements:
            lines.append(f"- {statement or key} ({reason})")
    lines += ["", f"Generated at {sheet.generated_at} against list "
              f"{sheet.hgen_label or '(unnamed)'}.", ""]
    return "\n".join(lines)


def render_html(sheet: CoverSheet) -> str:
    esc = html_module.escape
    parts = [
        "<!doctype html>",
        "<html><head><meta charset=\"utf-8\">",
        f"<title>Shipping Cover Sheet: {esc(sheet.product_name)}</title></head><body>",
        f"<h1>Shipping Cover Sheet: {esc(sheet.product_name)}</h1>",
        "<h2>Composition/Ingredients</h2>",
        "<table><tr><th>Component</th><th>CAS</th><th>Concentration</th></tr>",
    ]
    for row in sheet.composition:
        conc = f"{row.concentration_percent}%" if row.concentration_percent else "present"
        parts.append(
            f"<tr><td>{esc(row.name)}</td><td>{esc(row.cas or '')}</td>"
            f"<td>{esc(conc)}</td></tr>"
        )
    parts.append("</table>")
    parts.append("<h2>Hazards Disclosure</h2>")
    if sheet.hazards_disclosure:
        parts.append("<ul>")
        for d in sheet.hazards_disclosure:
            parts.append(f"<li><b>{esc(d.h_code)}</b>: {esc(d.statement)}</li>")
        parts.append("</ul>")
    else:
        parts.append(f"<p>{NO_HAZARDS_MARKER}</p>")
    parts.append("<h2>Hazard Statement(s) Overview</h2>")
    if sheet.hazard_overview:
        parts.append("<ul>")
        for o in sheet.hazard_overview:
            display = f" [{esc(o.label_display)}]" if o.label_display else ""
            parts.append(f"<li><b>{esc(o.h_code)}</b>: {esc(o.statement)}{display}<ul>")
            for s in o.sources:
                parts.append(
                    f"<li>{esc(s.compound)} ({esc(s.manufacturer)}, {esc(s.language)}, "
                    f"rev {esc(s.revision_date)}), section {s.section}</li>"
                )
            parts.append("</ul></li>")
        parts.append("</ul>")
    else:
        parts.append(f"<p>{NO_HAZARDS_MARKER}</p>")
    parts.append("<h2>Pictograms</h2>")
    parts.append(f"<p>{esc(', '.join(sheet.pictograms)) if sheet.pictograms else '(none)'}</p>")
    parts.append("<h2>Source Safety Data Sheets</h2><ul>")
    for s in sheet.source_sds:
        parts.append(
            f"<li>{esc(s.compound)}: {esc(s.manufacturer)}, {esc(s.language)}, "
            f"rev {esc(s.revision_date)}</li>"
        )
    parts.append("</ul>")
    if sheet.dropped_statements:
        parts.append("<h2>Statements Not Disclosed</h2><ul>")
        for key, statement, reason in sheet.dropped_statements:
            parts.append(f"<li>{esc(statement or key)} ({esc(reason)})</li>")
        parts.append("</ul>")
    parts.append(
        f"<p>Generated at {esc(sheet.generated_at)} against list "
        f"{esc(sheet.hgen_label or '(unnamed)')}.</p>"
    )
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"


def render(sheet: CoverSheet, format: str = "json") -> str:
    if format == "json":
        return render_json(sheet)
    if format in ("md", "markdown"):
        return render_markdown(sheet)
    if format == "html":
        return render_html(sheet)
    raise ValueError(f"unknown render format: {format!r}")


# ---------------------------------------------------------------------------
# network export


def export_network(selection: ProductSelection, store: Snapshot) -> dict:
    """Node-link JSON over the selection's sheets, compounds, harvested
    hazard concepts, and their taxonomy ancestors."""
    records = expand_selection(selection, store)
    harvest = harvest_hazards(records, store)

    nodes: dict[str, dict] = {}
    edges: list[dict] = []

    def add_node(node_id: str, kind: str, label: str) -> None:
        existing = nodes.get(node_id)
        if existing is None:
            nodes[node_id] = {"id": node_id, "kind": kind, "label": label}
        elif existing["kind"] == "concept" and kind == "hazard":
            existing["kind"] = kind

    def add_edge(source: str, target: str, relation: str) -> None:
        edge = {"source": source, "target": target, "relation": relation}
        if source in nodes and target in nodes and edge not in edges:
            edges.append(edge)

    for record in records:
        add_node(
            record.sds_id,
            "sds",
            f"{record.compound_name} ({record.manufacturer}, {record.language}, "
            f"rev {record.revision_date})",
        )
        add_node(record.compound_id, "compound", record.compound_name)
        add_edge(record.sds_id, record.compound_id, "about")

    concept_ids: set[str] = set()
    for entry in harvest.sorted_entries():
        if entry.classification_concept is None:
            continue
        concept = store.taxonomy.by_iri.get(entry.classification_concept)
        label = concept.label() if concept else entry.statement_text
        add_node(entry.classification_concept, "hazard", label)
        concept_ids.add(entry.classification_concept)
        for sds_id, _section in sorted(entry.sources):
            record = store.records.get(sds_id)
            if record is not None:
                add_edge(record.compound_id, entry.classification_concept, "classification")

    ancestors: set[str] = set()
    for concept_iri in sorted(concept_ids):
        if concept_iri in store.taxonomy.by_iri:
            ancestors |= broader_closure(store.taxonomy, concept_iri)
    for ancestor in sorted(ancestors):
        concept = store.taxonomy.by_iri.get(ancestor)
        add_node(ancestor, "concept", concept.label() if concept else ancestor)
    for node_id in sorted(concept_ids | ancestors):
        concept = store.taxonomy.by_iri.get(node_id)
        if concept is None:
            continue
        for parent in sorted(concept.broader):
            add_edge(node_id, parent, "broader")

    return {
        "nodes": [nodes[k] for k in sorted(nodes)],
        "edges": sorted(edges, key=lambda e: (e["source"], e["target"], e["relation"])),
    }
