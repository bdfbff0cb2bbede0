"""Document store: ingestion pipeline, catalog, fuzzy search, persistence.

One logical writer: mutations are serialized through a lock and persist
the store atomically (write-temp, rename). Reads work over immutable
snapshots, so they can run concurrently with ingestion.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

from sdsgraph import resources
from sdsgraph.coversheet import GeneralHazardList, Snapshot, load_hgen
from sdsgraph.graph import Graph
from sdsgraph.rdfio import FORMAT_NTRIPLES, FORMAT_TURTLE, RdfSyntaxError, parse, serialize
from sdsgraph.rules import InferenceRule, apply_rules, load_rules
from sdsgraph.sds import (
    SdsError,
    SdsRecord,
    annotate,
    parse_sds_json,
    parse_sds_text,
    record_from_dict,
    record_to_dict,
    to_graph,
)
from sdsgraph.shacl import NodeShape, ValidationReport, parse_shapes, validate
from sdsgraph.skos import TaxonomyIndex, load_taxonomy

SNAPSHOT_VERSION = 1
GRAPH_FILE = "graph.nt"
INDEX_FILE = "records.json"


class StoreCorruptError(RuntimeError):
    """Snapshot on disk cannot be loaded; refuse to start."""


@dataclass
class Assets:
    """Static inputs: taxonomy, shapes, rules, and general hazard lists."""

    taxonomy_graph: Graph
    taxonomy: TaxonomyIndex
    shapes: list[NodeShape]
    rules: list[InferenceRule]
    hgen_lists: dict[str, GeneralHazardList]

    @classmethod
    def bundled(cls, hgen_dir: Path | None = None) -> "Assets":
        taxonomy_graph = parse(
            resources.read_text("taxonomies/dpg-ghs.ttl"), FORMAT_TURTLE
        ).union(parse(resources.read_text("taxonomies/dpg-isa88.ttl"), FORMAT_TURTLE))
        shapes = (
            parse_shapes(parse(resources.read_text("shapes/dpg-doc.ttl"), FORMAT_TURTLE)).shapes
            + parse_shapes(
                parse(resources.read_text("shapes/dpg-safed.ttl"), FORMAT_TURTLE)
            ).shapes
        )
        rules = load_rules(resources.read_text("rules/mixture-classification.rules"))
        hgen_lists: dict[str, GeneralHazardList] = {}
        if hgen_dir is not None:
            for path in sorted(Path(hgen_dir).glob("*.txt")):
                hgen_lists[path.stem] = load_hgen(
                    path.read_text(encoding="utf-8"), default_label=path.stem
                )
        else:
            for name in ("ghs-rev10", "empty", "site-eye-hazards"):
                hgen_lists[name] = load_hgen(
                    resources.read_text(f"hgen/{name}.txt"), default_label=name
                )
        return cls(
            taxonomy_graph=taxonomy_graph,
            taxonomy=load_taxonomy(taxonomy_graph),
            shapes=shapes,
            rules=rules,
            hgen_lists=hgen_lists,
        )


@dataclass(frozen=True)
class CatalogEntry:
    sds_id: str
    compound_id: str
    compound_name: str
    manufacturer: str
    language: str
    revision_date: str
    hazard_count: int

    def to_dict(self) -> dict:
        return {
            "sdsId": self.sds_id,
            "compoundId": self.compound_id,
            "compoundName": self.compound_name,
            "manufacturer": self.manufacturer,
            "language": self.language,
            "revisionDate": self.revision_date,
            "hazardCount": self.hazard_count,
        }


@dataclass
class IngestResult:
    sds_id: str
    status: str  # created | unchanged | quarantined
    report: ValidationReport | None = None
    inference_added: int = 0
    annotation_misses: list[str] = field(default_factory=list)


def _entry_for(record: SdsRecord) -> CatalogEntry:
    return CatalogEntry(
        sds_id=record.sds_id,
        compound_id=record.compound_id,
        compound_name=record.compound_name,
        manufacturer=record.manufacturer,
        language=record.language,
        revision_date=record.revision_date,
        hazard_count=len(record.hazard_entries),
    )


class Store:
    def __init__(self, assets: Assets, data_dir: Path | str | None = None) -> None:
        self.assets = assets
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.records: dict[str, SdsRecord] = {}
        self.quarantine: dict[str, dict] = {}
        self.data_graph = Graph()
        self._lock = threading.Lock()
        if self.data_dir is not None:
            self._load()

    # -- persistence --------------------------------------------------------

    def _load(self) -> None:
        graph_path = self.data_dir / GRAPH_FILE
        index_path = self.data_dir / INDEX_FILE
        if not graph_path.exists() and not index_path.exists():
            return  # fresh start
        if not graph_path.exists() or not index_path.exists():
            raise StoreCorruptError(
                f"incomplete snapshot in {self.data_dir}: need both "
                f"{GRAPH_FILE} and {INDEX_FILE}"
            )
        try:
            index = json.loads(index_path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as exc:
            raise StoreCorruptError(f"cannot read {index_path}: {exc}") from exc
        if not isinstance(index, dict) or index.get("version") != SNAPSHOT_VERSION:
            raise StoreCorruptError(f"unsupported snapshot version in {index_path}")
        try:
            graph = parse(graph_path.read_text(encoding="utf-8"), FORMAT_NTRIPLES)
        except (RdfSyntaxError, OSError) as exc:
            raise StoreCorruptError(f"cannot parse {graph_path}: {exc}") from exc
        if len(graph) != index.get("tripleCount"):
            raise StoreCorruptError(
                f"snapshot triple count mismatch: {GRAPH_FILE} has {len(graph)}, "
                f"index expects {index.get('tripleCount')}"
            )
        try:
            records = {
                entry["sdsId"]: record_from_dict(entry["record"])
                for entry in index.get("records", [])
            }
            quarantine = {
                entry["sdsId"]: entry for entry in index.get("quarantine", [])
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreCorruptError(f"malformed record index: {exc}") from exc
        self.records = records
        self.quarantine = quarantine
        self.data_graph = graph

    def save(self) -> None:
        """Persist atomically: temp file plus rename, per file."""
        if self.data_dir is None:
            return
        self.data_dir.mkdir(parents=True, exist_ok=True)
        graph_text = serialize(self.data_graph, FORMAT_NTRIPLES)
        index = {
            "version": SNAPSHOT_VERSION,
            "tripleCount": len(self.data_graph),
            "records": [
                {"sdsId": sds_id, "record": record_to_dict(self.records[sds_id])}
                for sds_id in sorted(self.records)
            ],
            "quarantine": [self.quarantine[k] for k in sorted(self.quarantine)],
        }
        self._atomic_write(self.data_dir / GRAPH_FILE, graph_text)
        self._atomic_write(
            self.data_dir / INDEX_FILE,
            json.dumps(index, indent=2, ensure_ascii=False) + "\n",
        )

    @staticmethod
    def _atomic_write(path: Path, content: str) -> None:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(content)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- ingestion ----------------------------------------------------------

    def ingest(self, text: str, content_type: str = "json") -> IngestResult:
        """Parse, annotate, graph, infer, validate, persist.

        Idempotent on the uniqueness key: a sheet already in the catalog
        is returned unchanged. Validation failures quarantine the sheet
        instead of storing it.
        """
        if content_type == "json":
            record = parse_sds_json(text)
        elif content_type == "text":
            record = parse_sds_text(text, self.assets.taxonomy)
        else:
            raise SdsError(f"unsupported content type: {content_type!r}")

        with self._lock:
            sds_id = record.sds_id
            if sds_id in self.records:
                return IngestResult(sds_id=sds_id, status="unchanged")

            annotation = annotate(record, self.assets.taxonomy)
            graph = to_graph(annotation.record)
            candidate = self.data_graph.union(graph)
            full = self.assets.taxonomy_graph.union(candidate)
            inference = apply_rules(full, self.assets.rules)
            report = validate(inference.graph, self.assets.shapes)

            if not report.conforms:
                self.quarantine[sds_id] = {
                    "sdsId": sds_id,
                    "record": record_to_dict(annotation.record),
                    "violations": [
                        {
                            "focusNode": str(getattr(r.focus_node, "value", r.focus_node)),
                            "path": r.path,
                            "constraintComponent": r.constraint_component,
                            "message": r.message,
                        }
                        for r in report.violations
                    ],
                }
                self.save()
                return IngestResult(
                    sds_id=sds_id,
                    status="quarantined",
                    report=report,
                    annotation_misses=annotation.misses,
                )

            self.records[sds_id] = annotation.record
            self.quarantine.pop(sds_id, None)
            self.data_graph = inference.graph.difference(self.assets.taxonomy_graph)
            self.save()
            return IngestResult(
                sds_id=sds_id,
                status="created",
                report=report,
                inference_added=len(inference.trace),
                annotation_misses=annotation.misses,
            )

    # -- reads ---------------------------------------------------------------

    def snapshot(self) -> Snapshot:
        return Snapshot(
            records=dict(self.records),
            graph=self.assets.taxonomy_graph.union(self.data_graph),
            taxonomy=self.assets.taxonomy,
        )

    def catalog(self) -> list[CatalogEntry]:
        entries = [_entry_for(record) for record in self.records.values()]
        entries.sort(
            key=lambda e: (e.compound_name, e.manufacturer, e.language, e.revision_date)
        )
        return entries

    def search(self, filter_text: str, limit: int | None = None) -> list[CatalogEntry]:
        """Fuzzy catalog filter.

        Ranking tiers: prefix match beats case-insensitive substring
        beats bounded edit distance (<= 2, per word token); ties break
        lexicographically. An empty filter returns the whole catalog.
        """
        entries = self.catalog()
        if not filter_text:
            return entries[:limit] if limit is not None else entries
        needle = filter_text.casefold()
        scored: list[tuple[int, CatalogEntry]] = []
        for entry in entries:
            tiers = [
                _match_tier(needle, entry.compound_name),
                _match_tier(needle, entry.manufacturer),
            ]
            best = min((t for t in tiers if t is not None), default=None)
            if best is not None:
                scored.append((best, entry))
        scored.sort(
            key=lambda pair: (
                pair[0],
                pair[1].compound_name,
                pair[1].manufacturer,
                pair[1].language,
                pair[1].revision_date,
            )
        )
        result = [entry for _, entry in scored]
        return result[:limit] if limit is not None else result


def _match_tier(needle: str, haystack: str) -> int | None:
    """0 = prefix, 1 = substring, 2+d = within edit distance d (1..2)."""
    folded = haystack.casefold()
    if folded.startswith(needle):
        return 0
    if needle in folded:
        return 1
    best: int | None = None
    for token in folded.split():
        distance = _levenshtein_capped(needle, token, cap=2)
        if distance is not None and (best is None or distance < best):
            best = distance
    return 2 + best if best is not None else None


def _levenshtein_capped(a: str, b: str, cap: int) -> int | None:
    """Edit distance if <= cap, else None; classic DP with row pruning."""
    if abs(len(a) - len(b)) > cap:
        return None
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        row_min = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            value = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            current.append(value)
            row_min = min(row_min, value)
        if row_min > cap:
            return None
        previous = current
    return previous[-1] if previous[-1] <= cap else None
