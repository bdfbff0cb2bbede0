"""RDF-style terms, triples, and an embedded in-memory graph.

Graphs are immutable values with set semantics: insertion returns a new
graph, duplicates never change the size, and every read path (iteration,
matching, serialization) is deterministically ordered by the N-Triples
form of the terms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

from sdsgraph.vocab import RDF_LANG_STRING, XSD_STRING

_BLANK_LABEL_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_VARIABLE_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_LANG_TAG_RE = re.compile(r"[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*\Z")
_WHITESPACE_RE = re.compile(r"\s")


class TermError(ValueError):
    """A term or triple violates a structural invariant."""


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise TermError("IRI must be non-empty")
        if _WHITESPACE_RE.search(self.value):
            raise TermError(f"IRI contains whitespace: {self.value!r}")


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __post_init__(self) -> None:
        if not _BLANK_LABEL_RE.match(self.label):
            raise TermError(f"invalid blank node label: {self.label!r}")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __post_init__(self) -> None:
        if self.language is not None:
            if not _LANG_TAG_RE.match(self.language):
                raise TermError(f"invalid language tag: {self.language!r}")
            # A tagged literal is always a language string; allow the
            # datatype to be implied by the tag.
            if self.datatype == XSD_STRING:
                object.__setattr__(self, "datatype", RDF_LANG_STRING)
            elif self.datatype != RDF_LANG_STRING:
                raise TermError(
                    "language tag requires the language-string datatype, "
                    f"got {self.datatype}"
                )
        elif self.datatype == RDF_LANG_STRING:
            raise TermError("language-string literal requires a language tag")
        if not self.datatype:
            raise TermError("literal datatype must be non-empty")


Term = Union[Iri, BlankNode, Literal]


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def term_to_ntriples(term: Term) -> str:
    """Render a term in N-Triples syntax (also the canonical sort key)."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if isinstance(term, Literal):
        body = f'"{_escape(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype != XSD_STRING:
            return f"{body}^^<{term.datatype}>"
        return body
    raise TermError(f"not a term: {term!r}")


def term_sort_key(term: Term) -> str:
    return term_to_ntriples(term)


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise TermError("triple subject must not be a literal")
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise TermError(f"invalid triple subject: {self.subject!r}")
        if not isinstance(self.predicate, Iri):
            raise TermError("triple predicate must be an IRI")
        if not isinstance(self.object, (Iri, BlankNode, Literal)):
            raise TermError(f"invalid triple object: {self.object!r}")

    def sort_key(self) -> tuple[str, str, str]:
        return (
            term_sort_key(self.subject),
            term_sort_key(self.predicate),
            term_sort_key(self.object),
        )


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self) -> None:
        if not _VARIABLE_NAME_RE.match(self.name):
            raise TermError(f"invalid variable name: {self.name!r}")


PatternSlot = Union[Iri, BlankNode, Literal, Variable]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternSlot
    predicate: PatternSlot
    object: PatternSlot

    def variables(self) -> set[str]:
        return {
            slot.name
            for slot in (self.subject, self.predicate, self.object)
            if isinstance(slot, Variable)
        }


# A solution binds variable names to ground terms.
Binding = dict[str, Term]


def _binding_sort_key(binding: Binding) -> tuple[tuple[str, str], ...]:
    return tuple((name, term_sort_key(binding[name])) for name in sorted(binding))


class Graph:
    """Immutable set of triples plus a prefix table.

    Equality and hashing consider the triple set only; prefixes are
    serialization hints. Lookup indexes are built lazily and cached,
    which is safe because instances never mutate.
    """

    __slots__ = ("_triples", "_prefixes", "_sorted", "_by_predicate", "_by_subject")

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: Mapping[str, str] | None = None,
    ) -> None:
        self._triples = frozenset(triples)
        self._prefixes = dict(prefixes) if prefixes else {}
        self._sorted: list[Triple] | None = None
        self._by_predicate: dict[Term, list[Triple]] | None = None
        self._by_subject: dict[Term, list[Triple]] | None = None

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.sorted_triples())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples)"

    def sorted_triples(self) -> list[Triple]:
        if self._sorted is None:
            self._sorted = sorted(self._triples, key=Triple.sort_key)
        return self._sorted

    def insert(self, triple: Triple) -> "Graph":
        """Return a graph containing ``triple``; size grows by 0 or 1."""
        if not isinstance(triple, Triple):
            raise TermError(f"not a triple: {triple!r}")
        if triple in self._triples:
            return self
        return Graph(self._triples | {triple}, self._prefixes)

    def union(self, other: "Graph") -> "Graph":
        prefixes = dict(other._prefixes)
        prefixes.update(self._prefixes)
        return Graph(self._triples | other._triples, prefixes)

    def difference(self, other: "Graph") -> "Graph":
        return Graph(self._triples - other._triples, self._prefixes)

    def with_prefixes(self, prefixes: Mapping[str, str]) -> "Graph":
        merged = dict(self._prefixes)
        merged.update(prefixes)
        return Graph(self._triples, merged)

    def _predicate_index(self) -> dict[Term, list[Triple]]:
        if self._by_predicate is None:
            index: dict[Term, list[Triple]] = {}
            for triple in self.sorted_triples():
                index.setdefault(triple.predicate, []).append(triple)
            self._by_predicate = index
        return self._by_predicate

    def _subject_index(self) -> dict[Term, list[Triple]]:
        if self._by_subject is None:
            index: dict[Term, list[Triple]] = {}
            for triple in self.sorted_triples():
                index.setdefault(triple.subject, []).append(triple)
            self._by_subject = index
        return self._by_subject

    def _candidates(self, pattern: TriplePattern) -> Iterable[Triple]:
        if not isinstance(pattern.subject, Variable):
            return self._subject_index().get(pattern.subject, [])
        if not isinstance(pattern.predicate, Variable):
            return self._predicate_index().get(pattern.predicate, [])
        return self.sorted_triples()

    def match(self, pattern: TriplePattern) -> list[Binding]:
        """All bindings whose substitution into ``pattern`` is in the graph.

        Deterministic: results are sorted by the bound terms' N-Triples
        forms. A ground pattern that is present yields one empty binding.
        """
        results: list[Binding] = []
        for triple in self._candidates(pattern):
            binding = _unify(pattern, triple)
            if binding is not None:
                results.append(binding)
        results.sort(key=_binding_sort_key)
        return results

    def objects(self, subject: Term, predicate: Iri) -> list[Term]:
        """Objects of (subject, predicate, ?o), sorted."""
        out = [
            t.object
            for t in self._subject_index().get(subject, [])
            if t.predicate == predicate
        ]
        out.sort(key=term_sort_key)
        return out

    def subject_triples(self, subject: Term) -> list[Triple]:
        """All triples with the given subject, sorted."""
        return list(self._subject_index().get(subject, []))

    def subjects(self, predicate: Iri, obj: Term) -> list[Term]:
        """Subjects of (?s, predicate, obj), sorted."""
        out = [
            t.subject
            for t in self._predicate_index().get(predicate, [])
            if t.object == obj
        ]
        out.sort(key=term_sort_key)
        return out


def _unify(pattern: TriplePattern, triple: Triple) -> Binding | None:
    binding: Binding = {}
    for slot, term in (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    ):
        if isinstance(slot, Variable):
            bound = binding.get(slot.name)
            if bound is None:
                binding[slot.name] = term
            elif bound != term:
                return None
        elif slot != term:
            return None
    return binding


def _substitute(pattern: TriplePattern, binding: Binding) -> TriplePattern:
    def resolve(slot: PatternSlot) -> PatternSlot:
        if isinstance(slot, Variable) and slot.name in binding:
            return binding[slot.name]
        return slot

    return TriplePattern(
        resolve(pattern.subject), resolve(pattern.predicate), resolve(pattern.object)
    )


def solve_bgp(graph: Graph, patterns: Iterable[TriplePattern]) -> list[Binding]:
    """Solve a basic graph pattern by joint variable binding.

    Equivalent to the natural join of the per-pattern match results;
    evaluated left to right with binding propagation. Deterministic order.
    """
    solutions: list[Binding] = [{}]
    for pattern in patterns:
        next_solutions: list[Binding] = []
        for partial in solutions:
            ground = _substitute(pattern, partial)
            for extension in graph.match(ground):
                merged = dict(partial)
                merged.update(extension)
                next_solutions.append(merged)
        solutions = next_solutions
        if not solutions:
            break
    solutions.sort(key=_binding_sort_key)
    return solutions
