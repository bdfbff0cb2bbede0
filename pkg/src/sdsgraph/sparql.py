"""A closed SPARQL subset: prefixes, SELECT, a basic graph pattern, and
lang / string-equality / numeric filters.

Grammar (informal)::

    query    := PREFIX* 'SELECT' var+ 'WHERE' '{' block '}'
    block    := (pattern '.' | filter '.'?)*
    pattern  := term term term
    filter   := 'FILTER' '(' 'lang(' var ')' '=' string
                           | var '=' string
                           | var op number ')'        op in < <= > >= =

Solution rows are the natural join of the per-pattern matches, filtered,
projected (bag semantics), and sorted lexicographically on the projected
terms, so identical inputs always yield identical tables. Numeric
comparison coerces numeric-datatyped literals; rows whose value does not
coerce are dropped rather than raising, mirroring SPARQL's treatment of
type errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Union

from sdsgraph.graph import (
    Binding,
    Graph,
    Iri,
    Literal,
    PatternSlot,
    Term,
    TriplePattern,
    Variable,
    solve_bgp,
    term_sort_key,
)
from sdsgraph.vocab import NUMERIC_DATATYPES, RDF_TYPE, XSD_DECIMAL, XSD_INTEGER


class QueryError(ValueError):
    """Query parse or well-formedness problem, with line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        loc = f" (line {line}, column {column})" if line else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class LangFilter:
    variable: str
    tag: str


@dataclass(frozen=True)
class EqFilter:
    variable: str
    term: Term


@dataclass(frozen=True)
class NumericFilter:
    variable: str
    op: str  # one of < <= > >= =
    value: Decimal


Filter = Union[LangFilter, EqFilter, NumericFilter]


@dataclass
class Query:
    variables: list[str]
    patterns: list[TriplePattern]
    filters: list[Filter] = field(default_factory=list)
    prefixes: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        bound = set()
        for pattern in self.patterns:
            bound |= pattern.variables()
        for name in self.variables:
            if name not in bound:
                raise QueryError(f"projected variable ?{name} is unbound")
        for flt in self.filters:
            if flt.variable not in bound:
                raise QueryError(f"filter variable ?{flt.variable} is unbound")


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>[+-]?(?:\d+\.\d+|\d+))
  | (?P<pname>[A-Za-z_][A-Za-z0-9_-]*:[A-Za-z0-9_.-]*|:[A-Za-z0-9_.-]*)
  | (?P<keyword>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|[{}().=<>,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QueryError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        value = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


def _unescape(text: str) -> str:
    return (
        text.replace("\\n", "\n")
        .replace("\\t", "\t")
        .replace("\\r", "\r")
        .replace('\\"', '"')
        .replace("\\\\", "\\")
    )


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.index = 0
        self.prefixes: dict[str, str] = {}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.index]

    def error(self, message: str) -> QueryError:
        return QueryError(message, self.tok.line, self.tok.column)

    def next(self) -> _Token:
        tok = self.tok
        if tok.kind != "eof":
            self.index += 1
        return tok

    def accept_keyword(self, word: str) -> bool:
        if self.tok.kind == "keyword" and self.tok.value.upper() == word:
            self.next()
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.accept_keyword(word):
            raise self.error(f"expected {word}")

    def accept_op(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.value == op:
            self.next()
            return True
        return False

    def expect_op(self, op: str) -> None:
        if not self.accept_op(op):
            raise self.error(f"expected {op!r}")

    def parse(self) -> Query:
        while self.accept_keyword("PREFIX"):
            if self.tok.kind != "pname" or not self.tok.value.endswith(":"):
                raise self.error("expected prefix name ending in ':'")
            prefix = self.next().value[:-1]
            if self.tok.kind != "iri":
                raise self.error("expected namespace IRI")
            self.prefixes[prefix] = self.next().value[1:-1]
        self.expect_keyword("SELECT")
        variables: list[str] = []
        while self.tok.kind == "var":
            variables.append(self.next().value[1:])
        if not variables:
            raise self.error("SELECT requires at least one variable")
        self.expect_keyword("WHERE")
        self.expect_op("{")
        patterns: list[TriplePattern] = []
        filters: list[Filter] = []
        while not self.accept_op("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated WHERE block")
            if self.accept_keyword("FILTER"):
                filters.append(self._filter())
                self.accept_op(".")
                continue
            patterns.append(
                TriplePattern(self._slot(), self._slot(), self._slot())
            )
            if not self.accept_op("."):
                # the final pattern may omit the dot before '}'
                if not (self.tok.kind == "op" and self.tok.value == "}"):
                    raise self.error("expected '.' after triple pattern")
        if self.tok.kind != "eof":
            raise self.error("trailing content after query")
        query = Query(variables, patterns, filters, self.prefixes)
        query.validate()
        return query

    def _slot(self) -> PatternSlot:
        tok = self.tok
        if tok.kind == "var":
            self.next()
            return Variable(tok.value[1:])
        if tok.kind == "iri":
            self.next()
            return Iri(tok.value[1:-1])
        if tok.kind == "pname":
            self.next()
            return Iri(self._expand(tok))
        if tok.kind == "string":
            self.next()
            return Literal(_unescape(tok.value[1:-1]))
        if tok.kind == "number":
            self.next()
            return _number_literal(tok.value)
        if tok.kind == "keyword" and tok.value == "a":
            self.next()
            return Iri(RDF_TYPE)
        raise self.error(f"expected term or variable, got {tok.value!r}")

    def _expand(self, tok: _Token) -> str:
        prefix, _, local = tok.value.partition(":")
        if prefix not in self.prefixes:
            raise QueryError(f"undefined prefix: {prefix!r}", tok.line, tok.column)
        return self.prefixes[prefix] + local

    def _filter(self) -> Filter:
        self.expect_op("(")
        if self.tok.kind == "keyword" and self.tok.value.lower() == "lang":
            self.next()
            self.expect_op("(")
            var = self._require_var()
            self.expect_op(")")
            self.expect_op("=")
            if self.tok.kind != "string":
                raise self.error("lang() must be compared to a string")
            tag = _unescape(self.next().value[1:-1])
            self.expect_op(")")
            return LangFilter(var, tag)
        var = self._require_var()
        if self.tok.kind == "op" and self.tok.value in ("<", "<=", ">", ">=", "="):
            op = self.next().value
            if self.tok.kind == "number":
                value = Decimal(self.next().value)
                self.expect_op(")")
                return NumericFilter(var, op, value)
            if op == "=" and self.tok.kind == "string":
                lexical = _unescape(self.next().value[1:-1])
                self.expect_op(")")
                return EqFilter(var, Literal(lexical))
            raise self.error("expected number or string after comparator")
        raise self.error("unsupported filter expression")

    def _require_var(self) -> str:
        if self.tok.kind != "var":
            raise self.error("expected variable")
        return self.next().value[1:]


def _number_literal(token: str) -> Literal:
    if re.fullmatch(r"[+-]?\d+", token):
        return Literal(token, datatype=XSD_INTEGER)
    return Literal(token, datatype=XSD_DECIMAL)


def parse_query(text: str) -> Query:
    return _Parser(text).parse()


def _passes(binding: Binding, flt: Filter) -> bool:
    term = binding.get(flt.variable)
    if term is None:
        return False
    if isinstance(flt, LangFilter):
        return (
            isinstance(term, Literal)
            and term.language is not None
            and term.language.lower() == flt.tag.lower()
        )
    if isinstance(flt, EqFilter):
        return term == flt.term
    if isinstance(flt, NumericFilter):
        if not isinstance(term, Literal) or term.datatype not in NUMERIC_DATATYPES:
            return False
        try:
            value = Decimal(term.lexical)
        except InvalidOperation:
            return False
        if flt.op == "<":
            return value < flt.value
        if flt.op == "<=":
            return value <= flt.value
        if flt.op == ">":
            return value > flt.value
        if flt.op == ">=":
            return value >= flt.value
        return value == flt.value
    return False


def evaluate(graph: Graph, query: Query) -> list[Binding]:
    """Solve, filter, project, and sort the query's solution table."""
    solutions = solve_bgp(graph, query.patterns)
    rows: list[Binding] = []
    for binding in solutions:
        if all(_passes(binding, flt) for flt in query.filters):
            rows.append({name: binding[name] for name in query.variables})
    rows.sort(
        key=lambda row: tuple(term_sort_key(row[name]) for name in query.variables)
    )
    return rows


def evaluate_query(graph: Graph, query_text: str) -> list[Binding]:
    return evaluate(graph, parse_query(query_text))
