"""Parsers and serializers for N-Triples and a Turtle subset.

Turtle subset: ``@prefix`` declarations, prefixed names, the ``a``
keyword, object lists (``,``), predicate lists (``;``), plain / typed /
language-tagged literals, numeric and boolean shorthand, labeled blank
nodes, and one level of anonymous ``[ ... ]`` blank nodes. No
collections, no nested anonymous blank nodes.

Blank node labels found in input are replaced by fresh labels (``b0``,
``b1``, ... in first-occurrence order) so that file-local labels never
leak into the parsed graph.
"""

from __future__ import annotations

import re

from sdsgraph.graph import BlankNode, Graph, Iri, Literal, Term, Triple, term_to_ntriples
from sdsgraph.vocab import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
)

FORMAT_NTRIPLES = "ntriples"
FORMAT_TURTLE = "turtle"


class RdfSyntaxError(ValueError):
    """Syntax problem in an RDF document, with 1-based line/column."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UndefinedPrefixError(RdfSyntaxError):
    """A prefixed name uses a prefix that was never declared."""


_PN_LOCAL_SAFE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")
_INTEGER_RE = re.compile(r"[+-]?[0-9]+\Z")
_DECIMAL_RE = re.compile(r"[+-]?[0-9]*\.[0-9]+\Z")


class _Scanner:
    """Character cursor with line/column tracking."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> RdfSyntaxError:
        return RdfSyntaxError(message, self.line, self.col)

    def prefix_error(self, message: str) -> UndefinedPrefixError:
        return UndefinedPrefixError(message, self.line, self.col)

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def skip_ws_and_comments(self) -> None:
        while not self.eof():
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "#":
                while not self.eof() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def expect(self, ch: str) -> None:
        if self.eof() or self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.advance()

    def match(self, ch: str) -> bool:
        if not self.eof() and self.peek() == ch:
            self.advance()
            return True
        return False

    def read_while(self, predicate) -> str:
        out = []
        while not self.eof() and predicate(self.peek()):
            out.append(self.advance())
        return "".join(out)


def _read_iri_ref(sc: _Scanner) -> str:
    sc.expect("<")
    out = []
    while True:
        if sc.eof():
            raise sc.error("unterminated IRI")
        ch = sc.advance()
        if ch == ">":
            break
        if ch in " \t\r\n":
            raise sc.error("whitespace inside IRI")
        out.append(ch)
    return "".join(out)


def _read_quoted(sc: _Scanner) -> str:
    sc.expect('"')
    out = []
    while True:
        if sc.eof():
            raise sc.error("unterminated string literal")
        ch = sc.advance()
        if ch == '"':
            break
        if ch == "\\":
            if sc.eof():
                raise sc.error("dangling escape")
            esc = sc.advance()
            if esc == "n":
                out.append("\n")
            elif esc == "t":
                out.append("\t")
            elif esc == "r":
                out.append("\r")
            elif esc in ('"', "\\"):
                out.append(esc)
            elif esc == "u" or esc == "U":
                width = 4 if esc == "u" else 8
                digits = "".join(sc.advance() for _ in range(width) if not sc.eof())
                if len(digits) != width or any(
                    c not in "0123456789abcdefABCDEF" for c in digits
                ):
                    raise sc.error("invalid unicode escape")
                out.append(chr(int(digits, 16)))
            else:
                raise sc.error(f"unknown escape: \\{esc}")
        else:
            out.append(ch)
    return "".join(out)


def _read_langtag(sc: _Scanner) -> str:
    sc.expect("@")
    tag = sc.read_while(lambda c: c.isalnum() or c == "-")
    if not tag:
        raise sc.error("empty language tag")
    return tag


def _read_literal(sc: _Scanner, prefixes: dict[str, str] | None) -> Literal:
    lexical = _read_quoted(sc)
    if sc.peek() == "@":
        return Literal(lexical, language=_read_langtag(sc))
    if sc.peek() == "^":
        sc.expect("^")
        sc.expect("^")
        if sc.peek() == "<":
            return Literal(lexical, datatype=_read_iri_ref(sc))
        if prefixes is not None:
            return Literal(lexical, datatype=_read_prefixed_name(sc, prefixes))
        raise sc.error("expected datatype IRI")
    return Literal(lexical)


def _is_pname_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_-."


def _read_prefixed_name(sc: _Scanner, prefixes: dict[str, str]) -> str:
    prefix = sc.read_while(lambda c: c.isalnum() or c in "_-")
    if not sc.match(":"):
        raise sc.error(f"expected prefixed name, got {prefix!r}")
    local = sc.read_while(_is_pname_char)
    # Turtle allows a statement-terminating dot to abut the local name;
    # a trailing dot belongs to the statement, not the name.
    while local.endswith("."):
        local = local[:-1]
        sc.pos -= 1
        sc.col -= 1
    if prefix not in prefixes:
        raise sc.prefix_error(f"undefined prefix: {prefix!r}")
    return prefixes[prefix] + local


class _BlankNodeScope:
    """Maps document labels to fresh labels, first occurrence order."""

    def __init__(self) -> None:
        self._map: dict[str, BlankNode] = {}
        self._count = 0

    def named(self, label: str) -> BlankNode:
        node = self._map.get(label)
        if node is None:
            node = self.fresh()
            self._map[label] = node
        return node

    def fresh(self) -> BlankNode:
        node = BlankNode(f"b{self._count}")
        self._count += 1
        return node


# ---------------------------------------------------------------------------
# N-Triples


def parse_ntriples(text: str) -> Graph:
    sc = _Scanner(text)
    scope = _BlankNodeScope()
    triples: list[Triple] = []
    while True:
        sc.skip_ws_and_comments()
        if sc.eof():
            break
        subject = _nt_subject(sc, scope)
        sc.skip_ws_and_comments()
        predicate = _nt_predicate(sc)
        sc.skip_ws_and_comments()
        obj = _nt_object(sc, scope)
        sc.skip_ws_and_comments()
        sc.expect(".")
        triples.append(Triple(subject, predicate, obj))
    return Graph(triples)


def _nt_subject(sc: _Scanner, scope: _BlankNodeScope) -> Term:
    if sc.peek() == "<":
        return Iri(_read_iri_ref(sc))
    if sc.peek() == "_":
        return _read_blank(sc, scope)
    raise sc.error("expected IRI or blank node subject")


def _nt_predicate(sc: _Scanner) -> Iri:
    if sc.peek() == "<":
        return Iri(_read_iri_ref(sc))
    raise sc.error("expected IRI predicate")


def _nt_object(sc: _Scanner, scope: _BlankNodeScope) -> Term:
    ch = sc.peek()
    if ch == "<":
        return Iri(_read_iri_ref(sc))
    if ch == "_":
        return _read_blank(sc, scope)
    if ch == '"':
        return _read_literal(sc, prefixes=None)
    raise sc.error("expected IRI, blank node, or literal object")


def _read_blank(sc: _Scanner, scope: _BlankNodeScope) -> BlankNode:
    sc.expect("_")
    sc.expect(":")
    label = sc.read_while(lambda c: c.isalnum() or c == "_")
    if not label:
        raise sc.error("empty blank node label")
    return scope.named(label)


def serialize_ntriples(graph: Graph) -> str:
    lines = [
        f"{term_to_ntriples(t.subject)} {term_to_ntriples(t.predicate)} "
        f"{term_to_ntriples(t.object)} ."
        for t in graph.sorted_triples()
    ]
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# Turtle subset


def parse_turtle(text: str) -> Graph:
    sc = _Scanner(text)
    scope = _BlankNodeScope()
    prefixes: dict[str, str] = {}
    triples: list[Triple] = []
    while True:
        sc.skip_ws_and_comments()
        if sc.eof():
            break
        if sc.peek() == "@":
            _read_prefix_decl(sc, prefixes)
            continue
        _read_statement(sc, scope, prefixes, triples)
    return Graph(triples, prefixes)


def _read_prefix_decl(sc: _Scanner, prefixes: dict[str, str]) -> None:
    sc.expect("@")
    keyword = sc.read_while(str.isalpha)
    if keyword != "prefix":
        raise sc.error(f"unsupported directive @{keyword}")
    sc.skip_ws_and_comments()
    prefix = sc.read_while(lambda c: c.isalnum() or c in "_-")
    sc.expect(":")
    sc.skip_ws_and_comments()
    iri = _read_iri_ref(sc)
    sc.skip_ws_and_comments()
    sc.expect(".")
    prefixes[prefix] = iri


def _read_statement(
    sc: _Scanner,
    scope: _BlankNodeScope,
    prefixes: dict[str, str],
    triples: list[Triple],
) -> None:
    subject = _ttl_subject(sc, scope, prefixes)
    _read_predicate_object_list(sc, scope, prefixes, triples, subject, allow_anon=True)
    sc.skip_ws_and_comments()
    sc.expect(".")


def _read_predicate_object_list(
    sc: _Scanner,
    scope: _BlankNodeScope,
    prefixes: dict[str, str],
    triples: list[Triple],
    subject: Term,
    allow_anon: bool,
) -> None:
    while True:
        sc.skip_ws_and_comments()
        predicate = _ttl_predicate(sc, prefixes)
        while True:
            sc.skip_ws_and_comments()
            obj = _ttl_object(sc, scope, prefixes, triples, allow_anon)
            triples.append(Triple(subject, predicate, obj))
            sc.skip_ws_and_comments()
            if not sc.match(","):
                break
        if not sc.match(";"):
            return
        sc.skip_ws_and_comments()
        # A dangling ';' before '.' or ']' is tolerated, as in Turtle.
        if sc.peek() in ".]":
            return


def _ttl_subject(sc: _Scanner, scope: _BlankNodeScope, prefixes: dict[str, str]) -> Term:
    ch = sc.peek()
    if ch == "<":
        return Iri(_read_iri_ref(sc))
    if ch == "_":
        return _read_blank(sc, scope)
    if ch == "[":
        raise sc.error("anonymous blank node subjects are not supported")
    return Iri(_read_prefixed_name(sc, prefixes))


def _ttl_predicate(sc: _Scanner, prefixes: dict[str, str]) -> Iri:
    ch = sc.peek()
    if ch == "<":
        return Iri(_read_iri_ref(sc))
    mark = (sc.pos, sc.line, sc.col)
    word = sc.read_while(lambda c: c.isalnum() or c in "_-")
    if word == "a" and sc.peek() in " \t\r\n<":
        return Iri(RDF_TYPE)
    sc.pos, sc.line, sc.col = mark
    if ch == "_":
        raise sc.error("predicate must be an IRI")
    return Iri(_read_prefixed_name(sc, prefixes))


def _ttl_object(
    sc: _Scanner,
    scope: _BlankNodeScope,
    prefixes: dict[str, str],
    triples: list[Triple],
    allow_anon: bool,
) -> Term:
    ch = sc.peek()
    if ch == "<":
        return Iri(_read_iri_ref(sc))
    if ch == "_":
        return _read_blank(sc, scope)
    if ch == '"':
        return _read_literal(sc, prefixes)
    if ch == "[":
        if not allow_anon:
            raise sc.error("nested anonymous blank nodes are not supported")
        return _read_anon(sc, scope, prefixes, triples)
    if ch == "(":
        raise sc.error("collections are not supported")
    if ch.isdigit() or ch in "+-":
        return _read_number(sc)
    mark = (sc.pos, sc.line, sc.col)
    word = sc.read_while(lambda c: c.isalnum() or c in "_-")
    if word in ("true", "false") and sc.peek() != ":":
        return Literal(word, datatype=XSD_BOOLEAN)
    sc.pos, sc.line, sc.col = mark
    return Iri(_read_prefixed_name(sc, prefixes))


def _read_number(sc: _Scanner) -> Literal:
    token = sc.read_while(lambda c: c.isdigit() or c in "+-.")
    while token.endswith("."):
        token = token[:-1]
        sc.pos -= 1
        sc.col -= 1
    if _INTEGER_RE.match(token):
        return Literal(token, datatype=XSD_INTEGER)
    if _DECIMAL_RE.match(token):
        return Literal(token, datatype=XSD_DECIMAL)
    raise sc.error(f"invalid numeric literal: {token!r}")


def _read_anon(
    sc: _Scanner,
    scope: _BlankNodeScope,
    prefixes: dict[str, str],
    triples: list[Triple],
) -> BlankNode:
    sc.expect("[")
    node = scope.fresh()
    sc.skip_ws_and_comments()
    if sc.match("]"):
        return node
    _read_predicate_object_list(sc, scope, prefixes, triples, node, allow_anon=False)
    sc.skip_ws_and_comments()
    sc.expect("]")
    return node


def _compress(iri: str, prefixes: dict[str, str]) -> str | None:
    best: tuple[str, str] | None = None
    for prefix, ns in sorted(prefixes.items()):
        if iri.startswith(ns) and len(ns) > (len(best[1]) if best else -1):
            local = iri[len(ns):]
            if local == "" or _PN_LOCAL_SAFE.match(local):
                best = (prefix, ns)
    if best is None:
        return None
    return f"{best[0]}:{iri[len(best[1]):]}"


def _ttl_term(term: Term, prefixes: dict[str, str]) -> str:
    if isinstance(term, Iri):
        short = _compress(term.value, prefixes)
        return short if short is not None else f"<{term.value}>"
    if isinstance(term, Literal) and term.language is None and term.datatype != XSD_STRING:
        short = _compress(term.datatype, prefixes)
        if short is not None:
            lexical = term_to_ntriples(Literal(term.lexical))
            return f"{lexical}^^{short}"
    return term_to_ntriples(term)


def serialize_turtle(graph: Graph) -> str:
    prefixes = graph.prefixes
    lines = [f"@prefix {p}: <{iri}> ." for p, iri in sorted(prefixes.items())]
    if lines:
        lines.append("")
    for t in graph.sorted_triples():
        pred = "a" if isinstance(t.predicate, Iri) and t.predicate.value == RDF_TYPE \
            else _ttl_term(t.predicate, prefixes)
        lines.append(
            f"{_ttl_term(t.subject, prefixes)} {pred} {_ttl_term(t.object, prefixes)} ."
        )
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# Format dispatch


def parse(text: str, format: str = FORMAT_NTRIPLES) -> Graph:
    """Parse ``text`` in the given format into a graph."""
    if format == FORMAT_NTRIPLES:
        return parse_ntriples(text)
    if format == FORMAT_TURTLE:
        return parse_turtle(text)
    raise ValueError(f"unknown format: {format!r}")


def serialize(graph: Graph, format: str = FORMAT_NTRIPLES) -> str:
    """Serialize deterministically; output reparses to an isomorphic graph."""
    if format == FORMAT_NTRIPLES:
        return serialize_ntriples(graph)
    if format == FORMAT_TURTLE:
        return serialize_turtle(graph)
    raise ValueError(f"unknown format: {format!r}")


def guess_format(path: str) -> str:
    return FORMAT_TURTLE if str(path).endswith((".ttl", ".turtle")) else FORMAT_NTRIPLES
