"""Namespace IRIs shared across the package.

Standard W3C vocabularies plus the DPG namespaces used by the bundled
shapes, taxonomies, and minted data nodes.
"""

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
XSD = "http://www.w3.org/2001/XMLSchema#"
SKOS = "http://www.w3.org/2004/02/skos/core#"
SKOSXL = "http://www.w3.org/2008/05/skos-xl#"
SH = "http://www.w3.org/ns/shacl#"
DCT = "http://purl.org/dc/terms/"

# DPG namespaces: safety data shapes/terms, document structure terms,
# taxonomy concept bases, and minted data nodes.
SAFED = "https://dpg.example/ns/safed#"
DOC = "https://dpg.example/ns/doc#"
GHS_TAX = "https://dpg.example/tax/ghs/"
ISA88_TAX = "https://dpg.example/tax/isa88/"
DATA = "https://dpg.example/data/"

RDF_TYPE = RDF + "type"
RDF_FIRST = RDF + "first"
RDF_REST = RDF + "rest"
RDF_NIL = RDF + "nil"
RDF_LANG_STRING = RDF + "langString"

XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_DOUBLE = XSD + "double"
XSD_FLOAT = XSD + "float"
XSD_BOOLEAN = XSD + "boolean"
XSD_DATE = XSD + "date"

NUMERIC_DATATYPES = frozenset({XSD_INTEGER, XSD_DECIMAL, XSD_DOUBLE, XSD_FLOAT})

# Default prefix table used when serializing and in bundled files.
COMMON_PREFIXES = {
    "rdf": RDF,
    "rdfs": RDFS,
    "xsd": XSD,
    "skos": SKOS,
    "skosxl": SKOSXL,
    "sh": SH,
    "dct": DCT,
    "safed": SAFED,
    "doc": DOC,
    "ghs": GHS_TAX,
    "isa88": ISA88_TAX,
    "data": DATA,
}
