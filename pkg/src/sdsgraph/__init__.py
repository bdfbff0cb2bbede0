"""Knowledge-graph engine for GHS Safety Data Sheets.

Embedded triple store, SKOS taxonomy tooling, SHACL-subset validation
with forward-chaining inference, SDS ingestion, and composite shipping
cover-sheet generation, exposed as a library, CLI, and HTTP service.
"""

__version__ = "0.1.0"
