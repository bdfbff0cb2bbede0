"""Deterministic demo corpus: SDS documents in the ingest JSON schema.

Ships as the seed data for the catalog (3 compounds x 2 manufacturers x
2 languages x 2 revisions = 24 sheets) plus a mixture sheet that
exercises the concentration-threshold inference rule. Everything here is
synthetic demo data assembled from the bundled GHS taxonomy's labels.
"""

from __future__ import annotations

import json
from typing import Any

HEADINGS_EN = [
    "Identification",
    "Hazard(s) identification",
    "Composition/information on ingredients",
    "First-aid measures",
    "Fire-fighting measures",
    "Accidental release measures",
    "Handling and storage",
    "Exposure controls/personal protection",
    "Physical and chemical properties",
    "Stability and reactivity",
    "Toxicological information",
    "Ecological information",
    "Disposal considerations",
    "Transport information",
    "Regulatory information",
    "Other information",
]

HEADINGS_DE = [
    "Bezeichnung des Stoffs bzw. des Gemischs und des Unternehmens",
    "Mögliche Gefahren",
    "Zusammensetzung/Angaben zu Bestandteilen",
    "Erste-Hilfe-Maßnahmen",
    "Maßnahmen zur Brandbekämpfung",
    "Maßnahmen bei unbeabsichtigter Freisetzung",
    "Handhabung und Lagerung",
    "Begrenzung und Überwachung der Exposition/Persönliche Schutzausrüstungen",
    "Physikalische und chemische Eigenschaften",
    "Stabilität und Reaktivität",
    "Toxikologische Angaben",
    "Umweltbezogene Angaben",
    "Hinweise zur Entsorgung",
    "Angaben zum Transport",
    "Rechtsvorschriften",
    "Sonstige Angaben",
]

# statement texts per H-code and language, matching the taxonomy labels
STATEMENTS = {
    "H225": {
        "en": "Highly flammable liquid and vapour",
        "de": "Flüssigkeit und Dampf leicht entzündbar",
    },
    "H290": {
        "en": "May be corrosive to metals",
        "de": "Kann gegenüber Metallen korrosiv sein",
    },
    "H302": {
        "en": "Harmful if swallowed",
        "de": "Gesundheitsschädlich bei Verschlucken",
    },
    "H314": {
        "en": "Causes severe skin burns and eye damage",
        "de": "Verursacht schwere Verätzungen der Haut und schwere Augenschäden",
    },
    "H315": {
        "en": "Causes skin irritation",
        "de": "Verursacht Hautreizungen",
    },
    "H318": {
        "en": "Causes serious eye damage",
        "de": "Verursacht schwere Augenschäden",
    },
    "H319": {
        "en": "Causes serious eye irritation",
        "de": "Verursacht schwere Augenreizung",
    },
    "H336": {
        "en": "May cause drowsiness or dizziness",
        "de": "Kann Schläfrigkeit und Benommenheit verursachen",
    },
    "H400": {
        "en": "Very toxic to aquatic life",
        "de": "Sehr giftig für Wasserorganismen",
    },
}

EYE_IRRITATION_2A_LABEL = {
    "en": "GHS Eye Irritation Category 2A",
    "de": "GHS Augenreizung Kategorie 2A",
}

MANUFACTURERS = ["Nordchem Labs", "Vanguard Reagents"]
LANGUAGES = ["de", "en"]
REVISIONS = ["2021-03-15", "2023-07-01"]


def _sections(language: str, hazard_lines: list[str], composition: str) -> list[dict]:
    headings = HEADINGS_EN if language == "en" else HEADINGS_DE
    bodies = {2: "\n".join(hazard_lines), 3: composition}
    return [
        {"number": n, "heading": headings[n - 1], "text": bodies.get(n, "")}
        for n in range(1, 17)
    ]


def build_sheet(
    compound: str,
    cas: str,
    manufacturer: str,
    language: str,
    revision: str,
    h_codes: list[str],
    pictograms: list[str],
    ingredients: list[tuple[str, str, str]],
    extra_statements: list[str] | None = None,
) -> dict[str, Any]:
    hazards = [
        {"hCode": code, "statement": STATEMENTS[code][language], "section": 2}
        for code in h_codes
    ]
    for statement in extra_statements or []:
        hazards.append({"hCode": None, "statement": statement, "section": 2})
    hazard_lines = [f"{h['hCode'] or ''} {h['statement']}".strip() for h in hazards]
    composition = "; ".join(f"{name} ({cas_no}) {conc}%" for name, cas_no, conc in ingredients)
    return {
        "compound": {"name": compound, "cas": cas},
        "manufacturer": manufacturer,
        "language": language,
        "revisionDate": revision,
        "sections": _sections(language, hazard_lines, composition),
        "hazards": hazards,
        "pictograms": pictograms,
        "ingredients": [
            {"name": name, "cas": cas_no, "concentrationPercent": float(conc)}
            for name, cas_no, conc in ingredients
        ],
    }


# per-compound base data; H-codes vary by revision (the newer revision
# discloses one more hazard) and one manufacturer adds a vendor-specific
# code, so the union over (i, j, k) is strictly larger than any single sheet
_COMPOUNDS = {
    "Acetomenophin 400": {
        "cas": "103-90-2",
        "pictograms": ["GHS07"],
        "ingredients": [
            ("Acetomenophin", "103-90-2", "99.5"),
            ("Microcrystalline cellulose", "9004-34-6", "0.5"),
        ],
        "h_codes": {
            "2021-03-15": ["H319"],
            "2023-07-01": ["H319", "H302"],
        },
        "extra": EYE_IRRITATION_2A_LABEL,
    },
    "Isopropanol 70": {
        "cas": "67-63-0",
        "pictograms": ["GHS02", "GHS07"],
        "ingredients": [
            ("Isopropanol", "67-63-0", "70"),
            ("Water", "7732-18-5", "30"),
        ],
        "h_codes": {
            "2021-03-15": ["H225", "H319"],
            "2023-07-01": ["H225", "H319", "H336"],
        },
        "extra": None,
    },
    "Sodium Hypochlorite 5": {
        "cas": "7681-52-9",
        "pictograms": ["GHS05", "GHS09"],
        "ingredients": [
            ("Sodium hypochlorite", "7681-52-9", "5"),
            ("Water", "7732-18-5", "95"),
        ],
        "h_codes": {
            "2021-03-15": ["H314", "H318"],
            "2023-07-01": ["H314", "H318", "H400"],
        },
        "extra": None,
    },
}

# Nordchem sheets additionally disclose corrosivity to metals for the
# hypochlorite solution
_VENDOR_EXTRA_CODES = {("Sodium Hypochlorite 5", "Nordchem Labs"): ["H290"]}


def demo_corpus() -> list[dict[str, Any]]:
    """All 24 corpus sheets, deterministically ordered."""
    sheets = []
    for compound, spec in sorted(_COMPOUNDS.items()):
        for manufacturer in MANUFACTURERS:
            for language in LANGUAGES:
                for revision in REVISIONS:
                    h_codes = list(spec["h_codes"][revision])
                    h_codes += _VENDOR_EXTRA_CODES.get((compound, manufacturer), [])
                    extra = spec["extra"]
                    sheets.append(
                        build_sheet(
                            compound=compound,
                            cas=spec["cas"],
                            manufacturer=manufacturer,
                            language=language,
                            revision=revision,
                            h_codes=h_codes,
                            pictograms=list(spec["pictograms"]),
                            ingredients=list(spec["ingredients"]),
                            extra_statements=[extra[language]] if extra else None,
                        )
                    )
    return sheets


def acetomenophin_sheet() -> dict[str, Any]:
    """The canonical single-sheet fixture (also shipped as a data file)."""
    return build_sheet(
        compound="Acetomenophin 400",
        cas="103-90-2",
        manufacturer="Vanguard Reagents",
        language="en",
        revision="2023-07-01",
        h_codes=["H319", "H302"],
        pictograms=["GHS07"],
        ingredients=[
            ("Acetomenophin", "103-90-2", "99.5"),
            ("Microcrystalline cellulose", "9004-34-6", "0.5"),
        ],
        extra_statements=[EYE_IRRITATION_2A_LABEL["en"]],
    )


def mixture_sheet() -> dict[str, Any]:
    """A mixture whose 12% ingredient is the 2A-classified compound."""
    return build_sheet(
        compound="Calibration Suspension 12",
        cas="n/a",
        manufacturer="Vanguard Reagents",
        language="en",
        revision="2024-01-20",
        h_codes=[],
        pictograms=["GHS07"],
        ingredients=[
            ("Acetomenophin 400", "103-90-2", "12.0"),
            ("Water", "7732-18-5", "88.0"),
        ],
    )


def dumps(sheet: dict[str, Any]) -> str:
    return json.dumps(sheet, indent=2, ensure_ascii=False) + "\n"
