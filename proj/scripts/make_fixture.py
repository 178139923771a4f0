#!/usr/bin/env python3
"""Regenerates data/fixture_corpus.jsonl, the 200-report synthetic corpus
used by the tests and the acceptance suite.

All PHI values are drawn from the bundled lexicons and the shapes the default
rule set recognizes, so the detect -> surrogate -> re-detect loop closes.
Deterministic: fixed seed, stable output.
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
LEX = json.loads((ROOT / "data" / "lexicons.json").read_text())

MONTHS = ["January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December"]

FILLER = [
    "Lungs are clear.",
    "No pleural effusion or pneumothorax.",
    "Heart size is normal.",
    "No focal consolidation.",
    "No acute osseous abnormality.",
    "Visualized upper abdomen is unremarkable.",
    "Mediastinal contours are within normal limits.",
    "Degenerative changes of the thoracic spine.",
    "No suspicious pulmonary nodule.",
    "Trachea is midline.",
]


class Builder:
    def __init__(self):
        self.parts = []
        self.pos = 0
        self.spans = []

    def lit(self, text):
        self.parts.append(text)
        self.pos += len(text)

    def phi(self, text, category):
        self.spans.append({"start": self.pos, "end": self.pos + len(text),
                           "category": category, "provenance": "GOLD"})
        self.lit(text)

    def report(self, rid, metadata):
        return {"id": rid, "text": "".join(self.parts), "spans": self.spans,
                "metadata": metadata}


def numeric_date(rng):
    style = rng.randrange(3)
    y, m, d = rng.randint(1960, 2024), rng.randint(1, 12), rng.randint(1, 28)
    if style == 0:
        return f"{m:02d}/{d:02d}/{y:04d}"
    if style == 1:
        return f"{y:04d}-{m:02d}-{d:02d}"
    return f"{MONTHS[m - 1]} {d}, {y}"


def phone(rng):
    if rng.random() < 0.5:
        return f"({rng.randint(200, 999)}) {rng.randint(200, 999)}-{rng.randint(1000, 9999)}"
    return f"{rng.randint(200, 999)}-{rng.randint(200, 999)}-{rng.randint(1000, 9999)}"


def accession(rng):
    prefix = rng.choice(["MRN", "ACC", "RAD", "IMG"])
    return f"{prefix}-{rng.randint(10000, 99999999)}"


def build_report(rng, rid, long_form):
    b = Builder()
    first = rng.choice(LEX["patient_first_names"])
    last = rng.choice(LEX["patient_surnames"])
    age = rng.randint(19, 88)

    b.lit("CLINICAL HISTORY: ")
    b.phi(str(age), "AGE")
    b.lit("-year-old patient ")
    b.phi(f"{first} {last}", "PATIENT")
    b.lit(" evaluated on ")
    b.phi(numeric_date(rng), "DATE")
    b.lit(".\n")

    if rng.random() < 0.8:
        b.lit("COMPARISON: Prior examination from ")
        b.phi(numeric_date(rng), "DATE")
        b.lit(" at ")
        b.phi(rng.choice(LEX["hospitals"]), "HOSPITAL")
        b.lit(".\n")

    b.lit("FINDINGS: ")
    n_filler = rng.randint(2, 4) if not long_form else 220
    for _ in range(n_filler):
        b.lit(rng.choice(FILLER) + " ")
    if rng.random() < 0.7:
        b.lit("Images acquired on a ")
        b.phi(rng.choice(LEX["vendors"]), "VENDOR")
        b.lit(" scanner. ")
    b.lit("\n")

    b.lit("REFERRING: Dr. ")
    b.phi(rng.choice(LEX["hcw_surnames"]), "HCW")
    if rng.random() < 0.7:
        b.lit(", contact ")
        b.phi(phone(rng), "PHONE")
    b.lit(". Accession ")
    b.phi(accession(rng), "ID")
    b.lit(".\n")

    if rng.random() < 0.3:
        # Repeat the patient name so surrogate-map consistency is exercised.
        b.lit("IMPRESSION: Findings discussed with the family of ")
        b.phi(f"{first} {last}", "PATIENT")
        b.lit(". No acute disease.\n")
    else:
        b.lit("IMPRESSION: No acute disease.\n")

    exam = rng.choice(["chest xray", "chest ct", "abdomen pelvis ct", "brain mr"])
    return b.report(rid, {"exam": exam})


def main():
    rng = random.Random(20240814)
    out = ROOT / "data" / "fixture_corpus.jsonl"
    with out.open("w") as f:
        for i in range(200):
            long_form = i % 40 == 7  # a handful of reports exceed 512 tokens
            rec = build_report(rng, f"fx{i:04d}", long_form)
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
