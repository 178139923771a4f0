#!/usr/bin/env python3
"""Builds the committed vendor-response fixtures under tests/fixtures/.

Creates a three-report de-identified corpus (SYNTHETIC spans) plus one
response file per (vendor, report). GCP responses use code point offsets,
AWS responses use UTF-8 byte offsets, Azure responses use UTF-16 code unit
offsets, matching each parser's convention. Azure deliberately misses the
hospital in r1 so its numbers differ from the other two.
"""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

REPORTS = [
    {
        "id": "r1",
        "text": "Pt Irene Dawson seen 04/12/1987 at Blue Pine Medical Center.",
        "phi": [
            ("Irene Dawson", "PATIENT"),
            ("04/12/1987", "DATE"),
            ("Blue Pine Medical Center", "HOSPITAL"),
        ],
    },
    {
        "id": "r2",
        "text": "Visited café on 05/06/2010. Dr Quimby of Radionix called 650-724-1234.",
        "phi": [
            ("05/06/2010", "DATE"),
            ("Quimby", "HCW"),
            ("Radionix", "VENDOR"),
            ("650-724-1234", "PHONE"),
        ],
    },
    {
        "id": "r3",
        "text": "Summary \U0001f600 for Mona Kessler, MRN-772401, a 34-year-old.",
        "phi": [
            ("Mona Kessler", "PATIENT"),
            ("MRN-772401", "ID"),
            ("34", "AGE"),
        ],
    },
]

VENDOR_LABELS = {
    "gcp": {
        "PATIENT": "PERSON_NAME",
        "HCW": "PERSON_NAME",
        "DATE": "DATE",
        "HOSPITAL": "LOCATION",
        "VENDOR": "ORGANIZATION_NAME",
        "PHONE": "PHONE_NUMBER",
        "ID": "GENERIC_ID",
        "AGE": None,  # GCP has no age label
    },
    "aws": {
        "PATIENT": "NAME",
        "HCW": "NAME",
        "DATE": "DATE",
        "HOSPITAL": "ADDRESS",
        "VENDOR": None,  # AWS has no vendor label
        "PHONE": "PHONE_OR_FAX",
        "ID": "ID",
        "AGE": None,
    },
    "azure": {
        "PATIENT": "Patient",
        "HCW": "Doctor",
        "DATE": "Date",
        "HOSPITAL": "Hospital",
        "VENDOR": "Organization",
        "PHONE": "Phone",
        "ID": "MedicalRecord",
        "AGE": None,
    },
}

# (vendor, report id, phi text) combinations the vendor fails to find
MISSES = {("azure", "r1", "Blue Pine Medical Center")}


def cp_span(text, needle):
    start = text.find(needle)
    assert start >= 0, needle
    return start, start + len(needle)


def to_bytes(text, cp):
    return len(text[:cp].encode("utf-8"))


def to_u16(text, cp):
    return len(text[:cp].encode("utf-16-le")) // 2


def main():
    for vendor in VENDOR_LABELS:
        (OUT / vendor).mkdir(parents=True, exist_ok=True)

    corpus_lines = []
    for rep in REPORTS:
        text = rep["text"]
        spans = []
        for needle, cat in rep["phi"]:
            start, end = cp_span(text, needle)
            spans.append(
                {"start": start, "end": end, "category": cat, "provenance": "SYNTHETIC"}
            )
        spans.sort(key=lambda s: s["start"])
        corpus_lines.append(
            json.dumps(
                {"id": rep["id"], "text": text, "spans": spans, "metadata": {}},
                ensure_ascii=False,
            )
        )

        for vendor, labels in VENDOR_LABELS.items():
            findings = []
            for needle, cat in rep["phi"]:
                label = labels[cat]
                if label is None or (vendor, rep["id"], needle) in MISSES:
                    continue
                start, end = cp_span(text, needle)
                if vendor == "gcp":
                    findings.append(
                        {
                            "infoType": {"name": label},
                            "location": {
                                "codepointRange": {"start": str(start), "end": str(end)}
                            },
                        }
                    )
                elif vendor == "aws":
                    findings.append(
                        {
                            "BeginOffset": to_bytes(text, start),
                            "EndOffset": to_bytes(text, end),
                            "Type": label,
                            "Score": 0.97,
                        }
                    )
                else:
                    u_start = to_u16(text, start)
                    findings.append(
                        {
                            "category": label,
                            "offset": u_start,
                            "length": to_u16(text, end) - u_start,
                            "confidenceScore": 0.93,
                        }
                    )
            if vendor == "gcp":
                body = {"result": {"findings": findings}}
            elif vendor == "aws":
                body = {"Entities": findings}
            else:
                body = {"entities": findings}
            path = OUT / vendor / f"{rep['id']}.json"
            path.write_text(json.dumps(body, indent=2, ensure_ascii=False) + "\n")

    (OUT / "deid_corpus.jsonl").write_text("\n".join(corpus_lines) + "\n")
    for vendor in VENDOR_LABELS:
        manifest = {"vendor": vendor, "corpus": "deid_corpus.jsonl"}
        (OUT / vendor / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
