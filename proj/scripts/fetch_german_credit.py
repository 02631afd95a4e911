#!/usr/bin/env python3
"""Fetch the Statlog German Credit data and write it in the layout that
data/german_credit/codebook.json describes.

Sources, tried in order:
  1. the UCI repository (german.data, attribute codes A11..A202)
  2. the scorecardpy source distribution on PyPI, which bundles the same
     1,000 rows with decoded attribute values

Usage: python3 scripts/fetch_german_credit.py [--out data/german_credit]
"""

import argparse
import csv
import io
import json
import pathlib
import subprocess
import sys
import tarfile
import tempfile
import urllib.request

UCI_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/german.data"

CODES = {
    "A11": "... < 0 DM", "A12": "0 <= ... < 200 DM",
    "A13": "... >= 200 DM / salary assignments for at least 1 year", "A14": "no checking account",
    "A30": "no credits taken/ all credits paid back duly", "A31": "all credits at this bank paid back duly",
    "A32": "existing credits paid back duly till now", "A33": "delay in paying off in the past",
    "A34": "critical account/ other credits existing (not at this bank)",
    "A40": "car (new)", "A41": "car (used)", "A42": "furniture/equipment", "A43": "radio/television",
    "A44": "domestic appliances", "A45": "repairs", "A46": "education", "A47": "vacation", "A48": "retraining",
    "A49": "business", "A410": "others",
    "A61": "... < 100 DM", "A62": "100 <= ... < 500 DM", "A63": "500 <= ... < 1000 DM", "A64": "... >= 1000 DM",
    "A65": "unknown/ no savings account",
    "A71": "unemployed", "A72": "... < 1 year", "A73": "1 <= ... < 4 years", "A74": "4 <= ... < 7 years",
    "A75": "... >= 7 years",
    "A91": "male : divorced/separated", "A92": "female : divorced/separated/married", "A93": "male : single",
    "A94": "male : married/widowed", "A95": "female : single",
    "A101": "none", "A102": "co-applicant", "A103": "guarantor",
    "A121": "real estate", "A122": "building society savings agreement/ life insurance",
    "A123": "car or other, not in attribute Savings account/bonds", "A124": "unknown / no property",
    "A141": "bank", "A142": "stores", "A143": "none",
    "A151": "rent", "A152": "own", "A153": "for free",
    "A171": "unemployed/ unskilled - non-resident", "A172": "unskilled - resident",
    "A173": "skilled employee / official", "A174": "management/ self-employed/ highly qualified employee/ officer",
    "A191": "none", "A192": "yes, registered under the customers name",
    "A201": "yes", "A202": "no",
}

SOURCE_COLUMNS = [
    "status_of_existing_checking_account", "duration_in_month", "credit_history", "purpose", "credit_amount",
    "savings_account_and_bonds", "present_employment_since", "installment_rate_in_percentage_of_disposable_income",
    "personal_status_and_sex", "other_debtors_or_guarantors", "present_residence_since", "property", "age_in_years",
    "other_installment_plans", "housing", "number_of_existing_credits_at_this_bank", "job",
    "number_of_people_being_liable_to_provide_maintenance_for", "telephone", "foreign_worker", "creditability",
]

# source column -> codebook feature
RENAME = {
    "status_of_existing_checking_account": "checking_account",
    "duration_in_month": "duration",
    "credit_history": "credit_history",
    "purpose": "purpose",
    "credit_amount": "credit_amount",
    "savings_account_and_bonds": "savings",
    "present_employment_since": "employment_since",
    "installment_rate_in_percentage_of_disposable_income": "installment_rate",
    "other_debtors_or_guarantors": "other_debtors",
    "present_residence_since": "residence_since",
    "property": "property",
    "age_in_years": "age",
    "other_installment_plans": "other_installment_plans",
    "housing": "housing",
    "number_of_existing_credits_at_this_bank": "existing_credits",
    "job": "job",
    "number_of_people_being_liable_to_provide_maintenance_for": "dependents",
    "telephone": "telephone",
    "foreign_worker": "foreign_worker",
}


def from_uci():
    with urllib.request.urlopen(UCI_URL, timeout=20) as r:
        text = r.read().decode("ascii")
    rows = []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        row = {}
        for col, value in zip(SOURCE_COLUMNS, parts):
            row[col] = CODES.get(value, value)
        row["creditability"] = "good" if parts[-1] == "1" else "bad"
        rows.append(row)
    return rows


def from_pypi():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "--no-binary", ":all:",
             "scorecardpy==0.1.9.7", "-d", tmp],
            check=True, stdout=subprocess.DEVNULL)
        sdist = next(pathlib.Path(tmp).glob("scorecardpy-*.tar.gz"))
        with tarfile.open(sdist) as tar:
            member = next(m for m in tar.getmembers() if m.name.endswith("data/germancredit.csv"))
            text = tar.extractfile(member).read().decode("utf-8")
    return list(csv.DictReader(io.StringIO(text)))


def convert(rows):
    out = []
    for i, row in enumerate(rows):
        status = row["personal_status_and_sex"]
        gender, _, personal = (s.strip() for s in status.partition(":"))
        rec = {"id": f"gc-{i:04d}"}
        for src, dst in RENAME.items():
            rec[dst] = row[src].strip()
        rec["gender"] = gender
        rec["personal_status"] = personal
        rec["credit_risk"] = "1" if row["creditability"].strip() == "good" else "0"
        out.append(rec)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "german_credit"))
    args = ap.parse_args()
    out_dir = pathlib.Path(args.out)
    codebook = json.loads((out_dir / "codebook.json").read_text())

    rows, source = None, None
    for name, fetch in (("uci", from_uci), ("pypi:scorecardpy", from_pypi)):
        try:
            rows, source = fetch(), name
            break
        except Exception as e:  # network or format failure, try the next source
            print(f"{name}: {e}", file=sys.stderr)
    if rows is None:
        print("German Credit is unavailable from every source", file=sys.stderr)
        return 1
    records = convert(rows)
    if len(records) != 1000:
        print(f"expected 1000 rows, got {len(records)}", file=sys.stderr)
        return 1

    for spec in codebook["features"]:
        if spec["kind"] == "categorical":
            allowed = set(spec["categories"])
            unknown = {r[spec["name"]] for r in records} - allowed
            if unknown:
                print(f"{spec['name']}: values {sorted(unknown)} missing from the codebook", file=sys.stderr)
                return 1

    columns = ["id"] + [f["name"] for f in codebook["features"]] + [codebook["label_name"]]
    with open(out_dir / "german_credit.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({c: r[c] for c in columns})
    good = sum(r["credit_risk"] == "1" for r in records)
    print(f"wrote {len(records)} rows ({good} good) from {source} to {out_dir / 'german_credit.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
