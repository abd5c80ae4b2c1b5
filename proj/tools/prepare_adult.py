#!/usr/bin/env python3
"""Convert the UCI adult files (adult.data + adult.test) into data/adult.csv.

Usage:
  prepare_adult.py --data adult.data --test adult.test --out data/adult.csv
  prepare_adult.py --wheel responsibly-0.1.2-py3-none-any.whl --out data/adult.csv

The second form reads both files straight out of a wheel that bundles them
(`pip download --no-deps responsibly==0.1.2`).
"""
import argparse
import csv
import io
import zipfile

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]


def rows(text):
    for line in io.StringIO(text):
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(COLUMNS):
            continue
        cells[-1] = cells[-1].rstrip(".")
        yield cells


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data")
    ap.add_argument("--test")
    ap.add_argument("--wheel")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    if args.wheel:
        z = zipfile.ZipFile(args.wheel)
        parts = [z.read("responsibly/dataset/adult/adult." + s).decode()
                 for s in ("data", "test")]
    else:
        parts = [open(p).read() for p in (args.data, args.test)]

    n = 0
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        for part in parts:
            for r in rows(part):
                w.writerow(r)
                n += 1
    print(f"wrote {n} rows to {args.out}")


if __name__ == "__main__":
    main()
