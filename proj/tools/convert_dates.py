#!/usr/bin/env python3
"""Rewrite a dataset CSV's date column from forms like 1999-Nov-08 to ISO 1999-11-08."""

import argparse
import csv
import sys
from datetime import datetime

FORMATS = ["%Y-%b-%d", "%Y-%B-%d", "%d-%b-%Y", "%Y/%m/%d", "%Y-%m-%d"]


def to_iso(value):
    for fmt in FORMATS:
        try:
            return datetime.strptime(value.strip(), fmt).date().isoformat()
        except ValueError:
            pass
    raise ValueError(f"unrecognised date: {value!r}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("output", nargs="?", help="defaults to stdout")
    ap.add_argument("--column", default="date")
    args = ap.parse_args()

    with open(args.input, newline="") as f:
        reader = csv.DictReader(f)
        if args.column not in reader.fieldnames:
            sys.exit(f"column {args.column!r} not found")
        out = open(args.output, "w", newline="") if args.output else sys.stdout
        writer = csv.DictWriter(out, fieldnames=reader.fieldnames, lineterminator="\n")
        writer.writeheader()
        for line, row in enumerate(reader, start=2):
            try:
                row[args.column] = to_iso(row[args.column])
            except ValueError as e:
                sys.exit(f"line {line}: {e}")
            writer.writerow(row)


if __name__ == "__main__":
    main()
