#!/usr/bin/env python3
"""Generate the synthetic sample datasets under data/."""

import argparse
import csv
import math
import random
from pathlib import Path

FEATURES = ["wmc", "cbo", "rfc", "lcom", "loc"]


def class_rows(rng, project, version, date, n_classes, bug_rate):
    rows = []
    for c in range(n_classes):
        size = rng.lognormvariate(5.0, 0.8)
        wmc = max(1, round(size / 25 + rng.gauss(0, 2)))
        cbo = max(0, round(math.sqrt(size) / 2 + rng.gauss(0, 2)))
        rfc = max(1, round(wmc * 2.5 + rng.gauss(0, 4)))
        lcom = max(0, round(wmc * wmc / 4 + rng.gauss(0, 3)))
        loc = max(5, round(size))
        risk = bug_rate * (0.4 + size / 300)
        bugs = 0
        while rng.random() < min(risk, 0.85) and bugs < 6:
            bugs += 1
            risk *= 0.5
        rows.append([project, version, date, f"{project}.C{c:03d}", wmc, cbo, rfc, lcom, loc, bugs])
    return rows


def write(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["project", "version", "date", "class"] + FEATURES + ["bug"])
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parent.parent / "data", type=Path)
    ap.add_argument("--seed", type=int, default=20081)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    three_year = []
    for project, version, date in [("i", "2008", "2008-03-01"), ("j", "2009", "2009-05-01"), ("k", "2010", "2010-07-01")]:
        three_year += class_rows(rng, project, version, date, 24, 0.35)
    write(args.out / "toy_three_year.csv", three_year)

    timeline = []
    releases = [
        ("alpha", "1.0", "2006-02-10"), ("alpha", "1.1", "2006-11-03"), ("alpha", "1.2", "2007-09-21"),
        ("alpha", "2.0", "2008-08-30"), ("beta", "0.9", "2006-05-17"), ("beta", "1.0", "2007-04-02"),
        ("beta", "1.5", "2008-01-15"), ("beta", "2.0", "2009-03-11"), ("gamma", "3.1", "2007-01-25"),
        ("gamma", "3.2", "2007-12-09"), ("gamma", "4.0", "2009-01-06"), ("delta", "0.1", "2008-04-28"),
        ("delta", "0.2", "2008-12-19"), ("delta", "0.3", "2009-05-30"), ("epsilon", "1.0", "2007-06-12"),
        ("zeta", "2.3", "2008-10-04"), ("eta", "0.5", "2006-09-20"),
    ]
    for project, version, date in releases:
        timeline += class_rows(rng, project, version, date, rng.randint(25, 45), rng.uniform(0.2, 0.5))
    write(args.out / "toy_timeline.csv", timeline)


if __name__ == "__main__":
    main()
