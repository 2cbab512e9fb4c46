"""Build the daily Danish fire claims fixture from a per-claim export.

Input: a CSV with columns Date, Building, Contents, Profits (and optionally
Total), one row per claim, amounts in millions of DKK; this is the layout of
the ``danishmulti`` data set in the R package CASdatasets.  Output: one row
per calendar day from 1980-01-01 to 1990-12-31 (4018 days) with the claims of
each day summed and days without claims filled with zeros.

    python3 scripts/prepare_danish.py danishmulti.csv src/combfit/data/danish.csv
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
from collections import defaultdict
from pathlib import Path

START, END = dt.date(1980, 1, 1), dt.date(1990, 12, 31)
COLUMNS = ("building", "contents", "profits")
DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y", "%d/%m/%Y")


def parse_date(text: str) -> dt.date:
    for fmt in DATE_FORMATS:
        try:
            return dt.datetime.strptime(text.strip(), fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unrecognised date {text!r}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source")
    ap.add_argument("target")
    args = ap.parse_args()

    daily = defaultdict(lambda: [0.0, 0.0, 0.0])
    with open(args.source, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = {f.lower().strip(): f for f in reader.fieldnames or []}
        missing = [c for c in ("date", *COLUMNS) if c not in fields]
        if missing:
            raise SystemExit(f"source lacks columns {missing}")
        for row in reader:
            day = parse_date(row[fields["date"]])
            acc = daily[day]
            for k, c in enumerate(COLUMNS):
                cell = row[fields[c]].strip()
                acc[k] += float(cell) if cell not in ("", "NA") else 0.0

    out = Path(args.target)
    out.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["date", *COLUMNS])
        day = START
        while day <= END:
            w.writerow([day.isoformat(), *(repr(v) for v in daily.get(day, [0.0, 0.0, 0.0]))])
            day += dt.timedelta(days=1)
            n += 1
    outside = sum(1 for d in daily if not START <= d <= END)
    print(f"wrote {n} days to {out}; {len(daily)} claim days, {outside} outside the window")


if __name__ == "__main__":
    main()
