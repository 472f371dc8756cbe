"""Joins against Spoofer results, MANRS conformance and AS metadata.

Input CSVs (header row required):

* spoofer:  ``asn,timestamp,routedspoof`` with routedspoof one of
  ``received``, ``blocked``, ``rewritten``, ``unknown``, ``na``
* manrs:    ``asn,anti_spoofing_conformant,member_since``
* metadata: ``asn,rir,country,category_l1,category_l2,lat,lon``
"""

from __future__ import annotations

import bisect
import csv
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .metrics import pct_shares
from .traces import parse_ts

SPOOFER_VOCAB = ("received", "blocked", "rewritten", "unknown", "na")
DEFAULT_WINDOW = timedelta(days=183)

SPOOFABLE = "spoofable"
NON_SPOOFABLE = "non-spoofable"
BOTH = "both"
UNTESTED = "untested"

NOT_FOUND = "Not found"


class InputFormatError(ValueError):
    def __init__(self, path: str, row: int, message: str):
        super().__init__(f"{path}: row {row}: {message}")
        self.row = row


def _rows(source: str | Path | IO[str], required: Sequence[str]) -> Iterable[tuple[int, dict]]:
    name = str(source) if isinstance(source, (str, Path)) else getattr(source, "name", "<stream>")
    fh = open(source, newline="") if isinstance(source, (str, Path)) else source
    try:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing and reader.fieldnames is not None:
            raise InputFormatError(name, 1, f"missing columns: {', '.join(missing)}")
        for i, row in enumerate(reader, 2):
            yield i, row
    finally:
        if fh is not source:
            fh.close()


def _asn(value: str, name: str, row: int) -> int:
    v = value.strip().upper().removeprefix("AS")
    if not v.isdigit() or int(v) < 1:
        raise InputFormatError(name, row, f"bad ASN {value!r}")
    return int(v)


@dataclass(frozen=True)
class SpooferRecord:
    asn: int
    timestamp: datetime
    routedspoof: str

    def __post_init__(self):
        if self.routedspoof not in SPOOFER_VOCAB:
            raise ValueError(f"routedspoof {self.routedspoof!r} not in vocabulary")


def _parse_when(text: str) -> datetime:
    text = text.strip()
    if len(text) == 10:
        return datetime.fromisoformat(text).replace(tzinfo=timezone.utc)
    return parse_ts(text)


def load_spoofer_csv(source: str | Path | IO[str]) -> list[SpooferRecord]:
    name = str(source)
    out = []
    for row_no, row in _rows(source, ("asn", "timestamp", "routedspoof")):
        status = row["routedspoof"]
        if status not in SPOOFER_VOCAB:
            raise InputFormatError(name, row_no, f"routedspoof {status!r} not in {SPOOFER_VOCAB}")
        try:
            when = _parse_when(row["timestamp"])
        except ValueError as exc:
            raise InputFormatError(name, row_no, str(exc)) from None
        out.append(SpooferRecord(_asn(row["asn"], name, row_no), when, status))
    return out


class SpooferIndex:
    """Per-ASN time-sorted received/blocked records for fast window queries."""

    def __init__(self, records: Iterable[SpooferRecord]):
        by_asn: dict[int, list[tuple[datetime, str]]] = defaultdict(list)
        self.tested_asns: set[int] = set()
        for r in records:
            self.tested_asns.add(r.asn)
            if r.routedspoof in ("received", "blocked"):
                by_asn[r.asn].append((r.timestamp, r.routedspoof))
        self._times = {}
        self._status = {}
        for asn, items in by_asn.items():
            items.sort()
            self._times[asn] = [t for t, _ in items]
            self._status[asn] = [s for _, s in items]

    def outcomes(self, asn: int, when: datetime, window: timedelta = DEFAULT_WINDOW) -> set[str]:
        """``routedspoof`` values among received/blocked for ``when - window <= t < when``."""
        times = self._times.get(asn)
        if not times:
            return set()
        lo = bisect.bisect_left(times, when - window)
        hi = bisect.bisect_left(times, when)
        return set(self._status[asn][lo:hi])

    def status(self, asn: int, when: Iterable[datetime] | datetime, window: timedelta = DEFAULT_WINDOW) -> str:
        if isinstance(when, datetime):
            when = (when,)
        seen: set[str] = set()
        for w in when:
            seen |= self.outcomes(asn, w, window)
        return _status_from(seen)


def _status_from(seen: set[str]) -> str:
    if seen == {"received"}:
        return SPOOFABLE
    if seen == {"blocked"}:
        return NON_SPOOFABLE
    if seen:
        return BOTH
    return UNTESTED


def spoofer_status(
    asn: int,
    measurement_time: datetime,
    records: Iterable[SpooferRecord],
    window: timedelta = DEFAULT_WINDOW,
) -> str:
    """spoofable / non-spoofable / both / untested within the lookback window."""
    lo = measurement_time - window
    seen = {
        r.routedspoof
        for r in records
        if r.asn == asn and lo <= r.timestamp < measurement_time and r.routedspoof in ("received", "blocked")
    }
    return _status_from(seen)


def crosscheck_summary(
    per_class: Mapping[str, Mapping[int, Iterable[datetime]]],
    records: Iterable[SpooferRecord] | SpooferIndex,
    window: timedelta = DEFAULT_WINDOW,
    labels: Sequence[str] | None = None,
) -> list[dict[str, str | int]]:
    """One row per class, shaped like the Spoofer comparison table.

    ``per_class`` maps class -> {asn: measurement times the ASN was seen}.
    An ASN's status merges the windows of all its measurements. The percent
    base is ``in_spoofer``: ASNs with at least one received/blocked result in
    a window. ``in_spoofer_any`` counts ASNs with any Spoofer record at all.
    """
    index = records if isinstance(records, SpooferIndex) else SpooferIndex(records)
    rows = []
    for label in labels if labels is not None else sorted(per_class):
        asns = per_class.get(label, {})
        counts = {SPOOFABLE: 0, NON_SPOOFABLE: 0, BOTH: 0, UNTESTED: 0}
        for asn, times in asns.items():
            counts[index.status(asn, list(times), window)] += 1
        tested = counts[SPOOFABLE] + counts[NON_SPOOFABLE] + counts[BOTH]
        p_spoof, p_non, p_both = pct_shares([counts[SPOOFABLE], counts[NON_SPOOFABLE], counts[BOTH]])
        rows.append(
            {
                "class": label,
                "identified": len(asns),
                "in_spoofer": tested,
                "in_spoofer_any": sum(1 for a in asns if a in index.tested_asns),
                "only_spoofable": counts[SPOOFABLE],
                "only_spoofable_pct": p_spoof,
                "only_non_spoofable": counts[NON_SPOOFABLE],
                "only_non_spoofable_pct": p_non,
                "both": counts[BOTH],
                "both_pct": p_both,
            }
        )
    return rows


@dataclass(frozen=True)
class ManrsRecord:
    asn: int
    anti_spoofing_conformant: bool
    member_since: date | None = None


_TRUE = {"true", "1", "yes", "y", "conformant"}
_FALSE = {"false", "0", "no", "n", "non-conformant"}


def load_manrs_csv(source: str | Path | IO[str]) -> list[ManrsRecord]:
    name = str(source)
    out = []
    for row_no, row in _rows(source, ("asn", "anti_spoofing_conformant", "member_since")):
        flag = row["anti_spoofing_conformant"].strip().lower()
        if flag not in _TRUE | _FALSE:
            raise InputFormatError(name, row_no, f"bad conformance flag {flag!r}")
        since = (row.get("member_since") or "").strip()
        try:
            since_date = date.fromisoformat(since[:10]) if since else None
        except ValueError as exc:
            raise InputFormatError(name, row_no, str(exc)) from None
        out.append(ManrsRecord(_asn(row["asn"], name, row_no), flag in _TRUE, since_date))
    return out


def dedupe_manrs(records: Iterable[ManrsRecord]) -> tuple[dict[int, ManrsRecord], list[int]]:
    """Collapse duplicate ASNs. ASNs whose records disagree on conformance are dropped and returned."""
    grouped: dict[int, list[ManrsRecord]] = defaultdict(list)
    for r in records:
        grouped[r.asn].append(r)
    clean: dict[int, ManrsRecord] = {}
    conflicts = []
    for asn in sorted(grouped):
        recs = grouped[asn]
        if len({r.anti_spoofing_conformant for r in recs}) > 1:
            conflicts.append(asn)
            continue
        dates = [r.member_since for r in recs if r.member_since is not None]
        clean[asn] = ManrsRecord(asn, recs[0].anti_spoofing_conformant, min(dates) if dates else None)
    return clean, conflicts


@dataclass(frozen=True)
class ManrsResult:
    rows: list[dict[str, str | int]]
    conflicts: list[int]


def manrs_join(
    per_class: Mapping[str, Iterable[int]],
    records: Iterable[ManrsRecord],
    cutoff: date,
    labels: Sequence[str] | None = None,
) -> ManrsResult:
    """Four rows: (all members | members before cutoff) x (conformant | non-conformant)."""
    labels = list(labels) if labels is not None else sorted(per_class)
    members, conflicts = dedupe_manrs(records)
    sets = {lab: set(per_class.get(lab, ())) for lab in labels}
    everything = set().union(*sets.values()) if sets else set()

    rows = []
    for era in ("all", "before"):
        for conformant in (True, False):
            def keep(asn: int) -> bool:
                m = members.get(asn)
                if m is None or m.anti_spoofing_conformant is not conformant:
                    return False
                return era == "all" or (m.member_since is not None and m.member_since < cutoff)

            row: dict[str, str | int] = {
                "members": "All" if era == "all" else f"Before {cutoff.isoformat()}",
                "conformance": "conformant" if conformant else "non-conformant",
                "unique_asns": sum(1 for a in everything if keep(a)),
            }
            for lab in labels:
                row[lab] = sum(1 for a in sets[lab] if keep(a))
            rows.append(row)
    return ManrsResult(rows, conflicts)


def snapshot_warning(measurement: date, snapshot: date, window: timedelta = DEFAULT_WINDOW) -> str | None:
    gap = abs(snapshot - measurement)
    if gap > window:
        return (
            f"MANRS snapshot {snapshot.isoformat()} is {gap.days} days away from the "
            f"measurement {measurement.isoformat()}"
        )
    return None


@dataclass(frozen=True)
class AsMetadata:
    asn: int
    rir: str = ""
    country: str = ""
    category_l1: str = ""
    category_l2: str = ""
    lat: float | None = None
    lon: float | None = None

    def __post_init__(self):
        if self.lat is not None and not -90 <= self.lat <= 90:
            raise ValueError(f"latitude out of range for AS{self.asn}")
        if self.lon is not None and not -180 <= self.lon <= 180:
            raise ValueError(f"longitude out of range for AS{self.asn}")


def load_metadata_csv(source: str | Path | IO[str]) -> dict[int, AsMetadata]:
    name = str(source)
    out: dict[int, AsMetadata] = {}
    cols = ("asn", "rir", "country", "category_l1", "category_l2", "lat", "lon")
    for row_no, row in _rows(source, cols):
        try:
            lat = float(row["lat"]) if row["lat"].strip() else None
            lon = float(row["lon"]) if row["lon"].strip() else None
            md = AsMetadata(
                _asn(row["asn"], name, row_no),
                row["rir"].strip(),
                row["country"].strip().upper(),
                row["category_l1"].strip(),
                row["category_l2"].strip(),
                lat,
                lon,
            )
        except ValueError as exc:
            if isinstance(exc, InputFormatError):
                raise
            raise InputFormatError(name, row_no, str(exc)) from None
        out[md.asn] = md
    return out


def _share_table(counts: Mapping[str, int], total: int, key: str) -> list[dict[str, str | int]]:
    order = sorted((k for k in counts if k != NOT_FOUND), key=lambda k: (-counts[k], k))
    if NOT_FOUND in counts:
        order.append(NOT_FOUND)
    shares = pct_shares([counts[k] for k in order], total)
    return [{key: k, "asns": counts[k], "pct": p} for k, p in zip(order, shares)]


@dataclass(frozen=True)
class Enrichment:
    rir: list[dict[str, str | int]]
    category_l1: list[dict[str, str | int]]
    category_l2: list[dict[str, str | int]]
    top_countries: list[dict[str, str | int]]
    country_pivot: list[dict[str, str | int]]
    scatter: list[dict[str, str | int | float]]


def enrich(
    per_class: Mapping[str, Iterable[int]],
    metadata: Mapping[int, AsMetadata],
    labels: Sequence[str] | None = None,
    top_n: int = 10,
    occurrences: Mapping[int, int] | None = None,
) -> Enrichment:
    """Group the union of ``per_class`` ASNs by RIR, category and country.

    ASNs without metadata (or with an empty field) land in ``Not found``.
    Countries rank by unique ASN count, ties broken by country code.
    """
    labels = list(labels) if labels is not None else sorted(per_class)
    sets = {lab: set(per_class.get(lab, ())) for lab in labels}
    asns = sorted(set().union(*sets.values())) if sets else []
    total = len(asns)

    def field_of(asn: int, attr: str) -> str:
        md = metadata.get(asn)
        return (getattr(md, attr) if md else "") or NOT_FOUND

    rir: dict[str, int] = defaultdict(int)
    l1: dict[str, int] = defaultdict(int)
    l2: dict[str, int] = defaultdict(int)
    country_sets: dict[str, dict[str, set[int]]] = defaultdict(lambda: defaultdict(set))
    country_all: dict[str, set[int]] = defaultdict(set)
    for asn in asns:
        rir[field_of(asn, "rir")] += 1
        l1[field_of(asn, "category_l1")] += 1
        l2[field_of(asn, "category_l1") + " / " + field_of(asn, "category_l2")] += 1
        country_all[field_of(asn, "country")].add(asn)
    for lab, s in sets.items():
        for asn in s:
            country_sets[field_of(asn, "country")][lab].add(asn)

    pivot = []
    for c in sorted(country_all, key=lambda c: (-len(country_all[c]), c)):
        row: dict[str, str | int] = {"country": c, "asns": len(country_all[c])}
        for lab in labels:
            row[lab] = len(country_sets[c][lab])
        pivot.append(row)
    top = [r for r in pivot if r["country"] != NOT_FOUND][:top_n]

    scatter = []
    for lab in labels:
        for asn in sorted(sets[lab]):
            md = metadata.get(asn)
            if md is None or md.lat is None or md.lon is None:
                continue
            scatter.append(
                {
                    "class": lab,
                    "asn": asn,
                    "lat": md.lat,
                    "lon": md.lon,
                    "occurrences": (occurrences or {}).get(asn, 1),
                }
            )

    return Enrichment(
        rir=_share_table(rir, total, "rir"),
        category_l1=_share_table(l1, total, "category_l1"),
        category_l2=_share_table(l2, total, "category"),
        top_countries=top,
        country_pivot=pivot,
        scatter=scatter,
    )
