"""Attribute bogon hops on a cleaned path to the ASes that forwarded them.

For every bogon hop of class X that sits past the originating network (some
AS hop before it is disjoint from the trace's origin AS):

* BA collects every AS before the bogon,
* BB collects the AS immediately before it,
* BC collects that same AS when it shows up again somewhere after the bogon.

The origin AS never enters any set. A run of consecutive class-X bogons is a
single event at its first position; bogons of other classes are transparent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Iterable

from .paths import AsHop, CleanPath

CASES = ("BA", "BB", "BC")


@dataclass
class ClassFinding:
    ba: set[int] = field(default_factory=set)
    bb: set[int] = field(default_factory=set)
    bc: set[int] = field(default_factory=set)
    positions: list[int] = field(default_factory=list)
    multi_origin_bb: bool = False

    def case(self, name: str) -> set[int]:
        return {"BA": self.ba, "BB": self.bb, "BC": self.bc}[name]


@dataclass
class TransitFinding:
    trace_id: str
    classes: dict[str, ClassFinding] = field(default_factory=dict)
    skipped: bool = False

    def qualifying_labels(self) -> set[str]:
        return set(self.classes)

    def sets(self) -> dict[tuple[str, str], frozenset[int]]:
        """``{(label, case): asns}`` for every qualifying class."""
        return {
            (label, case): frozenset(cf.case(case))
            for label, cf in self.classes.items()
            for case in CASES
        }


def classify_path(path: CleanPath, trace_id: str = "") -> TransitFinding:
    origin = path.origin_asn
    if origin is None:
        return TransitFinding(trace_id, skipped=True)

    elements = path.elements
    found: dict[str, ClassFinding] = {}
    pending_bc: list[tuple[int, str, frozenset[int]]] = []

    before: set[int] = set()
    last_as: frozenset[int] | None = None
    foreign_seen = False
    run: set[str] = set()
    for i, e in enumerate(elements):
        if isinstance(e, AsHop):
            run.clear()
            if e.asns.isdisjoint(origin):
                foreign_seen = True
            before |= e.asns - origin
            last_as = e.asns
            continue
        if e.label in run:
            continue
        run.add(e.label)
        if not foreign_seen or last_as is None:
            continue
        cf = found.setdefault(e.label, ClassFinding())
        cf.positions.append(i)
        cf.ba |= before
        cf.bb |= last_as - origin
        if len(last_as) > 1:
            cf.multi_origin_bb = True
        pending_bc.append((i, e.label, last_as))

    if pending_bc:
        # after[i] = union of AS hops strictly after position i
        after: list[frozenset[int]] = [frozenset()] * (len(elements) + 1)
        acc: frozenset[int] = frozenset()
        for i in range(len(elements) - 1, -1, -1):
            after[i] = acc
            e = elements[i]
            if isinstance(e, AsHop):
                acc = acc | e.asns
        for i, label, prev in pending_bc:
            if not prev.isdisjoint(after[i]):
                found[label].bc |= prev - origin
    return TransitFinding(trace_id, found)


def write_findings_csv(
    findings: Iterable[TransitFinding], out: IO[str], cases: Iterable[str] = CASES
) -> int:
    """Rows ``trace_id,class,case,asn,multi_origin_bb`` sorted for stable output."""
    cases = tuple(cases)
    rows = []
    for f in findings:
        for label, cf in f.classes.items():
            flag = "1" if cf.multi_origin_bb else "0"
            for case in cases:
                for asn in cf.case(case):
                    rows.append((f.trace_id, label, case, asn, flag))
    rows.sort()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trace_id", "class", "case", "asn", "multi_origin_bb"])
    w.writerows(rows)
    return len(rows)
