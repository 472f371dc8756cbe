"""Per-measurement statistics, set similarity matrices and occurrence counts.

All counters are exact integers and all ratios are :class:`fractions.Fraction`.
Percentages are rendered with two decimals, rounding half up.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import IO, Iterable, Mapping, Sequence

from .transit import CASES, TransitFinding


def pct(num: int, den: int) -> str:
    """``num/den`` as a percentage string with two decimals; empty if den is 0."""
    if den == 0:
        return ""
    d = Decimal(num * 100) / Decimal(den)
    return str(d.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def pct_shares(counts: Sequence[int], total: int | None = None) -> list[str]:
    """Percentages of ``total`` that add up to exactly 100.00.

    Each share is floored to 0.01 and the missing hundredths go to the largest
    remainders (earlier entries win ties). Use this for tables whose rows
    partition a whole; :func:`pct` rounds a single ratio half up.
    """
    total = sum(counts) if total is None else total
    if total == 0:
        return ["" for _ in counts]
    units = [c * 10000 // total for c in counts]
    rems = [c * 10000 % total for c in counts]
    if sum(counts) == total:
        short = 10000 - sum(units)
        for i in sorted(range(len(counts)), key=lambda i: -rems[i])[:short]:
            units[i] += 1
    else:  # not a partition: fall back to independent rounding
        return [pct(c, total) for c in counts]
    return [f"{u // 100}.{u % 100:02d}" for u in units]


def ratio_obj(num: int, den: int) -> dict:
    return {
        "num": num,
        "den": den,
        "value": None if den == 0 else float(Fraction(num, den)),
        "pct": pct(num, den),
    }


@dataclass(frozen=True)
class TraceResult:
    """What aggregation needs to know about one analysed trace."""

    trace_id: str
    vp_id: str
    dst_unrouted: bool
    bogon_labels: frozenset[str]
    finding: TransitFinding
    dropped_unknown: bool = False


@dataclass
class StatsAccumulator:
    """Commutative fold over :class:`TraceResult`; shards merge with :meth:`merge`."""

    vps: set[str] = field(default_factory=set)
    vps_any_bogon: set[str] = field(default_factory=set)
    vps_qualifying: set[str] = field(default_factory=set)
    n_traces: int = 0
    n_unrouted_dst: int = 0
    n_no_origin: int = 0
    n_dropped_unknown: int = 0
    traces_any: Counter = field(default_factory=Counter)
    traces_qualifying: Counter = field(default_factory=Counter)
    asn_sets: dict[tuple[str, str], set[int]] = field(default_factory=dict)

    def add(self, r: TraceResult) -> None:
        self.n_traces += 1
        self.vps.add(r.vp_id)
        if r.dst_unrouted:
            self.n_unrouted_dst += 1
        if r.finding.skipped:
            self.n_no_origin += 1
        if r.dropped_unknown:
            self.n_dropped_unknown += 1
        if r.bogon_labels:
            self.vps_any_bogon.add(r.vp_id)
            self.traces_any.update(r.bogon_labels)
        if r.finding.classes:
            self.vps_qualifying.add(r.vp_id)
            self.traces_qualifying.update(r.finding.classes.keys())
            for key, asns in r.finding.sets().items():
                self.asn_sets.setdefault(key, set()).update(asns)

    def merge(self, other: "StatsAccumulator") -> "StatsAccumulator":
        self.vps |= other.vps
        self.vps_any_bogon |= other.vps_any_bogon
        self.vps_qualifying |= other.vps_qualifying
        self.n_traces += other.n_traces
        self.n_unrouted_dst += other.n_unrouted_dst
        self.n_no_origin += other.n_no_origin
        self.n_dropped_unknown += other.n_dropped_unknown
        self.traces_any.update(other.traces_any)
        self.traces_qualifying.update(other.traces_qualifying)
        for key, asns in other.asn_sets.items():
            self.asn_sets.setdefault(key, set()).update(asns)
        return self

    def finalize(self, label: str, cases: Iterable[str] = CASES) -> "MeasurementStats":
        cases = tuple(cases)
        return MeasurementStats(
            label=label,
            n_vps=len(self.vps),
            n_vps_observing_bogons=len(self.vps_qualifying),
            n_vps_observing_any_bogon=len(self.vps_any_bogon),
            n_traces=self.n_traces,
            n_traces_per_class=dict(self.traces_any),
            n_traces_qualifying_per_class=dict(self.traces_qualifying),
            n_unrouted_dst=self.n_unrouted_dst,
            n_no_origin=self.n_no_origin,
            n_dropped_unknown=self.n_dropped_unknown,
            asn_sets={k: frozenset(v) for k, v in self.asn_sets.items() if k[1] in cases},
        )


@dataclass(frozen=True)
class MeasurementStats:
    label: str
    n_vps: int
    n_vps_observing_bogons: int
    n_vps_observing_any_bogon: int
    n_traces: int
    n_traces_per_class: dict[str, int]
    n_traces_qualifying_per_class: dict[str, int]
    n_unrouted_dst: int
    n_no_origin: int
    n_dropped_unknown: int
    asn_sets: dict[tuple[str, str], frozenset[int]]

    def asns(self, label: str, case: str) -> frozenset[int]:
        return self.asn_sets.get((label, case), frozenset())

    def union(self, case: str) -> frozenset[int]:
        out: set[int] = set()
        for (_, c), s in self.asn_sets.items():
            if c == case:
                out |= s
        return frozenset(out)


def aggregate(
    results: Iterable[TraceResult], label: str = "", case: str | Iterable[str] = CASES
) -> MeasurementStats:
    acc = StatsAccumulator()
    for r in results:
        acc.add(r)
    return acc.finalize(label, (case,) if isinstance(case, str) else case)


def stats_row(s: MeasurementStats, labels: Sequence[str], cases: Sequence[str]) -> dict[str, str | int]:
    row: dict[str, str | int] = {
        "label": s.label,
        "vps": s.n_vps,
        "vps_observing_bogons": s.n_vps_observing_bogons,
        "vps_observing_bogons_pct": pct(s.n_vps_observing_bogons, s.n_vps),
        "vps_observing_any_bogon": s.n_vps_observing_any_bogon,
        "traces": s.n_traces,
    }
    for lab in labels:
        n = s.n_traces_per_class.get(lab, 0)
        row[f"traces_{lab}"] = n
        row[f"traces_{lab}_pct"] = pct(n, s.n_traces)
    for lab in labels:
        row[f"traces_qualifying_{lab}"] = s.n_traces_qualifying_per_class.get(lab, 0)
    row["unrouted_dst"] = s.n_unrouted_dst
    row["unrouted_dst_pct"] = pct(s.n_unrouted_dst, s.n_traces)
    row["no_origin"] = s.n_no_origin
    row["dropped_unknown"] = s.n_dropped_unknown
    for case in cases:
        for lab in labels:
            row[f"{case}_asns_{lab}"] = len(s.asns(lab, case))
        row[f"{case}_asns_all"] = len(s.union(case))
    return row


def write_stats_csv(
    stats: Sequence[MeasurementStats], out: IO[str], labels: Sequence[str], cases: Sequence[str] = CASES
) -> None:
    rows = [stats_row(s, labels, cases) for s in stats]
    if not rows:
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def stats_to_json(s: MeasurementStats, labels: Sequence[str], cases: Sequence[str] = CASES) -> dict:
    return {
        "label": s.label,
        "vps": s.n_vps,
        "vps_observing_bogons": ratio_obj(s.n_vps_observing_bogons, s.n_vps),
        "vps_observing_any_bogon": ratio_obj(s.n_vps_observing_any_bogon, s.n_vps),
        "traces": s.n_traces,
        "traces_per_class": {
            lab: ratio_obj(s.n_traces_per_class.get(lab, 0), s.n_traces) for lab in labels
        },
        "traces_qualifying_per_class": {
            lab: ratio_obj(s.n_traces_qualifying_per_class.get(lab, 0), s.n_traces) for lab in labels
        },
        "unrouted_dst": ratio_obj(s.n_unrouted_dst, s.n_traces),
        "no_origin": s.n_no_origin,
        "dropped_unknown": s.n_dropped_unknown,
        "asn_counts": {
            case: {lab: len(s.asns(lab, case)) for lab in labels} | {"all": len(s.union(case))}
            for case in cases
        },
    }


def jaccard(a: Iterable[int], b: Iterable[int]) -> Fraction:
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return Fraction(1)
    return Fraction(len(a & b), union)


def containment(a: Iterable[int], b: Iterable[int]) -> Fraction:
    """Share of ``a`` found in ``b``; 1 when ``a`` is empty."""
    a, b = set(a), set(b)
    if not a:
        return Fraction(1)
    return Fraction(len(a & b), len(a))


METRICS = {"jaccard": jaccard, "containment": containment}


class MatrixError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityMatrix:
    labels: tuple[str, ...]
    values: tuple[tuple[Fraction, ...], ...]
    metric: str

    def check(self) -> None:
        n = len(self.labels)
        for i in range(n):
            if self.values[i][i] != 1:
                raise MatrixError(f"diagonal entry {self.labels[i]} is {self.values[i][i]}")
            for j in range(n):
                v = self.values[i][j]
                if not 0 <= v <= 1:
                    raise MatrixError(f"entry ({i},{j}) out of range: {v}")
                if self.metric == "jaccard" and v != self.values[j][i]:
                    raise MatrixError(f"jaccard matrix not symmetric at ({i},{j})")

    def to_csv(self, out: IO[str], digits: int = 6) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([self.metric, *self.labels])
        for lab, row in zip(self.labels, self.values):
            w.writerow([lab, *(f"{float(v):.{digits}f}" for v in row)])

    def to_json(self) -> dict:
        return {
            "metric": self.metric,
            "labels": list(self.labels),
            "values": [[f"{v.numerator}/{v.denominator}" for v in row] for row in self.values],
            "decimal": [[float(v) for v in row] for row in self.values],
        }


def similarity_matrix(
    sets: Mapping[str, Iterable[int]] | Sequence[tuple[str, Iterable[int]]], metric: str = "jaccard"
) -> SimilarityMatrix:
    """Pairwise metric over labelled sets; entry (i, j) is ``metric(set_i, set_j)``."""
    items = list(sets.items()) if isinstance(sets, Mapping) else list(sets)
    if not items:
        raise MatrixError("need at least one labelled set")
    labels = [lab for lab, _ in items]
    if len(set(labels)) != len(labels):
        raise MatrixError("duplicate labels")
    fn = METRICS[metric]
    frozen = [frozenset(s) for _, s in items]
    values = tuple(tuple(fn(a, b) for b in frozen) for a in frozen)
    m = SimilarityMatrix(tuple(labels), values, metric)
    m.check()
    return m


def occurrence_counts(per_measurement: Mapping[str, Iterable[int]]) -> Counter:
    """ASN -> number of measurements whose set contains it."""
    counts: Counter = Counter()
    for asns in per_measurement.values():
        counts.update(set(asns))
    return counts


@dataclass(frozen=True)
class OccurrenceSummary:
    n_measurements: int
    n_asns: int
    present_once: int
    present_in_all: int
    present_more_than: dict[int, int]
    present_at_least_half: int

    def rows(self) -> list[tuple[str, int, str]]:
        out = [
            ("total", self.n_asns, pct(self.n_asns, self.n_asns)),
            ("present_once", self.present_once, pct(self.present_once, self.n_asns)),
            ("present_at_least_half", self.present_at_least_half, pct(self.present_at_least_half, self.n_asns)),
        ]
        for k, n in sorted(self.present_more_than.items()):
            out.append((f"present_more_than_{k}", n, pct(n, self.n_asns)))
        out.append(("present_in_all", self.present_in_all, pct(self.present_in_all, self.n_asns)))
        return out


def summarize_occurrences(
    counts: Mapping[int, int], n_measurements: int, more_than: Iterable[int] = (2,)
) -> OccurrenceSummary:
    values = list(counts.values())
    half = Fraction(n_measurements, 2)
    return OccurrenceSummary(
        n_measurements=n_measurements,
        n_asns=len(values),
        present_once=sum(1 for v in values if v == 1),
        present_in_all=sum(1 for v in values if v == n_measurements),
        present_more_than={k: sum(1 for v in values if v > k) for k in more_than},
        present_at_least_half=sum(1 for v in values if v >= half),
    )


def unique_per_year(
    measurements: Iterable[tuple[str, Mapping[str, Iterable[int]]]], labels: Sequence[str]
) -> list[dict[str, str | int]]:
    """Year x class pivot of unique ASNs.

    ``measurements`` yields ``(label, {class: asns})`` with labels starting with
    ``YYYY``. Each year row counts the union over that year's measurements;
    the last row (``Unique per RFC``) is the union over all years.
    """
    by_year: dict[str, dict[str, set[int]]] = {}
    for label, sets in measurements:
        year = label[:4]
        slot = by_year.setdefault(year, {})
        for lab, asns in sets.items():
            slot.setdefault(lab, set()).update(asns)

    def row(name: str, sets: Mapping[str, set[int]]) -> dict[str, str | int]:
        r: dict[str, str | int] = {"year": name}
        everything: set[int] = set()
        for lab in labels:
            s = sets.get(lab, set())
            r[lab] = len(s)
            everything |= s
        r["unique_per_year"] = len(everything)
        return r

    rows = [row(y, by_year[y]) for y in sorted(by_year)]
    total: dict[str, set[int]] = {}
    for sets in by_year.values():
        for lab, s in sets.items():
            total.setdefault(lab, set()).update(s)
    rows.append(row("Unique per RFC", total))
    return rows


def write_rows_csv(rows: Sequence[Mapping], out: IO[str]) -> None:
    if not rows:
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def dump_json(obj, out: IO[str]) -> None:
    json.dump(obj, out, indent=2, sort_keys=True)
    out.write("\n")
