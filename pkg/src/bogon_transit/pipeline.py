"""Run one measurement through annotate -> clean -> classify -> aggregate.

Corpora are read once. Results are kept per (vantage point, cycle) and a
vantage point's higher cycles are discarded as soon as a lower one shows up,
so cycle selection needs no separate pass. Input can be sharded over worker
processes; shards are merged in input order with the commutative folds from
:mod:`metrics`, so the result does not depend on the worker count.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .metrics import MeasurementStats, StatsAccumulator, TraceResult
from .paths import annotate_clean
from .table import PrefixTable, Unknown
from .traces import ReadStats, TraceRecord, parse_ts, read_traces
from .transit import CASES, TransitFinding, classify_path

log = logging.getLogger(__name__)

CHUNK_LINES = 20_000


def analyze_trace(rec: TraceRecord, table: PrefixTable) -> TraceResult:
    path = annotate_clean(rec, table)
    finding = classify_path(path, rec.trace_id)
    return TraceResult(
        rec.trace_id,
        rec.vp_id,
        isinstance(path.dst_resolution, Unknown),
        frozenset(path.bogon_labels()),
        finding,
        path.dropped_unknown,
    )


@dataclass
class CyclePartial:
    """Everything seen so far for one vantage point in one cycle."""

    cycle: int
    first_ts: datetime
    acc: StatsAccumulator = field(default_factory=StatsAccumulator)
    findings: list[TransitFinding] = field(default_factory=list)

    def absorb(self, other: "CyclePartial") -> None:
        self.first_ts = min(self.first_ts, other.first_ts)
        self.acc.merge(other.acc)
        self.findings.extend(other.findings)


@dataclass
class ShardResult:
    partials: dict[str, CyclePartial] = field(default_factory=dict)  # vp -> lowest cycle seen
    read_stats: ReadStats = field(default_factory=ReadStats)

    def add(self, rec: TraceRecord, table: PrefixTable) -> None:
        cur = self.partials.get(rec.vp_id)
        if cur is not None and rec.cycle_id > cur.cycle:
            return
        ts = parse_ts(rec.ts)
        if cur is None or rec.cycle_id < cur.cycle:
            cur = self.partials[rec.vp_id] = CyclePartial(rec.cycle_id, ts)
        elif ts < cur.first_ts:
            cur.first_ts = ts
        r = analyze_trace(rec, table)
        cur.acc.add(r)
        if r.finding.classes:
            cur.findings.append(r.finding)

    def merge(self, other: "ShardResult") -> "ShardResult":
        for vp, part in other.partials.items():
            cur = self.partials.get(vp)
            if cur is None or part.cycle < cur.cycle:
                self.partials[vp] = part
            elif part.cycle == cur.cycle:
                cur.absorb(part)
        rs, o = self.read_stats, other.read_stats
        rs.lines += o.lines
        rs.records += o.records
        rs.errors += o.errors
        rs.duplicate_ttl += o.duplicate_ttl
        rs.resorted += o.resorted
        rs.first_error = rs.first_error or o.first_error
        return self

    @property
    def measurement_time(self) -> datetime | None:
        return min((p.first_ts for p in self.partials.values()), default=None)


def analyze_records(records: Iterable[TraceRecord], table: PrefixTable) -> ShardResult:
    shard = ShardResult()
    for rec in records:
        shard.add(rec, table)
    return shard


def analyze_lines(
    lines: Iterable[str], table: PrefixTable, strict: bool = False, first_line: int = 1
) -> ShardResult:
    shard = ShardResult()
    for rec in read_traces(lines, strict=strict, stats=shard.read_stats, first_line=first_line):
        shard.add(rec, table)
    return shard


# Worker state, set once per process by the pool initializer.
_W_TABLE: PrefixTable | None = None


def _init_worker(table: PrefixTable) -> None:
    global _W_TABLE
    _W_TABLE = table


def _run_chunk(job: tuple[int, list[str], bool]) -> ShardResult:
    assert _W_TABLE is not None
    first_line, lines, strict = job
    return analyze_lines(lines, _W_TABLE, strict, first_line)


def _lines(paths: Sequence[str | Path]) -> Iterator[str]:
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            yield from fh


def _chunks(lines: Iterator[str], size: int, strict: bool) -> Iterator[tuple[int, list[str], bool]]:
    start = 1
    while True:
        chunk = list(itertools.islice(lines, size))
        if not chunk:
            return
        yield start, chunk, strict
        start += len(chunk)


@dataclass
class Analysis:
    stats: MeasurementStats
    findings: list[TransitFinding]
    read_stats: ReadStats
    measurement_time: datetime | None


def analyze(
    table: PrefixTable,
    trace_paths: Sequence[str | Path],
    label: str,
    cases: Sequence[str] = CASES,
    workers: int = 1,
    strict: bool = False,
    chunk_lines: int = CHUNK_LINES,
) -> Analysis:
    """Analyse the lowest cycle of every vantage point in ``trace_paths``.

    Line numbers in errors count across all files, as if they were concatenated.
    """
    if workers <= 1:
        shard = analyze_lines(_lines(trace_paths), table, strict)
    else:
        shard = ShardResult()
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(table,)) as pool:
            for part in pool.map(_run_chunk, _chunks(_lines(trace_paths), chunk_lines, strict)):
                shard.merge(part)
    rs = shard.read_stats
    if rs.errors:
        log.warning("skipped %d malformed trace lines (first: %s)", rs.errors, rs.first_error)

    total = StatsAccumulator()
    findings: list[TransitFinding] = []
    for vp in sorted(shard.partials):
        total.merge(shard.partials[vp].acc)
        findings.extend(shard.partials[vp].findings)
    findings.sort(key=lambda f: f.trace_id)
    return Analysis(total.finalize(label, cases), findings, rs, shard.measurement_time)
