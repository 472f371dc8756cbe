"""Canonical line-delimited JSON traceroute format.

One object per line::

    {"vp": "nyc1", "vp_addr": "198.51.100.9", "dst": "203.0.113.7",
     "cycle": 4211, "ts": "2023-07-18T00:00:03Z",
     "hops": [{"ttl": 1, "addr": "192.168.0.1"}, {"ttl": 2, "addr": null}]}

Unknown keys (top level and per hop) survive a read/write round trip and are
ignored by the analysis. Canonical output sorts keys and uses compact
separators.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Any, Iterable, Iterator, NamedTuple

from .addr import format_ip, parse_ip

log = logging.getLogger(__name__)

TOP_KEYS = ("vp", "vp_addr", "dst", "cycle", "ts", "hops")


class Hop(NamedTuple):
    ttl: int
    addr: int | None
    extra: tuple[tuple[str, Any], ...] = ()


@dataclass(frozen=True)
class TraceRecord:
    vp_id: str
    vp_addr: int
    dst_addr: int
    cycle_id: int
    ts: str
    hops: tuple[Hop, ...]
    extra: tuple[tuple[str, Any], ...] = ()

    @property
    def timestamp(self) -> datetime:
        return parse_ts(self.ts)

    @property
    def trace_id(self) -> str:
        return f"{self.vp_id}:{self.cycle_id}:{format_ip(self.dst_addr)}"


@dataclass
class Measurement:
    label: str
    traces: list[TraceRecord]
    vp_roster: set[str] = field(default_factory=set)

    def __post_init__(self):
        if not self.vp_roster:
            self.vp_roster = {t.vp_id for t in self.traces}


class TraceFormatError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message

    def __reduce__(self):  # keep it picklable across worker processes
        return type(self), (self.line_no, self.message)


@dataclass
class ReadStats:
    lines: int = 0
    records: int = 0
    errors: int = 0
    duplicate_ttl: int = 0
    resorted: int = 0
    first_error: str = ""

    @property
    def anomalies(self) -> int:
        return self.resorted + self.duplicate_ttl


def parse_ts(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp without timezone: {text!r}")
    return dt.astimezone(timezone.utc)


def _uint(value: Any, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValueError(f"{name} must be a non-negative integer")
    return value


def record_from_obj(obj: dict, stats: ReadStats | None = None) -> TraceRecord:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    missing = [k for k in TOP_KEYS if k not in obj]
    if missing:
        raise ValueError(f"missing keys: {', '.join(missing)}")
    vp = obj["vp"]
    if not isinstance(vp, str):
        raise ValueError("vp must be a string")
    ts = obj["ts"]
    if not isinstance(ts, str):
        raise ValueError("ts must be a string")
    parse_ts(ts)
    raw_hops = obj["hops"]
    if not isinstance(raw_hops, list):
        raise ValueError("hops must be an array")

    hops = []
    ordered = strictly = True
    prev_ttl = 0
    for h in raw_hops:
        if type(h) is not dict or "ttl" not in h:
            raise ValueError("hop must be an object with a ttl")
        ttl = h["ttl"]
        if type(ttl) is not int or ttl < 1:
            raise ValueError("ttl must be an integer >= 1")
        a = h.get("addr")
        if len(h) > 2 or (len(h) == 2 and "addr" not in h):
            extra = tuple(sorted((k, v) for k, v in h.items() if k not in ("ttl", "addr")))
        else:
            extra = ()
        hops.append(Hop(ttl, None if a is None else parse_ip(a), extra))
        if ttl <= prev_ttl:
            strictly = False
            ordered = ordered and ttl == prev_ttl
        prev_ttl = ttl

    if strictly:
        pass
    elif not ordered:
        if stats is not None:
            stats.resorted += 1
        hops.sort(key=lambda h: h.ttl)  # stable: first occurrence of a ttl wins
    if not strictly and any(a.ttl == b.ttl for a, b in zip(hops, hops[1:])):
        deduped = []
        for h in hops:
            if deduped and deduped[-1].ttl == h.ttl:
                if stats is not None:
                    stats.duplicate_ttl += 1
                continue
            deduped.append(h)
        hops = deduped

    return TraceRecord(
        vp_id=vp,
        vp_addr=parse_ip(obj["vp_addr"]),
        dst_addr=parse_ip(obj["dst"]),
        cycle_id=_uint(obj["cycle"], "cycle"),
        ts=ts,
        hops=tuple(hops),
        extra=tuple(sorted((k, v) for k, v in obj.items() if k not in TOP_KEYS)),
    )


def read_traces(
    stream: IO[str] | Iterable[str], strict: bool = False, stats: ReadStats | None = None, first_line: int = 1
) -> Iterator[TraceRecord]:
    """Yield validated records from JSONL lines.

    In lenient mode (default) a bad line is logged, counted in ``stats`` and
    skipped. In strict mode it raises :class:`TraceFormatError`.
    """
    if stats is None:
        stats = ReadStats()
    for line_no, line in enumerate(stream, first_line):
        if not line.strip():
            continue
        stats.lines += 1
        try:
            rec = record_from_obj(json.loads(line), stats)
        except (ValueError, TypeError, AttributeError) as exc:
            if strict:
                raise TraceFormatError(line_no, str(exc)) from None
            stats.errors += 1
            if not stats.first_error:
                stats.first_error = f"line {line_no}: {exc}"
            log.debug("skipping line %d: %s", line_no, exc)
            continue
        stats.records += 1
        yield rec


def record_to_obj(rec: TraceRecord) -> dict:
    obj: dict[str, Any] = dict(rec.extra)
    obj.update(
        vp=rec.vp_id,
        vp_addr=format_ip(rec.vp_addr),
        dst=format_ip(rec.dst_addr),
        cycle=rec.cycle_id,
        ts=rec.ts,
        hops=[
            {**dict(h.extra), "ttl": h.ttl, "addr": None if h.addr is None else format_ip(h.addr)}
            for h in rec.hops
        ],
    )
    return obj


def dumps(rec: TraceRecord) -> str:
    return json.dumps(record_to_obj(rec), sort_keys=True, separators=(",", ":"))


def write_traces(records: Iterable[TraceRecord], out: IO[str]) -> int:
    n = 0
    for rec in records:
        out.write(dumps(rec))
        out.write("\n")
        n += 1
    return n


def select_cycle(traces: Iterable[TraceRecord]) -> list[TraceRecord]:
    """Keep, per vantage point, only the traces of its lowest-numbered cycle."""
    traces = list(traces)
    lowest: dict[str, int] = {}
    for t in traces:
        if t.cycle_id < lowest.get(t.vp_id, t.cycle_id + 1):
            lowest[t.vp_id] = t.cycle_id
    return [t for t in traces if t.cycle_id == lowest[t.vp_id]]
