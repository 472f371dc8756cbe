"""Per-hop origin resolution and AS-path cleaning.

``annotate`` maps every hop (and the destination) through the prefix table.
``clean`` turns the annotated hops into a sequence of AS hops and bogon hops:
no-reply and unknown-origin hops are dropped, and consecutive AS hops that
share an origin are collapsed into one.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .addr import format_ip
from .bogons import BogonRegistry
from .table import Bogon, Known, MultiOrigin, OriginResolution, PrefixTable, Unknown, lookup
from .traces import TraceRecord


@dataclass(frozen=True, slots=True)
class NoReply:
    pass


NO_REPLY = NoReply()


@dataclass(frozen=True, slots=True)
class AnnotatedHop:
    ttl: int
    addr: int | None
    resolution: OriginResolution | NoReply


class Annotation(NamedTuple):
    hops: list[AnnotatedHop]
    dst_resolution: OriginResolution


@dataclass(frozen=True, slots=True)
class AsHop:
    asns: frozenset[int]


@dataclass(frozen=True, slots=True)
class BogonHop:
    label: str
    ttl: int = field(default=0, compare=False)
    addr: int | None = field(default=None, compare=False)


PathElement = Union[AsHop, BogonHop]


@dataclass(frozen=True)
class CleanPath:
    elements: tuple[PathElement, ...]
    origin_asn: frozenset[int] | None
    dst_resolution: OriginResolution
    dropped_unknown: bool = False

    def bogon_labels(self) -> set[str]:
        return {e.label for e in self.elements if isinstance(e, BogonHop)}


def annotate(
    trace: TraceRecord, table: PrefixTable, registry: BogonRegistry | None = None
) -> Annotation:
    if registry is None or registry is table.registry:
        look = table.lookup
    else:
        look = lambda a: lookup(table, a, registry)  # noqa: E731
    hops = [
        AnnotatedHop(h.ttl, h.addr, NO_REPLY if h.addr is None else look(h.addr))
        for h in trace.hops
    ]
    return Annotation(hops, look(trace.dst_addr))


def clean(annotated: Annotation | list[AnnotatedHop], dst_resolution: OriginResolution | None = None) -> CleanPath:
    """Build the cleaned path.

    Runs of AS hops are merged greedily left to right: a hop joins the current
    element when its origin set intersects the element's set, and the element
    keeps the intersection. Adjacent AS elements in the output therefore never
    share an ASN. Bogon hops are never dropped and interrupt runs.
    """
    if isinstance(annotated, Annotation):
        hops, dst_resolution = annotated
    else:
        hops = annotated
    if dst_resolution is None:
        dst_resolution = Unknown()

    out: list[PathElement] = []
    origin: frozenset[int] | None = None
    dropped_unknown = False
    for hop in hops:
        res = hop.resolution
        if isinstance(res, Known):
            asns = frozenset((res.asn,))
        elif isinstance(res, MultiOrigin):
            asns = res.asns
        elif isinstance(res, Bogon):
            out.append(BogonHop(res.label, hop.ttl, hop.addr))
            continue
        else:
            if isinstance(res, Unknown):
                dropped_unknown = True
            continue
        if origin is None:
            origin = asns
        prev = out[-1] if out else None
        if isinstance(prev, AsHop):
            common = prev.asns & asns
            if common:
                out[-1] = AsHop(common)
                continue
        out.append(AsHop(asns))
    return CleanPath(tuple(out), origin, dst_resolution, dropped_unknown)


def annotate_clean(trace: TraceRecord, table: PrefixTable) -> CleanPath:
    """``clean(annotate(trace, table))`` without the intermediate hop objects."""
    starts, kinds = table._starts, table._kinds
    out: list[PathElement] = []
    origin: frozenset[int] | None = None
    dropped_unknown = False
    for hop in trace.hops:
        addr = hop.addr
        if addr is None:
            continue
        k = kinds[bisect_right(starts, addr) - 1]
        if k is None:
            dropped_unknown = True
            continue
        if k.__class__ is str:
            out.append(BogonHop(k, hop.ttl, addr))
            continue
        if origin is None:
            origin = k
        if out:
            prev = out[-1]
            if prev.__class__ is AsHop:
                common = prev.asns & k
                if common:
                    if len(common) != len(prev.asns):
                        out[-1] = AsHop(common)
                    continue
        out.append(AsHop(k))
    return CleanPath(tuple(out), origin, table.lookup(trace.dst_addr), dropped_unknown)


def clean_path(path: CleanPath) -> CleanPath:
    """Re-clean an already cleaned path (used to check idempotence)."""
    hops = [
        AnnotatedHop(
            getattr(e, "ttl", 0),
            getattr(e, "addr", None),
            Bogon(e.label) if isinstance(e, BogonHop) else _as_resolution(e.asns),
        )
        for e in path.elements
    ]
    out = clean(hops, path.dst_resolution)
    return CleanPath(out.elements, path.origin_asn, path.dst_resolution, path.dropped_unknown)


def _as_resolution(asns: frozenset[int]) -> Known | MultiOrigin:
    return Known(next(iter(asns))) if len(asns) == 1 else MultiOrigin(asns)


def format_resolution(res: OriginResolution | NoReply) -> str:
    if isinstance(res, Known):
        return f"AS{res.asn}"
    if isinstance(res, MultiOrigin):
        return "MOAS{" + ",".join(f"AS{a}" for a in sorted(res.asns)) + "}"
    if isinstance(res, Bogon):
        return f"BOGON {res.label}"
    if isinstance(res, NoReply):
        return "*"
    return "UNKNOWN"


def dump_annotated(trace: TraceRecord, annotated: Annotation, path: CleanPath) -> str:
    """Human-readable dump, one element per line, for fixtures and debugging."""
    lines = [f"# {trace.trace_id}"]
    for hop in annotated.hops:
        addr = "*" if hop.addr is None else format_ip(hop.addr)
        lines.append(f"hop {hop.ttl:>3} {addr:<15} {format_resolution(hop.resolution)}")
    lines.append(f"dst     {format_ip(trace.dst_addr):<15} {format_resolution(annotated.dst_resolution)}")
    origin = "-" if path.origin_asn is None else ",".join(f"AS{a}" for a in sorted(path.origin_asn))
    lines.append(f"origin  {origin}")
    for e in path.elements:
        if isinstance(e, BogonHop):
            lines.append(f"path    BOGON {e.label}")
        else:
            lines.append("path    " + ",".join(f"AS{a}" for a in sorted(e.asns)))
    return "\n".join(lines) + "\n"
