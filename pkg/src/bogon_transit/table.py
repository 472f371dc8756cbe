"""Merged IPv4 prefix -> origin AS table with longest-prefix-match lookup.

Prefixes from one or more RIB dumps are merged (origin sets unioned per
prefix), prefixes overlapping a bogon block and the default route are
dropped, and the remaining nested prefixes are flattened into a sorted list
of disjoint address intervals. Bogon blocks are laid into the same interval
list, so one ``bisect`` answers both "is this a bogon" and "which prefix is
most specific".
"""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, Union

from .addr import MAX_ADDR, Prefix
from .bogons import DEFAULT_REGISTRY, BogonRegistry
from .mrt import MrtReader


@dataclass(frozen=True, slots=True)
class Known:
    asn: int

    @property
    def asns(self) -> frozenset[int]:
        return frozenset((self.asn,))


@dataclass(frozen=True, slots=True)
class MultiOrigin:
    asns: frozenset[int]

    def __post_init__(self):
        if len(self.asns) < 2:
            raise ValueError("MultiOrigin needs at least two ASNs")


@dataclass(frozen=True, slots=True)
class Unknown:
    pass


@dataclass(frozen=True, slots=True)
class Bogon:
    label: str


UNKNOWN = Unknown()
OriginResolution = Union[Known, MultiOrigin, Unknown, Bogon]


def resolution_for(asns: Iterable[int]) -> Known | MultiOrigin:
    s = frozenset(asns)
    if not s or min(s) < 1:
        raise ValueError(f"invalid origin set {sorted(s)}")
    if len(s) == 1:
        return Known(next(iter(s)))
    return MultiOrigin(s)


def origin_asns(res: OriginResolution) -> frozenset[int]:
    if isinstance(res, Known):
        return frozenset((res.asn,))
    if isinstance(res, MultiOrigin):
        return res.asns
    return frozenset()


@dataclass(frozen=True)
class RibEntry:
    prefix: Prefix
    origin: Known | MultiOrigin
    source: str
    snapshot_time: datetime | None = None


@dataclass
class SourceInfo:
    name: str
    snapshot_time: datetime | None
    prefixes: int
    skipped_subtypes: dict[int, int] = field(default_factory=dict)
    no_origin: int = 0


class TableError(ValueError):
    pass


class PrefixTable:
    """Immutable LPM table. Build with :func:`build_table` or :meth:`from_mrt`."""

    def __init__(
        self,
        routes: dict[Prefix, tuple[Known | MultiOrigin, tuple[str, ...]]],
        registry: BogonRegistry,
        sources: list[SourceInfo],
        dropped_bogon: int = 0,
        dropped_default: int = 0,
    ):
        self.routes = routes
        self.registry = registry
        self.sources = sources
        self.dropped_bogon = dropped_bogon
        self.dropped_default = dropped_default
        self._starts, self._values = _flatten(routes, registry)
        # per-interval shortcut for the hot path: origin set, bogon label, or None
        self._kinds = [
            origin_asns(v) if isinstance(v, (Known, MultiOrigin)) else v.label if isinstance(v, Bogon) else None
            for v in self._values
        ]

    @property
    def entry_count(self) -> int:
        return len(self.routes)

    @classmethod
    def from_mrt(
        cls,
        paths: Iterable[str | Path | tuple[str, str | Path]],
        registry: BogonRegistry = DEFAULT_REGISTRY,
    ) -> "PrefixTable":
        """Parse and merge MRT dumps. Items may be paths or ``(source_name, path)``."""
        entries: list[RibEntry] = []
        infos = []
        for item in paths:
            name, path = item if isinstance(item, tuple) else (source_name(item), item)
            reader = MrtReader(path, name=name)
            before = len(entries)
            for prefix, origins in reader:
                entries.append(RibEntry(prefix, resolution_for(origins), name, reader.snapshot_time))
            infos.append(
                SourceInfo(
                    name,
                    reader.snapshot_time,
                    len(entries) - before,
                    dict(sorted(reader.stats.skipped_subtypes.items())),
                    reader.stats.no_origin,
                )
            )
        table = build_table(entries, registry)
        table.sources = infos
        return table

    def lookup(self, addr: int) -> OriginResolution:
        return self._values[bisect.bisect_right(self._starts, addr) - 1]

    def route_for(self, addr: int) -> Prefix | None:
        """Most specific routed prefix containing ``addr`` (slow; for reports)."""
        for length in range(32, 0, -1):
            p = Prefix(addr & ((MAX_ADDR << (32 - length)) & MAX_ADDR), length)
            if p in self.routes:
                return p
        return None

    def dump_csv(self, out: IO[str]) -> None:
        """Write ``prefix,origins,source`` rows in address order."""
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["prefix", "origins", "source"])
        for prefix in sorted(self.routes):
            origin, srcs = self.routes[prefix]
            w.writerow([str(prefix), " ".join(map(str, sorted(origin_asns(origin)))), "|".join(srcs)])

    def interval_count(self) -> int:
        return len(self._starts)


def source_name(path: str | Path) -> str:
    name = Path(path).name.lower()
    for known in ("route-views2", "rrc00"):
        if known in name:
            return known
    return Path(path).name


def build_table(
    entries: Iterable[RibEntry | tuple[Prefix, Iterable[int]]],
    registry: BogonRegistry = DEFAULT_REGISTRY,
) -> PrefixTable:
    """Merge entries into a :class:`PrefixTable`.

    Plain ``(prefix, origins)`` tuples are accepted and tagged with an empty
    source name.
    """
    origins: dict[Prefix, set[int]] = {}
    sources: dict[Prefix, set[str]] = {}
    dropped_bogon = dropped_default = 0
    for entry in entries:
        if isinstance(entry, RibEntry):
            prefix, asns, src = entry.prefix, origin_asns(entry.origin), entry.source
        else:
            prefix, asns, src = entry[0], frozenset(entry[1]), ""
        if prefix.length == 0:
            dropped_default += 1
            continue
        if registry.overlaps_any(prefix):
            dropped_bogon += 1
            continue
        origins.setdefault(prefix, set()).update(asns)
        sources.setdefault(prefix, set()).add(src)
    if not origins:
        raise TableError("no routable prefixes")

    interned: dict[frozenset[int], Known | MultiOrigin] = {}
    routes = {}
    for prefix, asns in origins.items():
        key = frozenset(asns)
        res = interned.get(key)
        if res is None:
            res = interned[key] = resolution_for(key)
        routes[prefix] = (res, tuple(sorted(s for s in sources[prefix] if s)))
    return PrefixTable(routes, registry, [], dropped_bogon, dropped_default)


def _flatten(routes, registry: BogonRegistry) -> tuple[list[int], list[OriginResolution]]:
    # Bogon blocks never overlap a kept prefix, so they slot in as top-level spans.
    items: list[tuple[int, int, int, OriginResolution]] = [
        (p.first, p.length, p.last, res) for p, (res, _) in routes.items()
    ]
    bogon_values = {label: Bogon(label) for label in registry.labels()}
    for block, label in registry.blocks():
        items.append((block.first, block.length, block.last, bogon_values[label]))
    items.sort(key=lambda t: (t[0], t[1]))

    starts: list[int] = [0]
    values: list[OriginResolution] = [UNKNOWN]

    def emit(start: int, value: OriginResolution) -> None:
        if start > MAX_ADDR:
            return
        if starts[-1] == start:
            values[-1] = value
            if len(values) > 1 and values[-2] == value:
                starts.pop()
                values.pop()
        elif values[-1] != value:
            starts.append(start)
            values.append(value)

    stack: list[tuple[int, OriginResolution]] = []
    for first, _, last, value in items:
        while stack and stack[-1][0] < first:
            end, _ = stack.pop()
            emit(end + 1, stack[-1][1] if stack else UNKNOWN)
        emit(first, value)
        stack.append((last, value))
    while stack:
        end, _ = stack.pop()
        emit(end + 1, stack[-1][1] if stack else UNKNOWN)
    return starts, values


def lookup(table: PrefixTable, addr: int, registry: BogonRegistry | None = None) -> OriginResolution:
    """Bogon class if ``addr`` is a bogon, else the most specific route's origin, else Unknown."""
    if registry is None or registry is table.registry or registry == table.registry:
        return table.lookup(addr)
    label = registry.classify(addr)
    if label is not None:
        return Bogon(label)
    res = table.lookup(addr)
    return UNKNOWN if isinstance(res, Bogon) else res
