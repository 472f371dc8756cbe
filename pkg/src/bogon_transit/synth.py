"""Synthetic ground truth and brute-force reference implementations.

The generator builds a small AS graph where every AS owns disjoint prefixes,
some ASes filter bogon-sourced packets and some use a bogon class inside
their network. It writes a TABLE_DUMP_V2 RIB for the graph and a traceroute
corpus with an exact number of planted bogon hops per class, together with
the BA/BB/BC answer for every trace.

The ``naive_*`` functions are deliberately simple re-statements of the
production logic (linear scans, quadratic loops) and share no code with it.
"""

from __future__ import annotations

import io
import json
import random
import struct
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .addr import Prefix, format_ip, parse_ip
from .bogons import DEFAULT_CLASSES, RFC1918
from .paths import AsHop, BogonHop, CleanPath
from .table import UNKNOWN, Known, MultiOrigin
from .traces import Hop, TraceRecord, dumps
from .transit import ClassFinding, TransitFinding

# ---------------------------------------------------------------- oracles

# The bogon table written out longhand, independent of bogons.DEFAULT_CLASSES.
REFERENCE_BOGON_RANGES = [
    ("RFC1112", "240.0.0.0", "255.255.255.255"),
    ("RFC1122", "127.0.0.0", "127.255.255.255"),
    ("RFC1918", "10.0.0.0", "10.255.255.255"),
    ("RFC1918", "172.16.0.0", "172.31.255.255"),
    ("RFC1918", "192.168.0.0", "192.168.255.255"),
    ("RFC3927", "169.254.0.0", "169.254.255.255"),
    ("RFC5737", "192.0.2.0", "192.0.2.255"),
    ("RFC5737", "198.51.100.0", "198.51.100.255"),
    ("RFC5737", "203.0.113.0", "203.0.113.255"),
    ("RFC6598", "100.64.0.0", "100.127.255.255"),
    ("RFC6890", "192.0.0.0", "192.0.0.255"),
    ("RFC7526", "192.88.99.0", "192.88.99.255"),
]
_REF_RANGES = [(lab, parse_ip(a), parse_ip(b)) for lab, a, b in REFERENCE_BOGON_RANGES]


def naive_bogon_class(addr: int) -> str | None:
    """Linear scan over the reference ranges."""
    hits = [lab for lab, lo, hi in _REF_RANGES if lo <= addr <= hi]
    assert len(hits) <= 1
    return hits[0] if hits else None


def naive_lpm(prefixes: Iterable[tuple[Prefix, object]], addr: int):
    """Origin of the most specific prefix containing ``addr``, by linear scan."""
    best_len = -1
    best = UNKNOWN
    for prefix, origin in prefixes:
        net, length = prefix
        if length > best_len and (addr >> (32 - length) if length else 0) == (net >> (32 - length) if length else 0):
            best_len, best = length, origin
    return best


def naive_lpm_many(prefixes: Iterable[tuple[Prefix, object]], addrs: Iterable[int]) -> list:
    """:func:`naive_lpm` for many addresses; still a full linear scan per address."""
    # shortest first, so the last hit is the longest match
    rows = [(p.first, p.last, origin) for p, origin in sorted(prefixes, key=lambda t: t[0].length)]
    out = []
    for addr in addrs:
        hits = [origin for first, last, origin in rows if first <= addr <= last]
        out.append(hits[-1] if hits else UNKNOWN)
    return out


def naive_classify(path: CleanPath, trace_id: str = "") -> TransitFinding:
    """Quadratic transliteration of the BA/BB/BC case definitions."""
    origin = path.origin_asn
    if origin is None:
        return TransitFinding(trace_id, skipped=True)
    els = list(path.elements)
    found: dict[str, ClassFinding] = {}
    for i, e in enumerate(els):
        if not isinstance(e, BogonHop):
            continue
        # first bogon of its class since the previous AS hop?
        j = i - 1
        repeat = False
        while j >= 0 and isinstance(els[j], BogonHop):
            if els[j].label == e.label:
                repeat = True
            j -= 1
        if repeat:
            continue
        earlier_as = [x for x in els[:i] if isinstance(x, AsHop)]
        if not any(len(x.asns & origin) == 0 for x in earlier_as):
            continue
        nearest = None
        for x in reversed(els[:i]):
            if isinstance(x, AsHop):
                nearest = x
                break
        ba = set()
        for x in earlier_as:
            for a in x.asns:
                if a not in origin:
                    ba.add(a)
        bb = {a for a in nearest.asns if a not in origin}
        sandwich = False
        for x in els[i + 1 :]:
            if isinstance(x, AsHop) and len(x.asns & nearest.asns) > 0:
                sandwich = True
        cf = found.get(e.label)
        if cf is None:
            cf = found[e.label] = ClassFinding()
        cf.ba.update(ba)
        cf.bb.update(bb)
        if sandwich:
            cf.bc.update(bb)
        cf.positions.append(i)
        if len(nearest.asns) > 1:
            cf.multi_origin_bb = True
    return TransitFinding(trace_id, found)


# ------------------------------------------------------------ MRT writer

AsPath = Sequence[tuple[int, Sequence[int]]]  # [(segment type, asns), ...]


def seq(*asns: int) -> AsPath:
    return [(2, list(asns))]


@dataclass(frozen=True)
class MrtPeer:
    bgp_id: int
    address: int
    asn: int


def _attr(atype: int, value: bytes) -> bytes:
    if len(value) > 255:
        return struct.pack("!BBH", 0x50, atype, len(value)) + value
    return struct.pack("!BBB", 0x40, atype, len(value)) + value


def _as_path_attr(path: AsPath) -> bytes:
    body = b"".join(
        struct.pack("!BB", stype, len(asns)) + struct.pack(f"!{len(asns)}I", *asns) for stype, asns in path
    )
    return _attr(2, body)


def _record(ts: int, subtype: int, body: bytes, mtype: int = 13) -> bytes:
    return struct.pack("!IHHI", ts, mtype, subtype, len(body)) + body


def write_mrt(
    routes: Iterable[tuple[Prefix, Sequence[tuple[int, AsPath]]]],
    peers: Sequence[MrtPeer],
    timestamp: int,
    view_name: str = "",
    extra_records: Sequence[bytes] = (),
) -> bytes:
    """Serialize a PEER_INDEX_TABLE and one RIB_IPV4_UNICAST per route.

    ``routes`` yields ``(prefix, [(peer_index, as_path), ...])``. Peers with a
    2-byte ASN are written with the 2-byte AS flag; AS_PATH attributes always
    carry 4-byte ASNs.
    """
    out = io.BytesIO()
    name = view_name.encode()
    body = struct.pack("!IH", 0x0A000001, len(name)) + name + struct.pack("!H", len(peers))
    for p in peers:
        wide = p.asn > 0xFFFF
        body += struct.pack("!BII", 0x02 if wide else 0x00, p.bgp_id, p.address)
        body += struct.pack("!I" if wide else "!H", p.asn)
    out.write(_record(timestamp, 1, body))
    for extra in extra_records:
        out.write(extra)
    for seqno, (prefix, entries) in enumerate(routes):
        nbytes = (prefix.length + 7) // 8
        pbytes = prefix.network.to_bytes(4, "big")[:nbytes]
        body = struct.pack("!IB", seqno, prefix.length) + pbytes + struct.pack("!H", len(entries))
        for peer_index, path in entries:
            attrs = _attr(1, b"\x00") + _as_path_attr(path) + _attr(3, peers[peer_index].address.to_bytes(4, "big"))
            body += struct.pack("!HIH", peer_index, timestamp, len(attrs)) + attrs
        out.write(_record(timestamp, 2, body))
    return out.getvalue()


# -------------------------------------------------------------- topology

UNANNOUNCED = Prefix.parse("5.0.0.0/8")  # IXP hops and unrouted destinations
POOL_START = parse_ip("20.0.0.0")


@dataclass
class SynthAS:
    asn: int
    prefixes: list[Prefix]
    filters_bogons: bool
    uses_internal_class: str | None = None


@dataclass
class SynthTopology:
    ases: list[SynthAS]
    links: dict[int, list[int]]
    seed: int
    vps: list[tuple[str, int]] = field(default_factory=list)  # (vp_id, host asn)
    peers: list[int] = field(default_factory=list)  # collector peer ASNs
    leaks: list[tuple[Prefix, int]] = field(default_factory=list)

    def by_asn(self) -> dict[int, SynthAS]:
        return {a.asn: a for a in self.ases}

    def prefix_origins(self, include_leaks: bool = True) -> dict[Prefix, frozenset[int]]:
        out = {p: frozenset((a.asn,)) for a in self.ases for p in a.prefixes}
        if include_leaks:
            for p, asn in self.leaks:
                out[p] = out.get(p, frozenset()) | {asn}
        return out


def random_topology(
    seed: int,
    n_ases: int = 40,
    n_vps: int = 6,
    extra_links: int = 30,
    filter_fraction: float = 0.3,
    internal_classes: Sequence[str] = (RFC1918, "RFC6598", "RFC3927", "RFC5737", "RFC6890", "RFC1112"),
) -> SynthTopology:
    """Connected random AS graph with disjoint prefix pools.

    Every class in ``internal_classes`` gets at least two non-filtering host
    ASes so planting is feasible from most vantage points.
    """
    rng = random.Random(seed)
    asns = sorted(rng.sample(range(64512, 65534), n_ases // 2))
    asns += sorted(rng.sample(range(4_200_000_000, 4_200_100_000), n_ases - len(asns)))
    rng.shuffle(asns)

    links: dict[int, set[int]] = {a: set() for a in asns}
    for i in range(1, n_ases):
        j = rng.randrange(i)
        links[asns[i]].add(asns[j])
        links[asns[j]].add(asns[i])
    for _ in range(extra_links):
        a, b = rng.sample(asns, 2)
        links[a].add(b)
        links[b].add(a)

    slot = POOL_START
    ases = []
    for a in asns:
        pfx = []
        for _ in range(rng.randint(1, 3)):
            length = rng.randint(16, 24)
            pfx.append(Prefix(slot, length))
            slot += 1 << 16
        ases.append(SynthAS(a, pfx, filters_bogons=rng.random() < filter_fraction))

    vp_hosts = rng.sample(ases, n_vps)
    for a in vp_hosts:
        a.filters_bogons = False
    others = [a for a in ases if a not in vp_hosts]
    rng.shuffle(others)
    k = 0
    for label in internal_classes:
        for _ in range(2):
            host = others[k % len(others)]
            host.filters_bogons = False
            host.uses_internal_class = label
            k += 1
    # neighbours of internal-class hosts mostly forward, so planting stays feasible
    for a in ases:
        if a.uses_internal_class:
            for n in links[a.asn]:
                if rng.random() < 0.7:
                    next(x for x in ases if x.asn == n).filters_bogons = False

    vps = [(f"vp{i + 1:02d}", a.asn) for i, a in enumerate(vp_hosts)]
    peers = rng.sample(asns, 3)
    leak_as = rng.choice(asns)
    leaks = [(Prefix.parse("10.0.0.0/8"), leak_as), (Prefix.parse("0.0.0.0/0"), leak_as)]
    return SynthTopology(
        ases, {a: sorted(v) for a, v in links.items()}, seed, vps, peers, leaks
    )


def _bfs_paths(links: Mapping[int, Sequence[int]], src: int, allowed) -> dict[int, list[int]]:
    paths = {src: [src]}
    q = deque([src])
    while q:
        cur = q.popleft()
        for n in links[cur]:
            if n not in paths and allowed(n):
                paths[n] = paths[cur] + [n]
                q.append(n)
    return paths


def topology_mrt(topo: SynthTopology, timestamp: int, rng: random.Random | None = None) -> bytes:
    """RIB as seen from the topology's collector peers (shortest AS paths)."""
    rng = rng or random.Random(topo.seed)
    peers = [
        MrtPeer(0x0A000100 + i, parse_ip("20.255.0.1") + i, asn) for i, asn in enumerate(topo.peers)
    ]
    tree = {p: _bfs_paths(topo.links, p, lambda _: True) for p in topo.peers}
    routes = []
    for prefix, origins in sorted(topo.prefix_origins().items()):
        entries = []
        for i, p in enumerate(topo.peers):
            for origin in sorted(origins):
                hops = list(tree[p][origin])
                if rng.random() < 0.2:
                    hops += [origin] * rng.randint(1, 3)  # prepending
                entries.append((i, seq(*hops)))
        routes.append((prefix, entries))
    return write_mrt(routes, peers, timestamp, view_name=f"synth-{topo.seed}")


# ------------------------------------------------------------- generation


class InfeasibleRate(ValueError):
    pass


@dataclass
class TraceTruth:
    trace_id: str
    vp_id: str
    dst_unrouted: bool
    any_labels: frozenset[str]
    classes: dict[str, tuple[frozenset[int], frozenset[int], frozenset[int]]]

    def to_obj(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "vp": self.vp_id,
            "dst_unrouted": self.dst_unrouted,
            "any_labels": sorted(self.any_labels),
            "classes": {
                lab: {"BA": sorted(ba), "BB": sorted(bb), "BC": sorted(bc)}
                for lab, (ba, bb, bc) in sorted(self.classes.items())
            },
        }


@dataclass
class GroundTruth:
    traces: list[TraceTruth]
    planted: dict[str, int]
    unrouted: int
    prefix_origins: dict[Prefix, frozenset[int]]

    def expected_sets(self) -> dict[tuple[str, str], frozenset[int]]:
        out: dict[tuple[str, str], set[int]] = {}
        for t in self.traces:
            for lab, (ba, bb, bc) in t.classes.items():
                out.setdefault((lab, "BA"), set()).update(ba)
                out.setdefault((lab, "BB"), set()).update(bb)
                out.setdefault((lab, "BC"), set()).update(bc)
        return {k: frozenset(v) for k, v in out.items()}

    def to_json(self) -> str:
        obj = {
            "planted": dict(sorted(self.planted.items())),
            "unrouted": self.unrouted,
            "traces": [t.to_obj() for t in self.traces],
        }
        return json.dumps(obj, sort_keys=True, indent=1) + "\n"


@dataclass
class SynthOutput:
    mrt: bytes
    corpus: str
    truth: GroundTruth
    records: list[TraceRecord]


def exact_count(rate: float | str | Fraction, n: int) -> int:
    r = Fraction(str(rate)) if not isinstance(rate, Fraction) else rate
    if not 0 <= r <= 1:
        raise ValueError(f"rate {rate} outside [0, 1]")
    return int(r * n)


def _rand_addr(rng: random.Random, prefix: Prefix) -> int:
    return rng.randint(prefix.first, prefix.last)


def generate(
    topo: SynthTopology,
    n_traces: int,
    plant_rates: Mapping[str, float | str],
    unrouted_rate: float | str = 0,
    internal_rate: float | str = 0,
    start: datetime = datetime(2023, 7, 18, tzinfo=timezone.utc),
    cycle: int = 4211,
    noise: bool = True,
) -> SynthOutput:
    """Generate a RIB, a JSONL corpus and the ground truth for ``topo``.

    Exactly ``floor(rate * n_traces)`` traces carry a qualifying bogon of each
    planted class; the planted trace sets are disjoint, so the rates must sum
    to at most 1. ``unrouted_rate`` and ``internal_rate`` (RFC1918 hops inside
    the vantage point's own AS, which never qualify) pick independent trace
    sets.
    """
    rng = random.Random(topo.seed * 1_000_003 + n_traces)
    by_asn = topo.by_asn()
    class_blocks = {c.rfc_label: c.blocks for c in DEFAULT_CLASSES}

    counts = {lab: exact_count(r, n_traces) for lab, r in sorted(plant_rates.items())}
    if sum(counts.values()) > n_traces:
        raise ValueError("plant rates sum to more than 1")

    # feasible bogon hosts per (vp, class): reachable through non-filtering ASes only
    forwarders = lambda a: not by_asn[a].filters_bogons  # noqa: E731
    reach = {}
    for vp_id, host in topo.vps:
        shuffled = {a: rng.sample(ns, len(ns)) for a, ns in topo.links.items()}
        reach[vp_id] = _bfs_paths(shuffled, host, forwarders)
    hosts: dict[tuple[str, str], list[int]] = {}
    for lab in counts:
        for vp_id, _ in topo.vps:
            hosts[(vp_id, lab)] = sorted(
                a for a, p in reach[vp_id].items() if len(p) > 1 and by_asn[a].uses_internal_class == lab
            )
    infeasible = [lab for lab in counts if counts[lab] and not any(hosts[(v, lab)] for v, _ in topo.vps)]
    if infeasible:
        raise InfeasibleRate(f"no non-filtering path to a bogon host for: {', '.join(infeasible)}")

    order = list(range(n_traces))
    rng.shuffle(order)
    plant: dict[int, str] = {}
    pos = 0
    for lab, n in counts.items():
        for idx in order[pos : pos + n]:
            plant[idx] = lab
        pos += n
    unrouted = set(rng.sample(range(n_traces), exact_count(unrouted_rate, n_traces)))
    internal = set(rng.sample(range(n_traces), exact_count(internal_rate, n_traces)))

    records: list[TraceRecord] = []
    truths: list[TraceTruth] = []
    for i in range(n_traces):
        lab = plant.get(i)
        if lab is not None:
            vp_choices = [(v, h) for v, h in topo.vps if hosts[(v, lab)]]
            vp_id, vp_as = vp_choices[i % len(vp_choices)]
            target = rng.choice(hosts[(vp_id, lab)])
            as_path = list(reach[vp_id][target])
        else:
            vp_id, vp_as = topo.vps[i % len(topo.vps)]
            as_path = [vp_as]
            target = None
        # extend past the bogon host (or from the vp) with a simple random walk
        for _ in range(rng.randint(0 if target else 1, 3)):
            nxt = [n for n in topo.links[as_path[-1]] if n not in as_path]
            if not nxt:
                break
            as_path.append(rng.choice(nxt))
        sandwich = target is not None and rng.random() < 0.5

        hops: list[int | None] = []
        labels_here: set[str] = set()
        for k, asn in enumerate(as_path):
            pool = by_asn[asn].prefixes
            n_hops = rng.randint(1, 3)
            addrs = [_rand_addr(rng, rng.choice(pool)) for _ in range(n_hops)]
            if asn == target:
                bogon = _rand_addr(rng, rng.choice(class_blocks[lab]))
                if sandwich:
                    addrs = addrs[:1] + [bogon] + addrs[1:] + [_rand_addr(rng, rng.choice(pool))]
                else:
                    addrs.append(bogon)
                labels_here.add(lab)
            if k == 0 and i in internal:
                addrs.insert(rng.randint(0, len(addrs)), _rand_addr(rng, rng.choice(class_blocks[RFC1918])))
                labels_here.add(RFC1918)
            if noise and k > 0 and rng.random() < 0.15:
                hops.append(_rand_addr(rng, UNANNOUNCED))  # IXP-style unknown hop
            for a in addrs:
                hops.append(a)
                if noise and rng.random() < 0.05:
                    hops.append(None)
        if i in unrouted:
            dst = _rand_addr(rng, UNANNOUNCED)
        else:
            dst = _rand_addr(rng, rng.choice(by_asn[as_path[-1]].prefixes))
        if noise and rng.random() < 0.3:
            hops.append(dst)
            if i not in unrouted and as_path[-1] == target:
                sandwich = True  # the replying destination sits in the bogon host

        vp_addr = _rand_addr(rng, by_asn[vp_as].prefixes[0])
        ts = (start + timedelta(seconds=i)).strftime("%Y-%m-%dT%H:%M:%SZ")
        rec = TraceRecord(
            vp_id=vp_id,
            vp_addr=vp_addr,
            dst_addr=dst,
            cycle_id=cycle,
            ts=ts,
            hops=tuple(Hop(t + 1, a) for t, a in enumerate(hops)),
        )
        records.append(rec)
        classes = {}
        if target is not None:
            blame = frozenset(as_path[1 : as_path.index(target) + 1])
            classes[lab] = (blame, frozenset((target,)), frozenset((target,)) if sandwich else frozenset())
        truths.append(TraceTruth(rec.trace_id, vp_id, i in unrouted, frozenset(labels_here), classes))

    mrt = topology_mrt(topo, int(start.timestamp()), random.Random(topo.seed + 7))
    corpus = "".join(dumps(r) + "\n" for r in records)
    truth = GroundTruth(truths, counts, len(unrouted), topo.prefix_origins())
    return SynthOutput(mrt, corpus, truth, records)


def random_clean_path(
    rng: random.Random, length: int, alphabet: Sequence[int], labels: Sequence[str], bogon_p: float = 0.3
) -> CleanPath:
    """Random cleaned path for property tests; the first element is the origin AS."""
    els: list = [AsHop(frozenset((alphabet[0],)))]
    prev = alphabet[0]
    for _ in range(length - 1):
        if rng.random() < bogon_p:
            els.append(BogonHop(rng.choice(labels)))
        else:
            choices = [a for a in alphabet if a != prev] or list(alphabet)
            prev = rng.choice(choices)
            els.append(AsHop(frozenset((prev,))))
    return CleanPath(tuple(els), frozenset((alphabet[0],)), UNKNOWN)


def known(asns: Iterable[int]) -> Known | MultiOrigin:
    s = frozenset(asns)
    return Known(next(iter(s))) if len(s) == 1 else MultiOrigin(s)


def format_prefix_map(m: Mapping[Prefix, frozenset[int]]) -> list[str]:
    return [f"{p} {' '.join(map(str, sorted(o)))}" for p, o in sorted(m.items())]


__all__ = [
    "GroundTruth",
    "InfeasibleRate",
    "MrtPeer",
    "SynthAS",
    "SynthOutput",
    "SynthTopology",
    "exact_count",
    "format_ip",
    "generate",
    "naive_bogon_class",
    "naive_classify",
    "naive_lpm",
    "naive_lpm_many",
    "random_clean_path",
    "random_topology",
    "seq",
    "topology_mrt",
    "write_mrt",
]
