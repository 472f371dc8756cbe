import io
import random

import pytest

from bogon_transit.addr import Prefix, parse_ip
from bogon_transit.bogons import BogonRegistry
from bogon_transit.table import (
    UNKNOWN,
    Bogon,
    Known,
    MultiOrigin,
    PrefixTable,
    TableError,
    build_table,
    lookup,
)
from bogon_transit.synth import naive_lpm

P = Prefix.parse


def ip(s):
    return parse_ip(s)


def test_leaked_bogon_and_default_dropped():
    t = build_table([(P("10.0.0.0/8"), {64496}), (P("0.0.0.0/0"), {1}), (P("198.18.0.0/15"), {64496})])
    assert t.dropped_bogon == 1 and t.dropped_default == 1
    assert t.lookup(ip("198.18.1.1")) == Known(64496)
    assert t.lookup(ip("10.1.1.1")) == Bogon("RFC1918")
    assert t.lookup(ip("203.0.114.7")) is UNKNOWN


def test_bogon_shadowing_independent_of_table():
    # a covering aggregate overlaps bogon space, so it is dropped as a leak too
    t = build_table([(P("192.168.0.0/16"), {5}), (P("192.0.0.0/8"), {7}), (P("20.0.0.0/8"), {8})])
    assert t.dropped_bogon == 2
    assert t.lookup(ip("192.168.1.1")) == Bogon("RFC1918")
    assert t.lookup(ip("192.0.2.1")) == Bogon("RFC5737")
    assert t.lookup(ip("192.1.0.1")) is UNKNOWN


def test_empty_after_filtering():
    with pytest.raises(TableError, match="no routable prefixes"):
        build_table([(P("10.0.0.0/8"), {1})])


def test_moas_union():
    assert build_table([(P("20.0.0.0/8"), {64500}), (P("20.0.0.0/8"), {64500})]).lookup(ip("20.1.1.1")) == Known(64500)
    assert build_table([(P("20.0.0.0/8"), {64500}), (P("20.0.0.0/8"), {64501})]).lookup(
        ip("20.1.1.1")
    ) == MultiOrigin(frozenset({64500, 64501}))


def test_nested_prefixes():
    t = build_table([(P("20.0.0.0/8"), {1}), (P("20.1.0.0/16"), {2}), (P("20.1.2.0/24"), {3})])
    assert t.lookup(ip("20.1.2.3")) == Known(3)
    assert t.lookup(ip("20.1.3.3")) == Known(2)
    assert t.lookup(ip("20.2.0.0")) == Known(1)
    assert t.lookup(ip("20.255.255.255")) == Known(1)
    assert t.lookup(ip("21.0.0.0")) is UNKNOWN


def test_host_routes_and_edges():
    t = build_table([(P("20.0.0.5/32"), {9}), (P("255.0.0.0/8"), {1}), (P("1.0.0.0/8"), {2})])
    assert t.lookup(ip("20.0.0.5")) == Known(9)
    assert t.lookup(ip("20.0.0.6")) is UNKNOWN
    assert t.lookup(ip("255.255.255.255")) == Bogon("RFC1112")
    assert t.lookup(ip("0.0.0.0")) is UNKNOWN


def _random_prefixes(rng, n):
    out = []
    for _ in range(n):
        length = rng.randint(1, 32)
        net = rng.getrandbits(32) & ((0xFFFFFFFF << (32 - length)) & 0xFFFFFFFF)
        out.append((Prefix(net, length), frozenset({rng.randint(1, 50)})))
    return out


def test_lpm_against_linear_scan():
    rng = random.Random(11)
    entries = _random_prefixes(rng, 1000)
    t = build_table(entries)
    kept = [(p, res) for p, (res, _) in t.routes.items()]
    for _ in range(1000):
        a = rng.getrandbits(32)
        got = t.lookup(a)
        if isinstance(got, Bogon):
            continue
        assert got == naive_lpm(kept, a)


def test_source_order_independence():
    rng = random.Random(5)
    entries = _random_prefixes(rng, 500) + [(P("20.0.0.0/16"), {1}), (P("20.0.0.0/16"), {2})]
    t1 = build_table(entries)
    shuffled = entries[:]
    rng.shuffle(shuffled)
    t2 = build_table(shuffled)
    assert t1._starts == t2._starts and t1._values == t2._values
    a, b = io.StringIO(), io.StringIO()
    t1.dump_csv(a)
    t2.dump_csv(b)
    assert a.getvalue() == b.getvalue()


def test_lookup_with_other_registry():
    t = build_table([(P("198.18.0.0/15"), {64496})])
    reg = BogonRegistry([c for c in BogonRegistry().all_classes() if c.rfc_label != "RFC1918"])
    assert lookup(t, ip("10.0.0.1"), reg) is UNKNOWN
    assert lookup(t, ip("198.18.0.1"), reg) == Known(64496)


def test_from_mrt_merges_collectors(fixture_ribs):
    t = PrefixTable.from_mrt(fixture_ribs)
    assert t.entry_count == 8
    assert [s.name for s in t.sources] == ["rrc00", "route-views2"]
    assert t.lookup(ip("20.4.1.1")) == MultiOrigin(frozenset({64510, 64511}))
    assert t.lookup(ip("20.5.0.1")) == MultiOrigin(frozenset({64520, 64530}))
    assert t.lookup(ip("20.3.200.1")) == Known(64501)
    buf = io.StringIO()
    t.dump_csv(buf)
    assert buf.getvalue().splitlines()[4] == "20.3.0.0/16,64500,route-views2|rrc00"
