import random

import pytest

from bogon_transit.addr import Prefix, parse_ip
from bogon_transit.metrics import StatsAccumulator
from bogon_transit.mrt import MrtReader
from bogon_transit.pipeline import analyze_records
from bogon_transit.table import UNKNOWN, PrefixTable
from bogon_transit.synth import (
    InfeasibleRate,
    exact_count,
    generate,
    naive_lpm,
    random_topology,
    topology_mrt,
)

RATES = {"RFC1918": "0.2", "RFC6598": "0.05"}


def run_synth(tmp_path, out):
    rib = tmp_path / "rib.mrt"
    rib.write_bytes(out.mrt)
    table = PrefixTable.from_mrt([rib])
    shard = analyze_records(out.records, table)
    acc, findings = StatsAccumulator(), []
    for part in shard.partials.values():
        acc.merge(part.acc)
        findings += part.findings
    return acc, findings


def test_exact_count():
    assert exact_count("0.197", 10_000) == 1970
    assert exact_count(0.001, 10_000) == 10
    assert exact_count("0.0297", 10_000) == 297
    assert exact_count(0.2, 100) == 20
    with pytest.raises(ValueError):
        exact_count("1.5", 10)


def test_planted_count_exact():
    out = generate(random_topology(1), 100, {"RFC1918": 0.20})
    assert out.truth.planted == {"RFC1918": 20}
    assert sum(1 for t in out.truth.traces if t.classes) == 20


def test_deterministic():
    a = generate(random_topology(5), 300, RATES, unrouted_rate="0.1")
    b = generate(random_topology(5), 300, RATES, unrouted_rate="0.1")
    assert a.mrt == b.mrt and a.corpus == b.corpus and a.truth.to_json() == b.truth.to_json()
    c = generate(random_topology(6), 300, RATES)
    assert c.corpus != a.corpus


def test_infeasible_names_class():
    topo = random_topology(2, internal_classes=("RFC1918",))
    with pytest.raises(InfeasibleRate, match="RFC7526"):
        generate(topo, 100, {"RFC7526": "0.1"})


def test_rates_over_one():
    with pytest.raises(ValueError):
        generate(random_topology(1), 10, {"RFC1918": "0.6", "RFC6598": "0.6"})


def test_mrt_roundtrip_matches_topology(tmp_path):
    topo = random_topology(11)
    p = tmp_path / "rib.mrt"
    p.write_bytes(topology_mrt(topo, 1689638400))
    got = {}
    for prefix, origins in MrtReader(p):
        got.setdefault(prefix, set()).update(origins)
    assert {k: frozenset(v) for k, v in got.items()} == topo.prefix_origins()


def test_naive_lpm_examples():
    pfx = [(Prefix.parse("20.0.0.0/8"), 1), (Prefix.parse("20.1.0.0/16"), 2), (Prefix.parse("20.1.2.0/24"), 3)]
    assert naive_lpm(pfx, parse_ip("20.1.2.3")) == 3
    assert naive_lpm(pfx, parse_ip("20.1.3.3")) == 2
    assert naive_lpm(pfx, parse_ip("20.9.9.9")) == 1
    assert naive_lpm(pfx, parse_ip("21.0.0.0")) == UNKNOWN


@pytest.mark.parametrize("seed", range(50))
def test_end_to_end_matches_ground_truth(tmp_path, seed):
    rng = random.Random(seed)
    rates = {"RFC1918": "0.15", "RFC6598": "0.05", "RFC3927": "0.02"}
    out = generate(
        random_topology(seed, n_ases=rng.randint(16, 50), n_vps=rng.randint(1, 6)),
        200,
        rates,
        unrouted_rate="0.05",
        internal_rate="0.1",
    )
    acc, findings = run_synth(tmp_path, out)
    truth = {t.trace_id: t for t in out.truth.traces}
    found = {f.trace_id: f for f in findings}
    assert set(found) == {tid for tid, t in truth.items() if t.classes}
    for tid, f in found.items():
        exp = truth[tid].classes
        assert set(f.classes) == set(exp), tid
        for lab, (ba, bb, bc) in exp.items():
            cf = f.classes[lab]
            assert (cf.ba, cf.bb, cf.bc) == (ba, bb, bc), tid
    stats = acc.finalize("synth")
    assert stats.n_traces == 200
    assert stats.n_unrouted_dst == out.truth.unrouted == 10
    assert stats.n_traces_qualifying_per_class == {k: v for k, v in out.truth.planted.items() if v}
    exp_sets = out.truth.expected_sets()
    assert {k: v for k, v in stats.asn_sets.items()} == exp_sets
    for t in out.truth.traces:
        assert t.any_labels >= set(t.classes)
