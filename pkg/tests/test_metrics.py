import io
import random
from fractions import Fraction

import pytest

from bogon_transit.metrics import (
    MatrixError,
    StatsAccumulator,
    TraceResult,
    aggregate,
    containment,
    jaccard,
    occurrence_counts,
    pct,
    similarity_matrix,
    summarize_occurrences,
    unique_per_year,
    write_stats_csv,
)
from bogon_transit.transit import ClassFinding, TransitFinding

R = "RFC1918"


def result(tid, vp, labels=(), qualifying=None, unrouted=False):
    classes = {}
    for lab, (ba, bb, bc) in (qualifying or {}).items():
        classes[lab] = ClassFinding(set(ba), set(bb), set(bc))
    return TraceResult(tid, vp, unrouted, frozenset(labels), TransitFinding(tid, classes))


def ten_traces():
    rs = [result(f"a{i}", "A", [R], {R: ({1, 2}, {2}, set())}) for i in range(3)]
    rs += [result(f"a{i}", "A") for i in range(3, 6)]
    rs += [result(f"b{i}", "B", unrouted=i == 0) for i in range(4)]
    return rs


def test_pct():
    assert pct(197, 1000) == "19.70"
    assert pct(1, 3) == "33.33"
    assert pct(2, 3) == "66.67"
    assert pct(1, 8) == "12.50"
    assert pct(1, 0) == ""


def test_aggregate_hand_count():
    s = aggregate(ten_traces(), "fx", "BA")
    assert (s.n_vps, s.n_vps_observing_bogons, s.n_traces) == (2, 1, 10)
    assert s.n_traces_per_class == {R: 3}
    assert s.n_unrouted_dst == 1
    assert s.asns(R, "BA") == {1, 2}
    assert s.asns(R, "BB") == frozenset()  # only the requested case is kept


def test_aggregate_empty():
    s = aggregate([], "empty")
    assert s.n_traces == 0 and s.asn_sets == {} and s.n_vps == 0


def test_per_trace_not_per_hop():
    r = result("t", "A", [R], {R: ({1}, {1}, set())})
    assert aggregate([r]).n_traces_per_class[R] == 1


def test_order_independence_and_merge():
    rs = ten_traces()
    base = aggregate(rs)
    for seed in range(3):
        shuffled = rs[:]
        random.Random(seed).shuffle(shuffled)
        assert aggregate(shuffled) == base
        a, b = StatsAccumulator(), StatsAccumulator()
        for i, r in enumerate(shuffled):
            (a if i % 2 else b).add(r)
        assert a.merge(b).finalize("") == base


def test_stats_csv_columns():
    buf = io.StringIO()
    write_stats_csv([aggregate(ten_traces(), "fx")], buf, [R], ["BA"])
    header, row = buf.getvalue().splitlines()
    cols = dict(zip(header.split(","), row.split(",")))
    assert cols["vps_observing_bogons"] == "1" and cols["traces_RFC1918_pct"] == "30.00"
    assert cols["BA_asns_RFC1918"] == "2"


def test_jaccard_examples():
    assert jaccard({1, 2}, {1, 2}) == 1
    assert jaccard({1, 2}, {3, 4}) == 0
    assert jaccard({1, 2}, {2, 3}) == Fraction(1, 3)
    assert jaccard(set(), set()) == 1


def test_containment_examples():
    assert containment({1}, {1, 2}) == 1
    assert containment({1, 2, 3}, {1}) == Fraction(1, 3)
    a, b = {1, 2, 3}, {1, 4}
    assert containment(a, b) != containment(b, a)
    assert containment(set(), {1}) == 1


def test_matrix_identical_sets():
    m = similarity_matrix({"x": {1}, "y": {1}, "z": {1}})
    assert all(v == 1 for row in m.values for v in row)


def test_matrix_brute_force():
    sets = {"2022-01": {1, 2, 3}, "2022-07": {2, 3, 4}, "2023-01": {3, 4, 5, 6}}
    jm = similarity_matrix(sets, "jaccard")
    assert jm.values[0][1] == Fraction(1, 2)
    assert jm.values[0][2] == Fraction(1, 6)
    assert jm.values[1][2] == Fraction(2, 5)
    cm = similarity_matrix(sets, "containment")
    assert cm.values[0][1] == Fraction(2, 3)
    assert cm.values[2][1] == Fraction(1, 2)


def test_containment_subset_row():
    m = similarity_matrix({"RFC1112": {1}, "RFC1918": {1, 2, 3}}, "containment")
    assert m.values[0][1] == 1 and m.values[1][0] == Fraction(1, 3)


def test_matrix_errors():
    with pytest.raises(MatrixError):
        similarity_matrix({})
    with pytest.raises(MatrixError):
        similarity_matrix([("a", {1}), ("a", {2})])


def test_matrix_outputs():
    m = similarity_matrix({"a": {1, 2}, "b": {2, 3}})
    buf = io.StringIO()
    m.to_csv(buf)
    assert buf.getvalue().splitlines() == ["jaccard,a,b", "a,1.000000,0.333333", "b,0.333333,1.000000"]
    assert m.to_json()["values"][0][1] == "1/3"


def test_occurrences_hand_count():
    per = {f"m{i}": set() for i in range(4)}
    freq = {10: 4, 11: 1, 12: 2, 13: 3, 14: 1}
    for asn, k in freq.items():
        for i in range(k):
            per[f"m{i}"].add(asn)
    counts = occurrence_counts(per)
    assert dict(counts) == freq
    s = summarize_occurrences(counts, 4, (2,))
    assert (s.n_asns, s.present_once, s.present_in_all, s.present_at_least_half) == (5, 2, 1, 3)
    assert s.present_more_than == {2: 2}


def test_all_measurements():
    per = {f"m{i}": {7} for i in range(84)}
    assert occurrence_counts(per)[7] == 84


def test_unique_per_year():
    rows = unique_per_year(
        [
            ("2022-01", {R: {1, 2}, "RFC6598": {9}}),
            ("2022-07", {R: {2, 3}}),
            ("2023-01", {R: {3}, "RFC6598": {9, 10}}),
        ],
        [R, "RFC6598"],
    )
    assert rows == [
        {"year": "2022", R: 3, "RFC6598": 1, "unique_per_year": 4},
        {"year": "2023", R: 1, "RFC6598": 2, "unique_per_year": 3},
        {"year": "Unique per RFC", R: 3, "RFC6598": 2, "unique_per_year": 5},
    ]
