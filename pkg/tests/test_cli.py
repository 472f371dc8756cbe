import csv
import gzip
import hashlib
import json
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import pytest

from bogon_transit.addr import Prefix, parse_ip
from bogon_transit.synth import MrtPeer, seq, write_mrt

GOLDEN = Path(__file__).parent / "data" / "golden"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def golden_files(sub):
    root = GOLDEN / sub
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


# ------------------------------------------------------------------ analyze


def test_analyze_golden(analyze_fixture):
    out = analyze_fixture()
    for rel in golden_files("analyze"):
        assert (out / rel).read_bytes() == (GOLDEN / "analyze" / rel).read_bytes(), rel


def test_analyze_hand_counts(analyze_fixture):
    out = analyze_fixture()
    (row,) = read_csv(out / "stats.csv")
    assert row["traces"] == "10" and row["vps"] == "2"
    assert row["vps_observing_bogons"] == "1" and row["vps_observing_bogons_pct"] == "50.00"
    assert row["traces_RFC1918"] == "5" and row["traces_RFC1918_pct"] == "50.00"
    assert row["traces_qualifying_RFC1918"] == "3"
    assert row["unrouted_dst"] == "2" and row["unrouted_dst_pct"] == "20.00"
    assert row["no_origin"] == "1" and row["dropped_unknown"] == "2"
    sets = json.loads((out / "asn_sets.json").read_text())["sets"]
    assert sets["RFC1918"] == {"BA": [64500, 64501, 65540, 65550], "BB": [64500, 64501, 65540], "BC": [64500, 64501]}
    assert sets["RFC6598"] == {"BA": [64501, 65540], "BB": [64501], "BC": [64501]}
    assert sets["RFC3927"] == {"BA": [64510, 64511], "BB": [64510, 64511], "BC": []}
    assert (out / "asns" / "BC" / "RFC1918.txt").read_text() == "64500\n64501\n"
    moas = [r for r in read_csv(out / "findings.csv") if r["class"] == "RFC3927"]
    assert {r["multi_origin_bb"] for r in moas} == {"1"}


def test_manifest(analyze_fixture, fixture_ribs):
    out = analyze_fixture()
    m = json.loads((out / "manifest.json").read_text())
    assert m["table"] == {"prefixes": 8, "dropped_bogon": 2, "dropped_default": 1}
    assert m["ingest"]["errors"] == 1 and m["ingest"]["selected"] == 10 and m["ingest"]["resorted"] == 1
    assert m["config"]["measurement_time"] == "2023-07-18T00:00:00Z"
    assert len(m["config"]["registry"]) == 12
    for inp in m["inputs"]:
        assert hashlib.sha256(Path(inp["path"]).read_bytes()).hexdigest() == inp["sha256"]
    for name, digest in m["outputs"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert "workers" not in m["config"]


def test_case_bc_only(analyze_fixture):
    out = analyze_fixture("bc", "--case", "BC")
    assert {r["case"] for r in read_csv(out / "findings.csv")} == {"BC"}
    assert sorted(p.name for p in (out / "asns").iterdir()) == ["BC"]
    assert json.loads((out / "asn_sets.json").read_text())["cases"] == ["BC"]


def test_measurement_time_override(analyze_fixture):
    out = analyze_fixture("mt", "--measurement-time", "2023-08-01T00:00:00Z")
    assert json.loads((out / "asn_sets.json").read_text())["measurement_time"] == "2023-08-01T00:00:00Z"


def test_workers_identical(analyze_fixture):
    a = analyze_fixture("w1")
    b = analyze_fixture("w3", "--workers", "3")
    for p in sorted(a.rglob("*")):
        if p.is_file():
            assert p.read_bytes() == (b / p.relative_to(a)).read_bytes(), p


def test_strict_trace_error_exits_3(run_cli, data_dir, fixture_ribs, tmp_path):
    res = run_cli("analyze", "--label", "x", "--rib", fixture_ribs[0], "--traces", data_dir / "traces.jsonl",
                  "--strict", "-o", tmp_path / "o")
    assert res.exit_code == 3
    assert "line 6" in res.output


def test_corrupt_mrt_exits_3(run_cli, data_dir, fixture_ribs, tmp_path):
    bad = tmp_path / "bad.mrt"
    bad.write_bytes(Path(fixture_ribs[0]).read_bytes()[:-7])
    res = run_cli("analyze", "--label", "x", "--rib", bad, "--traces", data_dir / "traces.jsonl", "-o", tmp_path / "o")
    assert res.exit_code == 3
    gz = tmp_path / "bad.mrt.gz"
    gz.write_bytes(gzip.compress(Path(fixture_ribs[0]).read_bytes())[:-20])
    res = run_cli("analyze", "--label", "x", "--rib", gz, "--traces", data_dir / "traces.jsonl", "-o", tmp_path / "o")
    assert res.exit_code == 3


def test_empty_table_exits_4(run_cli, data_dir, tmp_path):
    rib = tmp_path / "leaks.mrt"
    peers = [MrtPeer(1, parse_ip("20.255.0.1"), 64999)]
    rib.write_bytes(write_mrt([(Prefix.parse("10.0.0.0/8"), [(0, seq(64999, 1))])], peers, 1689638400))
    res = run_cli("analyze", "--label", "x", "--rib", rib, "--traces", data_dir / "traces.jsonl", "-o", tmp_path / "o")
    assert res.exit_code == 4


def test_zero_traces_exits_4(run_cli, fixture_ribs, tmp_path):
    t = tmp_path / "t.jsonl"
    t.write_text("not json\n")
    res = run_cli("analyze", "--label", "x", "--rib", fixture_ribs[0], "--traces", t, "-o", tmp_path / "o")
    assert res.exit_code == 4


def test_rib_and_fetch_are_exclusive(run_cli, data_dir, tmp_path):
    res = run_cli("analyze", "--label", "x", "--traces", data_dir / "traces.jsonl", "-o", tmp_path / "o")
    assert res.exit_code == 2


# ------------------------------------------------------------------- config


def write_cfg(tmp_path, text):
    p = tmp_path / "cfg.toml"
    p.write_text(text)
    return p


def test_unknown_config_key_exits_2(run_cli, tmp_path):
    cfg = write_cfg(tmp_path, "[analyze]\nlabel = 'x'\nworkerz = 3\n")
    res = run_cli("--config", cfg, "synth", "generate", "-o", tmp_path / "o")
    assert res.exit_code == 2 and "workerz" in res.output
    cfg = write_cfg(tmp_path, "[analyse]\nlabel = 'x'\n")
    assert run_cli("--config", cfg, "fetch", "--date", "2023-07-18").exit_code == 2
    cfg = write_cfg(tmp_path, "[synth.generate]\nsead = 1\n")
    assert run_cli("--config", cfg, "synth", "generate", "-o", tmp_path / "o").exit_code == 2


def test_config_precedence(run_cli, data_dir, fixture_ribs, tmp_path):
    cfg = write_cfg(
        tmp_path,
        f"[analyze]\nlabel = 'from-config'\ncase = 'BB'\nrib = {json.dumps(fixture_ribs)}\n"
        f"traces = [{json.dumps(str(data_dir / 'traces.jsonl'))}]\n",
    )

    def label_of(name, *args, env=None):
        res = run_cli("--config", cfg, "analyze", "-o", tmp_path / name, *args, env=env)
        assert res.exit_code == 0, res.output
        return json.loads((tmp_path / name / "asn_sets.json").read_text())

    doc = label_of("a")
    assert doc["label"] == "from-config" and doc["cases"] == ["BB"]
    assert label_of("b", env={"BOGON_TRANSIT_ANALYZE_LABEL": "from-env"})["label"] == "from-env"
    doc = label_of("c", "--label", "from-flag", "--case", "BC", env={"BOGON_TRANSIT_ANALYZE_LABEL": "from-env"})
    assert doc["label"] == "from-flag" and doc["cases"] == ["BC"]


def test_synth_config_plant_table(run_cli, tmp_path):
    cfg = write_cfg(tmp_path, "[synth.generate]\nseed = 4\ntraces = 200\n[synth.generate.plant]\nrfc1918 = 0.1\n")
    res = run_cli("--config", cfg, "synth", "generate", "-o", tmp_path / "s")
    assert res.exit_code == 0, res.output
    assert json.loads((tmp_path / "s" / "truth.json").read_text())["planted"] == {"RFC1918": 20}


# ---------------------------------------------------------------- similarity


def fake_run(root, label, sets, cases=("BA", "BB", "BC")):
    root.mkdir(parents=True)
    doc = {
        "label": label,
        "measurement_time": f"{label}-15T00:00:00Z",
        "cases": list(cases),
        "sets": {lab: {c: sorted(s) for c in cases} for lab, s in sets.items()},
    }
    (root / "asn_sets.json").write_text(json.dumps(doc))
    return root


def test_similarity_identical_runs(run_cli, tmp_path):
    s = {"RFC1918": {1, 2, 3}, "RFC6598": {3, 4}}
    a = fake_run(tmp_path / "a", "2023-01", s)
    b = fake_run(tmp_path / "b", "2023-02", s)
    res = run_cli("similarity", a, b, "--case", "BA", "-o", tmp_path / "o")
    assert res.exit_code == 0, res.output
    for metric in ("jaccard", "containment"):
        m = json.loads((tmp_path / "o" / metric / "BA" / "all.json").read_text())
        assert m["values"] == [["1/1", "1/1"], ["1/1", "1/1"]]


def test_similarity_label_collision(run_cli, tmp_path):
    a = fake_run(tmp_path / "a", "2023-01", {"RFC1918": {1}})
    b = fake_run(tmp_path / "b", "2023-01", {"RFC1918": {2}})
    res = run_cli("similarity", a, b, "-o", tmp_path / "o")
    assert res.exit_code == 2 and "collision" in res.output


def test_similarity_needs_two(run_cli, tmp_path):
    a = fake_run(tmp_path / "a", "2023-01", {"RFC1918": {1}})
    assert run_cli("similarity", a, "-o", tmp_path / "o").exit_code == 2


def test_similarity_brute_force(run_cli, tmp_path):
    runs = {
        "2022-11": {"RFC1918": {1, 2, 3, 4}, "RFC6598": {9}},
        "2023-03": {"RFC1918": {2, 3, 5}, "RFC6598": set()},
        "2023-07": {"RFC1918": {3, 4, 5, 6, 7}, "RFC6598": {9, 10}},
    }
    dirs = [fake_run(tmp_path / k, k, v) for k, v in reversed(list(runs.items()))]
    res = run_cli("similarity", *dirs, "--case", "BB", "--more-than", "1", "-o", tmp_path / "o")
    assert res.exit_code == 0, res.output
    labels = sorted(runs)
    for cls in ("RFC1918", "RFC6598", "all"):
        sets = [set().union(*runs[lab].values()) if cls == "all" else runs[lab][cls] for lab in labels]
        m = json.loads((tmp_path / "o" / "jaccard" / "BB" / f"{cls}.json").read_text())
        assert m["labels"] == labels
        for i, j in combinations(range(3), 2):
            u = sets[i] | sets[j]
            exp = Fraction(len(sets[i] & sets[j]), len(u)) if u else Fraction(1)
            assert Fraction(m["values"][i][j]) == exp == Fraction(m["values"][j][i])
        c = json.loads((tmp_path / "o" / "containment" / "BB" / f"{cls}.json").read_text())
        for i in range(3):
            for j in range(3):
                exp = Fraction(len(sets[i] & sets[j]), len(sets[i])) if sets[i] else Fraction(1)
                assert Fraction(c["values"][i][j]) == exp
    occ = {r["asn"]: r["measurements"] for r in read_csv(tmp_path / "o" / "occurrence_counts_BB.csv")}
    assert occ == {"1": "1", "2": "2", "3": "3", "4": "2", "5": "2", "6": "1", "7": "1", "9": "2", "10": "1"}
    rows = {(r["class"], r["metric"]): r for r in read_csv(tmp_path / "o" / "occurrences_BB.csv")}
    assert rows[("all", "present_in_all")]["asns"] == "1"
    assert rows[("all", "present_more_than_1")]["asns"] == "5"
    per_year = read_csv(tmp_path / "o" / "unique_per_year_BB.csv")
    assert [(r["year"], r["RFC1918"], r["unique_per_year"]) for r in per_year] == [
        ("2022", "4", "5"),
        ("2023", "6", "8"),
        ("Unique per RFC", "7", "9"),
    ]


# --------------------------------------------------------------- crosscheck


def run_crosscheck(run_cli, data_dir, tmp_path, run_dir, *extra):
    out = tmp_path / "cx"
    res = run_cli(
        "crosscheck", run_dir, "--spoofer", data_dir / "spoofer.csv", "--manrs", data_dir / "manrs.csv",
        "--metadata", data_dir / "metadata.csv", "--case", "BA", "--top-countries", "3", "-o", out, *extra,
    )
    assert res.exit_code == 0, res.output
    return out


def test_crosscheck_golden(run_cli, data_dir, tmp_path, analyze_fixture):
    out = run_crosscheck(run_cli, data_dir, tmp_path, analyze_fixture(), "--manrs-snapshot", "2023-09-01")
    for rel in golden_files("crosscheck"):
        assert (out / rel).read_bytes() == (GOLDEN / "crosscheck" / rel).read_bytes(), rel


def test_crosscheck_hand_values(run_cli, data_dir, tmp_path, analyze_fixture):
    out = run_crosscheck(run_cli, data_dir, tmp_path, analyze_fixture())
    rows = {r["class"]: r for r in read_csv(out / "spoofer_BA.csv")}
    r = rows["RFC1918"]
    assert (r["identified"], r["in_spoofer"]) == ("4", "3")
    assert (r["only_spoofable_pct"], r["only_non_spoofable_pct"], r["both_pct"]) == ("33.34", "33.33", "33.33")
    assert rows["RFC1112"]["only_spoofable_pct"] == ""
    assert (out / "manrs_conflicts.csv").read_text() == "asn\n65550\n"
    rir = read_csv(out / "enrich" / "BA" / "rir.csv")
    assert sum(Fraction(x["pct"]) for x in rir) == 100
    assert rir[-1]["rir"] == "Not found"


def test_crosscheck_stale_snapshot_warns(run_cli, data_dir, tmp_path, analyze_fixture):
    out = run_crosscheck(run_cli, data_dir, tmp_path, analyze_fixture(), "--manrs-snapshot", "2024-07-18")
    assert "days away" in (out / "warnings.txt").read_text()


def test_crosscheck_bad_csv_exits_3(run_cli, tmp_path, analyze_fixture):
    bad = tmp_path / "s.csv"
    bad.write_text("asn,timestamp,routedspoof\n1,2023-01-01T00:00:00Z,maybe\n")
    res = run_cli("crosscheck", analyze_fixture(), "--spoofer", bad, "-o", tmp_path / "o")
    assert res.exit_code == 3 and "row 2" in res.output


def test_crosscheck_window_flag(run_cli, data_dir, tmp_path, analyze_fixture):
    # a 200-day window pulls 64501's T-184d result in
    out = run_crosscheck(run_cli, data_dir, tmp_path, analyze_fixture(), "--window-days", "200")
    r = {x["class"]: x for x in read_csv(out / "spoofer_BA.csv")}["RFC1918"]
    assert (r["in_spoofer"], r["only_spoofable"]) == ("4", "2")


# -------------------------------------------------------------------- synth


def test_synth_generate_then_analyze(run_cli, tmp_path):
    s = tmp_path / "s"
    res = run_cli("synth", "generate", "--seed", "3", "--traces", "1000", "--plant", "rfc1918=0.197",
                  "--plant", "RFC6598=0.015", "--unrouted", "0.03", "-o", s)
    assert res.exit_code == 0, res.output
    res = run_cli("analyze", "--label", "synth", "--rib", s / "rib.mrt", "--traces", s / "traces.jsonl", "-o", tmp_path / "a")
    assert res.exit_code == 0, res.output
    (row,) = read_csv(tmp_path / "a" / "stats.csv")
    assert row["traces_qualifying_RFC1918"] == "197" and row["traces_qualifying_RFC6598"] == "15"
    assert row["unrouted_dst_pct"] == "3.00"
    truth = json.loads((s / "truth.json").read_text())
    exp = {}
    for t in truth["traces"]:
        for lab, cases in t["classes"].items():
            for c, asns in cases.items():
                exp.setdefault(lab, {}).setdefault(c, set()).update(asns)
    got = json.loads((tmp_path / "a" / "asn_sets.json").read_text())["sets"]
    for lab, cases in exp.items():
        for c, asns in cases.items():
            assert set(got[lab][c]) == asns


@pytest.mark.parametrize(
    "args",
    [
        ["--plant", "rfc9999=0.1"],
        ["--plant", "rfc1918"],
        ["--plant", "rfc1918=0.7", "--plant", "rfc6598=0.7"],
        ["--vps", "40"],
        ["--plant", "rfc1918=abc"],
    ],
)
def test_synth_bad_args_exit_2(run_cli, tmp_path, args):
    assert run_cli("synth", "generate", "--traces", "50", *args, "-o", tmp_path / "o").exit_code == 2


def test_version(run_cli):
    res = run_cli("--version")
    assert res.exit_code == 0 and "0.1.0" in res.output
