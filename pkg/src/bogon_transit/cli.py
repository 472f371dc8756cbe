"""Command line entry point: ``bogon-transit``.

Every option can come from a TOML config file (``--config``, one table per
subcommand), from an environment variable ``BOGON_TRANSIT_<COMMAND>_<OPTION>``,
or from the command line. Command line beats environment beats config file.

Exit codes: 0 ok, 2 configuration error, 3 input parse error, 4 empty result.
"""

from __future__ import annotations

import io
import json
import logging
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .bogons import DEFAULT_REGISTRY, BogonRegistry, RegistryError
from .crosscheck import (
    DEFAULT_WINDOW,
    InputFormatError,
    crosscheck_summary,
    enrich,
    load_manrs_csv,
    load_metadata_csv,
    load_spoofer_csv,
    manrs_join,
    snapshot_warning,
)
from .fetch import DEFAULT_TEMPLATES, Cache, FetchError, fetch_ribs, sha256_file
from .metrics import (
    dump_json,
    occurrence_counts,
    similarity_matrix,
    stats_to_json,
    summarize_occurrences,
    unique_per_year,
    write_rows_csv,
    write_stats_csv,
)
from .mrt import MrtParseError
from .pipeline import analyze
from .table import PrefixTable, TableError, source_name
from .traces import TraceFormatError, parse_ts
from .transit import CASES, write_findings_csv

log = logging.getLogger("bogon_transit")

EXIT_CONFIG, EXIT_PARSE, EXIT_EMPTY = 2, 3, 4
ENV_PREFIX = "BOGON_TRANSIT"

# Interpretation choices baked into this version; copied into every manifest.
DECISIONS = {
    "bogon_blocks": "8 classes / 12 IPv4 blocks; 0.0.0.0/8, 192.31.196.0/24, 192.175.48.0/24 excluded",
    "leaked_prefixes": "RIB prefixes overlapping a bogon block and the default route are dropped",
    "moas": "origin sets unioned across collectors; same AS means intersecting origin sets",
    "as_path_asn_width": "AS_PATH decoded with 4-byte ASNs (TABLE_DUMP_V2)",
    "cycle_selection": "lowest cycle per vantage point",
    "path_merge": "greedy left-to-right, merged element keeps the intersection of origin sets",
    "qualifying_bogon": "some AS hop before the bogon is disjoint from the origin AS set",
    "run_of_bogons": "consecutive same-class bogons count once; other classes are transparent",
    "bc_rule": "AS immediately before the bogon intersects an AS hop after it",
    "traces_per_class": "any bogon hop of the class; qualifying counts in separate columns",
    "spoofer_window": "[T - window, T), status merged over the ASN's measurements",
    "spoofer_pct_base": "ASNs with a received/blocked result inside the window",
    "empty_set_similarity": "jaccard(empty, empty) = 1; containment(empty, b) = 1",
}


class ExitError(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


# ------------------------------------------------------------------ helpers


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ExitError(f"config {path}: {exc}", EXIT_CONFIG) from None
    return _normalize_config(doc)


def _normalize_config(doc: dict) -> dict:
    out: dict[str, Any] = {}
    for key, value in doc.items():
        key = key.replace("-", "_")
        if key in ("plant", "template") and isinstance(value, dict):
            value = [f"{k}={v}" for k, v in value.items()]
        elif isinstance(value, dict):
            value = _normalize_config(value)
        out[key] = value
    return out


def _check_config_keys(group: click.Group, defaults: dict, where: str = "") -> None:
    for name, body in defaults.items():
        cmd = group.commands.get(name)
        if cmd is None or not isinstance(body, dict):
            raise ExitError(f"config: unknown section [{where}{name}]", EXIT_CONFIG)
        if isinstance(cmd, click.Group):
            _check_config_keys(cmd, body, f"{where}{name}.")
            continue
        # keys may be written as the flag (``traces``) or the parameter name (``trace_files``)
        aliases = {}
        for p in cmd.params:
            aliases[p.name] = p.name
            for opt in getattr(p, "opts", []):
                if opt.startswith("--"):
                    aliases[opt[2:].replace("-", "_")] = p.name
        unknown = sorted(k for k in body if k not in aliases)
        if unknown:
            raise ExitError(f"config [{where}{name}]: unknown keys {', '.join(unknown)}", EXIT_CONFIG)
        renamed = {aliases[k]: v for k, v in body.items()}
        body.clear()
        body.update(renamed)


def _cases(case: str) -> tuple[str, ...]:
    return CASES if case == "all" else (case,)


def _registry(path: str | None) -> BogonRegistry:
    if not path:
        return DEFAULT_REGISTRY
    try:
        return BogonRegistry.from_toml(path)
    except (RegistryError, ValueError, KeyError) as exc:
        raise ExitError(f"bogon registry {path}: {exc}", EXIT_CONFIG) from None


def _pairs(values: Sequence[str], what: str) -> dict[str, str]:
    out = {}
    for v in values:
        k, sep, rest = v.partition("=")
        if not sep or not k.strip():
            raise ExitError(f"{what}: expected NAME=VALUE, got {v!r}", EXIT_CONFIG)
        out[k.strip()] = rest.strip()
    return out


class OutputDir:
    """Collects output files so the manifest can hash them."""

    def __init__(self, root: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def text(self, name: str, writer: Callable[[io.StringIO], Any] | str) -> None:
        if isinstance(writer, str):
            data = writer
        else:
            buf = io.StringIO()
            writer(buf)
            data = buf.getvalue()
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(data, encoding="utf-8", newline="\n")
        self.files.append(name)

    def binary(self, name: str, data: bytes) -> None:
        (self.root / name).write_bytes(data)
        self.files.append(name)

    def json(self, name: str, obj) -> None:
        self.text(name, lambda fh: dump_json(obj, fh))

    def manifest(self, command: str, config: dict, inputs: list[tuple[str, str]], extra: dict | None = None) -> None:
        obj = {
            "tool": "bogon-transit",
            "version": __version__,
            "command": command,
            "config": config,
            "inputs": [
                {"role": role, "path": path, "sha256": sha256_file(path), "bytes": Path(path).stat().st_size}
                for role, path in inputs
            ],
            "outputs": {name: sha256_file(self.root / name) for name in sorted(self.files)},
            "decisions": DECISIONS,
        }
        if extra:
            obj.update(extra)
        with open(self.root / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            dump_json(obj, fh)


def _iso(ts: datetime | None) -> str | None:
    return None if ts is None else ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _load_run(run_dir: str) -> dict:
    path = Path(run_dir) / "asn_sets.json"
    try:
        doc = json.loads(path.read_text())
        doc["sets"]
        doc["label"]
    except (OSError, ValueError, KeyError) as exc:
        raise ExitError(f"{run_dir}: not an analyze output directory ({exc})", EXIT_CONFIG) from None
    return doc


def _run_sets(doc: dict, case: str) -> dict[str, set[int]]:
    return {lab: set(cases.get(case, [])) for lab, cases in doc["sets"].items()}


def _load_runs(run_dirs: Sequence[str]) -> list[dict]:
    runs = [_load_run(d) for d in run_dirs]
    labels = [r["label"] for r in runs]
    dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
    if dupes:
        raise ExitError(f"label collision across runs: {', '.join(dupes)}", EXIT_CONFIG)
    return sorted(runs, key=lambda r: r["label"])


# ---------------------------------------------------------------- commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    help="TOML file with one table per subcommand ([analyze], [synth.generate], ...).",
)
@click.option("-v", "--verbose", count=True, help="Repeat for more logging.")
@click.version_option(__version__)
@click.pass_context
def main(ctx: click.Context, config: str | None, verbose: int) -> None:
    """Find ASes that forward packets with bogon source addresses."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if config:
        defaults = _load_config(config)
        _check_config_keys(main, defaults)
        ctx.default_map = defaults


@main.command("analyze")
@click.option("--label", required=True, help="Measurement label, e.g. 2023-07.")
@click.option("--rib", "ribs", multiple=True, type=click.Path(exists=True, dir_okay=False), help="MRT RIB dump (repeatable).")
@click.option("--fetch-date", type=click.DateTime(["%Y-%m-%d"]), help="Fetch collector RIBs for this date instead of --rib.")
@click.option("--cache", default=".bogon-cache", show_default=True, help="Download cache for --fetch-date.")
@click.option("--template", multiple=True, help="Collector URL template NAME=URL (repeatable).")
@click.option("--traces", "trace_files", multiple=True, required=True, type=click.Path(exists=True, dir_okay=False), help="JSONL trace corpus (repeatable).")
@click.option("--case", type=click.Choice(["BA", "BB", "BC", "all"]), default="all", show_default=True)
@click.option("--registry", type=click.Path(exists=True, dir_okay=False), help="TOML overriding the bogon table.")
@click.option("--strict/--lenient", default=False, show_default=True, help="Fail on the first malformed trace line.")
@click.option("--workers", type=click.IntRange(1, 256), default=1, show_default=True)
@click.option("--measurement-time", help="Override the measurement time (RFC 3339) used for Spoofer windows.")
@click.option("-o", "--output", required=True, type=click.Path(file_okay=False), help="Output directory.")
def analyze_cmd(
    label, ribs, fetch_date, cache, template, trace_files, case, registry, strict, workers, measurement_time, output
):
    """Classify one measurement's traces against merged RIB snapshots."""
    reg = _registry(registry)
    cases = _cases(case)
    if bool(ribs) == bool(fetch_date):
        raise ExitError("give exactly one of --rib or --fetch-date", EXIT_CONFIG)
    override = None
    if measurement_time:
        try:
            override = parse_ts(measurement_time)
        except ValueError as exc:
            raise ExitError(f"--measurement-time: {exc}", EXIT_CONFIG) from None

    if fetch_date:
        templates = _pairs(template, "--template") or DEFAULT_TEMPLATES
        try:
            rib_inputs = [(n, str(p)) for n, p in fetch_ribs(fetch_date.date(), Cache(cache), templates)]
        except FetchError as exc:
            raise ExitError(str(exc), EXIT_PARSE) from None
    else:
        rib_inputs = [(source_name(p), p) for p in ribs]

    try:
        table = PrefixTable.from_mrt([(n, p) for n, p in rib_inputs], reg)
    except MrtParseError as exc:
        raise ExitError(f"RIB parse error: {exc}", EXIT_PARSE) from None
    except TableError as exc:
        raise ExitError(str(exc), EXIT_EMPTY) from None
    except OSError as exc:
        raise ExitError(f"RIB read error: {exc}", EXIT_PARSE) from None

    try:
        result = analyze(table, trace_files, label, cases, workers=workers, strict=strict)
    except TraceFormatError as exc:
        raise ExitError(f"trace parse error: {exc}", EXIT_PARSE) from None
    except OSError as exc:
        raise ExitError(f"trace read error: {exc}", EXIT_PARSE) from None
    if result.stats.n_traces == 0:
        raise ExitError("no traces left after ingest and cycle selection", EXIT_EMPTY)

    when = override or result.measurement_time
    labels = reg.labels()
    out = OutputDir(output)
    out.text("stats.csv", lambda fh: write_stats_csv([result.stats], fh, labels, cases))
    out.json("stats.json", stats_to_json(result.stats, labels, cases))
    out.text("findings.csv", lambda fh: write_findings_csv(result.findings, fh, cases))
    for c in cases:
        for lab in labels:
            asns = sorted(result.stats.asns(lab, c))
            out.text(f"asns/{c}/{lab}.txt", "".join(f"{a}\n" for a in asns))
    out.json(
        "asn_sets.json",
        {
            "label": label,
            "measurement_time": _iso(when),
            "cases": list(cases),
            "sets": {lab: {c: sorted(result.stats.asns(lab, c)) for c in cases} for lab in labels},
        },
    )
    out.text("rib_table.csv", table.dump_csv)
    rs = result.read_stats
    out.manifest(
        "analyze",
        {
            "label": label,
            "case": case,
            "strict": strict,
            "registry": [[str(p), lab] for p, lab in reg.blocks()],
            "measurement_time": _iso(when),
        },
        [("rib", p) for _, p in rib_inputs] + [("traces", p) for p in trace_files]
        + ([("registry", registry)] if registry else []),
        {
            "rib_sources": [
                {
                    "name": s.name,
                    "snapshot_time": _iso(s.snapshot_time),
                    "prefixes": s.prefixes,
                    "no_origin": s.no_origin,
                    "skipped_subtypes": {str(k): v for k, v in s.skipped_subtypes.items()},
                }
                for s in table.sources
            ],
            "table": {
                "prefixes": table.entry_count,
                "dropped_bogon": table.dropped_bogon,
                "dropped_default": table.dropped_default,
            },
            "ingest": {
                "lines": rs.lines,
                "records": rs.records,
                "errors": rs.errors,
                "duplicate_ttl": rs.duplicate_ttl,
                "resorted": rs.resorted,
                "selected": result.stats.n_traces,
            },
        },
    )
    click.echo(
        f"{label}: {result.stats.n_traces} traces, {len(result.findings)} with qualifying bogons -> {output}"
    )


@main.command("similarity")
@click.argument("runs", nargs=-1, type=click.Path(exists=True, file_okay=False))
@click.option("--case", type=click.Choice(["BA", "BB", "BC", "all"]), default="all", show_default=True)
@click.option("--more-than", type=int, multiple=True, default=(2,), show_default=True, help="Occurrence thresholds.")
@click.option("-o", "--output", required=True, type=click.Path(file_okay=False))
def similarity_cmd(runs, case, more_than, output):
    """Jaccard and containment matrices across analyze outputs."""
    if len(runs) < 2:
        raise ExitError("similarity needs at least two analyze output directories", EXIT_CONFIG)
    docs = _load_runs(runs)
    labels = sorted({lab for d in docs for lab in d["sets"]})
    out = OutputDir(output)
    for c in _cases(case):
        missing = [d["label"] for d in docs if c not in d.get("cases", CASES)]
        if missing:
            raise ExitError(f"case {c} not present in runs: {', '.join(missing)}", EXIT_CONFIG)
        per_run = [(d["label"], _run_sets(d, c)) for d in docs]
        groups = {lab: [(rl, s.get(lab, set())) for rl, s in per_run] for lab in labels}
        groups["all"] = [(rl, set().union(*s.values())) for rl, s in per_run]
        for lab, sets in groups.items():
            for metric in ("jaccard", "containment"):
                m = similarity_matrix(sets, metric)
                out.text(f"{metric}/{c}/{lab}.csv", m.to_csv)
                out.json(f"{metric}/{c}/{lab}.json", m.to_json())
        for rl, sets in per_run:
            m = similarity_matrix([(lab, sets.get(lab, set())) for lab in labels], "containment")
            out.text(f"classes/{c}/{rl}.csv", m.to_csv)
            out.json(f"classes/{c}/{rl}.json", m.to_json())

        occ_rows = []
        for lab, sets in groups.items():
            summary = summarize_occurrences(occurrence_counts(dict(sets)), len(sets), more_than)
            for metric_name, n, p in summary.rows():
                occ_rows.append({"class": lab, "metric": metric_name, "asns": n, "pct": p})
        out.text(f"occurrences_{c}.csv", lambda fh, rows=occ_rows: write_rows_csv(rows, fh))
        counts = occurrence_counts({rl: set().union(*s.values()) for rl, s in per_run})
        out.text(
            f"occurrence_counts_{c}.csv",
            "asn,measurements\n" + "".join(f"{a},{n}\n" for a, n in sorted(counts.items())),
        )
        rows = unique_per_year(per_run, labels)
        out.text(f"unique_per_year_{c}.csv", lambda fh, rows=rows: write_rows_csv(rows, fh))
    out.manifest(
        "similarity",
        {"case": case, "more_than": list(more_than), "labels": [d["label"] for d in docs]},
        [("run", str(Path(r) / "asn_sets.json")) for r in runs],
    )
    click.echo(f"{len(docs)} runs compared -> {output}")


@main.command("crosscheck")
@click.argument("runs", nargs=-1, required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--spoofer", type=click.Path(exists=True, dir_okay=False), help="CSV asn,timestamp,routedspoof.")
@click.option("--manrs", type=click.Path(exists=True, dir_okay=False), help="CSV asn,anti_spoofing_conformant,member_since.")
@click.option("--metadata", type=click.Path(exists=True, dir_okay=False), help="CSV asn,rir,country,category_l1,category_l2,lat,lon.")
@click.option("--window-days", type=int, default=DEFAULT_WINDOW.days, show_default=True)
@click.option("--manrs-cutoff", type=click.DateTime(["%Y-%m-%d"]), help="Membership cutoff for the 'Before' rows.")
@click.option("--manrs-snapshot", type=click.DateTime(["%Y-%m-%d"]), help="Date of the MANRS export, for staleness warnings.")
@click.option("--top-countries", type=int, default=10, show_default=True)
@click.option("--case", type=click.Choice(["BA", "BB", "BC", "all"]), default="all", show_default=True)
@click.option("-o", "--output", required=True, type=click.Path(file_okay=False))
def crosscheck_cmd(runs, spoofer, manrs, metadata, window_days, manrs_cutoff, manrs_snapshot, top_countries, case, output):
    """Join transit ASNs with Spoofer, MANRS and AS metadata."""
    if window_days <= 0:
        raise ExitError("--window-days must be positive", EXIT_CONFIG)
    if not (spoofer or manrs or metadata):
        raise ExitError("nothing to join: give --spoofer, --manrs and/or --metadata", EXIT_CONFIG)
    docs = _load_runs(runs)
    window = timedelta(days=window_days)
    try:
        spoof = load_spoofer_csv(spoofer) if spoofer else None
        manrs_recs = load_manrs_csv(manrs) if manrs else None
        meta = load_metadata_csv(metadata) if metadata else None
    except InputFormatError as exc:
        raise ExitError(str(exc), EXIT_PARSE) from None
    times = {}
    for d in docs:
        if d.get("measurement_time") is None:
            raise ExitError(f"run {d['label']} has no measurement time", EXIT_CONFIG)
        times[d["label"]] = parse_ts(d["measurement_time"])
    labels = sorted({lab for d in docs for lab in d["sets"]})

    out = OutputDir(output)
    warnings = []
    conflicts: list[int] = []
    for c in _cases(case):
        per_class: dict[str, dict[int, list[datetime]]] = {lab: {} for lab in labels}
        for d in docs:
            for lab, asns in _run_sets(d, c).items():
                for a in asns:
                    per_class[lab].setdefault(a, []).append(times[d["label"]])
        flat = {lab: set(v) for lab, v in per_class.items()}
        if spoof is not None:
            rows = crosscheck_summary(per_class, spoof, window, labels)
            out.text(f"spoofer_{c}.csv", lambda fh, rows=rows: write_rows_csv(rows, fh))
        if manrs_recs is not None:
            cutoff = manrs_cutoff.date() if manrs_cutoff else min(times.values()).date()
            res = manrs_join(flat, manrs_recs, cutoff, labels)
            out.text(f"manrs_{c}.csv", lambda fh, rows=res.rows: write_rows_csv(rows, fh))
            conflicts = res.conflicts
        if meta is not None:
            e = enrich(flat, meta, labels, top_countries)
            for name in ("rir", "category_l1", "category_l2", "top_countries", "country_pivot", "scatter"):
                rows = getattr(e, name)
                header = {
                    "rir": "rir,asns,pct\n",
                    "category_l1": "category_l1,asns,pct\n",
                    "category_l2": "category,asns,pct\n",
                    "scatter": "class,asn,lat,lon,occurrences\n",
                }.get(name, "country,asns," + ",".join(labels) + "\n")
                if rows:
                    out.text(f"enrich/{c}/{name}.csv", lambda fh, rows=rows: write_rows_csv(rows, fh))
                else:
                    out.text(f"enrich/{c}/{name}.csv", header)
    if manrs_recs is not None:
        out.text("manrs_conflicts.csv", "asn\n" + "".join(f"{a}\n" for a in conflicts))
        if conflicts:
            warnings.append(f"{len(conflicts)} ASNs have conflicting MANRS records and were excluded")
        if manrs_snapshot:
            for d in docs:
                w = snapshot_warning(times[d["label"]].date(), manrs_snapshot.date(), window)
                if w:
                    warnings.append(f"{d['label']}: {w}")
    out.text("warnings.txt", "".join(f"{w}\n" for w in warnings))
    for w in warnings:
        log.warning("%s", w)
    inputs = [("run", str(Path(r) / "asn_sets.json")) for r in runs]
    inputs += [(role, p) for role, p in (("spoofer", spoofer), ("manrs", manrs), ("metadata", metadata)) if p]
    out.manifest(
        "crosscheck",
        {
            "case": case,
            "window_days": window_days,
            "manrs_cutoff": manrs_cutoff.date().isoformat() if manrs_cutoff else None,
            "manrs_snapshot": manrs_snapshot.date().isoformat() if manrs_snapshot else None,
            "top_countries": top_countries,
        },
        inputs,
    )
    click.echo(f"cross-checked {len(docs)} runs -> {output}")


@main.group("synth")
def synth_group():
    """Synthetic topologies, RIBs and corpora with known answers."""


@synth_group.command("generate")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--traces", "n_traces", type=click.IntRange(0), default=1000, show_default=True)
@click.option("--plant", multiple=True, help="CLASS=RATE, e.g. rfc1918=0.197 (repeatable).")
@click.option("--unrouted", default="0", show_default=True, help="Fraction of traces with unrouted destinations.")
@click.option("--internal", default="0", show_default=True, help="Fraction of traces with an RFC1918 hop inside the VP's own AS.")
@click.option("--ases", type=click.IntRange(8), default=40, show_default=True)
@click.option("--vps", type=click.IntRange(1), default=6, show_default=True)
@click.option("-o", "--output", required=True, type=click.Path(file_okay=False))
def synth_generate(seed, n_traces, plant, unrouted, internal, ases, vps, output):
    """Write rib.mrt, traces.jsonl and truth.json for one seed."""
    from .synth import InfeasibleRate, generate, random_topology

    known = {lab.lower(): lab for lab in DEFAULT_REGISTRY.labels()}
    rates = {}
    for name, value in _pairs(plant, "--plant").items():
        lab = known.get(name.lower())
        if lab is None:
            raise ExitError(f"--plant: unknown class {name!r}", EXIT_CONFIG)
        rates[lab] = value
    if vps >= ases:
        raise ExitError("--vps must be smaller than --ases", EXIT_CONFIG)
    try:
        topo = random_topology(seed, n_ases=ases, n_vps=vps)
        res = generate(topo, n_traces, rates, unrouted_rate=unrouted, internal_rate=internal)
    except InfeasibleRate as exc:
        raise ExitError(f"infeasible plant rate: {exc}", EXIT_CONFIG) from None
    except ValueError as exc:
        raise ExitError(str(exc), EXIT_CONFIG) from None
    out = OutputDir(output)
    out.binary("rib.mrt", res.mrt)
    out.text("traces.jsonl", res.corpus)
    out.text("truth.json", res.truth.to_json())
    out.manifest(
        "synth generate",
        {"seed": seed, "traces": n_traces, "plant": rates, "unrouted": unrouted, "internal": internal, "ases": ases, "vps": vps},
        [],
    )
    click.echo(f"seed {seed}: {n_traces} traces, planted {res.truth.planted} -> {output}")


@main.command("fetch")
@click.option("--date", "day", required=True, type=click.DateTime(["%Y-%m-%d"]))
@click.option("--cache", default=".bogon-cache", show_default=True)
@click.option("--template", multiple=True, help="Collector URL template NAME=URL; defaults to rrc00 and route-views2.")
def fetch_cmd(day, cache, template):
    """Download (or reuse cached) RIB snapshots for one date."""
    templates = _pairs(template, "--template") or DEFAULT_TEMPLATES
    try:
        for name, path in fetch_ribs(day.date(), Cache(cache), templates):
            click.echo(f"{name}\t{path}")
    except FetchError as exc:
        raise ExitError(str(exc), EXIT_PARSE) from None


def run() -> None:
    main(auto_envvar_prefix=ENV_PREFIX)


if __name__ == "__main__":
    run()
