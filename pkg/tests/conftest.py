from pathlib import Path

import pytest
from click.testing import CliRunner

from bogon_transit.cli import main

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def fixture_ribs() -> list[str]:
    return [str(DATA / "rrc00.20230718.mrt"), str(DATA / "route-views2.20230718.mrt.gz")]


@pytest.fixture
def run_cli():
    def _run(*args, env=None):
        runner = CliRunner()
        return runner.invoke(main, [str(a) for a in args], env=env, auto_envvar_prefix="BOGON_TRANSIT")

    return _run


@pytest.fixture
def analyze_fixture(tmp_path, fixture_ribs, run_cli):
    """Run ``analyze`` on the hand-built fixture and return the output directory."""

    def _go(name="run", *extra):
        out = tmp_path / name
        args = ["analyze", "--label", "2023-07", "--traces", DATA / "traces.jsonl", "-o", out]
        for r in fixture_ribs:
            args += ["--rib", r]
        res = run_cli(*args, *extra)
        assert res.exit_code == 0, res.output
        return out

    return _go
