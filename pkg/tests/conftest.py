import subprocess
import sys
from pathlib import Path

import pytest

from chainforge import builtin_catalog, builtin_eu27, parse_flows, reconcile_mirror_flows
from chainforge.trade import weighted_average

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def catalog():
    return builtin_catalog()


@pytest.fixture(scope="session")
def eu27():
    return builtin_eu27()


@pytest.fixture(scope="session")
def fixture_tensor():
    records = []
    for name in ("trade_2007_2014.csv", "trade_2015_2022.csv"):
        records.extend(parse_flows(FIXTURES / name))
    return reconcile_mirror_flows(records, weighted_average(0.5), vintage=2007)


def run_cli(args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "chainforge.cli", *args],
        capture_output=True, text=True, cwd=cwd,
    )


@pytest.fixture(scope="session")
def pipeline_out(tmp_path_factory) -> Path:
    """One full CLI pipeline run over the bundled fixtures, shared by tests."""
    out = tmp_path_factory.mktemp("pipeline")
    for command in ("ingest", "rca", "fitness", "progression", "io-shares", "trends", "vulnerability"):
        proc = run_cli([command, "--config", str(FIXTURES / "pipeline.conf"), "--out", str(out)])
        assert proc.returncode == 0, f"{command} failed:\n{proc.stderr}"
    return out


# --- acceptance reporting ---------------------------------------------------------

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance_outcomes[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        status = "PASS" if _acceptance_outcomes[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
