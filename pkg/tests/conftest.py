import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from softrisk.config import default_dataset_config  # noqa: E402
from softrisk.pipeline import reference_labels, reference_records, run_pipeline  # noqa: E402

_criteria: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion this test checks")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = getattr(report, "criterion", None)
    if name:
        _criteria.setdefault(name, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker:
        report.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda c: int(c[1:])):
        outcomes = _criteria[name]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{name}: {verdict} ({outcomes.count('passed')}/{len(outcomes)} checks)")


@pytest.fixture(scope="session")
def config():
    return default_dataset_config()


@pytest.fixture(scope="session")
def records():
    return reference_records()


@pytest.fixture(scope="session")
def labels():
    return reference_labels()


@pytest.fixture(scope="session")
def reference_run(records, config, labels):
    return run_pipeline(records, config, labels)
