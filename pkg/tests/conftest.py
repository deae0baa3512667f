import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# nodeid -> [criterion number, title, outcome, seconds]
_criteria: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


def pytest_collection_finish(session):
    for item in session.items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _criteria[item.nodeid] = [*marker.args, "NOT RUN", 0.0]


def pytest_runtest_logreport(report):
    entry = _criteria.get(report.nodeid)
    if entry is None:
        return
    entry[3] += report.duration
    if report.failed:
        entry[2] = "FAIL"
    elif report.skipped and entry[2] != "FAIL":
        entry[2] = "SKIP"
    elif report.when == "call" and entry[2] == "NOT RUN":
        entry[2] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, seconds in sorted(_criteria.values(), key=lambda e: e[0]):
        terminalreporter.write_line(f"{outcome}  AC{number}  {title}  ({seconds:.2f}s)")
