"""Per-criterion PASS/FAIL summary for the acceptance suite.

Acceptance tests carry ``@pytest.mark.criterion(n, "title")``. A criterion
passes when every test carrying its number passed.
"""

from collections import defaultdict

_results = defaultdict(list)
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _titles[m.args[0]] = m.args[1]


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    n = _criterion_of(report)
    if n is not None:
        _results[n].append(report.outcome == "passed")


def _criterion_of(report):
    for name, value in report.user_properties:
        if name == "criterion":
            return value
    return None


def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m is not None:
        item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_titles):
        outcomes = _results.get(n)
        if not outcomes:
            status = "NOT RUN"
        else:
            status = "PASS" if all(outcomes) else "FAIL"
        tr.write_line(f"criterion {n:2d}: {status}  {_titles[n]} ({sum(outcomes or [])}/{len(outcomes or [])} tests)")
