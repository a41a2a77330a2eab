import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "qhnf",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qhnf")

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "seconds": 0.0, "tests": 0})
    if report.when == "call":
        entry["tests"] += 1
        entry["seconds"] += report.duration
    if report.failed or report.skipped:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] and e["tests"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d}: {status}  {e['title']}  ({e['tests']} checks, {e['seconds']:.2f} s)"
        )
