import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def detail(request):
    """Append a measured quantity to the acceptance line of this test."""
    notes = []
    request.node.user_properties.append(("detail", notes))
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "status": "PASS", "notes": []})
    if rep.failed:
        entry["status"] = "FAIL"
    elif rep.skipped and rep.when != "teardown":
        entry["status"] = "SKIP"
    if rep.when == "teardown":
        for key, notes in item.user_properties:
            if key == "detail":
                entry["notes"] = list(notes)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        notes = "; ".join(e["notes"])
        terminalreporter.write_line(f"{e['status']:4s} {number:2d}. {e['title']}" + (f"  [{notes}]" if notes else ""))
