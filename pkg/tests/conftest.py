import pytest

_CRITERIA: dict[int, dict] = {}


@pytest.fixture
def record(request):
    """Attach a short measurement note to the test's acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")
    notes = _CRITERIA.setdefault(marker.args[0], {"title": marker.args[1], "ok": True, "notes": []})["notes"]
    return notes.append


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.failed):
        entry = _CRITERIA.setdefault(marker.args[0], {"title": marker.args[1], "ok": True, "notes": []})
        entry["ok"] = entry["ok"] and not report.failed
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] else "FAIL"
        notes = "; ".join(entry["notes"])
        terminalreporter.write_line(f"criterion {number:2d} {status}  {entry['title']}" + (f"  [{notes}]" if notes else ""))
