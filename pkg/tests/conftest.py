import pytest

_results: dict[int, dict] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line summary for an acceptance criterion; outcome is filled in by the report hook."""
    num = request.node.get_closest_marker("criterion").args[0]
    entry = _results.setdefault(num, {"title": request.node.get_closest_marker("criterion").args[1], "notes": [], "outcome": None})

    def note(text):
        entry["notes"].append(text)

    return note


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for num, entry in _results.items():
        if report.nodeid.endswith(entry.get("nodeid_suffix", "\0")):
            entry["outcome"] = report.outcome


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            _results.setdefault(m.args[0], {"title": m.args[1], "notes": [], "outcome": None})["nodeid_suffix"] = item.nodeid


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        e = _results[num]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(e["outcome"], "NOT RUN")
        detail = "; ".join(e["notes"])
        terminalreporter.write_line(f"[{status}] {num:2d}. {e['title']}" + (f" :: {detail}" if detail else ""))
