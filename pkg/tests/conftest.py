import re

_CRITERION = re.compile(r"test_criterion_(\d\d)_([a-z0-9_]+?)(\[|$)")
_results: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    entry = _results.setdefault(int(m.group(1)), {"name": m.group(2).replace("_", " "), "ok": True, "seen": False})
    if report.when == "call" or report.failed:
        entry["seen"] = True
        if report.failed:
            entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        e = _results[k]
        status = "PASS" if e["ok"] and e["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {k:02d} {e['name']}: {status}")
