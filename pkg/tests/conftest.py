import pytest

_CRITERIA = []


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion; its pass/fail line is printed at the end."""
    entry = {"name": None, "detail": "", "nodeid": request.node.nodeid}

    def declare(name, detail=""):
        entry["name"], entry["detail"] = name, detail

    def set_detail(detail):
        entry["detail"] = detail

    declare.detail = set_detail
    _CRITERIA.append(entry)
    return declare


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" or (report.when == "setup" and report.failed):
        for entry in _CRITERIA:
            if entry["nodeid"] == item.nodeid:
                entry["passed"] = report.passed


def pytest_terminal_summary(terminalreporter):
    rows = [e for e in _CRITERIA if e["name"]]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for e in rows:
        status = "PASS" if e.get("passed") else "FAIL"
        line = f"{status}  {e['name']}"
        if e["detail"]:
            line += f"  [{e['detail']}]"
        terminalreporter.write_line(line)
