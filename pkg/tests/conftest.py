from __future__ import annotations


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}
# module name -> list of outcomes of tests marked ``invariant``
INVARIANT_OUTCOMES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "invariant: randomized invariant suite of one module")


def pytest_collection_modifyitems(session, config, items):
    # the acceptance suite reads invariant outcomes recorded earlier in the session
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py") or it.fspath.basename == "test_acceptance.py")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "invariant" in report.keywords:
        module = report.nodeid.split("::", 1)[0].rsplit("/", 1)[-1]
        INVARIANT_OUTCOMES.setdefault(module, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
