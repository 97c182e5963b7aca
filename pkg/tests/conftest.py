import re

CRITERIA = {
    1: "ordinal kernel",
    2: "bamboo ground truth",
    3: "constructor soundness",
    4: "extension certificates",
    5: "amalgamation",
    6: "homogeneity",
    7: "coding round trip",
    8: "reconstruction",
    9: "universal layer",
    10: "reproducibility",
}

_results = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = dict(report.user_properties).get("detail", "")
        _results[number] = (report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, name in CRITERIA.items():
        if number not in _results:
            continue
        ok, detail = _results[number]
        line = f"criterion {number:2d} {name}: {'PASS' if ok else 'FAIL'}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
