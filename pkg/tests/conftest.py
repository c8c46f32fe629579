import re
import sys
from pathlib import Path

# make the sibling helper modules importable as plain modules
sys.path.insert(0, str(Path(__file__).parent))

_AC = re.compile(r"test_ac(\d+)_")
_results: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    m = _AC.match(name)
    if not m or not (report.when == "call" or report.outcome != "passed"):
        return
    num = int(m.group(1))
    # parametrised criteria pass only if every case passes
    if _results.get(num, ("PASSED",))[0] == "PASSED":
        _results[num] = (report.outcome.upper(), name[m.end():].replace("_", " "))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        outcome, title = _results[num]
        verdict = "PASS" if outcome == "PASSED" else "FAIL" if outcome == "FAILED" else outcome
        terminalreporter.write_line(f"AC{num:<3} {verdict:<5} {title}")
