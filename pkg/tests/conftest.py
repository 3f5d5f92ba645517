import sys


def pytest_runtest_logreport(report):
    """Print one pass/fail line per acceptance criterion as it completes."""
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        status = "PASS" if report.passed else "FAIL"
        sys.stderr.write(f"\n[ACCEPTANCE] {name}: {status}\n")
    elif report.when == "setup" and report.skipped:
        sys.stderr.write(f"\n[ACCEPTANCE] {name}: SKIP\n")
