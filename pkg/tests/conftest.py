import hypothesis


hypothesis.settings.register_profile("suite", max_examples=60, deadline=None)
hypothesis.settings.load_profile("suite")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion."""
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(report, "when", "call") in ("call", "setup"):
                lines.append((nodeid.split("::")[-1], label))
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in sorted(lines):
        terminalreporter.write_line(f"[{label}] {name}")
