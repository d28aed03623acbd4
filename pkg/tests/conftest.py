import genutil


def pytest_terminal_summary(terminalreporter):
    """One verdict line per acceptance criterion, capture-proof."""
    if genutil.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in genutil.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
