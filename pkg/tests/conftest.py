"""Shared pytest hooks."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Repeat the one-line CRITERION verdicts after the run.

    Capture swallows the stdout of passing tests, so without this the
    scoreboard would only show the failed criteria.
    """
    lines = set()
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for ln in getattr(rep, "capstdout", "").splitlines():
                if ln.startswith("CRITERION"):
                    lines.add(ln)
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines):
            terminalreporter.write_line(ln)
