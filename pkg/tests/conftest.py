"""Shared test configuration.

Property suites run with a fixed Hypothesis profile: derandomized, no
deadline, so every run executes the same cases.
"""

from hypothesis import HealthCheck, settings

settings.register_profile(
    "logchow",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
    database=None,
)
settings.load_profile("logchow")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
