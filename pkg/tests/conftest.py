import os

from hypothesis import HealthCheck, settings

import builders

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    if not builders.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(builders.ACCEPTANCE):
        ok, title = builders.ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}")
