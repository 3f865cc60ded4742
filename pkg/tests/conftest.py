from hypothesis import settings

# the first call of a numba kernel includes its JIT compile time
settings.register_profile("airsidekit", deadline=None)
settings.load_profile("airsidekit")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.acceptance_lines():
        terminalreporter.write_line(line)
