import pytest

from passive_bb84 import ChannelParams, ProtocolParams


@pytest.fixture
def table_params():
    return ProtocolParams()


@pytest.fixture
def mc_params():
    # desk-scale configuration used by the statistical checks
    return ProtocolParams(N=1e5, p_Z=0.75, p_X=0.25, q=0.25, mu_S=0.5, mu_D=0.05,
                          d=1e-3, delta_mis=0.0)


@pytest.fixture
def mid_channel():
    return ChannelParams(0.3)


ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
