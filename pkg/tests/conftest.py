import pytest

from monopole_spectra.ah_spectra import CHANNELS, solve_channel, solve_channel_weighted
from monopole_spectra.published import AH_LEVELS
from monopole_spectra.ymh import assemble


def level_count(channel):
    return len(AH_LEVELS[(channel.j, channel.s)])


@pytest.fixture(scope="session")
def channel_spectra():
    """R-line spectra at default settings, one entry per channel."""
    return {ch: solve_channel(ch, n_eigs=level_count(ch)) for ch in CHANNELS}


@pytest.fixture(scope="session")
def weighted_spectra():
    """Weighted r-form spectra at default settings, one entry per channel."""
    return {ch: solve_channel_weighted(ch, n_eigs=level_count(ch)) for ch in CHANNELS}


@pytest.fixture(scope="session")
def ymh_pair20():
    return assemble(20)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion and assert it."""

    def verdict(number, ok, detail):
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return verdict


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
