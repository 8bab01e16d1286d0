import warnings

import pytest

from gausscool.modulation import AmplitudeWarning

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _quiet_amplitude_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmplitudeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
