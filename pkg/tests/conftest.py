import numpy as np
import pytest

from mukailift import lifting, slicing

acceptance_lines = []


def record_acceptance(line: str):
    """Collected by the acceptance tests; echoed after the run summary."""
    acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def slice_start() -> slicing.SliceStart:
    """One bootstrap (stages 1-2) shared by every test that slices."""
    return slicing.prepare_start(np.random.default_rng(2024))


@pytest.fixture(scope="session")
def start_pair():
    """One lifting start pair shared by the lifting tests."""
    return lifting.make_start_pair(seed=5)


@pytest.fixture(scope="session")
def sliced(slice_start):
    """A slice of a fixed random complex section."""
    rng = np.random.default_rng(99)
    a_target = rng.standard_normal((8, 15)) + 1j * rng.standard_normal((8, 15))
    return a_target, slicing.slice_section(a_target, start=slice_start, rng=rng)
