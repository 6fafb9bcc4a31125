import numpy as np
import pytest

from siqrctl import model
from siqrctl.model import REFERENCE_PARAMS

INITIAL = (9.0, 1.0, 0.0, 0.0)


@pytest.fixture
def ref():
    return REFERENCE_PARAMS


@pytest.fixture(scope="session")
def dfe_params():
    return REFERENCE_PARAMS.replace(alpha=0.08)


@pytest.fixture(scope="session")
def dfe_run(dfe_params):
    return model.simulate(dfe_params, INITIAL, 500.0, 0.01)


@pytest.fixture(scope="session")
def endemic_run():
    return model.simulate(REFERENCE_PARAMS, INITIAL, 2000.0, 0.01)


def random_params(rng: np.random.Generator) -> model.ModelParams:
    """Validated parameter draw with eta >= epsilon."""
    eta = rng.uniform(0.0, 0.5)
    return model.ModelParams(
        delta=rng.uniform(0.01, 1.0),
        alpha=rng.uniform(0.01, 1.0),
        gamma=rng.uniform(0.0, 0.5),
        mu=rng.uniform(0.005, 0.2),
        eta=eta,
        epsilon=rng.uniform(0.0, eta),
        rho=rng.uniform(0.0, 0.5),
        v=rng.uniform(0.0, 0.5),
    )


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
