import numpy as np
import pytest
from hypothesis import settings

from sympearson import ArModel, NormalInnovation

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def ar2_model():
    return ArModel((0.5, -0.3), mu=1.0, innovation=NormalInnovation(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
