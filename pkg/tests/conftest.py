import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from falqon_factor.encoder import catalog_hamiltonian, load_catalog, solution_states

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def h551():
    h, rule = catalog_hamiltonian(551, "full")
    return h, rule, solution_states(h, rule, 551)


def random_pure(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def random_density(n, rng, rank=3):
    vs = [random_pure(n, rng) for _ in range(rank)]
    w = rng.dirichlet(np.ones(rank))
    return sum(wi * np.outer(v, v.conj()) for wi, v in zip(w, vs))
