import pytest

from spwell import SystemParams, compute_limit, scf_solve
from spwell.acceptance import AcceptanceContext


@pytest.fixture(scope="session")
def default_params():
    return SystemParams()


@pytest.fixture(scope="session")
def limit_solution(default_params):
    return compute_limit(default_params)


@pytest.fixture(scope="session")
def scf_default(default_params):
    # default h is already 0.05
    return scf_solve(default_params)


@pytest.fixture(scope="session")
def acceptance_ctx(default_params):
    return AcceptanceContext(default_params)
