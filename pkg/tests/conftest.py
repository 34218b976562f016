"""
Shared fixtures
"""
import numpy as np
import pytest

from app.core.config import Settings
from app.services.hybrid_search import HybridPrecodingService
from app.services.maxmin_solver import MaxMinSolver


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def settings():
    # No .env lookup so local overrides cannot change test behaviour
    return Settings(_env_file=None, WORKERS=1, N_CANDIDATES=200)


@pytest.fixture
def solver(settings):
    return MaxMinSolver(settings=settings)


@pytest.fixture
def service(solver):
    return HybridPrecodingService(solver)
