"""Shared helpers: seeded instance generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from permsmin.perm import sample_uniform
from permsmin.spectral import CycleDiagonal


def random_cycle(rng: np.random.Generator, n: int, mu: float = -0.2,
                 sigma: float = 0.8) -> CycleDiagonal:
    """Random cycle diagonal with log-normal radii and uniform phases."""
    d = np.exp(rng.normal(mu, sigma, n)) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    return CycleDiagonal(d)


def random_perm_instance(rng: np.random.Generator, n: int, mu: float = -0.2,
                         sigma: float = 0.8):
    """(sigma, full diagonal): uniform permutation, log-normal entries."""
    perm = sample_uniform(n, rng)
    d = np.exp(rng.normal(mu, sigma, n)) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    return perm, d


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
