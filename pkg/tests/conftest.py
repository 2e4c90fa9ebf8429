"""Shared generators and brute-force oracles for the test suite.

Random chains come from symmetric positive weight matrices, which are
reversible by construction with stationary law proportional to row weight.
The plain-arithmetic modal oracle below recomputes every ledger quantity
without log-sum-exp; tests compare the package's log-domain path against it.
"""

import math

import numpy as np
import pytest

from specrelax import (
    ReversibleChain,
    build_chain,
    pi_inner,
    profile_from_weights,
    spectral_decomposition,
)


def random_reversible(n: int, rng: np.random.Generator,
                      lazy: bool = False) -> ReversibleChain:
    W = rng.uniform(0.1, 1.0, (n, n))
    W = 0.5 * (W + W.T)
    P = W / W.sum(axis=1, keepdims=True)
    if lazy:
        P = 0.5 * (np.eye(n) + P)
    return build_chain(P)


def random_profile(rng: np.random.Generator, n_modes: int | None = None,
                   ratio_bounds: tuple = (0.3, 0.9), lambda2_bounds=(0.5, 0.98),
                   allow_negative: bool = True):
    """Profile with a strict slow/fast separation and O(1) weights."""
    if n_modes is None:
        n_modes = int(rng.integers(2, 12))
    lam2 = float(rng.uniform(*lambda2_bounds))
    ratio = float(rng.uniform(*ratio_bounds))
    lam3 = ratio * lam2
    rest = rng.uniform(-lam3 if allow_negative else 0.05, lam3, n_modes - 2)
    lambdas = np.concatenate([[lam2, lam3], rest])
    weights = rng.uniform(0.05, 2.0, n_modes)
    return profile_from_weights(lambdas, weights)


def modal_oracle(lambdas, weights, k):
    """Plain-arithmetic modal energies, total, distribution, decay rate."""
    lam = np.asarray(lambdas, dtype=float)
    w = np.asarray(weights, dtype=float)
    if k == 0:
        n = w.copy()
    else:
        n = w * np.abs(lam) ** (2 * k)
    E = n.sum()
    p = n / E
    rho = float((p * lam ** 2).sum())
    return n, float(E), p, rho


def entropy_oracle(p) -> float:
    p = np.asarray(p, dtype=float)
    live = p > 0
    return float(-(p[live] * np.log(p[live])).sum())


def centered_random_start(chain, rng):
    g0 = rng.standard_normal(chain.n)
    return g0 - pi_inner(chain, g0, np.ones(chain.n))


def spectral_coefficients(chain, decomp, g0):
    """Projections of a centered vector on the nontrivial eigenvectors."""
    g0 = np.asarray(g0, dtype=float)
    return decomp.eigenvectors[:, 1:].T @ (chain.pi * g0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def hand_chain():
    """Two-state chain with stationary law (3/4, 1/4) and spectrum (1, 0.6)."""
    return build_chain([[0.9, 0.1], [0.3, 0.7]])


@pytest.fixture
def two_mode_profile():
    """Equal unit weights on eigenvalues 0.9 and 0.1."""
    return profile_from_weights([0.9, 0.1], [1.0, 1.0])


@pytest.fixture
def s8_two_mode():
    """Slow mode 0.95 with weight 0.1, fast mode 0.70 with weight 0.9."""
    return profile_from_weights([0.95, 0.70], [0.1, 0.9])
