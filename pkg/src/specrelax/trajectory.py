"""Relaxation trajectories in log-domain spectral coordinates.

A trajectory is fully determined by its profile: the nontrivial eigenvalues
that carry weight and the log of the squared projection onto each.  Modal
energies at step k are exp(log_weight + 2k ln|lambda|), so every ledger
quantity is computed with log-sum-exp and survives k up to 1e9 without
underflow.  Modes with lambda = 0 die at k = 1 and are masked, never logged
as ln 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .chains import HypercubeProfile, ReversibleChain, SpectralDecomposition, pi_inner
from .errors import DeadTrajectory, DimensionMismatch, ZeroProjection

DROP_TOL = 1e-14  # relative weight below which a mode is pruned at projection


@dataclass(frozen=True)
class SpectralProfile:
    """Closed dynamical state of a trajectory: (eigenvalue, ln weight) pairs.

    The stationary mode is excluded.  `chain_lambda2`, when known, records the
    largest nontrivial eigenvalue of the ambient chain even if that mode was
    dropped for carrying no weight; slow-mode operations use it to flag a
    vanished slow projection.
    """

    lambdas: np.ndarray
    log_weights: np.ndarray
    dropped: int = 0
    chain_lambda2: float | None = None

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float, copy=True)
        lw = np.array(self.log_weights, dtype=float, copy=True)
        if lam.ndim != 1 or lam.shape != lw.shape:
            raise DimensionMismatch("lambdas and log_weights must be equal-length vectors")
        if lam.size == 0:
            raise ZeroProjection("profile must contain at least one mode")
        if np.any(np.abs(lam) > 1.0 + 1e-12) or np.any(lam >= 1.0):
            raise ValueError("mode eigenvalues must lie in [-1, 1) after centering")
        if not np.all(np.isfinite(lw)):
            raise ValueError("log weights must be finite")
        lam.setflags(write=False)
        lw.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "log_weights", lw)

    @property
    def n_modes(self) -> int:
        return self.lambdas.size

    def slow_index(self) -> int:
        """Index of the mode with the largest (signed) eigenvalue."""
        return int(np.argmax(self.lambdas))


@dataclass(frozen=True)
class ModalLedger:
    """Per-step record of modal energies, their distribution, and decay rate."""

    k: int
    log_modal_energies: np.ndarray  # -inf marks dead modes
    log_energy: float
    p: np.ndarray
    rho: float
    d: float
    terminal: bool = False

    def __post_init__(self):
        for name in ("log_modal_energies", "p"):
            a = np.array(getattr(self, name), dtype=float, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def energy(self) -> float:
        return float(np.exp(self.log_energy))


def project_initial(decomp: SpectralDecomposition, chain: ReversibleChain,
                    g0, drop_tol: float = DROP_TOL) -> SpectralProfile:
    """Project an initial vector onto the nontrivial eigenmodes.

    The stationary component is removed first; modes whose squared projection
    falls below drop_tol times the centered energy are pruned and counted in
    the profile's `dropped` field.
    """
    g0 = np.asarray(g0, dtype=float)
    if g0.shape != (chain.n,):
        raise DimensionMismatch(f"expected vector of length {chain.n}")
    mean = pi_inner(chain, g0, np.ones(chain.n))
    centered = g0 - mean
    total = pi_inner(chain, centered, centered)
    if total <= (1e-14 * np.sqrt(max(pi_inner(chain, g0, g0), 0.0))) ** 2:
        raise ZeroProjection("initial vector has no component off the stationary mode")
    coeffs = decomp.eigenvectors[:, 1:].T @ (chain.pi * centered)
    weights = coeffs ** 2
    keep = weights > drop_tol * total
    if not np.any(keep):
        raise ZeroProjection("all modal weights below the pruning threshold")
    return SpectralProfile(
        lambdas=decomp.eigenvalues[1:][keep],
        log_weights=np.log(weights[keep]),
        dropped=int(np.count_nonzero(~keep)),
        chain_lambda2=float(decomp.eigenvalues[1]),
    )


def profile_from_weights(lambdas, weights, **kw) -> SpectralProfile:
    """Convenience constructor from linear weights."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive; drop zero modes instead")
    return SpectralProfile(lambdas=np.asarray(lambdas, dtype=float),
                           log_weights=np.log(w), **kw)


def hypercube_trajectory(profile: HypercubeProfile) -> SpectralProfile:
    """Point-mass start on the hypercube: level weights equal multiplicities."""
    return SpectralProfile(
        lambdas=profile.lambdas[1:],
        log_weights=profile.log_multiplicities[1:],
    )


def _log_modal_energies(profile: SpectralProfile, k: int) -> np.ndarray:
    if k == 0:
        return profile.log_weights.copy()
    out = np.full(profile.n_modes, -np.inf)
    alive = profile.lambdas != 0.0
    out[alive] = profile.log_weights[alive] + (2.0 * k) * np.log(np.abs(profile.lambdas[alive]))
    return out


def ledger_at(profile: SpectralProfile, k: int) -> ModalLedger:
    """Modal ledger at step k.

    When every mode has died (all eigenvalues zero and k >= 1) the energy is
    exactly zero; a distinguished terminal ledger is returned rather than NaN.
    """
    if k < 0:
        raise ValueError("step must be nonnegative")
    log_n = _log_modal_energies(profile, k)
    alive = np.isfinite(log_n)
    if not np.any(alive):
        return ModalLedger(
            k=k,
            log_modal_energies=log_n,
            log_energy=-np.inf,
            p=np.zeros(profile.n_modes),
            rho=0.0,
            d=1.0,
            terminal=True,
        )
    log_E = float(logsumexp(log_n[alive]))
    p = np.zeros(profile.n_modes)
    p[alive] = np.exp(log_n[alive] - log_E)
    rho = float(np.sum(p * profile.lambdas ** 2))
    return ModalLedger(
        k=k,
        log_modal_energies=log_n,
        log_energy=log_E,
        p=p,
        rho=rho,
        d=1.0 - rho,
    )


@dataclass(frozen=True)
class DissipationStep:
    """One-step energy drop and its exact per-mode decomposition."""

    k: int
    delta_E: float
    modewise_terms: np.ndarray
    relative: float  # fraction of energy dissipated at step k

    def __post_init__(self):
        a = np.array(self.modewise_terms, dtype=float, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "modewise_terms", a)


def dissipation_step(profile: SpectralProfile, k: int) -> DissipationStep:
    """Energy dissipated between steps k and k+1, modewise and in total."""
    led = ledger_at(profile, k)
    if led.terminal:
        raise DeadTrajectory(f"energy is zero at step {k}")
    log_n = led.log_modal_energies
    n = np.where(np.isfinite(log_n), np.exp(log_n), 0.0)
    terms = (1.0 - profile.lambdas ** 2) * n
    return DissipationStep(
        k=k,
        delta_E=float(led.energy * led.d),
        modewise_terms=terms,
        relative=float(led.d),
    )


def matrix_oracle_step(chain: ReversibleChain, g) -> np.ndarray:
    """One dense kernel application; the brute-force cross-validation path."""
    g = np.asarray(g, dtype=float)
    if g.shape != (chain.n,):
        raise DimensionMismatch(f"expected vector of length {chain.n}")
    return chain.kernel @ g


def transport_residual(profile: SpectralProfile, k: int) -> float:
    """Max deviation of p(k+1) from the one-step occupation transport law."""
    led = ledger_at(profile, k)
    led_next = ledger_at(profile, k + 1)
    if led.terminal or led_next.terminal:
        raise DeadTrajectory(f"trajectory dead near step {k}")
    predicted = led.p + led.p * (profile.lambdas ** 2 - led.rho) / led.rho
    return float(np.max(np.abs(led_next.p - predicted)))


def oracle_energies(chain: ReversibleChain, g0, steps: int) -> np.ndarray:
    """Log energies ln ||P^k g0_centered||^2 for k = 0..steps via the matrix path.

    The iterate is re-centered and renormalized every step: exact dynamics
    carries no stationary mass, and renormalization keeps the accumulated
    log scale exact while the vector stays O(1).
    """
    g0 = np.asarray(g0, dtype=float)
    ones = np.ones(chain.n)
    g = g0 - pi_inner(chain, g0, ones)
    E0 = pi_inner(chain, g, g)
    if E0 <= 0:
        raise ZeroProjection("initial vector has no component off the stationary mode")
    out = np.empty(steps + 1)
    out[0] = np.log(E0)
    v = g / np.sqrt(E0)
    for k in range(steps):
        w = matrix_oracle_step(chain, v)
        w = w - pi_inner(chain, w, ones)
        r2 = pi_inner(chain, w, w)
        if r2 <= 0.0:
            out[k + 1:] = -np.inf
            break
        out[k + 1] = out[k] + np.log(r2)
        v = w / np.sqrt(r2)
    return out
