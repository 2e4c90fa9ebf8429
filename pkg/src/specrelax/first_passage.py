"""Absorbing-chain spectra, first-passage tails, and the exponential-tail bound.

Absorbing one state leaves a substochastic block that is still self-adjoint
under the restricted stationary weights, so its spectrum is real and
interlaces the base spectrum.  Tail probabilities are computed both by
propagating the survival mass through the block and from the block's
eigenexpansion; the two must agree to near machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import ReversibleChain
from .errors import BadStart, Degenerate, InvalidArguments, InvalidState


@dataclass(frozen=True)
class AbsorbingModel:
    """Base chain with one state made absorbing."""

    base: ReversibleChain
    target: int
    absorbed_kernel: np.ndarray   # full kernel with the target row frozen
    block: np.ndarray             # substochastic surviving block
    keep: np.ndarray              # surviving state indices
    nu: np.ndarray                # block eigenvalues, descending
    modes: np.ndarray             # block eigenvectors (columns), pi-orthonormal
    restricted_pi: np.ndarray     # base stationary weights on surviving states

    def __post_init__(self):
        for name in ("absorbed_kernel", "block", "nu", "modes", "restricted_pi"):
            a = np.array(getattr(self, name), dtype=float, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        idx = np.array(self.keep, dtype=int, copy=True)
        idx.setflags(write=False)
        object.__setattr__(self, "keep", idx)


def absorb(chain: ReversibleChain, target: int) -> AbsorbingModel:
    """Freeze one state and diagonalize the surviving substochastic block."""
    if not (0 <= target < chain.n):
        raise InvalidState(f"state {target} out of range for n = {chain.n}")
    if chain.n < 2:
        raise InvalidState("need at least two states to absorb one")
    P_a = chain.kernel.copy()
    P_a[target, :] = 0.0
    P_a[target, target] = 1.0
    keep = np.array([i for i in range(chain.n) if i != target])
    block = chain.kernel[np.ix_(keep, keep)]
    pr = chain.pi[keep]
    d = np.sqrt(pr)
    sym = (d[:, None] * block) / d[None, :]
    sym = 0.5 * (sym + sym.T)
    evals, evecs = np.linalg.eigh(sym)
    order = np.argsort(-evals)
    return AbsorbingModel(
        base=chain,
        target=target,
        absorbed_kernel=P_a,
        block=block,
        keep=keep,
        nu=evals[order],
        modes=(evecs / d[:, None])[:, order],
        restricted_pi=pr,
    )


def restricted_stationary_start(model: AbsorbingModel) -> np.ndarray:
    """Base stationary law conditioned off the target state."""
    return model.restricted_pi / model.restricted_pi.sum()


def quasistationary_start(model: AbsorbingModel) -> np.ndarray:
    """Left Perron vector of the surviving block, as a probability row."""
    u = model.modes[:, 0]
    w = u * model.restricted_pi          # left eigenvector of the block
    if w.sum() < 0:
        w = -w
    if np.any(w < -1e-12 * np.abs(w).max()):
        raise Degenerate("Perron vector of the block is not sign-definite")
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def uniform_start(model: AbsorbingModel) -> np.ndarray:
    m = model.keep.size
    return np.full(m, 1.0 / m)


def tail_coefficients(model: AbsorbingModel, start) -> np.ndarray:
    """Spectral weights of the survival expansion for a given start law.

    The tail probability is sum_i alpha_i nu_i^k; the coefficients sum to one
    for any start supported off the target.
    """
    start = _validate_start(model, start)
    # block^k = Phi diag(nu^k) Phi^T diag(pi_restricted)
    left = start @ model.modes                      # start in the mode basis
    right = model.modes.T @ model.restricted_pi     # <phi_i, 1>_pi
    return left * right


def _validate_start(model: AbsorbingModel, start) -> np.ndarray:
    start = np.asarray(start, dtype=float)
    if start.shape == (model.base.n,):
        if abs(start[model.target]) > 0:
            raise BadStart("start distribution puts mass on the absorbing state")
        start = start[model.keep]
    elif start.shape != (model.keep.size,):
        raise BadStart(
            f"start must have length {model.base.n} or {model.keep.size}")
    if np.any(start < 0) or abs(start.sum() - 1.0) > 1e-12:
        raise BadStart("start must be a probability vector")
    return start


@dataclass(frozen=True)
class TailValue:
    k: int
    spectral: float               # sum alpha_i nu_i^k
    matrix: float                 # survival mass after k block applications
    coefficients: np.ndarray

    def __post_init__(self):
        a = np.array(self.coefficients, dtype=float, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "coefficients", a)


def fpt_tail(model: AbsorbingModel, start, k: int) -> TailValue:
    """Probability the first passage to the target exceeds k steps."""
    if k < 0:
        raise InvalidArguments("k must be nonnegative")
    s = _validate_start(model, start)
    alpha = tail_coefficients(model, s)
    spectral = float(np.sum(alpha * model.nu ** k))
    mass = s.copy()
    for _ in range(k):
        mass = mass @ model.block
    matrix = float(mass.sum())
    return TailValue(k=k, spectral=spectral, matrix=matrix, coefficients=alpha)


def tail_curve(model: AbsorbingModel, start, k_max: int) -> np.ndarray:
    """Matrix-path survival probabilities for k = 0..k_max."""
    s = _validate_start(model, start)
    out = np.empty(k_max + 1)
    mass = s.copy()
    out[0] = mass.sum()
    for k in range(1, k_max + 1):
        mass = mass @ model.block
        out[k] = mass.sum()
    return out


@dataclass(frozen=True)
class TailBound:
    k: int
    relative_error_bound: float
    actual_relative_error: float

    @property
    def satisfied(self) -> bool:
        return self.actual_relative_error <= self.relative_error_bound


def exponential_tail_bound(lambda2: float, lambda3: float, delta: float,
                           init_ratio: float, k: int, nu2: float,
                           alpha2_coef: float, tail_prob: float) -> TailBound:
    """Certified relative error of the single-mode exponential tail.

    `tail_prob` is the exact survival probability at step k (from fpt_tail);
    the bound uses the base-chain separation and the initial fast/slow weight
    ratio.  The bound's constant comes from a proof sketch; callers should
    treat violations as monitored findings.
    """
    lam3 = abs(lambda3)
    if not (0.0 < lam3 < lambda2 <= 1.0):
        raise Degenerate(f"need 0 < |lambda3| < lambda2, got {lambda2!r}, {lambda3!r}")
    if not (0.0 < delta < 0.5):
        raise InvalidArguments(f"delta must lie in (0, 1/2), got {delta!r}")
    if nu2 <= 0 or alpha2_coef == 0:
        raise InvalidArguments("need a positive dominant absorbed eigenvalue "
                               "and a nonzero leading coefficient")
    C = (1.0 - lam3 ** 2) / (lambda2 ** 2 - lam3 ** 2)
    bound = C * (delta + init_ratio * (lam3 / lambda2) ** (2 * k))
    approx = alpha2_coef * nu2 ** k
    actual = abs(tail_prob / approx - 1.0)
    return TailBound(k=k, relative_error_bound=float(bound),
                     actual_relative_error=float(actual))
