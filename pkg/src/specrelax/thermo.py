"""Entropy accounting for the modal distribution of a relaxation trajectory.

Everything here is an exact identity of the spectral dynamics, so tests pin
tight tolerances: the entropy balance splits the per-step entropy change into
a covariance transport term over the mean decay rate minus a KL contraction
term; the covariance itself has moment, canonical, and flux-force forms that
must agree; the energy-weighted entropy G = E * S is the monotone quantity.

Natural logarithms throughout.  A mode with eigenvalue zero dies after one
step; its vanished occupation contributes zero to every KL and covariance
sum (the 0 * ln 0 convention), which keeps the identities exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DeadMode,
    DeadTrajectory,
    Degenerate,
    InvalidArguments,
    NonConvergent,
    NoSlowMode,
    NotADistribution,
)
from .rigidity import rigidity_time, split_slow_fast
from .trajectory import ModalLedger, SpectralProfile, ledger_at, profile_from_weights

LN2 = math.log(2.0)


def spectral_entropy(p) -> float:
    """Shannon entropy (nats) of a modal distribution, with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise NotADistribution("negative probability entry")
    if abs(p.sum() - 1.0) > 1e-12:
        raise NotADistribution(f"probabilities sum to {p.sum()!r}")
    return _entropy(p)


def _entropy(p: np.ndarray) -> float:
    live = p > 0
    return float(-np.sum(p[live] * np.log(p[live])))


def _kl_next_given(led: ModalLedger, led_next: ModalLedger,
                   profile: SpectralProfile) -> float:
    """KL(p_{k+1} || p_k) from ledger log-occupations.

    Modes dead at k+1 contribute zero.  Using ln p directly (rather than the
    algebraically equal 2 ln|lambda| - ln rho) keeps the divergence exactly
    consistent with the entropies built from the same logs.
    """
    alive = led_next.p > 0
    logp_next = led_next.log_modal_energies[alive] - led_next.log_energy
    logp_here = led.log_modal_energies[alive] - led.log_energy
    return float(np.sum(led_next.p[alive] * (logp_next - logp_here)))


@dataclass(frozen=True)
class EntropyBalance:
    k: int
    dS: float
    cov: float
    cov_over_rho: float
    kl: float
    residual: float


def entropy_balance(profile: SpectralProfile, k: int) -> EntropyBalance:
    """Audit the exact entropy balance at step k; residual is pure roundoff."""
    led = ledger_at(profile, k)
    led_next = ledger_at(profile, k + 1)
    if led.terminal or led_next.terminal:
        raise DeadTrajectory(f"trajectory dead near step {k}")
    dS = _entropy(led_next.p) - _entropy(led.p)
    cov = canonical_covariance(profile, k).cov
    kl = _kl_next_given(led, led_next, profile)
    residual = abs(dS - cov / led.rho + kl)
    return EntropyBalance(k=k, dS=dS, cov=cov, cov_over_rho=cov / led.rho,
                          kl=kl, residual=residual)


@dataclass(frozen=True)
class CovarianceForms:
    k: int
    cov: float                      # canonical form, the reference value
    cov_moment: float
    cov_fluxforce: float
    fluxes: np.ndarray              # J_i per fast mode (dead modes: 0)
    affinities: np.ndarray          # A_i = ln(n_i / n_slow), -inf when dead
    term_scale: float               # sum |J_i A_i|, conditioning scale of the sum

    def __post_init__(self):
        for name in ("fluxes", "affinities"):
            a = np.array(getattr(self, name), dtype=float, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def canonical_covariance(profile: SpectralProfile, k: int) -> CovarianceForms:
    """Covariance of (lambda^2, ln 1/p) under p_k, in its three exact forms.

    The canonical form is the reference: its differences rho - lambda_i^2
    avoid the cancellation of large entropies that afflicts the moment form.
    """
    split = split_slow_fast(profile)
    led = ledger_at(profile, k)
    if led.terminal:
        raise DeadTrajectory(f"energy is zero at step {k}")
    lam = profile.lambdas
    log_n = led.log_modal_energies
    alive = np.isfinite(log_n)
    slow = split.slow_index
    if not alive[slow]:
        raise NoSlowMode(
            f"slow mode is dead at step {k}; affinities are undefined")

    # moment form: -sum p (lambda^2 - rho) ln p
    logp = np.where(alive, log_n - led.log_energy, 0.0)
    cov_moment = float(-np.sum(led.p[alive] * (lam[alive] ** 2 - led.rho) * logp[alive]))

    # canonical form on a scaled linear copy of the modal energies
    shift = float(np.max(log_n[alive]))
    n_scaled = np.where(alive, np.exp(log_n - shift), 0.0)
    E_scaled = float(n_scaled.sum())
    aff = np.where(alive, log_n - log_n[slow], -np.inf)
    fast = np.arange(profile.n_modes) != slow
    use = fast & alive
    cov_canonical = float(np.sum(
        n_scaled[use] * (led.rho - lam[use] ** 2) * aff[use]) / E_scaled)

    # flux-force form
    J = np.where(fast, led.p * (led.rho - lam ** 2), 0.0)
    cov_fluxforce = float(np.sum(J[use] * aff[use]))
    term_scale = float(np.sum(np.abs(J[use] * aff[use])))

    return CovarianceForms(
        k=k, cov=cov_canonical, cov_moment=cov_moment,
        cov_fluxforce=cov_fluxforce, fluxes=J,
        affinities=aff, term_scale=term_scale,
    )


@dataclass(frozen=True)
class TwoModeTransition:
    k_star: int                  # first step with slow fraction >= 1/2
    k_real: float                # real-valued crossing of the weight ratio
    entropy_at_crossing: float   # interpolated entropy there (= ln 2)


def two_mode_transition(lambda2: float, lambdaj: float,
                        w2: float, wj: float) -> TwoModeTransition:
    """Half-rigidity crossing of a two-mode trajectory."""
    if w2 <= 0 or wj <= 0:
        raise InvalidArguments("both weights must be positive")
    if not (lambda2 > abs(lambdaj) > 0):
        raise Degenerate(
            f"need lambda2 > |lambdaj| > 0, got {lambda2!r}, {lambdaj!r}")
    profile = profile_from_weights([lambda2, lambdaj], [w2, wj])
    report = rigidity_time(profile, 0.5)
    k_real = math.log(wj / w2) / (2.0 * math.log(lambda2 / abs(lambdaj)))
    # continuous-time slow fraction at the crossing; exactly 1/2 up to roundoff
    ratio = (wj / w2) * (abs(lambdaj) / lambda2) ** (2.0 * k_real)
    alpha = 1.0 / (1.0 + ratio)
    entropy = _binary_entropy(alpha)
    return TwoModeTransition(k_star=report.t_rigid, k_real=k_real,
                             entropy_at_crossing=entropy)


def _binary_entropy(a: float) -> float:
    s = 0.0
    if a > 0:
        s -= a * math.log(a)
    if a < 1:
        s -= (1.0 - a) * math.log(1.0 - a)
    return s


@dataclass(frozen=True)
class GeneralThreshold:
    delta_star: float
    t_threshold: int


def general_threshold(profile: SpectralProfile, cap: int | None = None) -> GeneralThreshold:
    """Rigidity level past which the covariance is negative and entropy falls."""
    split = split_slow_fast(profile)
    if split.fast_weight == 0.0:
        return GeneralThreshold(delta_star=0.5, t_threshold=0)
    if split.slow_lambda <= 0 or split.degenerate:
        raise Degenerate("threshold requires strict slow/fast separation")
    ratio_sq = (split.fast_abs_lambda / split.slow_lambda) ** 2
    delta_star = 1.0 - max(0.5, ratio_sq)
    report = rigidity_time(profile, delta_star, cap=cap)
    if not report.reached:
        raise NonConvergent("rigidity threshold not reached within cap")
    return GeneralThreshold(delta_star=delta_star, t_threshold=report.t_rigid)


@dataclass(frozen=True)
class ClausiusCheck:
    lhs: float                   # accumulated KL divergences
    rhs: float                   # initial entropy + accumulated cov / rho
    residual: float
    steps_used: int
    entropy_at_stop: float


def clausius_check(profile: SpectralProfile,
                   entropy_floor: float = 1e-12,
                   cap: int = 100_000) -> ClausiusCheck:
    """Sum the entropy balance over the whole trajectory and compare sides.

    Both series are truncated once the spectral entropy drops below
    `entropy_floor`; the telescoped identity bounds the truncation error by
    the remaining entropy.
    """
    split = split_slow_fast(profile)
    if split.fast_weight > 0 and (split.degenerate or split.slow_lambda <= 0.0):
        raise NonConvergent(
            "degenerate slow cluster: spectral entropy does not vanish")
    led = ledger_at(profile, 0)
    S0 = _entropy(led.p)
    kl_sum = 0.0
    cov_sum = 0.0
    k = 0
    S_here = S0
    while S_here >= entropy_floor and k < cap:
        led_next = ledger_at(profile, k + 1)
        if led_next.terminal:
            S_here = 0.0
            break
        cov = canonical_covariance(profile, k).cov
        cov_sum += cov / led.rho
        kl_sum += _kl_next_given(led, led_next, profile)
        led = led_next
        k += 1
        S_here = _entropy(led.p)
    lhs = kl_sum
    rhs = S0 + cov_sum
    return ClausiusCheck(lhs=lhs, rhs=rhs, residual=abs(lhs - rhs),
                         steps_used=k, entropy_at_stop=S_here)


@dataclass(frozen=True)
class SecondLawStep:
    k: int
    G_k: float
    G_k1: float
    A: float                     # occupation-disorder release, >= 0 termwise
    B: float                     # decay-rate dispersion release, >= 0


def G_step(profile: SpectralProfile, k: int) -> SecondLawStep:
    """One step of the energy-weighted entropy G = E * S and its exact split."""
    led = ledger_at(profile, k)
    led_next = ledger_at(profile, k + 1)
    if led.terminal or led_next.terminal:
        raise DeadTrajectory(f"trajectory dead near step {k}")
    lam = profile.lambdas
    alive = np.isfinite(led.log_modal_energies)
    n = np.where(alive, np.exp(led.log_modal_energies), 0.0)
    logp = np.where(alive, led.log_modal_energies - led.log_energy, 0.0)
    E_k = led.energy
    A = float(np.sum(n[alive] * (1.0 - lam[alive] ** 2) * (-logp[alive])))
    lam_pos = alive & (lam != 0.0)
    # ratio form of E[x ln x] - rho ln rho (x = lambda^2): one less layer of
    # cancellation between large logs, and exactly zero for a single mode
    x = lam[lam_pos] ** 2
    B = float(E_k * np.sum(led.p[lam_pos] * x * np.log(x / led.rho)))
    G_k = E_k * _entropy(led.p)
    G_k1 = led_next.energy * _entropy(led_next.p)
    return SecondLawStep(k=k, G_k=G_k, G_k1=G_k1, A=A, B=B)


def helmholtz_like(profile: SpectralProfile, k: int) -> float:
    """E * (1 - S): the non-monotone negative control for the second law."""
    led = ledger_at(profile, k)
    if led.terminal:
        raise DeadTrajectory(f"energy is zero at step {k}")
    return float(led.energy * (1.0 - _entropy(led.p)))


@dataclass(frozen=True)
class EntropySplit:
    k: int
    alpha2: float
    H_binary: float
    H_fast: float
    total: float                 # H_binary + (1 - alpha2) * H_fast


def entropy_decomposition(profile: SpectralProfile, k: int) -> EntropySplit:
    """Split the spectral entropy into slow/fast competition and fast disorder."""
    split = split_slow_fast(profile)
    led = ledger_at(profile, k)
    if led.terminal:
        raise DeadTrajectory(f"energy is zero at step {k}")
    alpha2 = float(led.p[split.slow_index])
    fast_p = np.delete(led.p, split.slow_index)
    rest = float(fast_p.sum())   # 1 - alpha2 without cancellation
    H_bin = 0.0
    if alpha2 > 0:
        H_bin -= alpha2 * math.log(alpha2)
    if rest > 0:
        H_bin -= rest * math.log(rest)
    if rest <= 0.0:
        H_fast = 0.0
    else:
        H_fast = _entropy(fast_p / rest)
    return EntropySplit(k=k, alpha2=alpha2, H_binary=H_bin, H_fast=H_fast,
                        total=H_bin + rest * H_fast)


@dataclass(frozen=True)
class FdtCheck:
    mode: int
    k: int
    ratio: float                 # (C(k+1) - C(k)) / C(k)
    expected: float              # lambda^2 - 1


def fdt_check(profile: SpectralProfile, mode: int, k: int) -> FdtCheck:
    """Per-mode relative energy decrement; equals lambda^2 - 1 at every step."""
    if not (0 <= mode < profile.n_modes):
        raise InvalidArguments(f"mode index {mode} out of range")
    lam = float(profile.lambdas[mode])
    if lam == 0.0 and k >= 1:
        raise DeadMode(f"mode {mode} died at step 1")
    ratio = -1.0 if lam == 0.0 else float(math.expm1(2.0 * math.log(abs(lam))))
    return FdtCheck(mode=mode, k=k, ratio=ratio, expected=lam * lam - 1.0)
