"""Reversible chain construction, validation, and spectral decomposition.

All inner products live in the stationary-weighted space: <f, g> = sum_x
f(x) g(x) pi(x).  Eigenproblems are solved on the symmetrized kernel
D^{1/2} P D^{-1/2} (D = diag(pi)) so the spectrum is real and the returned
eigenvectors are orthonormal in the weighted inner product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import gammaln

from .errors import (
    DegeneratePi,
    DimensionMismatch,
    EigensolveFailure,
    InvalidArguments,
    InvalidLaziness,
    InvalidSize,
    NonRealizable,
    NotReversible,
    Reducible,
    RowSumError,
    SpecRelaxError,
)


@dataclass(frozen=True)
class Tolerances:
    """Validation tolerances; defaults are module policy, overridable per call."""

    row_sum: float = 1e-12
    detailed_balance: float = 1e-10
    pi_floor: float = 1e-14
    eigen_residual: float = 1e-9
    orthonormality: float = 1e-10

    def override(self, **kw) -> "Tolerances":
        unknown = set(kw) - set(self.__dataclass_fields__)
        if unknown:
            raise InvalidArguments(f"unknown tolerance keys: {sorted(unknown)}")
        return replace(self, **kw)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class ReversibleChain:
    """A validated reversible Markov kernel with its stationary distribution."""

    kernel: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kernel", _readonly(self.kernel))
        object.__setattr__(self, "pi", _readonly(self.pi))

    @property
    def n(self) -> int:
        return self.kernel.shape[0]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and pi-orthonormal eigenvectors of the kernel."""

    eigenvalues: np.ndarray      # lambda_1 = 1 >= lambda_2 >= ... >= -1
    eigenvectors: np.ndarray     # column i is the eigenvector for eigenvalues[i]

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _readonly(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _readonly(self.eigenvectors))

    @property
    def relaxation_spectrum(self) -> np.ndarray:
        """Per-mode dissipation rates 1 - lambda_i, ascending from 0."""
        return 1.0 - self.eigenvalues


@dataclass(frozen=True)
class HypercubeProfile:
    """Analytic level spectrum of the n-dimensional hypercube walk.

    Level j carries eigenvalue 1 - 2j/n with log-multiplicity ln C(n, j);
    multiplicities are kept in log form so large n never overflows.
    """

    n: int
    lambdas: np.ndarray          # level eigenvalues, j = 0..n
    log_multiplicities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lambdas", _readonly(self.lambdas))
        object.__setattr__(self, "log_multiplicities", _readonly(self.log_multiplicities))


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def _stationary_from_kernel(kernel: np.ndarray) -> np.ndarray:
    """Dominant left fixed vector, normalized to a probability vector."""
    evals, evecs = np.linalg.eig(kernel.T)
    i = int(np.argmin(np.abs(evals - 1.0)))
    v = evecs[:, i]
    if np.max(np.abs(v.imag)) > 1e-8 * np.max(np.abs(v.real)):
        # complex contamination: fall back to power iteration on the transpose
        n = kernel.shape[0]
        v = np.full(n, 1.0 / n)
        for _ in range(100_000):
            nxt = v @ kernel
            nxt /= nxt.sum()
            if np.max(np.abs(nxt - v)) < 1e-14:
                v = nxt
                break
            v = nxt
    else:
        v = v.real
    if v.sum() < 0:
        v = -v
    return v / v.sum()


def build_chain(kernel, tol: Tolerances = DEFAULT_TOLERANCES) -> ReversibleChain:
    """Validate a kernel and return it with its computed stationary distribution.

    Raises RowSumError, Reducible, DegeneratePi or NotReversible when the
    corresponding invariant fails.
    """
    P = np.array(kernel, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"kernel must be square, got shape {P.shape}")
    if P.shape[0] < 1:
        raise InvalidSize("kernel must have at least one state")
    if np.any(P < 0):
        raise RowSumError("kernel has negative entries")
    rows = P.sum(axis=1)
    bad = np.where(np.abs(rows - 1.0) > tol.row_sum)[0]
    if bad.size:
        raise RowSumError(
            f"row {bad[0]} sums to {rows[bad[0]]!r}, off by more than {tol.row_sum}"
        )

    ncomp, _ = connected_components(P > 0, directed=True, connection="strong")
    if ncomp != 1:
        raise Reducible(f"positive-entry digraph splits into {ncomp} components")

    pi = _stationary_from_kernel(P)
    if np.any(pi <= tol.pi_floor):
        raise DegeneratePi(f"stationary weight min {pi.min()!r} is not positive")

    flow = pi[:, None] * P
    gap = np.abs(flow - flow.T)
    scale = np.maximum(flow, flow.T)
    mask = scale > 0  # both directions zero => gap is zero, nothing to test
    rel = np.zeros_like(gap)
    rel[mask] = gap[mask] / scale[mask]
    if np.any(rel > tol.detailed_balance):
        raise NotReversible(
            f"detailed balance violated, worst relative gap {float(rel.max())!r}")

    return ReversibleChain(kernel=P, pi=pi)


def spectral_decomposition(chain: ReversibleChain,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralDecomposition:
    """Full eigensystem of the kernel in the stationary-weighted inner product."""
    d = np.sqrt(chain.pi)
    sym = (d[:, None] * chain.kernel) / d[None, :]
    sym = 0.5 * (sym + sym.T)
    try:
        evals, evecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh rarely fails
        raise EigensolveFailure(str(exc)) from exc
    order = np.argsort(-evals)
    evals = evals[order]
    phi = (evecs / d[:, None])[:, order]
    # sign-normalize so the stationary column is the positive constant vector
    if phi[:, 0].sum() < 0:
        phi = phi.copy()
        phi[:, 0] = -phi[:, 0]
    dec = SpectralDecomposition(eigenvalues=evals, eigenvectors=phi)
    _check_decomposition(chain, dec, tol)
    return dec


def _check_decomposition(chain, dec, tol):
    lam, phi = dec.eigenvalues, dec.eigenvectors
    if abs(lam[0] - 1.0) > 1e-10:
        raise EigensolveFailure(f"top eigenvalue {lam[0]!r} is not 1")
    if np.max(np.abs(phi[:, 0] - 1.0)) > 1e-8:
        raise EigensolveFailure("stationary eigenvector is not constant")
    gram = phi.T @ (chain.pi[:, None] * phi)
    if np.max(np.abs(gram - np.eye(chain.n))) > tol.orthonormality:
        raise EigensolveFailure("eigenvectors fail weighted orthonormality")
    resid = chain.kernel @ phi - phi * lam
    norms = np.sqrt(np.einsum("x,xi,xi->i", chain.pi, resid, resid))
    if np.max(norms) > tol.eigen_residual:
        raise EigensolveFailure(f"eigen-residual {np.max(norms)!r} too large")


def pi_inner(chain: ReversibleChain, f, g) -> float:
    """Stationary-weighted inner product of two functions on the state space."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (chain.n,) or g.shape != (chain.n,):
        raise DimensionMismatch(f"expected vectors of length {chain.n}")
    return float(np.sum(f * g * chain.pi))


def pi_norm_sq(chain: ReversibleChain, f) -> float:
    return pi_inner(chain, f, f)


def dirichlet_form(chain: ReversibleChain, f, agreement_tol: float = 1e-12) -> float:
    """Quadratic dissipation form of f.

    Evaluated both as the half-sum over edges of pi(x)P(x,y)(f(x)-f(y))^2 and
    as <f, (I-P)f>; the two must agree to within `agreement_tol` relative.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (chain.n,):
        raise DimensionMismatch(f"expected vector of length {chain.n}")
    diff = f[:, None] - f[None, :]
    edge_sum = 0.5 * float(np.sum(chain.pi[:, None] * chain.kernel * diff * diff))
    operator_form = pi_inner(chain, f, f - chain.kernel @ f)
    scale = max(abs(edge_sum), abs(operator_form), 1e-300)
    if abs(edge_sum - operator_form) > agreement_tol * max(scale, 1.0):
        raise SpecRelaxError(
            f"dirichlet form mismatch: {edge_sum!r} vs {operator_form!r}"
        )
    return edge_sum


# --- chain zoo ---

def complete_graph(n: int) -> ReversibleChain:
    """Uniform jump chain: every transition probability is 1/n."""
    if n < 2:
        raise InvalidSize("complete graph needs n >= 2")
    return build_chain(np.full((n, n), 1.0 / n))


def cycle_graph(n: int) -> ReversibleChain:
    """Simple random walk on the n-cycle, probability 1/2 to each neighbor."""
    if n < 2:
        raise InvalidSize("cycle needs n >= 2")
    P = np.zeros((n, n))
    for x in range(n):
        P[x, (x + 1) % n] += 0.5
        P[x, (x - 1) % n] += 0.5
    return build_chain(P)


def lazy_transform(chain: ReversibleChain, a: float) -> ReversibleChain:
    """Mix the kernel with the identity: (1-a) I + a P.  Same stationary law."""
    if not (0.0 < a <= 1.0):
        raise InvalidLaziness(f"laziness must lie in (0, 1], got {a!r}")
    P = (1.0 - a) * np.eye(chain.n) + a * chain.kernel
    return build_chain(P)


def barbell_chain(clique_size: int = 3, bridge_weight: float = 0.1) -> ReversibleChain:
    """Two weighted cliques joined by a weak bridge edge; metastable by design."""
    if clique_size < 2:
        raise InvalidSize("cliques need at least 2 states")
    if bridge_weight <= 0:
        raise InvalidArguments("bridge weight must be positive")
    m = clique_size
    W = np.zeros((2 * m, 2 * m))
    for block in (range(m), range(m, 2 * m)):
        for i in block:
            for j in block:
                if i != j:
                    W[i, j] = 1.0
    W[m - 1, m] = W[m, m - 1] = bridge_weight
    P = W / W.sum(axis=1, keepdims=True)
    return build_chain(P)


def _orthogonal_with_uniform_column(n: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.standard_normal((n, n))
    A[:, 0] = 1.0 / math.sqrt(n)
    Q, _ = np.linalg.qr(A)
    if Q[0, 0] < 0:
        Q = -Q
    return Q


def chain_from_spectrum(eigenvalues,
                        max_resample: int = 1000,
                        seed: int = 0) -> ReversibleChain:
    """Realize a prescribed spectrum as a uniform-stationary reversible kernel.

    Conjugates diag(eigenvalues) by random orthogonal bases whose first column
    is the uniform vector, resampling until all kernel entries are nonnegative.
    Not every spectrum is realizable this way; NonRealizable reports the
    attempt count when the budget runs out.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise InvalidArguments("need at least two eigenvalues")
    if abs(lam[0] - 1.0) > 1e-12:
        raise InvalidArguments("first eigenvalue must be 1")
    if np.any(np.abs(lam) > 1.0 + 1e-12):
        raise InvalidArguments("eigenvalues must lie in [-1, 1]")
    if np.all(lam[1:] >= 1.0 - 1e-12):
        raise InvalidArguments("at least one eigenvalue must be below 1")
    n = lam.size
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_resample + 1):
        Q = _orthogonal_with_uniform_column(n, rng)
        P = (Q * lam) @ Q.T
        if P.min() >= 0.0:
            # clean up roundoff asymmetry before validation
            P = 0.5 * (P + P.T)
            P /= P.sum(axis=1, keepdims=True)
            return build_chain(P)
    raise NonRealizable(
        f"no nonnegative kernel found for the requested spectrum "
        f"after {max_resample} attempts", attempts=max_resample,
    )


def hypercube_profile(n: int) -> HypercubeProfile:
    """Level eigenvalues and log-multiplicities of the n-dimensional hypercube."""
    if n < 1:
        raise InvalidSize("hypercube dimension must be >= 1")
    j = np.arange(n + 1, dtype=float)
    lam = 1.0 - 2.0 * j / n
    logmult = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1)
    return HypercubeProfile(n=n, lambdas=lam, log_multiplicities=logmult)
