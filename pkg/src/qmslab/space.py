"""The state-weighted L^p structure over a faithful density matrix.

Norms ||f||_p^p = tr(|rho^{1/2p} f rho^{1/2p}|^p), the KMS inner product
<f, g> = tr(rho^{1/2} f* rho^{1/2} g), the nonlinear embeddings I_{p,q},
the operator-valued entropy T_q, the relative entropy E, the quadratic
entropy functional H and the variance.

Throughout the package "log" is the natural logarithm and the weighting
exponent is fixed at 1/2 (KMS).  Entropy-type operations require their
argument to be strictly positive (smallest eigenvalue above 1e-12); the
continuous extension 0*log 0 = 0 is deliberately not implemented, callers
regularize with f + eps*1 themselves.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .hermitian import POSITIVITY_FLOOR, as_hermitian

TRACE_ATOL = 1e-12
IMAG_RTOL = 1e-10


def assert_real(z: complex, scale: float, label: str) -> float:
    """Discard the imaginary residue of a nominally real scalar, raising
    if it exceeds 1e-10 relative to ``scale`` (floored at 1)."""
    z = complex(z)
    if abs(z.imag) > IMAG_RTOL * max(scale, 1.0):
        raise NumericalError(
            f"{label}: imaginary residue {z.imag:.3e} at scale {max(scale, 1.0):.3e}"
        )
    return float(z.real)


def _pd_eig(m: np.ndarray, label: str) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a matrix that is positive definite by construction,
    raising NumericalError if roundoff pushed an eigenvalue below zero."""
    w, v = np.linalg.eigh(m)
    if w[0] <= 0.0:
        raise NumericalError(
            f"{label}: matrix expected positive definite has eigenvalue {w[0]:.3e}"
        )
    return w, v


def _require_positive(f, label: str) -> np.ndarray:
    f = as_hermitian(f)
    w = np.linalg.eigvalsh(f)
    if w[0] <= POSITIVITY_FLOOR:
        raise InputError(
            f"{label} requires a strictly positive observable "
            f"(min eigenvalue {w[0]:.3e} <= {POSITIVITY_FLOOR:.0e})"
        )
    return f


class WeightedSpace:
    """A faithful density ``rho`` with cached fractional powers.

    Immutable after construction except for the power memo, which is a
    thread-safe idempotent cache keyed on the exact float exponent.
    """

    def __init__(self, rho):
        rho = as_hermitian(rho)
        w, v = np.linalg.eigh(rho)
        if w[0] <= POSITIVITY_FLOOR:
            raise InputError(
                f"density is not faithful: smallest eigenvalue {w[0]:.3e}"
            )
        trace = float(np.sum(w))
        if abs(trace - 1.0) > TRACE_ATOL:
            raise InputError(f"density trace {trace!r} differs from 1 beyond 1e-12")
        self.rho = rho
        self.dim = rho.shape[0]
        self._eigs = w
        self._vecs = v
        self.log_rho = self._spectral_map(np.log(w))
        self._powers: dict[float, np.ndarray] = {}
        self._lock = threading.Lock()
        for exponent in (0.5, 0.25, -0.25):
            self.power(exponent)

    @classmethod
    def trace_state(cls, dim: int) -> "WeightedSpace":
        return cls(np.eye(dim) / dim)

    @classmethod
    def from_law(cls, law) -> "WeightedSpace":
        """Diagonal density from a probability vector."""
        pi = np.asarray(law, dtype=float)
        if pi.ndim != 1:
            raise InputError("probability law must be a vector")
        return cls(np.diag(pi.astype(complex)))

    def _spectral_map(self, phi: np.ndarray) -> np.ndarray:
        v = self._vecs
        out = (v * phi) @ v.conj().T
        return 0.5 * (out + out.conj().T)

    def power(self, exponent: float) -> np.ndarray:
        """rho^exponent, memoized on the exact float value."""
        exponent = float(exponent)
        cached = self._powers.get(exponent)
        if cached is not None:
            return cached
        with self._lock:
            if exponent not in self._powers:
                self._powers[exponent] = self._spectral_map(self._eigs**exponent)
            return self._powers[exponent]


@dataclass(frozen=True)
class ExponentPair:
    """A Hoelder pair (q, p).  ``conjugate`` builds p = q/(q-1) for q > 1;
    q = 1 is admitted as the limit value used by the I_{p,1} embeddings."""

    q: float
    p: float

    def __post_init__(self):
        if self.q > 1.0:
            if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
                raise InputError(f"p={self.p} is not conjugate to q={self.q}")
        elif self.q < 1.0:
            raise InputError("q must be at least 1")

    @classmethod
    def conjugate(cls, q: float) -> "ExponentPair":
        q = float(q)
        if q <= 1.0:
            raise InputError("a conjugate pair needs q > 1")
        return cls(q=q, p=q / (q - 1.0))

    def __iter__(self):
        return iter((self.p, self.q))


def _unpack_pair(pq) -> tuple[float, float]:
    p, q = pq
    return float(p), float(q)


def norm_p(space: WeightedSpace, f, p: float) -> float:
    """||f||_p; p = inf is the plain operator norm of f."""
    if p == math.inf:
        return float(np.linalg.norm(np.asarray(f, dtype=complex), 2))
    p = float(p)
    if p < 1.0:
        raise InputError(f"p must be >= 1, got {p}")
    r = space.power(1.0 / (2.0 * p))
    m = r @ np.asarray(f, dtype=complex) @ r
    s = np.linalg.svd(m, compute_uv=False)
    return float(np.sum(s**p) ** (1.0 / p))


def kms_inner(space: WeightedSpace, f, g) -> complex:
    """<f, g> = tr(rho^{1/2} f* rho^{1/2} g)."""
    r = space.power(0.5)
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    return complex(np.trace(r @ f.conj().T @ r @ g))


def embed_ipq(space: WeightedSpace, pq, f) -> np.ndarray:
    """I_{p,q}(f) = rho^{-1/2p} (rho^{1/2q} f rho^{1/2q})^{q/p} rho^{-1/2p},
    for strictly positive f.  ``pq`` is an (p, q) pair or ExponentPair;
    q = 1 is admitted (the I_{2,1} case)."""
    p, q = _unpack_pair(pq)
    if p < 1.0 or q < 1.0:
        raise InputError(f"embedding exponents must be >= 1, got p={p}, q={q}")
    f = _require_positive(f, "I_{p,q}")
    rq = space.power(1.0 / (2.0 * q))
    inner = rq @ f @ rq
    inner = 0.5 * (inner + inner.conj().T)
    w, v = _pd_eig(inner, "I_{p,q} core")
    mid = (v * w ** (q / p)) @ v.conj().T
    rp = space.power(-1.0 / (2.0 * p))
    out = rp @ mid @ rp
    return 0.5 * (out + out.conj().T)


def op_entropy_tq(space: WeightedSpace, q: float, f) -> np.ndarray:
    """Operator-valued entropy
    T_q(f) = rho^{-1/2q} Y log(Y) rho^{-1/2q} - (f log rho + log rho f)/(2q)
    with Y = rho^{1/2q} f rho^{1/2q}.

    The result is returned as computed, without symmetrization; only the
    scalars <1, T_1(f)> and <f, T_2(f)> are consumed downstream and both
    are real up to the asserted residue."""
    q = float(q)
    if q < 1.0:
        raise InputError(f"q must be >= 1, got {q}")
    f = _require_positive(f, "T_q")
    r = 1.0 / (2.0 * q)
    rp = space.power(r)
    rm = space.power(-r)
    y = rp @ f @ rp
    y = 0.5 * (y + y.conj().T)
    w, v = _pd_eig(y, "T_q core")
    ylogy = (v * (w * np.log(w))) @ v.conj().T
    return rm @ ylogy @ rm - r * (f @ space.log_rho + space.log_rho @ f)


def entropy_e(space: WeightedSpace, f) -> float:
    """Relative entropy
    E(f) = tr(G log G) - tr(G log rho) - ||f||_1 log ||f||_1,
    G = rho^{1/2} f rho^{1/2}, for strictly positive f."""
    f = _require_positive(f, "entropy")
    r = space.power(0.5)
    g = r @ f @ r
    g = 0.5 * (g + g.conj().T)
    w, v = _pd_eig(g, "entropy core")
    t_glogg = float(np.sum(w * np.log(w)))
    scale = float(np.sum(w)) * float(np.linalg.norm(space.log_rho, 2))
    t_glogrho = assert_real(np.trace(g @ space.log_rho), scale, "entropy cross term")
    mass = float(np.sum(w))  # ||f||_1 for positive f
    return t_glogg - t_glogrho - mass * math.log(mass)


def functional_h(space: WeightedSpace, f) -> float:
    """H(f) = <f, T_2(f)> - ||f||_2^2 log ||f||_2, evaluated through
    X = rho^{1/4} f rho^{1/4} as
    tr(X^2 log X) - tr(X^2 log rho)/2 - (tr X^2) log(tr X^2)/2."""
    f = _require_positive(f, "H")
    r = space.power(0.25)
    x = r @ f @ r
    x = 0.5 * (x + x.conj().T)
    w, v = _pd_eig(x, "H core")
    sq = float(np.sum(w**2))
    t1 = float(np.sum(w**2 * np.log(w)))
    x2 = (v * w**2) @ v.conj().T
    scale = sq * float(np.linalg.norm(space.log_rho, 2))
    t2 = assert_real(np.trace(x2 @ space.log_rho), scale, "H cross term")
    return t1 - 0.5 * t2 - 0.5 * sq * math.log(sq)


def variance(space: WeightedSpace, f) -> float:
    """Var(f) = ||f - tr(rho f)||_2^2 for Hermitian f."""
    f = as_hermitian(f)
    mean = assert_real(
        np.trace(space.rho @ f), float(np.linalg.norm(f, 2)), "mean"
    )
    g = f - mean * np.eye(space.dim)
    r = space.power(0.25)
    x = r @ g @ r
    return float(np.vdot(x, x).real)


def centered(space: WeightedSpace, f) -> np.ndarray:
    """f - tr(rho f) 1."""
    f = as_hermitian(f)
    mean = assert_real(
        np.trace(space.rho @ f), float(np.linalg.norm(f, 2)), "mean"
    )
    return f - mean * np.eye(space.dim)
