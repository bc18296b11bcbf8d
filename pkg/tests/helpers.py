"""Independent oracles shared by the test modules.

These deliberately avoid the library's own code paths: the matrix
exponential is a plain scaled Taylor series, the classical formulas are
written directly against probability vectors, quadrature goes through
scipy.integrate.
"""

from __future__ import annotations

import numpy as np


def expm_series(a, max_terms: int = 60) -> np.ndarray:
    """Matrix exponential by scaling, Taylor series, and repeated squaring."""
    a = np.asarray(a, dtype=complex)
    norm = float(np.linalg.norm(a, 1))
    squarings = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 1e-30 else 0
    b = a / (2.0**squarings)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for i in range(1, max_terms):
        term = term @ b / i
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (z + z.conj().T)


def random_positive(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    h = random_hermitian(dim, rng, scale)
    w, v = np.linalg.eigh(h)
    f = (v * np.exp(w)) @ v.conj().T
    return 0.5 * (f + f.conj().T)


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    rho = random_positive(dim, rng)
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_law(dim: int, rng: np.random.Generator) -> np.ndarray:
    raw = np.exp(rng.standard_normal(dim))
    raw = raw / raw.sum()
    return 0.9 * raw + 0.1 / dim


def reversible_chain(dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """(rates, law) with detailed balance pi_i Q_ij = pi_j Q_ji exact."""
    pi = random_law(dim, rng)
    base = np.abs(rng.standard_normal((dim, dim))) + 0.1
    base = 0.5 * (base + base.T)
    rates = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            if i != j:
                rates[i, j] = base[i, j] * np.sqrt(pi[j] / pi[i])
    rates[np.diag_indices(dim)] = -rates.sum(axis=1)
    return rates, pi


# Classical (diagonal) formulas -------------------------------------------------


def classical_norm_p(pi, v, p: float) -> float:
    return float(np.sum(pi * np.abs(v) ** p) ** (1.0 / p))


def classical_variance(pi, v) -> float:
    mean = float(np.sum(pi * v))
    return float(np.sum(pi * v**2) - mean**2)


def classical_entropy(pi, v) -> float:
    mass = float(np.sum(pi * v))
    return float(np.sum(pi * v * np.log(v / mass)))


def classical_h(pi, v) -> float:
    """H(f) = tr(rho f^2 log(f/||f||_2)) = E(f^2)/2 in the commuting case."""
    return 0.5 * classical_entropy(pi, v**2)


def classical_dirichlet(pi, rates, v, u=None) -> float:
    """-sum_i pi_i v_i (Q u)_i; equals (1/2) sum pi_i Q_ij (v_i - v_j)^2 for u = v."""
    if u is None:
        u = v
    return float(-np.sum(pi * v * (rates @ u)))


def classical_mlsi_numerator(pi, rates, v) -> float:
    return classical_dirichlet(pi, rates, np.log(v), v)
