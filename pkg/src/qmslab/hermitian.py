"""Dense Hermitian matrix primitives.

Spectral decompositions with eigenvalue clustering, matrix functions
through the spectrum, the divided-difference (Loewner) form of the
derivative of the matrix logarithm, and the closed-form scalar kernel
integral used by the second-order entropy expansion.

All operations are pure functions over immutable arrays; none of them
keeps state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Shared rejection / clustering thresholds.
HERMITIAN_RTOL = 1e-12
CLUSTER_RTOL = 1e-10
POSITIVITY_FLOOR = 1e-12
KERNEL_BRANCH_RTOL = 1e-9


def as_hermitian(a, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate that ``a`` is square and Hermitian within ``rtol``
    (relative to its norm) and return the exactly symmetrized copy
    ``(a + a*)/2``.  Inputs beyond tolerance are rejected."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise InputError("dimension must be at least 1")
    scale = np.linalg.norm(a)
    skew = np.linalg.norm(a - a.conj().T)
    if skew > rtol * max(scale, 1e-300):
        raise InputError(
            f"matrix is not Hermitian: skew norm {skew:.3e} exceeds "
            f"{rtol:.1e} x {scale:.3e}"
        )
    return 0.5 * (a + a.conj().T)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian matrix, entry standard deviation ~ ``scale``."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (z + z.conj().T)


def min_eig(a) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(as_hermitian(a))[0])


@dataclass(frozen=True)
class SpectralDecomposition:
    """Clustered spectral resolution of a Hermitian matrix.

    ``eigenvalues`` holds one representative per cluster, ascending;
    ``projectors`` the corresponding orthogonal projections; ``index_map``
    sends each eigenvector slot (0..N-1) to its cluster index.
    """

    eigenvalues: np.ndarray
    projectors: tuple[np.ndarray, ...]
    index_map: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.index_map)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.projectors[0])
        for lam, q in zip(self.eigenvalues, self.projectors):
            out = out + lam * q
        return out


def spectral(a, cluster_rtol: float = CLUSTER_RTOL) -> SpectralDecomposition:
    """Eigen-decompose a Hermitian matrix, clustering eigenvalues whose
    consecutive gap is below ``cluster_rtol`` times the spectral radius."""
    a = as_hermitian(a)
    w, v = np.linalg.eigh(a)
    threshold = cluster_rtol * float(np.max(np.abs(w)))
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= threshold:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    values = np.array([float(np.mean(w[idx])) for idx in clusters])
    projectors = []
    index_map = np.empty(len(w), dtype=int)
    for c, idx in enumerate(clusters):
        cols = v[:, idx]
        q = cols @ cols.conj().T
        projectors.append(0.5 * (q + q.conj().T))
        index_map[idx] = c
    return SpectralDecomposition(values, tuple(projectors), index_map)


def mat_fn(a, fn: str, exponent: float | None = None) -> np.ndarray:
    """Apply a scalar function through the spectrum: sum phi(lambda) Q_lambda.

    ``fn`` is ``"log"`` or ``"power"``; powers take ``exponent``.  The
    logarithm and non-integer powers require the spectrum to sit above
    the positivity floor 1e-12.
    """
    a = as_hermitian(a)
    w, v = np.linalg.eigh(a)
    if fn == "log":
        if w[0] <= POSITIVITY_FLOOR:
            raise InputError(
                f"matrix logarithm needs eigenvalues > {POSITIVITY_FLOOR:.0e}, "
                f"smallest is {w[0]:.3e}"
            )
        phi = np.log(w)
    elif fn == "power":
        if exponent is None:
            raise InputError("power requires an exponent")
        r = float(exponent)
        if r.is_integer():
            if r < 0 and np.min(np.abs(w)) <= POSITIVITY_FLOOR:
                raise InputError("negative power of a (near-)singular matrix")
            phi = w**r
        else:
            if w[0] <= POSITIVITY_FLOOR:
                raise InputError(
                    f"fractional power needs eigenvalues > {POSITIVITY_FLOOR:.0e}, "
                    f"smallest is {w[0]:.3e}"
                )
            phi = w**r
    else:
        raise InputError(f"unknown scalar function tag {fn!r}")
    out = (v * phi) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def mat_log(a) -> np.ndarray:
    return mat_fn(a, "log")


def mat_pow(a, exponent: float) -> np.ndarray:
    return mat_fn(a, "power", exponent)


def dlog(a, x) -> np.ndarray:
    """Derivative of the matrix logarithm at ``a`` in direction ``x``.

    Computed in the eigenbasis of ``a`` by the divided-difference
    (Loewner) closed form: coefficient (log li - log lj)/(li - lj),
    degenerating to 1/li on clustered pairs.  Analytically this equals
    the resolvent integral  int_0^inf (s+a)^-1 x (s+a)^-1 ds.
    """
    a = as_hermitian(a)
    x = as_hermitian(x)
    if a.shape != x.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {x.shape}")
    w, v = np.linalg.eigh(a)
    if w[0] <= POSITIVITY_FLOOR:
        raise InputError(
            f"dlog needs a strictly positive base point, smallest eigenvalue {w[0]:.3e}"
        )
    diff = w[:, None] - w[None, :]
    mean = 0.5 * (w[:, None] + w[None, :])
    near = np.abs(diff) <= CLUSTER_RTOL * w[-1]
    safe = np.where(near, 1.0, diff)
    # log(li/lj) via log1p keeps the quotient accurate for close pairs.
    ratio = np.log1p(diff / w[None, :])
    phi = np.where(near, 1.0 / mean, ratio / safe)
    m = v.conj().T @ x @ v
    out = v @ (phi * m) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def kernel_integral(a: float, b: float) -> float:
    """int_0^inf (2s + a) / ((s + b)(s + a)^2) ds for a, b > 0.

    Closed forms: 3/(2a) on the near-diagonal a = b, otherwise
    ((a - 2b)/(b - a)^2) log(a/b) + 1/(a - b).  The branch switches at
    relative gap 1e-9 to avoid cancellation in the log-difference form.
    """
    a = float(a)
    b = float(b)
    if not (a > 0.0 and b > 0.0) or math.isnan(a) or math.isnan(b):
        raise InputError(f"kernel integral needs positive arguments, got ({a}, {b})")
    if abs(a - b) <= KERNEL_BRANCH_RTOL * max(a, b):
        return 1.5 / a
    log_ratio = -math.log1p((b - a) / a)  # log(a/b), accurate for close a, b
    return (a - 2.0 * b) / (b - a) ** 2 * log_ratio + 1.0 / (a - b)
