"""Construction, validation and evolution of identity-preserving semigroups.

A ``Generator`` stores the Heisenberg-picture superoperator as a dense
N^2 x N^2 complex matrix acting on column-stacked observables, together
with its construction provenance and (after ``validate``) a diagnostics
record.  Provenances:

* ``lindblad`` -- GKLS form  L(f) = i[H,f] + sum_k (Lk* f Lk - {Lk*Lk, f}/2),
  completely positive by construction;
* ``classical`` -- a reversible finite Markov chain embedded on the
  diagonal subalgebra; all classical-mode functionals are restricted to
  diagonal observables;
* ``raw`` -- a superoperator taken as given, positivity only probed.

Time evolution uses scaling-and-squaring Pade (scipy.linalg.expm) with a
thread-safe per-generator propagator cache keyed on t.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, NonErgodicError, NumericalError
from .hermitian import POSITIVITY_FLOOR, as_hermitian, random_hermitian
from .space import WeightedSpace, assert_real, kms_inner, _pd_eig

IDENTITY_TOL = 1e-10
INVARIANCE_TOL = 1e-10
KMS_TOL = 1e-9
POSITIVITY_TOL = 1e-9
SKEW_TOL = 1e-8


def vec(m) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def hermitian_basis(dim: int) -> np.ndarray:
    """Trace-orthonormal Hermitian basis, returned as an (N^2, N^2) array
    whose columns are the vectorized basis elements."""
    cols = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1.0
        cols.append(vec(e))
    inv = 1.0 / math.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = e[j, i] = inv
            cols.append(vec(e))
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = -1j * inv
            e[j, i] = 1j * inv
            cols.append(vec(e))
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class Provenance:
    kind: str  # "lindblad" | "classical" | "raw"
    detail: str = ""
    rates: np.ndarray | None = None  # classical only
    law: np.ndarray | None = None  # classical only


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    residual: float

    def to_dict(self) -> dict:
        return {"passed": self.passed, "residual": self.residual}


@dataclass(frozen=True)
class PositivityProbe:
    passed: bool
    worst_min_eig: float
    worst_skew: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_min_eig": self.worst_min_eig,
            "worst_skew": self.worst_skew,
            "samples": self.samples,
        }


@dataclass(frozen=True)
class ValidationRecord:
    identity_preserving: CheckResult
    invariance: CheckResult
    kms_symmetric: CheckResult
    positivity_probe: PositivityProbe

    @property
    def markov_ok(self) -> bool:
        """Identity preservation, invariance and positivity all pass."""
        return (
            self.identity_preserving.passed
            and self.invariance.passed
            and self.positivity_probe.passed
        )

    @property
    def symmetric_ok(self) -> bool:
        return self.markov_ok and self.kms_symmetric.passed

    def to_dict(self) -> dict:
        return {
            "identity_preserving": self.identity_preserving.to_dict(),
            "invariance": self.invariance.to_dict(),
            "kms_symmetric": self.kms_symmetric.to_dict(),
            "positivity_probe": self.positivity_probe.to_dict(),
        }


class Generator:
    """Identity-preserving superoperator with provenance, diagnostics and
    a thread-safe, idempotent propagator cache."""

    def __init__(self, superop, provenance: Provenance):
        superop = np.asarray(superop, dtype=complex)
        if superop.ndim != 2 or superop.shape[0] != superop.shape[1]:
            raise InputError(f"superoperator must be square, got {superop.shape}")
        dim = math.isqrt(superop.shape[0])
        if dim * dim != superop.shape[0]:
            raise InputError(
                f"superoperator side {superop.shape[0]} is not a perfect square"
            )
        self.dim = dim
        self.superop = superop
        self.provenance = provenance
        self.diagnostics: ValidationRecord | None = None
        self._propagators: dict[float, np.ndarray] = {}
        self._lock = threading.Lock()
        residual = float(np.linalg.norm(superop @ vec(np.eye(dim))))
        scale = max(1.0, float(np.linalg.norm(superop)))
        if residual > IDENTITY_TOL * scale:
            raise InputError(
                f"superoperator does not preserve the identity: residual {residual:.3e}"
            )

    @property
    def is_classical(self) -> bool:
        return self.provenance.kind == "classical"

    def apply(self, f) -> np.ndarray:
        """L(f), no Hermitization."""
        return unvec(self.superop @ vec(f), self.dim)

    def propagator(self, t: float) -> np.ndarray:
        t = float(t)
        if t < 0.0:
            raise InputError(f"time must be non-negative, got {t}")
        cached = self._propagators.get(t)
        if cached is not None:
            return cached
        with self._lock:
            if t not in self._propagators:
                self._propagators[t] = scipy.linalg.expm(t * self.superop)
            return self._propagators[t]


def build_lindblad(hamiltonian, jumps) -> Generator:
    """Heisenberg GKLS generator from a Hamiltonian (may be None) and a
    list of jump operators."""
    jumps = [np.asarray(j, dtype=complex) for j in jumps]
    if hamiltonian is None and not jumps:
        raise InputError("need a Hamiltonian or at least one jump operator")
    if hamiltonian is not None:
        h = as_hermitian(hamiltonian)
        dim = h.shape[0]
    else:
        dim = jumps[0].shape[0]
        h = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(dim)
    sup = 1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for k, jump in enumerate(jumps):
        if jump.shape != (dim, dim):
            raise InputError(
                f"jump operator {k} has shape {jump.shape}, expected ({dim}, {dim})"
            )
        aa = jump.conj().T @ jump
        sup = sup + np.kron(jump.T, jump.conj().T)
        sup = sup - 0.5 * (np.kron(eye, aa) + np.kron(aa.T, eye))
    return Generator(sup, Provenance(kind="lindblad"))


def build_depolarizing(rho) -> Generator:
    """L(f) = tr(rho f) 1 - f, the rank-one mixing generator whose
    invariant state is rho."""
    rho = as_hermitian(rho)
    dim = rho.shape[0]
    sup = np.outer(vec(np.eye(dim)), vec(rho.T)) - np.eye(dim * dim)
    return Generator(sup, Provenance(kind="raw", detail="depolarizing"))


def embed_classical(rates, law) -> tuple[Generator, WeightedSpace]:
    """Embed a reversible finite Markov chain: rho = diag(pi) and the
    generator acts on diagonal observables as (Lf)_ii = sum_j Q_ij f_jj.

    Off-diagonal matrix entries are left untouched (the chain generator is
    not extended beyond the diagonal subalgebra), so all classical-mode
    functionals are restricted to diagonal observables.
    """
    q = np.asarray(rates, dtype=float)
    pi = np.asarray(law, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise InputError(f"rate matrix must be square, got {q.shape}")
    n = q.shape[0]
    if pi.shape != (n,):
        raise InputError(f"law has shape {pi.shape}, expected ({n},)")
    scale = max(1.0, float(np.max(np.abs(q))))
    off = q - np.diag(np.diag(q))
    if np.min(off) < -1e-12 * scale:
        raise InputError("off-diagonal rates must be non-negative")
    row_res = float(np.max(np.abs(q.sum(axis=1))))
    if row_res > 1e-10 * scale:
        raise InputError(f"rate matrix rows must sum to zero, residual {row_res:.3e}")
    if np.min(pi) <= 0.0:
        raise InputError("law must be entrywise positive")
    total = float(pi.sum())
    if abs(total - 1.0) > 1e-9:
        raise InputError(f"law sums to {total!r}, expected 1")
    pi = pi / total
    balance = pi[:, None] * q - (pi[:, None] * q).T
    if float(np.max(np.abs(balance))) > 1e-10 * scale:
        raise InputError(
            "chain is not reversible: detailed balance residual "
            f"{float(np.max(np.abs(balance))):.3e}"
        )
    sup = np.zeros((n * n, n * n), dtype=complex)
    diag_idx = [i * (n + 1) for i in range(n)]
    for i in range(n):
        for j in range(n):
            sup[diag_idx[i], diag_idx[j]] = q[i, j]
    gen = Generator(sup, Provenance(kind="classical", rates=q, law=pi))
    return gen, WeightedSpace(np.diag(pi.astype(complex)))


def find_invariant_state(gen: Generator) -> WeightedSpace:
    """Solve for the faithful invariant density: the kernel of the predual
    superoperator (adjoint of the Heisenberg one), normalized to trace 1.

    Raises NonErgodicError when the kernel is degenerate or contains no
    faithful state.  For classical provenance the solve is restricted to
    the diagonal block (the stationary law of the chain)."""
    if gen.is_classical:
        ker = scipy.linalg.null_space(gen.provenance.rates.T)
        if ker.shape[1] != 1:
            raise NonErgodicError(
                f"stationary-law kernel has dimension {ker.shape[1]}, expected 1"
            )
        pi = ker[:, 0]
        pi = pi / pi.sum()
        if np.min(pi) <= POSITIVITY_FLOOR:
            raise NonErgodicError("stationary law is not entrywise positive")
        return WeightedSpace(np.diag(pi.astype(complex)))
    ker = scipy.linalg.null_space(gen.superop.conj().T)
    if ker.shape[1] == 0:
        raise NumericalError("predual kernel is empty")
    if ker.shape[1] > 1:
        raise NonErgodicError(
            f"predual kernel has dimension {ker.shape[1]}, expected 1 (non-ergodic)"
        )
    cand = unvec(ker[:, 0], gen.dim)
    trace = complex(np.trace(cand))
    if abs(trace) < 1e-12:
        raise NonErgodicError("kernel element is traceless; no invariant state")
    cand = cand / trace
    skew = float(np.linalg.norm(cand - cand.conj().T))
    if skew > SKEW_TOL * max(1.0, float(np.linalg.norm(cand))):
        raise NonErgodicError(f"kernel element is not Hermitian (skew {skew:.3e})")
    cand = 0.5 * (cand + cand.conj().T)
    if float(np.linalg.eigvalsh(cand)[0]) <= POSITIVITY_FLOOR:
        raise NonErgodicError("invariant state is not faithful")
    return WeightedSpace(cand)


def _positive_sample(dim: int, rng: np.random.Generator, diagonal: bool) -> np.ndarray:
    """Random strictly positive observable of unit operator norm."""
    if diagonal:
        vals = np.exp(rng.standard_normal(dim))
        return np.diag(vals / vals.max()).astype(complex)
    h = random_hermitian(dim, rng)
    w, v = np.linalg.eigh(h)
    f = (v * np.exp(w - w.max())) @ v.conj().T
    return 0.5 * (f + f.conj().T)


def validate(
    gen: Generator,
    space: WeightedSpace,
    seed: int = 0,
    probe_samples: int = 64,
    probe_times: int = 10,
    tolerance: float | None = None,
) -> ValidationRecord:
    """Run the four diagnostics (identity preservation, invariance of rho,
    KMS symmetry, positivity probe), attach the record to the generator and
    return it.  Diagnostics are never exceptions: failures are recorded.

    ``tolerance`` overrides every pass threshold at once (identity and
    invariance default to 1e-10, KMS symmetry to 1e-9 relative, positivity
    to -1e-9)."""
    if gen.dim != space.dim:
        raise InputError(f"dimension mismatch: generator {gen.dim}, space {space.dim}")
    id_tol = IDENTITY_TOL if tolerance is None else tolerance
    inv_tol = INVARIANCE_TOL if tolerance is None else tolerance
    kms_tol = KMS_TOL if tolerance is None else tolerance
    pos_tol = POSITIVITY_TOL if tolerance is None else tolerance
    dim = gen.dim
    sup = gen.superop
    sup_scale = max(1.0, float(np.linalg.norm(sup)))

    id_res = float(np.linalg.norm(sup @ vec(np.eye(dim))))
    identity = CheckResult(id_res <= id_tol * sup_scale, id_res)

    basis = hermitian_basis(dim)
    row = vec(space.rho.T)  # tr(rho f) = row . vec(f)
    inv_res = float(np.max(np.abs(row @ sup @ basis)))
    invariance = CheckResult(inv_res <= inv_tol * sup_scale, inv_res)

    half = space.power(0.5)
    w_mat = np.kron(half.T, half)
    gram = basis.conj().T @ w_mat @ sup @ basis
    gram_scale = max(1.0, float(np.max(np.abs(gram))))
    kms_res = float(np.max(np.abs(gram - gram.conj().T)))
    kms = CheckResult(kms_res <= kms_tol * gram_scale, kms_res)

    times = np.geomspace(1e-2, 5.0, probe_times)
    worst = math.inf
    worst_skew = 0.0
    for k in range(probe_samples):
        rng = np.random.default_rng([seed, 7, k])
        f = _positive_sample(dim, rng, gen.is_classical)
        fv = vec(f)
        for t in times:
            out = unvec(gen.propagator(float(t)) @ fv, dim)
            skew = float(np.linalg.norm(out - out.conj().T))
            worst_skew = max(worst_skew, skew)
            herm = 0.5 * (out + out.conj().T)
            low = float(np.linalg.eigvalsh(herm)[0])
            worst = min(worst, low)
    probe = PositivityProbe(
        passed=(worst >= -pos_tol and worst_skew <= SKEW_TOL),
        worst_min_eig=worst,
        worst_skew=worst_skew,
        samples=probe_samples,
    )

    record = ValidationRecord(identity, invariance, kms, probe)
    gen.diagnostics = record
    return record


def evolve(gen: Generator, f, t: float) -> np.ndarray:
    """P_t f = exp(tL) f for Hermitian f, symmetrized after a residue check."""
    f = as_hermitian(f)
    if f.shape[0] != gen.dim:
        raise InputError(f"dimension mismatch: observable {f.shape[0]}, generator {gen.dim}")
    out = unvec(gen.propagator(t) @ vec(f), gen.dim)
    skew = float(np.linalg.norm(out - out.conj().T))
    if skew > SKEW_TOL * max(1.0, float(np.linalg.norm(out))):
        raise NumericalError(
            f"evolution broke Hermiticity (skew {skew:.3e}); the generator is "
            "not *-preserving"
        )
    return 0.5 * (out + out.conj().T)


def dirichlet(space: WeightedSpace, gen: Generator, f, g) -> float:
    """Dirichlet form  E(f, g) = -<f, L g>  for Hermitian f, g."""
    f = as_hermitian(f)
    g = as_hermitian(g)
    lg = gen.apply(g)
    value = -kms_inner(space, f, lg)
    scale = float(np.linalg.norm(f)) * float(np.linalg.norm(lg))
    return assert_real(value, scale, "dirichlet form")


# ---------------------------------------------------------------------------
# Random generator families (candidates; the numeric KMS-symmetry check in
# ``validate`` is the source of truth, the constructions are never trusted
# blindly).
# ---------------------------------------------------------------------------


def _floored_law(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random probability vector, mixed with uniform to keep conditioning
    reasonable at desk scale."""
    raw = np.exp(rng.standard_normal(dim))
    raw = raw / raw.sum()
    return 0.9 * raw + 0.1 / dim


def random_trace_symmetric(dim: int, rng: np.random.Generator, n_jumps: int = 2
                           ) -> tuple[Generator, WeightedSpace]:
    """GKLS generator with Hermitian jumps and no Hamiltonian: symmetric
    with respect to the trace inner product, invariant state 1/N."""
    jumps = [random_hermitian(dim, rng) for _ in range(n_jumps)]
    return build_lindblad(None, jumps), WeightedSpace.trace_state(dim)


def random_trace_nonsymmetric(dim: int, rng: np.random.Generator, n_jumps: int = 2
                              ) -> tuple[Generator, WeightedSpace]:
    """Trace-preserving but not trace-symmetric: Hermitian jumps plus a
    nonzero Hamiltonian (whose commutator part is antisymmetric in the
    trace geometry)."""
    h = random_hermitian(dim, rng)
    jumps = [random_hermitian(dim, rng) for _ in range(n_jumps)]
    return build_lindblad(h, jumps), WeightedSpace.trace_state(dim)


def random_kms_symmetric(dim: int, rng: np.random.Generator
                         ) -> tuple[Generator, WeightedSpace]:
    """Candidate KMS-symmetric generator at a random diagonal faithful
    state: matrix-unit jumps sqrt(g_ij) |i><j| in the eigenbasis of rho
    with rate pairs balanced as g_ij rho_j = g_ji rho_i."""
    law = _floored_law(dim, rng)
    base = np.abs(rng.standard_normal((dim, dim))) + 0.1
    base = 0.5 * (base + base.T)
    jumps = []
    for i in range(dim):
        for j in range(dim):
            if i == j:
                continue
            rate = base[i, j] * math.sqrt(law[i] / law[j])
            op = np.zeros((dim, dim), dtype=complex)
            op[i, j] = math.sqrt(rate)
            jumps.append(op)
    return build_lindblad(None, jumps), WeightedSpace.from_law(law)


def random_reversible_chain(dim: int, rng: np.random.Generator
                            ) -> tuple[Generator, WeightedSpace]:
    """Random reversible finite Markov chain, embedded on the diagonal."""
    law = _floored_law(dim, rng)
    base = np.abs(rng.standard_normal((dim, dim))) + 0.1
    base = 0.5 * (base + base.T)
    rates = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            if i != j:
                rates[i, j] = base[i, j] * math.sqrt(law[j] / law[i])
    rates[np.diag_indices(dim)] = -rates.sum(axis=1)
    return embed_classical(rates, law)


def dirichlet_q(space: WeightedSpace, gen: Generator, q: float, f) -> float:
    """Interpolated form  E_q(f, f) = -<I_{p,q} f, L f>  with p conjugate
    to q, evaluated as -tr(rho^{1/2q} Y^{q-1} rho^{1/2q} L f) with
    Y = rho^{1/2q} f rho^{1/2q}."""
    q = float(q)
    if q <= 1.0:
        raise InputError(f"interpolated form needs q > 1, got {q}")
    f = as_hermitian(f)
    if float(np.linalg.eigvalsh(f)[0]) <= POSITIVITY_FLOOR:
        raise InputError("interpolated form requires strictly positive f")
    r = space.power(1.0 / (2.0 * q))
    y = r @ f @ r
    y = 0.5 * (y + y.conj().T)
    w, v = _pd_eig(y, "interpolated form core")
    yq = (v * w ** (q - 1.0)) @ v.conj().T
    lf = gen.apply(f)
    value = -np.trace(r @ yq @ r @ lf)
    scale = float(np.linalg.norm(yq)) * float(np.linalg.norm(lf))
    return assert_real(value, scale, "interpolated form")
