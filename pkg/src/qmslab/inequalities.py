"""The inequality engine.

Exact spectral gap in the weighted L^2 geometry, sampled/optimized
estimates of the log-Sobolev, modified log-Sobolev and weak-regularity
constants (with witness observables and explicit bound directions),
regularity-condition checks with their q -> 1 limit, the second-order
expansion of the quadratic entropy functional around the identity, the
doubly stochastic spectral bridge, the scalar-inequality suite, and the
assembled hierarchy report.

Estimates from nonconvex sampling are labeled by bound direction and are
never presented as the true constants: the supremum-type LSI constant is
approached from below, the infimum-type MLSI and WRC constants from
above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    DegenerateInputError,
    HypothesesError,
    InputError,
    NumericalError,
)
from .hermitian import (
    POSITIVITY_FLOOR,
    as_hermitian,
    kernel_integral,
    random_hermitian,
    spectral,
)
from .semigroup import (
    Generator,
    KMS_TOL,
    dirichlet,
    dirichlet_q,
    evolve,
    hermitian_basis,
    unvec,
    validate,
    vec,
)
from .space import (
    WeightedSpace,
    _pd_eig,
    assert_real,
    centered,
    embed_ipq,
    entropy_e,
    functional_h,
    norm_p,
    variance,
)

NEAR_IDENTITY_TOL = 1e-6
FORM_FLOOR = 1e-12
GAP_FLOOR = 1e-10
DEFAULT_Q_GRID = (1.1, 1.5, 2.0, 3.0, 5.0, 10.0)


# ---------------------------------------------------------------------------
# Ratio functionals
# ---------------------------------------------------------------------------


def entropy_production_arg(space: WeightedSpace, f) -> np.ndarray:
    """log(rho^{1/2} f rho^{1/2}) - log rho, the Hermitian observable paired
    with f in the modified log-Sobolev form."""
    half = space.power(0.5)
    g = half @ f @ half
    g = 0.5 * (g + g.conj().T)
    w, v = _pd_eig(g, "entropy production argument")
    logg = (v * np.log(w)) @ v.conj().T
    return 0.5 * (logg + logg.conj().T) - space.log_rho


def entropy_production(space: WeightedSpace, gen: Generator, f) -> float:
    """E(log(rho^{1/2} f rho^{1/2}) - log rho, f): minus the time derivative
    of the relative entropy along the flow started at f."""
    f = as_hermitian(f)
    return dirichlet(space, gen, entropy_production_arg(space, f), f)


def lsi_ratio(space: WeightedSpace, gen: Generator, f) -> float:
    """H(f) / E(f, f).  Rejects near-identity f (Var/||f||_2^2 < 1e-6) and
    vanishing Dirichlet form; the supremum of this ratio over f > 0 is the
    best log-Sobolev constant."""
    f = as_hermitian(f)
    if float(np.linalg.eigvalsh(f)[0]) <= POSITIVITY_FLOOR:
        raise InputError("LSI ratio requires strictly positive f")
    sq_norm = norm_p(space, f, 2) ** 2
    var = variance(space, f)
    if var < NEAR_IDENTITY_TOL * sq_norm:
        raise DegenerateInputError("f is too close to a multiple of the identity")
    form = dirichlet(space, gen, f, f)
    if form <= FORM_FLOOR:
        raise DegenerateInputError(
            "Dirichlet form vanishes on f: no tight LSI in this direction"
        )
    return functional_h(space, f) / form


def mlsi_ratio(space: WeightedSpace, gen: Generator, f) -> float:
    """Entropy production over entropy; the infimum over f > 0 is the best
    modified log-Sobolev constant, and the value at f equals the
    instantaneous exponential decay rate of E along the flow."""
    f = as_hermitian(f)
    if float(np.linalg.eigvalsh(f)[0]) <= POSITIVITY_FLOOR:
        raise InputError("MLSI ratio requires strictly positive f")
    ent = entropy_e(space, f)
    if ent <= FORM_FLOOR:
        raise DegenerateInputError("entropy vanishes on f (multiple of the identity)")
    return entropy_production(space, gen, f) / ent


def wrc_ratio(space: WeightedSpace, gen: Generator, f) -> float:
    """Entropy production over E(I_{2,1} f, I_{2,1} f); the infimum is the
    best weak-regularity constant beta."""
    f = as_hermitian(f)
    if float(np.linalg.eigvalsh(f)[0]) <= POSITIVITY_FLOOR:
        raise InputError("WRC ratio requires strictly positive f")
    root = embed_ipq(space, (2.0, 1.0), f)
    denom = dirichlet(space, gen, root, root)
    if denom <= FORM_FLOOR:
        raise DegenerateInputError("embedded Dirichlet form vanishes on f")
    return entropy_production(space, gen, f) / denom


# ---------------------------------------------------------------------------
# Spectral gap
# ---------------------------------------------------------------------------


def _require_validated(space: WeightedSpace, gen: Generator):
    if gen.diagnostics is None:
        validate(gen, space)
    return gen.diagnostics


def gap_witness(space: WeightedSpace, gen: Generator) -> tuple[float, np.ndarray]:
    """Exact spectral gap and a Hermitian observable attaining it.

    The generator, made self-adjoint in the weighted L^2 geometry, is
    restricted to the orthogonal complement of the identity; the gap is
    the smallest eigenvalue there.  Classical generators are restricted
    to the diagonal subalgebra."""
    record = _require_validated(space, gen)
    if not record.kms_symmetric.passed:
        raise HypothesesError(
            "spectral gap is defined here only for symmetric generators "
            f"(KMS residual {record.kms_symmetric.residual:.3e})"
        )
    if gen.is_classical:
        pi = gen.provenance.law
        d = np.sqrt(pi)
        t = (d[:, None] * (-gen.provenance.rates)) / d[None, :]
        u = d.astype(complex)
    else:
        quarter = space.power(0.25)
        inv_quarter = space.power(-0.25)
        w_half = np.kron(quarter.T, quarter)
        w_half_inv = np.kron(inv_quarter.T, inv_quarter)
        t = w_half @ (-gen.superop) @ w_half_inv
        u = w_half @ vec(np.eye(gen.dim))
    t = 0.5 * (t + t.conj().T)
    u = u / np.linalg.norm(u)
    comp = scipy.linalg.null_space(u.conj()[None, :])
    m = comp.conj().T @ t @ comp
    m = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(m)
    gap = float(vals[0])
    scale = max(1.0, float(np.max(np.abs(vals))))
    if gap < -1e-8 * scale:
        raise NumericalError(
            f"restricted generator has a negative eigenvalue {gap:.3e}; "
            "the input is not a symmetric Markov generator"
        )
    gap = max(gap, 0.0)
    x = comp @ vecs[:, 0]
    if gen.is_classical:
        witness = np.diag((x / d).astype(complex))
    else:
        mat = unvec(w_half_inv @ x, gen.dim)
        herm = 0.5 * (mat + mat.conj().T)
        skew = (mat - mat.conj().T) / 2j
        witness = herm if np.linalg.norm(herm) >= np.linalg.norm(skew) else skew
    witness = 0.5 * (witness + witness.conj().T)
    witness = witness / np.linalg.norm(witness, 2)
    return gap, witness


def spectral_gap(space: WeightedSpace, gen: Generator) -> float:
    """Best constant c in  c Var(f) <= E(f, f)."""
    return gap_witness(space, gen)[0]


# ---------------------------------------------------------------------------
# Constant estimation (multistart over f = exp(h))
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget knobs for the sampled estimates.  All randomness derives from
    ``seed``; start k of a run uses the sub-stream (seed, k), so growing
    the budget extends the sample set instead of reshuffling it."""

    starts: int = 32
    iters: int = 200
    scale: float = 1.0
    seed: int = 0
    samples: int = 200
    q_grid: tuple[float, ...] = DEFAULT_Q_GRID


@dataclass
class EstimateResult:
    value: float
    bound: str  # "lower" | "upper"
    witness: np.ndarray | None
    status: str = "ok"
    evaluations: int = 0

    def to_dict(self) -> dict:
        out = {"bound_direction": self.bound, "status": self.status}
        if self.status == "ok":
            out["estimate"] = self.value
            out["evaluations"] = self.evaluations
        return out


def _param_count(dim: int, diagonal: bool) -> int:
    return dim if diagonal else dim * dim


def _herm_from_params(x: np.ndarray, dim: int, diagonal: bool) -> np.ndarray:
    if diagonal:
        return np.diag(x.astype(complex))
    h = np.zeros((dim, dim), dtype=complex)
    h[np.diag_indices(dim)] = x[:dim]
    k = dim
    inv = 1.0 / math.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            h[i, j] = (x[k] + 1j * x[k + 1]) * inv
            h[j, i] = h[i, j].conjugate()
            k += 2
    return h


def _exp_herm(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    f = (v * np.exp(w)) @ v.conj().T
    return 0.5 * (f + f.conj().T)


def _multistart(
    space: WeightedSpace,
    gen: Generator,
    ratio,
    config: OptimizerConfig,
    mode: str,
    collect: list | None = None,
) -> tuple[float, np.ndarray, int]:
    """Multistart Nelder-Mead over f = exp(h); returns (best value,
    witness, accepted evaluations).  ``mode`` is "max" or "min"."""
    dim = space.dim
    diagonal = gen.is_classical
    n_params = _param_count(dim, diagonal)
    sign = -1.0 if mode == "max" else 1.0
    accepted = 0

    def objective(x):
        nonlocal accepted
        f = _exp_herm(_herm_from_params(x, dim, diagonal))
        try:
            r = ratio(f)
        except DegenerateInputError:
            return 1e18
        accepted += 1
        if collect is not None:
            collect.append(f)
        return sign * r

    best_fun = math.inf
    best_x = None
    for start in range(config.starts):
        rng = np.random.default_rng([config.seed, start])
        x0 = config.scale * rng.standard_normal(n_params)
        res = scipy.optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": config.iters,
                "xatol": 1e-10,
                "fatol": 1e-14,
            },
        )
        if res.fun < best_fun:
            best_fun = res.fun
            best_x = res.x
    if best_x is None or best_fun >= 1e17:
        raise DegenerateInputError("every optimization sample was degenerate")
    witness = _exp_herm(_herm_from_params(best_x, dim, diagonal))
    return sign * best_fun, witness, accepted


def estimate_lsi(
    space: WeightedSpace,
    gen: Generator,
    config: OptimizerConfig = OptimizerConfig(),
    collect: list | None = None,
) -> EstimateResult:
    """Sampled lower bound on the best log-Sobolev constant (a supremum of
    ratios, so every evaluated witness certifies it from below).  Reports
    "no tight LSI" when the gap vanishes."""
    gap = spectral_gap(space, gen)
    if gap <= GAP_FLOOR:
        return EstimateResult(math.inf, "lower", None, status="no tight LSI")
    value, witness, evals = _multistart(
        space, gen, lambda f: lsi_ratio(space, gen, f), config, "max", collect
    )
    return EstimateResult(value, "lower", witness, evaluations=evals)


def estimate_mlsi(
    space: WeightedSpace,
    gen: Generator,
    config: OptimizerConfig = OptimizerConfig(),
    collect: list | None = None,
) -> EstimateResult:
    """Sampled upper bound on the best modified log-Sobolev constant (an
    infimum of ratios)."""
    _require_validated(space, gen)
    value, witness, evals = _multistart(
        space, gen, lambda f: mlsi_ratio(space, gen, f), config, "min", collect
    )
    return EstimateResult(value, "upper", witness, evaluations=evals)


def wrc_beta(
    space: WeightedSpace,
    gen: Generator,
    config: OptimizerConfig = OptimizerConfig(),
    collect: list | None = None,
) -> EstimateResult:
    """Sampled upper bound on the best weak-regularity constant beta: the
    minimum of the WRC ratio over ``config.samples`` random f = exp(h)."""
    _require_validated(space, gen)
    dim = space.dim
    diagonal = gen.is_classical
    best = math.inf
    witness = None
    used = 0
    for k in range(config.samples):
        rng = np.random.default_rng([config.seed, 1000003, k])
        h = (
            np.diag(config.scale * rng.standard_normal(dim)).astype(complex)
            if diagonal
            else random_hermitian(dim, rng, config.scale)
        )
        f = _exp_herm(h)
        try:
            r = wrc_ratio(space, gen, f)
        except DegenerateInputError:
            continue
        used += 1
        if collect is not None:
            collect.append(f)
        if r < best:
            best = r
            witness = f
    if witness is None:
        raise DegenerateInputError("all weak-regularity samples were degenerate")
    return EstimateResult(best, "upper", witness, evaluations=used)


# ---------------------------------------------------------------------------
# Regularity checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RCVerdict:
    q: float
    slack: float
    scale: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "slack": self.slack,
            "scale": self.scale,
            "passed": self.passed,
        }


def rc_check(space: WeightedSpace, gen: Generator, q: float, f) -> RCVerdict:
    """Regularity condition at one q:
    E_2(I_{2,q} f, I_{2,q} f) <= (q^2 / 4(q-1)) E_q(f, f).
    slack = RHS - LHS; passes when slack >= -1e-9 * scale."""
    q = float(q)
    if q <= 1.0:
        raise InputError(f"regularity condition needs q > 1, got {q}")
    emb = embed_ipq(space, (2.0, q), f)
    lhs = dirichlet(space, gen, emb, emb)
    rhs = q * q / (4.0 * (q - 1.0)) * dirichlet_q(space, gen, q, f)
    scale = max(abs(lhs), abs(rhs), 1e-30)
    slack = rhs - lhs
    return RCVerdict(q=q, slack=slack, scale=scale, passed=slack >= -1e-9 * scale)


@dataclass(frozen=True)
class LimitProbeRow:
    q: float
    value: float
    target: float
    abs_error: float
    rel_error: float
    breakdown: bool

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "value": self.value,
            "target": self.target,
            "abs_error": self.abs_error,
            "rel_error": self.rel_error,
            "breakdown": self.breakdown,
        }


def rc_limit_probe(
    space: WeightedSpace,
    gen: Generator,
    f,
    q_sequence: tuple[float, ...] = (1.01, 1.001, 1.0001),
) -> list[LimitProbeRow]:
    """Convergence table for  (1/(q-1)) E_q(f, f)  against the entropy
    production as q decreases to 1.  Rows with q - 1 below 1e-6 are marked
    as numerically unreliable instead of raising."""
    f = as_hermitian(f)
    target = entropy_production(space, gen, f)
    scale = max(abs(target), 1e-30)
    rows = []
    for q in q_sequence:
        q = float(q)
        value = dirichlet_q(space, gen, q, f) / (q - 1.0)
        err = abs(value - target)
        rows.append(
            LimitProbeRow(
                q=q,
                value=value,
                target=target,
                abs_error=err,
                rel_error=err / scale,
                breakdown=(q - 1.0) < 1e-6,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Second-order expansion of H around the identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionResult:
    """Coefficients of H(1 + eps f) = eps*A + eps^2 (B - var/2) + O(eps^3)
    for centered f, with the finite-difference replay of B."""

    A: float
    B: float
    var: float
    fd_B: float

    def to_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "var": self.var, "fd_B": self.fd_B}


def expand_h(space: WeightedSpace, f) -> ExpansionResult:
    """Second-order expansion of the quadratic entropy functional at the
    identity in direction f (which must satisfy tr(rho f) = 0).

    A comes from the resolvent first-order term, B from the spectral form
    of the second-order term (weights rho_j^{1/2} rho_k tr(Q_k f Q_j f)
    times the closed-form kernel integral at (rho_k^{1/2}, rho_j^{1/2})),
    var is Var(f), and fd_B replays B through Richardson-extrapolated
    finite differences of H(1 + eps f)."""
    f = as_hermitian(f)
    norm = float(np.linalg.norm(f, 2))
    mean = assert_real(np.trace(space.rho @ f), max(norm, 1.0), "centering")
    if abs(mean) > 1e-10 * max(1.0, norm):
        raise InputError(f"observable must be centered: tr(rho f) = {mean:.3e}")
    if norm == 0.0:
        return ExpansionResult(0.0, 0.0, 0.0, 0.0)

    dec = spectral(space.rho)
    roots = np.sqrt(dec.eigenvalues)
    quarter = space.power(0.25)
    fbar = quarter @ f @ quarter
    fbar = 0.5 * (fbar + fbar.conj().T)

    a_coeff = 0.0
    b_coeff = 0.0
    for k, qk in enumerate(dec.projectors):
        block = qk @ fbar @ qk
        a_coeff += dec.eigenvalues[k] / roots[k] * float(np.trace(block).real)
        for j, qj in enumerate(dec.projectors):
            overlap = float(np.trace(qk @ f @ qj @ f).real)
            b_coeff += (
                roots[j]
                * dec.eigenvalues[k]
                * overlap
                * kernel_integral(roots[k], roots[j])
            )

    var = variance(space, f)

    eye = np.eye(space.dim)
    eps0 = 1e-2 / norm

    def second_difference(eps: float) -> float:
        plus = functional_h(space, eye + eps * f)
        minus = functional_h(space, eye - eps * f)
        return (plus + minus) / (2.0 * eps * eps)

    g0 = second_difference(eps0)
    g1 = second_difference(eps0 / 2.0)
    g2 = second_difference(eps0 / 4.0)
    r10 = (4.0 * g1 - g0) / 3.0
    r11 = (4.0 * g2 - g1) / 3.0
    r2 = (16.0 * r11 - r10) / 15.0
    fd_b = r2 + 0.5 * var

    return ExpansionResult(A=a_coeff, B=b_coeff, var=var, fd_B=fd_b)


# ---------------------------------------------------------------------------
# Doubly stochastic spectral bridge
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StochasticBridge:
    """The N x N real matrix with entries
    tr(P_t(Q_{J(n)}) Q_{J(m)}) / (tr Q_{J(n)} tr Q_{J(m)}), indexed by
    eigenvector slots of the observable whose spectral projections are Q."""

    matrix: np.ndarray
    index_map: np.ndarray
    projectors: tuple[np.ndarray, ...]
    t: float

    def residuals(self) -> dict:
        k = self.matrix
        return {
            "min_entry": float(np.min(k)),
            "symmetry": float(np.max(np.abs(k - k.T))),
            "row_sums": float(np.max(np.abs(k.sum(axis=1) - 1.0))),
            "col_sums": float(np.max(np.abs(k.sum(axis=0) - 1.0))),
        }


def kt_bridge(gen: Generator, f, t: float) -> StochasticBridge:
    """Build the doubly stochastic bridge of a trace-preserving,
    trace-symmetric generator over the spectral projections of f.

    Raises HypothesesError when the generator is not trace-symmetric or
    not trace-preserving."""
    f = as_hermitian(f)
    dim = gen.dim
    basis = hermitian_basis(dim)
    gram = basis.conj().T @ gen.superop @ basis
    gram_scale = max(1.0, float(np.max(np.abs(gram))))
    sym_res = float(np.max(np.abs(gram - gram.conj().T)))
    if sym_res > KMS_TOL * gram_scale:
        raise HypothesesError(
            f"bridge requires a trace-symmetric generator (residual {sym_res:.3e})"
        )
    sup_scale = max(1.0, float(np.linalg.norm(gen.superop)))
    tp_res = float(np.linalg.norm(gen.superop.conj().T @ vec(np.eye(dim))))
    if tp_res > KMS_TOL * sup_scale:
        raise HypothesesError(
            f"bridge requires a trace-preserving generator (residual {tp_res:.3e})"
        )
    dec = spectral(f)
    traces = np.array([float(np.trace(q).real) for q in dec.projectors])
    n_clusters = len(dec.projectors)
    cluster = np.empty((n_clusters, n_clusters))
    for a, qa in enumerate(dec.projectors):
        moved = evolve(gen, qa, t)
        for b, qb in enumerate(dec.projectors):
            val = complex(np.trace(moved @ qb))
            cluster[a, b] = assert_real(val, traces[a] * traces[b], "bridge entry")
    j = dec.index_map
    k = cluster[np.ix_(j, j)] / np.outer(traces[j], traces[j])
    return StochasticBridge(matrix=k, index_map=j, projectors=dec.projectors, t=float(t))


def bridge_pairing(bridge: StochasticBridge, h_values, g_values) -> float:
    """<K(t) h~, g~> for spectral functions given by their per-cluster
    values; equals tr(P_t(M_h) M_g)."""
    h_tilde = np.asarray(h_values, dtype=float)[bridge.index_map]
    g_tilde = np.asarray(g_values, dtype=float)[bridge.index_map]
    return float(g_tilde @ bridge.matrix @ h_tilde)


# ---------------------------------------------------------------------------
# Scalar inequality suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarInequalityReport:
    samples: int
    violations: dict[str, int]
    worst_slack: dict[str, float]
    equality_cases: dict[str, float]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "violations": dict(self.violations),
            "worst_slack": dict(self.worst_slack),
            "equality_cases": dict(self.equality_cases),
            "passed": self.passed,
        }


def scalar_inequality_suite(sample_count: int, seed: int = 0) -> ScalarInequalityReport:
    """Monte-Carlo check of the elementary scalar inequalities behind the
    regularity results, normalized slack tolerance 1e-12.

    * power_difference: (a^{q/2}-b^{q/2})^2 <= q^2/(4(q-1)) (a^{q-1}-b^{q-1})(a-b)
      on (a,b) in (0,10]^2, q in (1,10];
    * log_ratio: log(t)/(t-1) >= 2/(t+1) on t in (0,100];
    * log_gradient: log b^2 - log a^2 >= (2/b)(b-a) on (a,b) in (0,10]^2;
    * one_sided_power: (b^{q/2}-a^{q/2}) b^{q/2} <= (q/2) b^{q-1} (b-a),
      checked on q in [2,10] only (it fails for 1 < q < 2; see the README
      note on sampling domains).
    """
    if sample_count < 1:
        raise InputError("sample_count must be at least 1")
    rng = np.random.default_rng([seed, 424243])
    tol = 1e-12
    violations: dict[str, int] = {}
    worst: dict[str, float] = {}

    def record(name: str, lhs: np.ndarray, rhs: np.ndarray):
        scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
        slack = (rhs - lhs) / scale
        violations[name] = int(np.sum(slack < -tol))
        worst[name] = float(np.min(slack))

    a = rng.uniform(1e-9, 10.0, sample_count)
    b = rng.uniform(1e-9, 10.0, sample_count)
    q = rng.uniform(1.0 + 1e-9, 10.0, sample_count)
    lhs = (a ** (q / 2.0) - b ** (q / 2.0)) ** 2
    rhs = q * q / (4.0 * (q - 1.0)) * (a ** (q - 1.0) - b ** (q - 1.0)) * (a - b)
    record("power_difference", lhs, rhs)

    t = rng.uniform(1e-9, 100.0, sample_count)
    record("log_ratio", 2.0 / (t + 1.0), np.log(t) / (t - 1.0))

    a2 = rng.uniform(1e-9, 10.0, sample_count)
    b2 = rng.uniform(1e-9, 10.0, sample_count)
    record("log_gradient", (2.0 / b2) * (b2 - a2), np.log(b2**2) - np.log(a2**2))

    q2 = rng.uniform(2.0, 10.0, sample_count)
    lhs4 = (b2 ** (q2 / 2.0) - a2 ** (q2 / 2.0)) * b2 ** (q2 / 2.0)
    rhs4 = q2 / 2.0 * b2 ** (q2 - 1.0) * (b2 - a2)
    record("one_sided_power", lhs4, rhs4)

    equality = {
        "power_difference_at_equal_args": 0.0,  # both sides vanish identically
        "log_ratio_at_one": abs(1.0 - 2.0 / 2.0),  # limit value of each side is 1
    }
    x = 3.0
    lhs_eq = (x ** (2.5 / 2.0) - x ** (2.5 / 2.0)) ** 2
    rhs_eq = 2.5**2 / (4.0 * 1.5) * (x**1.5 - x**1.5) * 0.0
    equality["power_difference_at_equal_args"] = abs(rhs_eq - lhs_eq)

    passed = all(v == 0 for v in violations.values()) and all(
        v <= 1e-12 for v in equality.values()
    )
    return ScalarInequalityReport(
        samples=sample_count,
        violations=violations,
        worst_slack=worst,
        equality_cases=equality,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# Hierarchy report
# ---------------------------------------------------------------------------


@dataclass
class HierarchyChecks:
    """Pointwise chain residuals over every accepted optimization sample:
    the entropy bridge |E(f) - 2 H(I_{2,1} f)|, the weak-regularity chain
    beta_target * E(I_{2,1}f, I_{2,1}f) - entropy production (normalized,
    must stay <= 1e-9), and the expansion margin B - 1.5 Var on centered
    probes (must stay >= -1e-9)."""

    samples: int
    beta_target: float | None
    entropy_bridge_max: float
    wrc_chain_worst: float | None
    expansion_margin_min: float | None
    passed: bool

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "beta_target": self.beta_target,
            "entropy_bridge_max": self.entropy_bridge_max,
            "wrc_chain_worst": self.wrc_chain_worst,
            "expansion_margin_min": self.expansion_margin_min,
            "passed": self.passed,
        }


@dataclass
class InequalityReport:
    symmetric: bool
    note: str
    gap: float | None
    c_lsi: EstimateResult | None
    alpha_mlsi: EstimateResult | None
    beta_wrc: EstimateResult | None
    rc_verdicts: list[RCVerdict]
    hierarchy: HierarchyChecks | None

    def to_dict(self) -> dict:
        out = {"symmetric": self.symmetric, "note": self.note}
        out["gap"] = self.gap
        out["c_lsi"] = self.c_lsi.to_dict() if self.c_lsi else None
        out["alpha_mlsi"] = self.alpha_mlsi.to_dict() if self.alpha_mlsi else None
        out["beta_wrc"] = self.beta_wrc.to_dict() if self.beta_wrc else None
        out["rc_verdicts"] = [v.to_dict() for v in self.rc_verdicts]
        out["hierarchy"] = self.hierarchy.to_dict() if self.hierarchy else (
            None if self.symmetric else "not applicable (non-symmetric)"
        )
        return out


def _is_trace_state(space: WeightedSpace) -> bool:
    return bool(
        np.allclose(space.rho, np.eye(space.dim) / space.dim, atol=1e-12, rtol=0.0)
    )


def hierarchy_report(
    space: WeightedSpace,
    gen: Generator,
    config: OptimizerConfig = OptimizerConfig(),
) -> InequalityReport:
    """Assemble gap, constant estimates, regularity verdicts and the
    pointwise hierarchy checks.  On a non-symmetric (but validated,
    trace-preserving) generator only the beta = 2 weak-regularity estimate
    applies and the hierarchy section is marked not applicable."""
    record = _require_validated(space, gen)
    if not record.kms_symmetric.passed:
        beta = wrc_beta(space, gen, config)
        return InequalityReport(
            symmetric=False,
            note="not applicable (non-symmetric)",
            gap=None,
            c_lsi=None,
            alpha_mlsi=None,
            beta_wrc=beta,
            rc_verdicts=[],
            hierarchy=None,
        )

    gap = spectral_gap(space, gen)
    samples: list[np.ndarray] = []
    c_lsi = estimate_lsi(space, gen, config, collect=samples)
    alpha = estimate_mlsi(space, gen, config, collect=samples)
    beta = wrc_beta(space, gen, config, collect=samples)

    stride = max(1, len(samples) // 32)
    rc_pool = samples[::stride][:32]
    verdicts = []
    for q in config.q_grid:
        worst = None
        for f in rc_pool:
            v = rc_check(space, gen, q, f)
            if worst is None or v.slack / v.scale < worst.slack / worst.scale:
                worst = v
        if worst is not None:
            verdicts.append(worst)

    beta_target = 4.0 if (gen.is_classical or _is_trace_state(space)) else None
    bridge_max = 0.0
    chain_worst = -math.inf if beta_target is not None else None
    for f in samples:
        ent = entropy_e(space, f)
        root = embed_ipq(space, (2.0, 1.0), f)
        bridge_max = max(bridge_max, abs(ent - 2.0 * functional_h(space, root)))
        if beta_target is not None:
            num = entropy_production(space, gen, f)
            den = dirichlet(space, gen, root, root)
            scale = max(1.0, abs(num), abs(den))
            chain_worst = max(chain_worst, (beta_target * den - num) / scale)

    margin = None
    probes = samples[:: max(1, len(samples) // 8)][:8]
    for f in probes:
        g = centered(space, f)
        if np.linalg.norm(g, 2) < 1e-8:
            continue
        result = expand_h(space, g)
        m = result.B - 1.5 * result.var
        margin = m if margin is None else min(margin, m)

    passed = bridge_max <= 1e-9
    if chain_worst is not None:
        passed = passed and chain_worst <= 1e-9
    if margin is not None:
        passed = passed and margin >= -1e-9
    hierarchy = HierarchyChecks(
        samples=len(samples),
        beta_target=beta_target,
        entropy_bridge_max=bridge_max,
        wrc_chain_worst=chain_worst if chain_worst != -math.inf else None,
        expansion_margin_min=margin,
        passed=passed,
    )
    return InequalityReport(
        symmetric=True,
        note="",
        gap=gap,
        c_lsi=c_lsi,
        alpha_mlsi=alpha,
        beta_wrc=beta,
        rc_verdicts=verdicts,
        hierarchy=hierarchy,
    )
