"""Time-domain verification of entropy and variance decay.

Trajectories of E(f_t), Var(f_t), the analytic instantaneous decay rate
(the modified log-Sobolev ratio evaluated along the flow, which equals
-(d/dt)E / E exactly), monotonicity of e^{a t} E(f_t), and the randomized
search for generators whose sampled entropy-decay constant stays positive
while the spectral gap vanishes.

The decay-rate reporting uses the analytic instantaneous rate, not a
fitted slope: the uniform decay constant is an infimum of instantaneous
rates, so regression is only a diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesesError, InputError
from .hermitian import POSITIVITY_FLOOR, as_hermitian
from .inequalities import (
    GAP_FLOOR,
    OptimizerConfig,
    estimate_mlsi,
    mlsi_ratio,
    spectral_gap,
)
from .semigroup import (
    Generator,
    evolve,
    random_kms_symmetric,
    random_reversible_chain,
    random_trace_symmetric,
    validate,
)
from .space import WeightedSpace, entropy_e, norm_p, variance

ENTROPY_FLOOR = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """Sampled flow t -> P_t f: entropy, variance, analytic instantaneous
    decay rate and the (conserved) L^1 norm per grid point.  The entropy
    channels hold NaN when f is not strictly positive."""

    times: np.ndarray
    entropy: np.ndarray
    variance: np.ndarray
    analytic_rate: np.ndarray
    l1_norm: np.ndarray


def default_time_grid(gap: float, points: int = 50) -> np.ndarray:
    """t = 0 plus ``points`` geometric samples of [1e-3/gap, 5/gap]
    (unit rate when the gap vanishes)."""
    scale = gap if gap > GAP_FLOOR else 1.0
    return np.concatenate([[0.0], np.geomspace(1e-3 / scale, 5.0 / scale, points)])


def _require_symmetric(space: WeightedSpace, gen: Generator):
    if gen.diagnostics is None:
        validate(gen, space)
    if not gen.diagnostics.kms_symmetric.passed:
        raise HypothesesError(
            "trajectories are defined here only for symmetric validated "
            f"generators (KMS residual {gen.diagnostics.kms_symmetric.residual:.3e})"
        )


def entropy_rate(space: WeightedSpace, gen: Generator, f) -> float:
    """-(d/dt) E(f_t)/E(f_t) at t = 0: identical, by shared implementation,
    to the modified log-Sobolev ratio of f."""
    return mlsi_ratio(space, gen, f)


def _trajectory(space, gen, f, times, need_positive: bool) -> Trajectory:
    f = as_hermitian(f)
    positive = float(np.linalg.eigvalsh(f)[0]) > POSITIVITY_FLOOR
    if need_positive and not positive:
        raise InputError("entropy trajectories need a strictly positive start")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or np.any(np.diff(times) <= 0):
        raise InputError("time grid must be strictly ascending")
    if times[0] < 0:
        raise InputError("time grid must be non-negative")
    ent = np.full(len(times), math.nan)
    var = np.empty(len(times))
    rate = np.full(len(times), math.nan)
    l1 = np.empty(len(times))
    for i, t in enumerate(times):
        ft = evolve(gen, f, float(t))
        var[i] = variance(space, ft)
        l1[i] = norm_p(space, ft, 1.0)
        if positive:
            e = entropy_e(space, ft)
            ent[i] = e
            rate[i] = mlsi_ratio(space, gen, ft) if e > ENTROPY_FLOOR else 0.0
    return Trajectory(times, ent, var, rate, l1)


def entropy_trajectory(space: WeightedSpace, gen: Generator, f, times=None) -> Trajectory:
    """Flow of a strictly positive observable under a validated symmetric
    generator; entropy is non-increasing and the L^1 norm is conserved."""
    _require_symmetric(space, gen)
    if times is None:
        times = default_time_grid(spectral_gap(space, gen))
    return _trajectory(space, gen, f, times, need_positive=True)


def variance_trajectory(space: WeightedSpace, gen: Generator, f, times=None) -> Trajectory:
    """Variance channel of the flow; Var(f_t) <= e^{-2 gap t} Var(f)."""
    _require_symmetric(space, gen)
    if times is None:
        times = default_time_grid(spectral_gap(space, gen))
    return _trajectory(space, gen, f, times, need_positive=False)


def entropy_derivative_pair(
    space: WeightedSpace, gen: Generator, f, t: float, delta: float
) -> tuple[float, float]:
    """(centered finite difference of E(f_t), analytic -rate * E) at time t;
    the two must agree for a correct rate formula."""
    if t - delta < 0:
        raise InputError("derivative stencil leaves t >= 0")
    ft = evolve(gen, f, t)
    fd = (
        entropy_e(space, evolve(gen, f, t + delta))
        - entropy_e(space, evolve(gen, f, t - delta))
    ) / (2.0 * delta)
    analytic = -mlsi_ratio(space, gen, ft) * entropy_e(space, ft)
    return fd, analytic


@dataclass(frozen=True)
class DecayVerdict:
    """Monotonicity record for e^{alpha t} E(f_t) with alpha the minimum
    analytic rate along the trajectory.  ``sharp`` reports whether
    inflating alpha by 1% breaks monotonicity on this instance."""

    alpha: float
    monotone: bool
    max_violation: float
    sharp: bool
    rates_consistent: bool
    points: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "monotone": self.monotone,
            "max_violation": self.max_violation,
            "sharp": self.sharp,
            "rates_consistent": self.rates_consistent,
            "points": self.points,
        }


def verify_decay_equivalence(
    space: WeightedSpace, gen: Generator, f, times=None
) -> tuple[DecayVerdict, Trajectory]:
    """Check that the entropy decays at least exponentially with the minimum
    instantaneous rate: e^{alpha t} E(f_t) non-increasing within
    1e-9 * E(f), with a 1% inflation sharpness probe and a cross-check of
    the two rate code paths."""
    traj = entropy_trajectory(space, gen, f, times)
    rates = traj.analytic_rate
    alpha = float(np.min(rates))
    e0 = float(traj.entropy[0])
    # 1e-9 * E(f), floored at the roundoff scale of the entropy itself so
    # that identically-zero trajectories pass trivially.
    tol = 1e-9 * e0 + 1e-14

    def violations(a: float) -> float:
        weighted = np.exp(a * traj.times) * traj.entropy
        return float(np.max(np.diff(weighted), initial=-math.inf))

    worst = violations(alpha)
    sharp = violations(alpha * 1.01) > tol
    consistent = True
    stride = max(1, len(traj.times) // 5)
    for i in range(0, len(traj.times), stride):
        if traj.entropy[i] <= ENTROPY_FLOOR:
            continue
        replay = mlsi_ratio(space, gen, evolve(gen, f, float(traj.times[i])))
        if abs(replay - rates[i]) > 1e-12 * max(1.0, abs(replay)):
            consistent = False
        if alpha > replay + 1e-9:
            consistent = False
    verdict = DecayVerdict(
        alpha=alpha,
        monotone=worst <= tol,
        max_violation=worst,
        sharp=sharp,
        rates_consistent=consistent,
        points=len(traj.times),
    )
    return verdict, traj


# ---------------------------------------------------------------------------
# Randomized search: entropy-decay constant vs spectral gap
# ---------------------------------------------------------------------------

FAMILIES = ("trace_hermitian", "matrix_units", "classical")


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    dim: int = 3
    family: str = "mixed"  # one of FAMILIES or "mixed"
    budget: int = 10
    starts: int = 8
    iters: int = 80

    def __post_init__(self):
        if self.family != "mixed" and self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        if self.budget < 1:
            raise InputError("budget must be at least 1")


@dataclass(frozen=True)
class SearchEntry:
    index: int
    family: str
    dim: int
    gap: float | None
    alpha_estimate: float | None
    flagged: bool
    label: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "family": self.family,
            "dim": self.dim,
            "gap": self.gap,
            "alpha_estimate": self.alpha_estimate,
            "flagged": self.flagged,
            "label": self.label,
        }


@dataclass(frozen=True)
class SearchLog:
    seed: int
    dim: int
    family: str
    budget: int
    entries: tuple[SearchEntry, ...]
    flagged: int
    rejected: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "dim": self.dim,
            "family": self.family,
            "budget": self.budget,
            "flagged": self.flagged,
            "rejected": self.rejected,
            "entries": [e.to_dict() for e in self.entries],
        }


def _sample_pair(family: str, dim: int, rng: np.random.Generator):
    if family == "trace_hermitian":
        return random_trace_symmetric(dim, rng)
    if family == "matrix_units":
        return random_kms_symmetric(dim, rng)
    if family == "classical":
        return random_reversible_chain(dim, rng)
    raise InputError(f"unknown family {family!r}")


def search_counterexample(config: SearchConfig) -> SearchLog:
    """Sample symmetric generators and record (sampled entropy-decay upper
    bound, exact gap) pairs.  An instance with positive sampled decay bound
    but vanishing gap is flagged as a candidate only: certifying it would
    need a lower bound on the decay constant, which nonconvex sampling
    cannot provide."""
    entries = []
    flagged = 0
    rejected = 0
    for k in range(config.budget):
        family = (
            config.family
            if config.family != "mixed"
            else FAMILIES[k % len(FAMILIES)]
        )
        rng = np.random.default_rng([config.seed, 5, k])
        gen, space = _sample_pair(family, config.dim, rng)
        record = validate(gen, space, seed=config.seed)
        if not record.symmetric_ok:
            rejected += 1
            entries.append(
                SearchEntry(
                    index=k,
                    family=family,
                    dim=config.dim,
                    gap=None,
                    alpha_estimate=None,
                    flagged=False,
                    label="rejected: validation failed",
                )
            )
            continue
        gap = spectral_gap(space, gen)
        opt = OptimizerConfig(
            starts=config.starts,
            iters=config.iters,
            seed=config.seed * 1_000_003 + k,
        )
        alpha = estimate_mlsi(space, gen, opt)
        is_candidate = gap <= 1e-10 and alpha.value > 0.0
        if is_candidate:
            flagged += 1
        entries.append(
            SearchEntry(
                index=k,
                family=family,
                dim=config.dim,
                gap=gap,
                alpha_estimate=alpha.value,
                flagged=is_candidate,
                label=(
                    "candidate: inconclusive, upper bound only"
                    if is_candidate
                    else ""
                ),
            )
        )
    return SearchLog(
        seed=config.seed,
        dim=config.dim,
        family=config.family,
        budget=config.budget,
        entries=tuple(entries),
        flagged=flagged,
        rejected=rejected,
    )
