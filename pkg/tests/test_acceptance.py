"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line (run with -s to see them).  Tolerances are pinned here, not deferred.
"""

import json
import subprocess
import sys
import time

import numpy as np
import scipy.integrate

from qmslab.decay import entropy_derivative_pair, verify_decay_equivalence
from qmslab.hermitian import kernel_integral, random_hermitian
from qmslab.inequalities import (
    OptimizerConfig,
    bridge_pairing,
    hierarchy_report,
    kt_bridge,
    rc_check,
    rc_limit_probe,
    scalar_inequality_suite,
    spectral_gap,
    wrc_ratio,
)
from qmslab.semigroup import (
    build_depolarizing,
    build_lindblad,
    dirichlet,
    embed_classical,
    evolve,
    random_kms_symmetric,
    random_reversible_chain,
    random_trace_nonsymmetric,
    random_trace_symmetric,
    validate,
)
from qmslab.space import (
    WeightedSpace,
    entropy_e,
    functional_h,
    norm_p,
    variance,
)
from qmslab.inequalities import expand_h
from qmslab.space import centered

from helpers import (
    classical_dirichlet,
    classical_entropy,
    classical_h,
    classical_norm_p,
    classical_variance,
    random_density,
    random_positive,
    reversible_chain,
)

PAULI_JUMPS = [
    0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    0.5 * np.array([[0.0, -1j], [1j, 0.0]], dtype=complex),
    0.5 * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
]


def _report(num: int, name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    suffix = f" [{detail}]" if detail else ""
    print(f"ACCEPTANCE {num:02d} {name}: {status}{suffix}")
    assert ok, f"criterion {num} ({name}) failed {suffix}"


def _positive_sample(dim, rng, diagonal):
    if diagonal:
        return np.diag(np.exp(rng.standard_normal(dim))).astype(complex)
    return random_positive(dim, rng)


def test_c01_commutative_reduction():
    started = time.perf_counter()
    worst = 0.0
    for chain_idx in range(20):
        rng = np.random.default_rng([1, chain_idx])
        dim = 2 + chain_idx % 5  # N in {2,...,6}
        rates, pi = reversible_chain(dim, rng)
        gen, space = embed_classical(rates, pi)
        for f_idx in range(20):
            frng = np.random.default_rng([2, chain_idx, f_idx])
            v = np.exp(frng.standard_normal(dim))
            f = np.diag(v)
            pairs = [
                (entropy_e(space, f), classical_entropy(pi, v)),
                (functional_h(space, f), classical_h(pi, v)),
                (variance(space, f), classical_variance(pi, v)),
                (norm_p(space, f, 1.0), classical_norm_p(pi, v, 1.0)),
                (norm_p(space, f, 2.0), classical_norm_p(pi, v, 2.0)),
                (norm_p(space, f, 3.5), classical_norm_p(pi, v, 3.5)),
                (dirichlet(space, gen, f, f), classical_dirichlet(pi, rates, v)),
            ]
            for got, want in pairs:
                worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    elapsed = time.perf_counter() - started
    _report(
        1,
        "commutative reduction",
        worst <= 1e-10 and elapsed < 10.0,
        f"worst rel dev {worst:.2e}, {elapsed:.1f}s",
    )


def test_c02_trace_symmetric_regularity():
    started = time.perf_counter()
    worst_slack = 0.0
    min_wrc = np.inf
    for g_idx in range(30):
        dim = 2 + g_idx % 3  # N in {2,3,4}
        rng = np.random.default_rng([3, g_idx])
        gen, space = random_trace_symmetric(dim, rng)
        record = validate(gen, space, seed=0)
        assert record.symmetric_ok
        for s_idx in range(200):
            srng = np.random.default_rng([4, g_idx, s_idx])
            f = random_positive(dim, srng)
            q = 1.0 + 9.0 * srng.random()
            verdict = rc_check(space, gen, q, f)
            worst_slack = min(worst_slack, verdict.slack / verdict.scale)
            assert verdict.passed
            try:
                min_wrc = min(min_wrc, wrc_ratio(space, gen, f))
            except Exception:
                pass
    elapsed = time.perf_counter() - started
    _report(
        2,
        "trace-symmetric regularity",
        worst_slack >= -1e-9 and min_wrc >= 4.0 - 1e-6 and elapsed < 120.0,
        f"worst slack {worst_slack:.2e}, min wrc {min_wrc:.6f}, {elapsed:.1f}s",
    )


def test_c03_nonsymmetric_weak_regularity():
    min_ratio = np.inf
    for g_idx in range(10):
        dim = 2 + g_idx % 2
        rng = np.random.default_rng([5, g_idx])
        gen, space = random_trace_nonsymmetric(dim, rng)
        record = validate(gen, space, seed=0)
        assert record.markov_ok and not record.kms_symmetric.passed
        for s_idx in range(100):
            srng = np.random.default_rng([6, g_idx, s_idx])
            f = random_positive(dim, srng)
            try:
                min_ratio = min(min_ratio, wrc_ratio(space, gen, f))
            except Exception:
                continue
    _report(
        3,
        "non-symmetric weak regularity",
        min_ratio >= 2.0 - 1e-6,
        f"min wrc ratio {min_ratio:.6f}",
    )


def test_c04_second_order_expansion():
    worst_a = 0.0
    worst_margin = np.inf
    worst_fd = 0.0
    count = 0
    for rho_idx in range(10):
        rng = np.random.default_rng([7, rho_idx])
        dim = 2 + rho_idx % 4  # N <= 5
        space = WeightedSpace(random_density(dim, rng))
        for f_idx in range(5):
            frng = np.random.default_rng([8, rho_idx, f_idx])
            f = centered(space, random_hermitian(dim, frng))
            result = expand_h(space, f)
            worst_a = max(worst_a, abs(result.A))
            worst_margin = min(worst_margin, result.B - 1.5 * result.var)
            worst_fd = max(worst_fd, abs(result.fd_B - result.B) / abs(result.B))
            count += 1
    _report(
        4,
        "second-order expansion",
        worst_a <= 1e-10 and worst_margin >= -1e-9 and worst_fd <= 1e-5,
        f"{count} directions, |A|<= {worst_a:.1e}, min(B-1.5Var) {worst_margin:.2e}, "
        f"fd dev {worst_fd:.1e}",
    )


def test_c05_kernel_integral_closed_forms():
    exact_value = kernel_integral(1.0, 1.0)
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        a, b = rng.uniform(0.01, 10.0, 2)
        quad, _ = scipy.integrate.quad(
            lambda s: (2.0 * s + a) / ((s + b) * (s + a) ** 2),
            0.0,
            np.inf,
            epsabs=1e-13,
            epsrel=1e-12,
        )
        worst = max(worst, abs(kernel_integral(a, b) - quad) / abs(quad))
    _report(
        5,
        "kernel integral closed forms",
        exact_value == 1.5 and worst <= 1e-8,
        f"(1,1) -> {exact_value!r}, worst quadrature dev {worst:.2e}",
    )


def test_c06_entropy_decay_consistency():
    families = [random_trace_symmetric, random_kms_symmetric, random_reversible_chain]
    worst_fd = 0.0
    all_monotone = True
    any_sharp = False
    for k in range(10):
        dim = 2 + k % 3  # N <= 4
        rng = np.random.default_rng([100, k])
        gen, space = families[k % 3](dim, rng)
        record = validate(gen, space, seed=0)
        assert record.symmetric_ok
        frng = np.random.default_rng([200, k])
        f = _positive_sample(dim, frng, gen.is_classical)
        gap = spectral_gap(space, gen)
        verdict, traj = verify_decay_equivalence(space, gen, f)
        all_monotone = all_monotone and verdict.monotone and verdict.rates_consistent
        any_sharp = any_sharp or verdict.sharp
        # derivative identity at interior grid points in the resolved regime
        # (entropy above 1e-3 of its start; beyond that the centered
        # difference of O(1) traces sits at the double-precision floor).
        # The stencil scales with the fastest instantaneous rate.
        e0 = traj.entropy[0]
        rate_scale = max(gap, float(np.max(traj.analytic_rate)), 1.0)
        interior = [
            i
            for i in range(1, len(traj.times) - 1)
            if traj.entropy[i] > 1e-3 * e0
        ]
        for i in interior[:: max(1, len(interior) // 5)][:5]:
            t = float(traj.times[i])
            delta = min(1e-4 / rate_scale, 0.5 * t)
            fd, analytic = entropy_derivative_pair(space, gen, f, t, delta)
            worst_fd = max(
                worst_fd, abs(fd - analytic) / max(abs(fd), abs(analytic), 1e-300)
            )
    _report(
        6,
        "entropy decay consistency",
        worst_fd <= 1e-6 and all_monotone and any_sharp,
        f"worst derivative dev {worst_fd:.2e}, monotone={all_monotone}, "
        f"sharpness witnessed={any_sharp}",
    )


def test_c07_interpolated_form_limit():
    families = [random_trace_symmetric, random_kms_symmetric, random_reversible_chain]
    worst_terminal = 0.0
    worst_ratio = np.inf
    for k in range(10):
        dim = 2 + k % 2
        rng = np.random.default_rng([300, k])
        gen, space = families[k % 3](dim, rng)
        validate(gen, space, seed=0)
        frng = np.random.default_rng([400, k])
        f = _positive_sample(dim, frng, gen.is_classical)
        rows = rc_limit_probe(space, gen, f, q_sequence=(1.01, 1.0001))
        worst_terminal = max(worst_terminal, rows[1].rel_error)
        worst_ratio = min(
            worst_ratio, rows[0].rel_error / max(rows[1].rel_error, 1e-300)
        )
    _report(
        7,
        "interpolated form limit",
        worst_terminal <= 1e-3 and worst_ratio >= 5.0,
        f"terminal rel err {worst_terminal:.2e}, error contraction {worst_ratio:.1f}x",
    )


def test_c08_stochastic_bridge():
    worst_entry = 0.0
    worst_struct = 0.0
    worst_pairing = 0.0
    for k in range(20):
        dim = 2 + k % 3
        rng = np.random.default_rng([500, k])
        gen, _ = random_trace_symmetric(dim, rng)
        frng = np.random.default_rng([600, k])
        f = random_hermitian(dim, frng)
        t = 0.1 + 1.9 * frng.random()
        bridge = kt_bridge(gen, f, t)
        res = bridge.residuals()
        worst_entry = min(worst_entry, res["min_entry"])
        worst_struct = max(
            worst_struct, res["symmetry"], res["row_sums"], res["col_sums"]
        )
        n_clusters = len(bridge.projectors)
        for pair_idx in range(5):
            prng = np.random.default_rng([700, k, pair_idx])
            h_vals = prng.standard_normal(n_clusters)
            g_vals = prng.standard_normal(n_clusters)
            m_h = sum(h_vals[c] * q for c, q in enumerate(bridge.projectors))
            m_g = sum(g_vals[c] * q for c, q in enumerate(bridge.projectors))
            lhs = bridge_pairing(bridge, h_vals, g_vals)
            rhs = np.trace(evolve(gen, m_h, t) @ m_g).real
            worst_pairing = max(
                worst_pairing, abs(lhs - rhs) / max(1.0, abs(rhs))
            )
    ok = worst_entry >= -1e-12 and worst_struct <= 1e-10 and worst_pairing <= 1e-10
    _report(
        8,
        "stochastic bridge",
        ok,
        f"min entry {worst_entry:.1e}, structure dev {worst_struct:.1e}, "
        f"pairing dev {worst_pairing:.1e}",
    )


def test_c09_exact_gaps():
    space2 = WeightedSpace.trace_state(2)
    depol_rank_one = build_depolarizing(space2.rho)
    validate(depol_rank_one, space2, seed=0)
    gap_a = spectral_gap(space2, depol_rank_one)
    depol_pauli = build_lindblad(None, PAULI_JUMPS)
    validate(depol_pauli, space2, seed=0)
    gap_b = spectral_gap(space2, depol_pauli)
    chain, chain_space = embed_classical(
        np.array([[-1.0, 1.0], [1.0, -1.0]]), [0.5, 0.5]
    )
    validate(chain, chain_space, seed=0)
    gap_c = spectral_gap(chain_space, chain)
    ok = (
        abs(gap_a - 1.0) <= 1e-12
        and abs(gap_b - 1.0) <= 1e-12
        and abs(gap_c - 2.0) <= 1e-12
    )
    _report(9, "exact gaps", ok, f"depol {gap_a!r}/{gap_b!r}, chain {gap_c!r}")


def test_c10_hierarchy_at_desk_scale():
    space = WeightedSpace.trace_state(2)
    gen = build_depolarizing(space.rho)
    validate(gen, space, seed=0)
    report = hierarchy_report(space, gen, OptimizerConfig(starts=64, seed=0))
    product = report.gap * report.c_lsi.value
    checks = report.hierarchy
    ok = (
        product >= 0.95
        and checks.entropy_bridge_max <= 1e-9
        and checks.wrc_chain_worst <= 1e-9
        and checks.passed
    )
    _report(
        10,
        "hierarchy at desk scale",
        ok,
        f"gap*c_lsi {product:.6f}, bridge {checks.entropy_bridge_max:.1e}, "
        f"chain {checks.wrc_chain_worst:.1e} over {checks.samples} samples",
    )


def test_c11_scalar_inequalities():
    report = scalar_inequality_suite(100000, seed=0)
    violations = sum(report.violations.values())
    eq_worst = max(report.equality_cases.values())
    _report(
        11,
        "scalar inequalities",
        report.passed and violations == 0 and eq_worst <= 1e-12,
        f"{report.samples} samples/inequality, {violations} violations, "
        f"equality dev {eq_worst:.1e}",
    )


def test_c12_determinism(tmp_path):
    spec = {
        "dim": 2,
        "rho": "trace",
        "generator": {
            "lindblad": {
                "jumps": [
                    {"re": [[0.0, 0.5], [0.5, 0.0]]},
                    {"re": [[0.5, 0.0], [0.0, -0.5]]},
                ]
            }
        },
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    ok = True
    details = []
    for args in (
        ["constants", "--spec", str(path), "--budget", "4", "--seed", "7"],
        ["decay", "--spec", str(path), "--seed", "7", "--csv", str(tmp_path / "t.csv")],
        ["search", "--budget", "2", "--seed", "7"],
    ):
        cmd = [sys.executable, "-m", "qmslab.cli", *args]
        first = subprocess.run(cmd, capture_output=True, check=True)
        csv_first = (tmp_path / "t.csv").read_bytes() if "--csv" in args else b""
        second = subprocess.run(cmd, capture_output=True, check=True)
        csv_second = (tmp_path / "t.csv").read_bytes() if "--csv" in args else b""
        same = first.stdout == second.stdout and csv_first == csv_second
        ok = ok and same
        details.append(f"{args[0]}:{'=' if same else '!='}")
    _report(12, "determinism", ok, " ".join(details))
