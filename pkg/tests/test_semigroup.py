import math

import numpy as np
import pytest

from qmslab.errors import InputError, NonErgodicError
from qmslab.hermitian import min_eig, random_hermitian
from qmslab.semigroup import (
    Generator,
    Provenance,
    build_depolarizing,
    build_lindblad,
    dirichlet,
    dirichlet_q,
    embed_classical,
    evolve,
    find_invariant_state,
    random_kms_symmetric,
    random_trace_nonsymmetric,
    random_trace_symmetric,
    validate,
)
from qmslab.space import WeightedSpace, norm_p, variance

from helpers import (
    classical_dirichlet,
    random_density,
    random_positive,
    reversible_chain,
)

PAULI = [
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1j], [1j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
]


def depolarizing_qubit() -> Generator:
    """Pauli jump set with rates 1/4: L(f) = tr(f)/2 * 1 - f."""
    return build_lindblad(None, [0.5 * s for s in PAULI])


# construction ------------------------------------------------------------------


def test_identity_jump_gives_zero_generator():
    gen = build_lindblad(None, [np.eye(2)])
    assert np.linalg.norm(gen.superop) <= 1e-14


def test_lindblad_preserves_identity_by_construction():
    rng = np.random.default_rng(0)
    e12 = np.zeros((2, 2), dtype=complex)
    e12[0, 1] = 1.0
    gen = build_lindblad(None, [e12, e12.T.copy()])
    assert np.linalg.norm(gen.apply(np.eye(2))) <= 1e-12
    gen2 = build_lindblad(random_hermitian(3, rng), [random_hermitian(3, rng)])
    assert np.linalg.norm(gen2.apply(np.eye(3))) <= 1e-12


def test_depolarizing_jump_set_matches_rank_one_form():
    gen = depolarizing_qubit()
    ref = build_depolarizing(np.eye(2) / 2.0)
    assert np.linalg.norm(gen.superop - ref.superop) <= 1e-12


def test_depolarizing_superoperator_spectrum():
    # eigen oracle: eigenvalues {0, -1, -1, -1}
    gen = depolarizing_qubit()
    eigs = np.sort(np.linalg.eigvals(gen.superop).real)
    np.testing.assert_allclose(eigs, [-1.0, -1.0, -1.0, 0.0], atol=1e-12)


def test_generator_rejects_non_markov_superoperator():
    with pytest.raises(InputError):
        Generator(np.eye(4), Provenance(kind="raw"))


def test_lindblad_dimension_mismatch():
    with pytest.raises(InputError):
        build_lindblad(np.eye(2), [np.eye(3)])


# classical embedding -------------------------------------------------------------


def test_embed_classical_two_state():
    rates = np.array([[-1.0, 1.0], [1.0, -1.0]])
    gen, space = embed_classical(rates, [0.5, 0.5])
    assert np.linalg.norm(gen.apply(np.eye(2))) <= 1e-14
    np.testing.assert_allclose(space.rho, np.diag([0.5, 0.5]))
    # eigen oracle: the (diagonal-block) spectrum of -Q is {0, 2}
    np.testing.assert_allclose(
        np.sort(np.linalg.eigvalsh(-0.5 * (rates + rates.T))), [0.0, 2.0], atol=1e-14
    )


def test_embed_classical_matches_chain_action():
    rng = np.random.default_rng(1)
    rates, pi = reversible_chain(4, rng)
    gen, space = embed_classical(rates, pi)
    v = rng.standard_normal(4)
    out = gen.apply(np.diag(v))
    np.testing.assert_allclose(np.diag(out).real, rates @ v, atol=1e-12)
    assert np.linalg.norm(out - np.diag(np.diag(out))) <= 1e-14


def test_embed_classical_dirichlet_form_is_classical():
    rng = np.random.default_rng(2)
    rates, pi = reversible_chain(3, rng)
    gen, space = embed_classical(rates, pi)
    v = rng.standard_normal(3)
    got = dirichlet(space, gen, np.diag(v), np.diag(v))
    want = classical_dirichlet(pi, rates, v)
    assert got == pytest.approx(want, rel=1e-10)
    # sign-resolved pair form
    pair_form = 0.5 * sum(
        pi[i] * rates[i, j] * (v[j] - v[i]) ** 2
        for i in range(3)
        for j in range(3)
        if i != j
    )
    assert got == pytest.approx(pair_form, rel=1e-10)


def test_embed_classical_rejects_bad_input():
    ok_rates = np.array([[-1.0, 1.0], [1.0, -1.0]])
    with pytest.raises(InputError):
        embed_classical(np.array([[-1.0, 1.0], [2.0, -2.0]]), [0.5, 0.5])  # not reversible
    with pytest.raises(InputError):
        embed_classical(np.array([[-1.0, 0.5], [1.0, -1.0]]), [0.5, 0.5])  # rows not zero
    with pytest.raises(InputError):
        embed_classical(ok_rates, [0.5, 0.6])  # law does not sum to 1
    with pytest.raises(InputError):
        embed_classical(np.array([[-1.0, 1.0], [1.0, -1.0]]) * -1.0, [0.5, 0.5])


# invariant state ------------------------------------------------------------------


def test_invariant_state_zero_generator_is_degenerate():
    gen = Generator(np.zeros((4, 4)), Provenance(kind="raw"))
    with pytest.raises(NonErgodicError):
        find_invariant_state(gen)


def test_invariant_state_classical():
    rng = np.random.default_rng(3)
    rates, pi = reversible_chain(3, rng)
    gen, _ = embed_classical(rates, pi)
    space = find_invariant_state(gen)
    np.testing.assert_allclose(np.diag(space.rho).real, pi, atol=1e-10)


def test_invariant_state_trace_symmetric_lindblad():
    gen, _ = random_trace_symmetric(3, np.random.default_rng(4))
    space = find_invariant_state(gen)
    np.testing.assert_allclose(space.rho, np.eye(3) / 3.0, atol=1e-9)


# validation -----------------------------------------------------------------------


def test_validate_depolarizing_all_pass():
    gen = depolarizing_qubit()
    space = WeightedSpace.trace_state(2)
    record = validate(gen, space)
    assert record.identity_preserving.passed
    assert record.invariance.passed
    assert record.kms_symmetric.passed
    assert record.positivity_probe.passed
    assert record.positivity_probe.worst_min_eig >= -1e-9


def test_validate_hamiltonian_flow_fails_kms_off_trace_state():
    gen = build_lindblad(PAULI[0], [])
    space = WeightedSpace(np.diag([0.3, 0.7]))
    record = validate(gen, space)
    assert not record.kms_symmetric.passed
    assert record.positivity_probe.passed  # unitary conjugation stays positive


def test_validate_classical_reversible_passes():
    rng = np.random.default_rng(5)
    rates, pi = reversible_chain(4, rng)
    gen, space = embed_classical(rates, pi)
    record = validate(gen, space)
    assert record.symmetric_ok


def test_validate_random_families():
    gen, space = random_kms_symmetric(3, np.random.default_rng(6))
    assert validate(gen, space).kms_symmetric.passed
    gen, space = random_trace_nonsymmetric(3, np.random.default_rng(7))
    record = validate(gen, space)
    assert not record.kms_symmetric.passed
    assert record.markov_ok


def test_validation_invariance_symmetry_duality():
    # for symmetric generators tr(rho L f) = -E(1, f) = 0 on a basis
    gen, space = random_kms_symmetric(2, np.random.default_rng(8))
    validate(gen, space)
    rng = np.random.default_rng(9)
    for _ in range(4):
        f = random_hermitian(2, rng)
        assert abs(np.trace(space.rho @ gen.apply(f))) <= 1e-10
        assert abs(dirichlet(space, gen, np.eye(2), f)) <= 1e-10


# evolution ------------------------------------------------------------------------


def test_evolve_at_time_zero_is_identity():
    gen = depolarizing_qubit()
    f = np.diag([1.5, 0.5]).astype(complex)
    np.testing.assert_allclose(evolve(gen, f, 0.0), f)


def test_evolve_depolarizing_closed_form():
    rng = np.random.default_rng(10)
    rho = random_density(2, rng)
    gen = build_depolarizing(rho)
    f = random_hermitian(2, rng)
    mean = np.trace(rho @ f).real
    for t in (0.1, 0.8, 2.5):
        got = evolve(gen, f, t)
        want = math.exp(-t) * f + (1.0 - math.exp(-t)) * mean * np.eye(2)
        assert np.linalg.norm(got - want) <= 1e-10


def test_evolve_semigroup_law_and_identity():
    gen, space = random_kms_symmetric(3, np.random.default_rng(11))
    rng = np.random.default_rng(12)
    f = random_hermitian(3, rng)
    s, t = 0.37, 0.91
    lhs = evolve(gen, evolve(gen, f, s), t)
    rhs = evolve(gen, f, s + t)
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(1.0, np.linalg.norm(rhs))
    one_t = evolve(gen, np.eye(3), 1.3)
    assert np.linalg.norm(one_t - np.eye(3)) <= 1e-10


def test_evolve_preserves_positivity_floor():
    gen, space = random_kms_symmetric(3, np.random.default_rng(13))
    f = random_positive(3, np.random.default_rng(14))
    low = min_eig(f)
    for t in (0.2, 1.0, 4.0):
        assert min_eig(evolve(gen, f, t)) >= low - 1e-9


def test_evolve_conserves_l1_norm():
    gen, space = random_kms_symmetric(3, np.random.default_rng(15))
    f = random_positive(3, np.random.default_rng(16))
    base = norm_p(space, f, 1.0)
    for t in (0.5, 2.0):
        assert norm_p(space, evolve(gen, f, t), 1.0) == pytest.approx(base, abs=1e-10)


def test_evolve_rejects_negative_time():
    with pytest.raises(InputError):
        evolve(depolarizing_qubit(), np.eye(2), -0.1)


def test_propagator_cache_reuses_matrices():
    gen = depolarizing_qubit()
    assert gen.propagator(0.5) is gen.propagator(0.5)


def test_propagator_cache_is_idempotent_across_threads():
    import concurrent.futures

    gen = depolarizing_qubit()
    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: gen.propagator(0.25), range(32)))
    for r in results[1:]:
        assert r is results[0]


# Dirichlet forms --------------------------------------------------------------------


def test_dirichlet_vanishes_on_identity():
    gen = depolarizing_qubit()
    space = WeightedSpace.trace_state(2)
    assert dirichlet(space, gen, np.eye(2), np.eye(2)) == pytest.approx(0.0, abs=1e-14)


def test_dirichlet_depolarizing_is_variance():
    rng = np.random.default_rng(17)
    rho = random_density(3, rng)
    space = WeightedSpace(rho)
    gen = build_depolarizing(rho)
    for _ in range(4):
        f = random_hermitian(3, rng)
        assert dirichlet(space, gen, f, f) == pytest.approx(
            variance(space, f), rel=1e-10
        )


def test_dirichlet_symmetry_on_symmetric_generator():
    gen, space = random_kms_symmetric(3, np.random.default_rng(18))
    rng = np.random.default_rng(19)
    f, g = random_hermitian(3, rng), random_hermitian(3, rng)
    assert dirichlet(space, gen, f, g) == pytest.approx(
        dirichlet(space, gen, g, f), abs=1e-9
    )
    assert dirichlet(space, gen, f, f) >= -1e-10


def test_dirichlet_q_reduces_to_quadratic_form_at_two():
    gen, space = random_kms_symmetric(3, np.random.default_rng(20))
    f = random_positive(3, np.random.default_rng(21))
    assert dirichlet_q(space, gen, 2.0, f) == pytest.approx(
        dirichlet(space, gen, f, f), rel=1e-10
    )


def test_dirichlet_q_vanishes_on_identity():
    gen, space = random_kms_symmetric(3, np.random.default_rng(22))
    for q in (1.5, 2.0, 3.0):
        assert dirichlet_q(space, gen, q, np.eye(3)) == pytest.approx(0.0, abs=1e-12)


def test_dirichlet_q_commuting_trace_case():
    # at rho = 1/N and q = 3: E_3(f, f) = -tr(f^2 L f)/N
    gen, space = random_trace_symmetric(3, np.random.default_rng(23))
    f = np.diag([0.5, 1.0, 2.0]).astype(complex)
    got = dirichlet_q(space, gen, 3.0, f)
    want = -np.trace(f @ f @ gen.apply(f)).real / 3.0
    assert got == pytest.approx(want, rel=1e-10)
