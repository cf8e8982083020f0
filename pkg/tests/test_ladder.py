import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfluct.channels import depolarizing_cpm, identity_cpm, induced_cpm
from qfluct.ladder import (
    LadderSpec,
    LevelSystem,
    censored_v_of_u,
    decoupling_check,
    diagonal_probs,
    ideal_v_of_u,
    interference_prediction,
    interference_probability,
    offdiag_amplitudes,
    rebuild_from_transitions,
    shift_operator,
    total_hamiltonian,
    transitions_from_origin,
    translation_invariance_check,
    work_distribution,
)
from qfluct.models import censored_example, level_gibbs, symmetric_ladder, two_qubit_model
from qfluct.operators import Operator, TensorSpace, random_orthogonal_matrix, random_unitary_matrix

seeds = st.integers(min_value=0, max_value=2**32 - 1)
SMALL = LadderSpec(1.0, -8, 8)


def small_model(seed, mode="constant"):
    return symmetric_ladder((0, 1), (1, 2), SMALL, 0.7, np.random.default_rng(seed), mode=mode)


def test_spec_basics():
    spec = LadderSpec(0.5, -2, 3)
    assert spec.size == 6
    assert np.allclose(spec.energies, [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5])
    assert spec.index(-2) == 0
    assert spec.interior(2) == [2, 3]
    with pytest.raises(IndexError):
        spec.index(4)
    with pytest.raises(ValueError):
        LadderSpec(0.0, 0, 3)
    with pytest.raises(ValueError):
        LadderSpec(1.0, 3, 3)


def test_shift_operator():
    spec = LadderSpec(1.0, 0, 4)
    d = shift_operator(spec).matrix
    assert np.allclose(d @ spec.ket(1), spec.ket(2))
    assert np.allclose(d @ spec.ket(4), 0)
    assert np.allclose(shift_operator(spec, -2).matrix @ spec.ket(3), spec.ket(1))
    with pytest.raises(ValueError):
        shift_operator(spec, 5)


def test_level_system_rejects_bad_basis():
    with pytest.raises(ValueError):
        LevelSystem(SMALL.space, tuple(range(SMALL.size)), np.ones((SMALL.size, SMALL.size)))


def test_censored_lift_conserves_energy(rng):
    system = LevelSystem.diagonal("S", (0, 1, 3))
    v = censored_v_of_u(random_unitary_matrix(3, rng), system, SMALL)
    h = total_hamiltonian(system, SMALL).matrix
    assert v.is_unitary(1e-12)
    assert np.max(np.abs(h @ v.matrix - v.matrix @ h)) < 1e-12


def test_censored_lift_of_flip_against_hand_built_oracle():
    # U = sigma_x on levels (0, 1): |0, j> -> |1, j-1> and |1, j> -> |0, j+1> where both ends exist
    spec = LadderSpec(1.0, 0, 6)
    system = LevelSystem.diagonal("S", (0, 1))
    v = censored_v_of_u(np.array([[0, 1], [1, 0]]), system, spec)
    d = spec.size
    oracle = np.eye(2 * d)
    for j in range(d):
        if j >= 1:
            oracle[:, [0 * d + j, 1 * d + j - 1]] = 0
            oracle[1 * d + j - 1, 0 * d + j] = 1
            oracle[0 * d + j, 1 * d + j - 1] = 1
    assert np.array_equal(v.matrix.real, oracle)


def test_flip_work_distribution():
    spec = LadderSpec(1.0, 0, 6)
    system = LevelSystem.diagonal("S", (0, 1))
    v = censored_v_of_u(np.array([[0, 1], [1, 0]]), system, spec)
    g = level_gibbs((0, 1), np.eye(2), 1.0, 0.8)
    phi = induced_cpm(v, g)
    dist = work_distribution(phi, np.diag(spec.ket(3)), spec.hamiltonian())
    g0, g1 = np.real(np.diag(g.matrix))
    assert set(dist) == {-1.0, 1.0}
    assert dist[1.0] == pytest.approx(g0, abs=1e-14)
    assert dist[-1.0] == pytest.approx(g1, abs=1e-14)


def test_censored_example_bottom_and_interior():
    ex = censored_example()
    spec, system = ex.spec, ex.system
    for n in range(system.dim):
        if system.levels[n] <= 2:
            # initial-sector states cannot hand energy to an empty reservoir
            x = np.kron(system.basis[:, n], spec.ket(0))
            assert np.allclose(ex.censored.matrix @ x, x)
        for j in range(4, 9):
            y = np.kron(system.basis[:, n], spec.ket(j))
            assert np.allclose(ex.censored.matrix @ y, ex.ideal @ y, atol=1e-14)


@given(seeds)
def test_lift_respects_products_on_interior(seed):
    r = np.random.default_rng(seed)
    system = LevelSystem.diagonal("S", (0, 1, 3))
    u1, u2 = random_unitary_matrix(3, r), random_unitary_matrix(3, r)
    v1 = censored_v_of_u(u1, system, SMALL).matrix
    v2 = censored_v_of_u(u2, system, SMALL).matrix
    v12 = censored_v_of_u(u2 @ u1, system, SMALL).matrix
    margin = 2 * system.span
    for n in range(3):
        for j in SMALL.levels[margin:-margin]:
            x = np.kron(np.eye(3)[:, n], SMALL.ket(int(j)))
            assert np.max(np.abs(v2 @ (v1 @ x) - v12 @ x)) <= 1e-12


@given(seeds)
def test_lift_commutes_with_transpose(seed):
    r = np.random.default_rng(seed)
    o = random_orthogonal_matrix(3, r)
    system = LevelSystem(TensorSpace.single("S", 3), (0, 1, 3), o)
    u = o @ random_unitary_matrix(3, r) @ o.T
    v = censored_v_of_u(u, system, SMALL).matrix
    vt = censored_v_of_u(u.T, system, SMALL).matrix
    assert np.max(np.abs(v.T - vt)) <= 1e-12


def test_diagonal_probs_of_identity():
    ident = identity_cpm(SMALL.space)
    assert np.array_equal(diagonal_probs(ident), np.eye(SMALL.size))


def test_diagonal_probs_reject_degenerate_spectrum():
    model = small_model(1)
    with pytest.raises(ValueError):
        diagonal_probs(model.f_plus, np.zeros(SMALL.size))


def test_transition_table_is_translation_invariant_inside():
    model = small_model(3)
    p = diagonal_probs(model.f_plus, model.h_reservoir)
    win = model.window
    ref = transitions_from_origin(p, win[0])
    for n in win:
        for k, pk in ref.items():
            if n + k in win:
                assert p[n + k, n] == pytest.approx(pk, abs=1e-14)
    assert sum(ref.values()) == pytest.approx(1.0, abs=1e-13)


def test_channel_rebuilt_from_transitions(rng):
    model = small_model(4)
    p = diagonal_probs(model.f_plus)
    win = list(model.window)
    p_k = transitions_from_origin(p, win[len(win) // 2])
    rho = np.zeros((SMALL.size,) * 2, dtype=complex)
    core = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    mid = win[len(win) // 2]
    rho[mid - 1 : mid + 2, mid - 1 : mid + 2] = core @ core.conj().T
    rebuilt = rebuild_from_transitions(p_k, rho)
    assert np.max(np.abs(rebuilt - model.f_plus.apply_matrix(rho))) < 1e-13


@pytest.mark.parametrize("theta", [0.0, 0.9, 2.5, -1.2])
def test_interference_reconstruction(theta):
    model = small_model(5)
    f = model.f_plus
    n = model.window[3]
    m = n - 1
    p = diagonal_probs(f)
    q = offdiag_amplitudes(f, 1.0, model.h_reservoir)[(m, n)]
    # partners sit one level below: E_n - E_{n'} = 1
    exact = interference_probability(f, n, n - 1, m, m - 1, theta)
    assert exact == pytest.approx(interference_prediction(p, q, n, n - 1, m, m - 1, theta), abs=1e-14)
    assert abs(q) > 1e-3


def test_decoupling_holds_without_conditioning():
    assert decoupling_check(small_model(6).f_plus, SMALL.hamiltonian()) <= 1e-12


def test_decoupling_fails_with_coherent_effect():
    m = two_qubit_model(0.7)
    assert decoupling_check(m.f_plus, m.h_reservoir) > 1e-2


def test_decoupling_of_depolarizing():
    assert decoupling_check(depolarizing_cpm(SMALL.space, 0.3), SMALL.hamiltonian()) <= 1e-15


def test_translation_invariance():
    model = small_model(7)
    win = model.window
    assert translation_invariance_check(model.f_plus, SMALL, win) <= 1e-12
    assert translation_invariance_check(model.f_plus, SMALL, []) == 0.0
    varying = small_model(7, mode="varying")
    assert translation_invariance_check(varying.f_plus, SMALL, win) > 1e-3
    with pytest.raises(ValueError):
        translation_invariance_check(model.f_plus, SMALL, [SMALL.size])


def test_constant_blocks_give_unital_reverse_map():
    model = small_model(8)
    win = list(model.window)
    r1 = model.r_plus.apply_matrix(np.eye(SMALL.size))
    assert np.allclose(r1[np.ix_(win, win)], np.eye(len(win)), atol=1e-13)


def test_varying_blocks_give_non_unital_reverse_map():
    model = small_model(8, mode="varying")
    win = list(model.window)
    r1 = model.r_plus.apply_matrix(np.eye(SMALL.size))
    assert np.max(np.abs(r1[np.ix_(win, win)] - np.eye(len(win)))) > 1e-2


def test_ideal_lift_is_isometric_inside(rng):
    system = LevelSystem.diagonal("S", (0, 2))
    v = ideal_v_of_u(random_unitary_matrix(2, rng), system, SMALL)
    x = np.kron(np.array([0.6, 0.8]), SMALL.ket(0))
    assert np.linalg.norm(v @ x) == pytest.approx(1.0, abs=1e-14)


def test_work_distribution_normalized():
    model = small_model(9)
    mid = model.window[len(model.window) // 2]
    dist = work_distribution(model.f_plus, Operator(SMALL.space, np.diag(np.eye(SMALL.size)[mid])), SMALL.hamiltonian())
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-13)
