import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfluct.channels import CPM, cpm_distance, kraus_cpm, unitary_cpm
from qfluct.operators import (
    Operator,
    TensorSpace,
    random_hermitian,
    random_orthogonal_matrix,
    random_unitary,
    random_unitary_matrix,
)
from qfluct.reversal import (
    TimeReversal,
    apply_reversal,
    make_reversal,
    norm_preservation,
    ominus,
    product_reversal,
    transpose_reversal,
    validate_reversal,
)

QUBIT = TensorSpace.single("S", 2)
Y_SWAP = np.array([[0, 1], [1, 0]], dtype=complex)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def superop(f, d):
    """Matrix of a linear map on d x d matrices, column-stacked."""
    cols = []
    for j in range(d):
        for i in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1
            cols.append(f(e).reshape(-1, order="F"))
    return np.array(cols).T


def test_plain_transpose():
    t = transpose_reversal(QUBIT)
    m = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(t.apply_matrix(m), m.T)
    assert t.sign == 1


def test_swap_twist_example():
    t = make_reversal(QUBIT, twist=Y_SWAP)
    m = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.allclose(t.apply_matrix(m), [[4, 2], [3, 1]])
    assert validate_reversal(t).passed(1e-12)


def test_skew_twist_has_negative_sign():
    t = make_reversal(QUBIT, twist=np.array([[0, 1], [-1, 0]], dtype=complex))
    assert t.sign == -1
    assert validate_reversal(t).passed(1e-12)


def test_diagonal_phase_twist_is_symmetric():
    t = make_reversal(QUBIT, twist=np.diag([1, 1j]))
    assert t.sign == 1
    assert validate_reversal(t).passed(1e-12)


def test_generic_twist_rejected():
    with pytest.raises(ValueError):
        make_reversal(QUBIT, twist=np.array([[1, 1], [-1, 1]]) / np.sqrt(2) * np.exp(0.3j))


def test_generic_twist_breaks_involution():
    u = np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]], dtype=complex)
    rep = validate_reversal(TimeReversal(QUBIT, np.eye(2, dtype=complex), u, 1))
    assert rep.involution > 0.1
    assert rep.antimultiplicative < 1e-12


def test_non_unitary_inputs_rejected():
    with pytest.raises(ValueError):
        make_reversal(QUBIT, twist=np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        make_reversal(QUBIT, basis=np.ones((2, 2)))


def test_space_mismatch():
    t = transpose_reversal(QUBIT)
    with pytest.raises(ValueError):
        apply_reversal(t, Operator(TensorSpace.single("E", 2), np.eye(2)))


@given(seeds, st.integers(min_value=2, max_value=5))
def test_random_symmetric_twists_are_reversals(seed, d):
    r = np.random.default_rng(seed)
    w = random_unitary_matrix(d, r)
    basis = random_unitary_matrix(d, r)
    # w w^t is symmetric and unitary in the computational basis; carry it to `basis`
    twist = basis @ (w @ w.T) @ basis.conj().T
    t = make_reversal(TensorSpace.single("A", d), basis=basis, twist=twist)
    assert validate_reversal(t).passed(1e-12)
    q = random_hermitian(t.space, r)
    dn, dt = norm_preservation(t, q)
    assert dn <= 1e-12 and dt <= 1e-12


def test_large_space_uses_random_pairs():
    t = transpose_reversal(TensorSpace.single("A", 8))
    assert validate_reversal(t, np.random.default_rng(1)).passed(1e-12)


def test_product_reversal(rng):
    t1 = make_reversal(QUBIT, twist=Y_SWAP)
    t2 = make_reversal(TensorSpace.single("E", 2), twist=np.array([[0, 1], [-1, 0]]))
    t = product_reversal(t1, t2)
    assert t.sign == -1
    assert validate_reversal(t).passed(1e-12)
    a = random_hermitian(t1.space, rng).matrix
    b = random_hermitian(t2.space, rng).matrix
    assert np.allclose(t.apply_matrix(np.kron(a, b)), np.kron(t1.apply_matrix(a), t2.apply_matrix(b)))


def test_reversal_fixes_eigenprojectors_of_invariant_hamiltonian(rng):
    t = transpose_reversal(TensorSpace.single("A", 4))
    h = random_orthogonal_matrix(4, rng) @ np.diag([0.0, 1.0, 2.5, 4.0]) @ random_orthogonal_matrix(4, rng).T
    h = (h + h.T) / 2
    assert np.allclose(t.apply_matrix(h), h)
    _, v = np.linalg.eigh(h)
    for k in range(4):
        p = np.outer(v[:, k], v[:, k].conj())
        assert np.allclose(t.apply_matrix(p), p, atol=1e-12)


def test_ominus_of_identity_is_identity():
    t = make_reversal(QUBIT, twist=Y_SWAP)
    ident = kraus_cpm(QUBIT, QUBIT, [np.eye(2)])
    assert cpm_distance(ominus(ident, t), ident) < 1e-14


def test_ominus_of_unitary(rng):
    t = make_reversal(QUBIT, twist=Y_SWAP)
    v = random_unitary(QUBIT, rng)
    expected = unitary_cpm(Operator(QUBIT, t.apply_matrix(v.matrix)))
    assert cpm_distance(ominus(unitary_cpm(v), t), expected) < 1e-12


@given(seeds)
def test_ominus_matches_superoperator_definition(seed):
    r = np.random.default_rng(seed)
    t = make_reversal(QUBIT, twist=Y_SWAP)
    phi = kraus_cpm(QUBIT, QUBIT, [r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2)) for _ in range(2)])
    psi = ominus(phi, t)
    direct = superop(lambda m: t.apply_matrix(phi.adjoint_matrix(t.apply_matrix(m))), 2)
    assert np.max(np.abs(superop(psi.apply_matrix, 2) - direct)) <= 1e-12
    assert cpm_distance(ominus(psi, t), phi) <= 1e-12


def test_ominus_preserves_unitality(rng):
    t = transpose_reversal(QUBIT)
    us = [random_unitary(QUBIT, rng).matrix for _ in range(3)]
    phi = kraus_cpm(QUBIT, QUBIT, [u / np.sqrt(3) for u in us])
    assert phi.is_unital()
    assert ominus(phi, t).is_unital()


def test_ominus_between_spaces(rng):
    a, b = TensorSpace.single("A", 2), TensorSpace.single("B", 3)
    ta, tb = transpose_reversal(a), transpose_reversal(b)
    k = rng.standard_normal((3, 2))
    phi = CPM(a, b, (k,))
    psi = ominus(phi, ta, tb)
    assert psi.in_space == b and psi.out_space == a
    with pytest.raises(ValueError):
        ominus(phi, tb, ta)
