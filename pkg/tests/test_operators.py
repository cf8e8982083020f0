import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfluct.operators import (
    Operator,
    TensorSpace,
    embed,
    hermitian_function,
    identity,
    operator_norm,
    partial_trace,
    permute_factors,
    random_hermitian,
    random_unitary,
    tensor_product,
    trace_norm,
)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def op(label, m):
    m = np.asarray(m, dtype=complex)
    return Operator(TensorSpace.single(label, m.shape[0]), m)


def kron_oracle(a, b):
    """Double-loop Kronecker product."""
    p, q = a.shape[0], b.shape[0]
    out = np.zeros((p * q, p * q), dtype=complex)
    for i in range(p):
        for j in range(p):
            for k in range(q):
                for l in range(q):
                    out[i * q + k, j * q + l] = a[i, j] * b[k, l]
    return out


def ptrace_oracle(x, d_keep, d_drop):
    """Sum_k <i k|X|j k>."""
    out = np.zeros((d_keep, d_keep), dtype=complex)
    for i in range(d_keep):
        for j in range(d_keep):
            out[i, j] = sum(x[i * d_drop + k, j * d_drop + k] for k in range(d_drop))
    return out


def test_space_rejects_duplicate_labels():
    with pytest.raises(ValueError):
        TensorSpace.of(("A", 2), ("A", 3))


def test_operator_shape_must_match_space():
    with pytest.raises(ValueError):
        Operator(TensorSpace.single("A", 3), np.eye(2))


def test_tensor_identities():
    out = tensor_product(op("A", np.eye(2)), op("B", np.eye(3)))
    assert out.space.dims == (2, 3)
    assert np.array_equal(out.matrix, np.eye(6))


def test_tensor_sigma_z_projector_matches_oracle():
    p0 = np.diag([1.0, 0.0])
    out = tensor_product(op("A", SIGMA_Z), op("B", p0))
    assert np.allclose(out.matrix, kron_oracle(SIGMA_Z, p0), atol=0)
    assert np.allclose(np.diag(out.matrix), [1, 0, -1, 0])


def test_tensor_label_collision():
    with pytest.raises(ValueError):
        tensor_product(op("A", np.eye(2)), op("A", np.eye(2)))


def test_tensor_trace_is_product(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    out = tensor_product(op("A", a), op("B", b))
    assert abs(np.trace(out.matrix) - np.trace(a) * np.trace(b)) < 1e-13


@given(seeds)
def test_kronecker_associative(seed):
    r = np.random.default_rng(seed)
    a, b, c = (random_hermitian(TensorSpace.single(l, d), r) for l, d in (("A", 2), ("B", 3), ("C", 2)))
    left = tensor_product(a, tensor_product(b, c))
    right = tensor_product(tensor_product(a, b), c)
    assert left.space == right.space
    assert np.max(np.abs(left.matrix - right.matrix)) <= 1e-13


def test_partial_trace_product_state(rng):
    a = random_hermitian(TensorSpace.single("A", 3), rng)
    b = random_hermitian(TensorSpace.single("B", 2), rng)
    out = partial_trace(tensor_product(a, b), {"A"})
    assert np.allclose(out.matrix, np.trace(b.matrix) * a.matrix, atol=1e-13)


def test_partial_trace_bell_state():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    bell = Operator(TensorSpace.of(("A", 2), ("B", 2)), np.outer(phi, phi))
    assert np.allclose(partial_trace(bell, {"A"}).matrix, np.eye(2) / 2)


def test_partial_trace_index_oracle(rng):
    x = random_hermitian(TensorSpace.of(("A", 2), ("B", 2)), rng)
    assert np.allclose(partial_trace(x, {"A"}).matrix, ptrace_oracle(x.matrix, 2, 2), atol=1e-14)
    # keeping the second factor: swap roles through the oracle on the permuted matrix
    swapped = permute_factors(x, ("B", "A"))
    assert np.allclose(partial_trace(x, {"B"}).matrix, ptrace_oracle(swapped.matrix, 2, 2), atol=1e-14)


def test_partial_trace_unknown_label(rng):
    x = random_hermitian(TensorSpace.of(("A", 2), ("B", 2)), rng)
    with pytest.raises(KeyError):
        partial_trace(x, {"C"})


@given(seeds)
def test_partial_trace_preserves_trace(seed):
    r = np.random.default_rng(seed)
    x = random_hermitian(TensorSpace.of(("A", 2), ("B", 3), ("C", 2)), r)
    for keep in ({"A"}, {"B"}, {"A", "C"}):
        assert abs(partial_trace(x, keep).trace() - x.trace()) < 1e-12


@given(seeds)
def test_partial_trace_of_products(seed):
    r = np.random.default_rng(seed)
    x = random_hermitian(TensorSpace.single("X", 3), r)
    y = random_hermitian(TensorSpace.single("Y", 2), r)
    out = partial_trace(tensor_product(x, y), {"X"})
    assert np.max(np.abs(out.matrix - np.trace(y.matrix) * x.matrix)) <= 1e-13


def test_embed_places_identity(rng):
    a = random_hermitian(TensorSpace.single("B", 2), rng)
    space = TensorSpace.of(("A", 3), ("B", 2))
    assert np.allclose(embed(a, space).matrix, np.kron(np.eye(3), a.matrix))


def test_hermitian_function_identity_map():
    h = op("A", np.diag([1.0, 2.0]))
    assert np.allclose(hermitian_function(h, lambda w: w).matrix, np.diag([1.0, 2.0]))


def test_exp_sigma_x_against_power_series():
    series = sum(np.linalg.matrix_power(SIGMA_X, k) / math.factorial(k) for k in range(20))
    out = hermitian_function(op("A", SIGMA_X), np.exp).matrix
    assert np.allclose(out, series, atol=1e-14)
    assert abs(out[0, 0] - math.cosh(1)) < 1e-14
    assert abs(out[0, 1] - math.sinh(1)) < 1e-14


def test_half_exponentials_compose(rng):
    h = random_hermitian(TensorSpace.single("A", 4), rng)
    beta = 0.8
    half = hermitian_function(h, lambda w: np.exp(-beta * w / 2)).matrix
    full = hermitian_function(h, lambda w: np.exp(-beta * w)).matrix
    assert np.allclose(half @ half, full, atol=1e-13)


def test_hermitian_function_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_function(op("A", [[0, 1], [0, 0]]), np.exp)


@given(seeds, st.floats(min_value=0.1, max_value=10.0))
def test_exp_inverse(seed, scale):
    r = np.random.default_rng(seed)
    a = random_hermitian(TensorSpace.single("A", 3), r)
    a = a * (scale / operator_norm(a))
    e = hermitian_function(a, np.exp).matrix
    ei = hermitian_function(a, lambda w: np.exp(-w)).matrix
    assert np.max(np.abs(e @ ei - np.eye(3))) <= 1e-12 + 1e-15 * np.exp(2 * scale)


def test_exp_of_hermitian_is_positive_definite(rng):
    h = random_hermitian(TensorSpace.single("A", 5), rng, scale=3.0)
    assert np.min(np.linalg.eigvalsh(hermitian_function(h, np.exp).matrix)) > 0


def test_norms_of_identity():
    one = identity(TensorSpace.single("A", 4))
    assert operator_norm(one) == pytest.approx(1.0)
    assert trace_norm(one) == pytest.approx(4.0)


def test_norms_of_diagonal():
    d = op("A", np.diag([3.0, -4.0]))
    assert operator_norm(d) == pytest.approx(4.0)
    assert trace_norm(d) == pytest.approx(7.0)


def test_trace_norm_matches_sqrt_oracle(rng):
    q = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    w, v = np.linalg.eigh(q.conj().T @ q)
    oracle = np.trace((v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T).real
    assert trace_norm(q) == pytest.approx(oracle, abs=1e-12)


@given(seeds)
def test_norm_ordering_and_unitary_invariance(seed):
    r = np.random.default_rng(seed)
    space = TensorSpace.single("A", 4)
    q = r.standard_normal((4, 4)) + 1j * r.standard_normal((4, 4))
    u = random_unitary(space, r).matrix
    assert trace_norm(q) >= operator_norm(q) >= 0
    moved = u @ q @ u.conj().T
    assert abs(trace_norm(moved) - trace_norm(q)) <= 1e-12 * max(1.0, trace_norm(q))
    assert abs(operator_norm(moved) - operator_norm(q)) <= 1e-12 * max(1.0, operator_norm(q))


def test_predicates():
    space = TensorSpace.single("A", 2)
    assert Operator(space, np.diag([0.2, 1.0])).is_effect()
    assert not Operator(space, np.diag([0.2, 1.1])).is_effect()
    assert Operator(space, np.diag([0.5, 0.5])).is_state()
    assert Operator(space, SIGMA_X).is_unitary()
    assert not Operator(space, [[1, 1], [0, 1]]).is_hermitian()
