import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfluct.gibbs import (
    ThermalContext,
    context_deficit,
    effect_for_state,
    factorization_deficit,
    generalized_j_deficit,
    gibbs_map,
    j_map,
    partition_map,
    subsystem_partition,
    uniform_deficit_lower_bound,
)
from qfluct.operators import (
    Operator,
    TensorSpace,
    identity,
    random_density,
    random_effect,
    random_hermitian,
    tensor_product,
)

A = TensorSpace.single("A", 2)
B = TensorSpace.single("B", 2)
SIGMA_Z = np.diag([1.0, -1.0])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
seeds = st.integers(min_value=0, max_value=2**32 - 1)
betas = st.floats(min_value=0.0, max_value=3.0)


def op(space, m):
    return Operator(space, np.asarray(m, dtype=complex))


def test_two_level_partition_function():
    beta, s = 0.9, 1.7
    ctx = ThermalContext(beta, op(A, np.diag([-s / 2, s / 2])))
    z = np.exp(beta * s / 2) + np.exp(-beta * s / 2)
    assert ctx.partition_function == pytest.approx(z, rel=1e-14)
    assert partition_map(ctx, identity(A)) == pytest.approx(z, rel=1e-14)
    g = ctx.gibbs_state().matrix
    assert np.allclose(np.diag(g), [np.exp(beta * s / 2) / z, np.exp(-beta * s / 2) / z])


def test_projector_effect_gives_ground_state():
    ctx = ThermalContext(1.3, op(A, np.diag([0.0, 1.0])))
    g = gibbs_map(ctx, op(A, np.diag([1.0, 0.0])))
    assert np.allclose(g.matrix, np.diag([1.0, 0.0]))


def test_zero_effect_rejected():
    ctx = ThermalContext(1.0, op(A, SIGMA_Z))
    with pytest.raises(ValueError):
        gibbs_map(ctx, op(A, np.zeros((2, 2))))


def test_negative_beta_rejected():
    with pytest.raises(ValueError):
        ThermalContext(-1.0, op(A, SIGMA_Z))


def test_beta_zero_identity():
    ctx = ThermalContext(0.0, op(A, SIGMA_X))
    q = op(A, [[0.3, 0.1j], [-0.1j, 0.6]])
    assert np.allclose(j_map(ctx, q).matrix, q.matrix)


@given(seeds, betas)
def test_j_maps_are_mutual_inverses(seed, beta):
    r = np.random.default_rng(seed)
    ctx = ThermalContext(beta, random_hermitian(TensorSpace.single("A", 3), r))
    q = random_hermitian(ctx.space, r)
    back = j_map(ctx, j_map(ctx, q), "inverse")
    assert np.max(np.abs(back.matrix - q.matrix)) <= 1e-10


@given(seeds, betas)
def test_gibbs_map_gives_states(seed, beta):
    r = np.random.default_rng(seed)
    ctx = ThermalContext(beta, random_hermitian(TensorSpace.single("A", 3), r))
    rho = gibbs_map(ctx, random_effect(ctx.space, r))
    assert abs(rho.trace() - 1) <= 1e-12
    assert np.min(np.linalg.eigvalsh(rho.matrix)) >= -1e-12


@given(seeds, betas)
def test_effect_for_state_inverts_gibbs_map(seed, beta):
    r = np.random.default_rng(seed)
    ctx = ThermalContext(beta, random_hermitian(TensorSpace.single("A", 3), r))
    rho = random_density(ctx.space, r)
    q = effect_for_state(ctx, rho)
    assert q.is_effect(1e-10)
    assert np.max(np.abs(gibbs_map(ctx, q).matrix - rho.matrix)) <= 1e-10


def test_gibbs_map_is_scale_invariant(rng):
    ctx = ThermalContext(0.8, random_hermitian(A, rng))
    q = random_effect(A, rng)
    assert np.allclose(gibbs_map(ctx, q).matrix, gibbs_map(ctx, q * 0.25).matrix, atol=1e-13)


@given(seeds, betas)
def test_non_interacting_factorization_is_exact(seed, beta):
    r = np.random.default_rng(seed)
    h1, h2 = random_hermitian(A, r), random_hermitian(B, r)
    q1, q2 = random_effect(A, r), random_effect(B, r)
    hg = tensor_product(h1, identity(B)) + tensor_product(identity(A), h2)
    scale = np.exp(beta * (np.linalg.norm(h1.matrix, 2) + np.linalg.norm(h2.matrix, 2)))
    assert factorization_deficit(hg, h1, h2, q1, q2, beta) <= 1e-13 * scale
    c1, c2 = ThermalContext(beta, h1), ThermalContext(beta, h2)
    assert context_deficit(ThermalContext(beta, hg), c1, c2, q1, q2) <= 1e-13 * scale
    z = ThermalContext(beta, hg).partition_function
    assert subsystem_partition(z, beta, h2) == pytest.approx(c1.partition_function, rel=1e-12)


def test_interaction_breaks_factorization():
    h1, h2 = op(A, SIGMA_Z), op(B, SIGMA_Z)
    hg = tensor_product(h1, identity(B)) + tensor_product(identity(A), h2)
    hg = hg + tensor_product(op(A, SIGMA_X), op(B, SIGMA_X)) * 0.5
    d = factorization_deficit(hg, h1, h2, identity(A), identity(B), 1.0)
    assert d > 0.01


def test_global_space_order_is_irrelevant():
    h1, h2 = op(A, SIGMA_Z), op(B, np.diag([0.0, 2.0]))
    hg = tensor_product(h2, identity(A)) + tensor_product(identity(B), h1)
    assert factorization_deficit(hg, h1, h2, identity(A), identity(B), 0.7) <= 1e-13


def test_non_exponential_g_breaks_factorization():
    # g(x) = 1/(1+x) with h = |1><1| on each factor.
    # local: diag(1, 1/4) (x) diag(1, 1/4); global spectrum (0, 1, 1, 2) gives diag(1, 1/4, 1/4, 1/9)
    h = np.diag([0.0, 1.0])
    h1, h2 = op(A, h), op(B, h)
    hg = tensor_product(h1, identity(B)) + tensor_product(identity(A), h2)
    d = generalized_j_deficit(lambda x: 1 / (1 + x), hg, h1, h2, identity(A), identity(B), 1.0)
    assert d == pytest.approx(1 / 9 - 1 / 16, abs=1e-14)
    assert d > 0.01


def test_exponential_g_reproduces_factorization_deficit(rng):
    h1, h2 = random_hermitian(A, rng), random_hermitian(B, rng)
    hg = tensor_product(h1, identity(B)) + tensor_product(identity(A), h2)
    hg = hg + tensor_product(op(A, SIGMA_X), op(B, SIGMA_Z)) * 0.3
    q1, q2 = random_effect(A, rng), random_effect(B, rng)
    a = generalized_j_deficit(lambda x: np.exp(-x / 2), hg, h1, h2, q1, q2, 1.1)
    b = factorization_deficit(hg, h1, h2, q1, q2, 1.1)
    assert a == pytest.approx(b, rel=1e-12)


def test_uniform_lower_bound_dominates_members(rng):
    h1, h2 = op(A, SIGMA_Z), op(B, SIGMA_Z)
    hg = tensor_product(h1, identity(B)) + tensor_product(identity(A), h2)
    hg = hg + tensor_product(op(A, SIGMA_X), op(B, SIGMA_X)) * 0.4
    family = [random_effect(B, rng) for _ in range(5)]
    lb = uniform_deficit_lower_bound(hg, h1, h2, identity(A), family, 1.0)
    for q in family:
        assert lb >= factorization_deficit(hg, h1, h2, identity(A), q, 1.0) / np.linalg.norm(q.matrix, 2) - 1e-14


def test_deficit_space_checks():
    h1 = op(A, SIGMA_Z)
    with pytest.raises(ValueError):
        factorization_deficit(h1, h1, op(B, SIGMA_Z), identity(A), identity(B), 1.0)
