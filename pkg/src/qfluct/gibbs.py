"""J-maps, Gibbs maps, partition maps and factorization deficits."""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channels import CPM
from .operators import (
    HERMITIAN_TOL,
    Operator,
    eigh,
    operator_norm,
    permute_factors,
    tensor_product,
    trace_norm,
)


@dataclass(frozen=True, eq=False)
class ThermalContext:
    """Inverse temperature together with a Hamiltonian."""

    beta: float
    hamiltonian: Operator = field(repr=False)

    def __post_init__(self) -> None:
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be a finite non-negative number")
        if not self.hamiltonian.is_hermitian(HERMITIAN_TOL):
            raise ValueError("Hamiltonian is not Hermitian")

    @property
    def space(self):
        return self.hamiltonian.space

    @cached_property
    def _spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return eigh(self.hamiltonian)

    def half_weight(self, sign: int = -1) -> np.ndarray:
        """``exp(sign * beta * H / 2)`` as a matrix."""
        w, v = self._spectrum
        return (v * np.exp(sign * self.beta * w / 2)) @ v.conj().T

    @cached_property
    def forward_half(self) -> np.ndarray:
        return self.half_weight(-1)

    @cached_property
    def inverse_half(self) -> np.ndarray:
        return self.half_weight(+1)

    @property
    def partition_function(self) -> float:
        w, _ = self._spectrum
        return float(np.sum(np.exp(-self.beta * w)))

    def gibbs_state(self) -> Operator:
        return gibbs_map(self, Operator(self.space, np.eye(self.space.dim)))


def _check_space(ctx: ThermalContext, q: Operator) -> None:
    if q.space != ctx.space:
        raise ValueError(f"operator on {q.space}, context on {ctx.space}")


def j_map(ctx: ThermalContext, q: Operator, direction: str = "forward") -> Operator:
    """``e^{-bH/2} q e^{-bH/2}`` (forward) or ``e^{bH/2} q e^{bH/2}`` (inverse)."""
    _check_space(ctx, q)
    if direction == "forward":
        a = ctx.forward_half
    elif direction == "inverse":
        a = ctx.inverse_half
    else:
        raise ValueError("direction must be 'forward' or 'inverse'")
    return Operator(ctx.space, a @ q.matrix @ a)


def j_cpm(ctx: ThermalContext, direction: str = "forward") -> CPM:
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    a = ctx.forward_half if direction == "forward" else ctx.inverse_half
    return CPM(ctx.space, ctx.space, (a,))


def partition_map(ctx: ThermalContext, q: Operator) -> float:
    _check_space(ctx, q)
    return float(np.real(np.trace(ctx.forward_half @ q.matrix @ ctx.forward_half)))


def gibbs_map(ctx: ThermalContext, q: Operator) -> Operator:
    if not q.is_positive_semidefinite(1e-9):
        raise ValueError("Gibbs map needs a positive semidefinite argument")
    jq = j_map(ctx, q)
    z = float(np.real(jq.trace()))
    if not z > 0:
        raise ValueError("partition map vanishes: Gibbs map undefined")
    return jq / z


def gibbs_state(beta: float, h: Operator) -> Operator:
    return ThermalContext(beta, h).gibbs_state()


def partition_function(beta: float, h: Operator) -> float:
    return ThermalContext(beta, h).partition_function


def effect_for_state(ctx: ThermalContext, rho: Operator) -> Operator:
    """An effect ``q`` with ``G(q) = rho``: the inverse J-map rescaled to norm one."""
    q = j_map(ctx, rho, "inverse")
    return q / operator_norm(q)


def subsystem_partition(z_joint: float, beta: float, h_bath: Operator) -> float:
    """``Z(H_S) = Z(H_S') / Z(H_B)`` for ``S' = S B`` with non-interacting bath."""
    return z_joint / partition_function(beta, h_bath)


def _half_exp(x: np.ndarray) -> np.ndarray:
    return np.exp(-x / 2)


def _g_sandwich(g: Callable[[np.ndarray], np.ndarray], beta: float, h: Operator, q: np.ndarray) -> np.ndarray:
    w, v = eigh(h)
    a = (v * np.asarray(g(beta * w), dtype=complex)) @ v.conj().T
    return a @ q @ a.conj().T


def generalized_j_deficit(
    g: Callable[[np.ndarray], np.ndarray],
    h_global: Operator,
    h1: Operator,
    h2: Operator,
    q1: Operator,
    q2: Operator,
    beta: float,
) -> float:
    """``|| J^g_1(q1) (x) J^g_2(q2) - J^g(q1 (x) q2) ||_1`` with ``J^g(Q) = g(bH) Q g(bH)^dagger``."""
    if q1.space != h1.space or q2.space != h2.space:
        raise ValueError("local operators must share spaces with their Hamiltonians")
    joint = h1.space.concat(h2.space)
    if sorted(h_global.space.labels) != sorted(joint.labels):
        raise ValueError("global Hamiltonian must live on the joint space of h1 and h2")
    hg = permute_factors(h_global, joint.labels)
    local = np.kron(_g_sandwich(g, beta, h1, q1.matrix), _g_sandwich(g, beta, h2, q2.matrix))
    glob = _g_sandwich(g, beta, hg, tensor_product(q1, q2).matrix)
    return trace_norm(local - glob)


def factorization_deficit(
    h_global: Operator, h1: Operator, h2: Operator, q1: Operator, q2: Operator, beta: float
) -> float:
    return generalized_j_deficit(_half_exp, h_global, h1, h2, q1, q2, beta)


def uniform_deficit_lower_bound(
    h_global: Operator,
    h1: Operator,
    h2: Operator,
    q1: Operator,
    family: Iterable[Operator],
    beta: float,
) -> float:
    """Largest ``d(q1, Q) / ||Q||`` over a finite family of PSD ``Q``.

    This bounds the supremum over all PSD ``Q`` from below.
    """
    best = 0.0
    for q in family:
        n = operator_norm(q)
        if n > 0:
            best = max(best, factorization_deficit(h_global, h1, h2, q1, q, beta) / n)
    return best


def context_deficit(
    ctx_global: ThermalContext, ctx1: ThermalContext, ctx2: ThermalContext, q1: Operator, q2: Operator
) -> float:
    """Same as :func:`factorization_deficit`, reusing cached spectra.

    ``ctx_global`` must live on ``ctx1.space`` followed by ``ctx2.space``.
    """
    if ctx_global.space != ctx1.space.concat(ctx2.space):
        raise ValueError("global context must live on the concatenated local spaces")
    if not (ctx_global.beta == ctx1.beta == ctx2.beta):
        raise ValueError("contexts disagree on beta")
    local = np.kron(j_map(ctx1, q1).matrix, j_map(ctx2, q2).matrix)
    glob = j_map(ctx_global, tensor_product(q1, q2)).matrix
    return trace_norm(local - glob)
