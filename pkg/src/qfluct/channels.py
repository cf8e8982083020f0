"""Completely positive maps in Kraus form.

Kraus operators are stored as plain ``(d_out, d_in)`` arrays together with the
input and output spaces. Superoperators and Choi matrices are derived on demand.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .operators import (
    HERMITIAN_TOL,
    Operator,
    TensorSpace,
    eigh,
    hermitian_part,
    lowrank_trace_norm,
    permute_factors,
    trace_norm,
)

CHANNEL_TOL = 1e-10
PINV_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class CPM:
    """Completely positive map ``sigma -> sum_k K_k sigma K_k^dagger``."""

    in_space: TensorSpace
    out_space: TensorSpace
    kraus: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValueError("a CPM needs at least one Kraus operator")
        shape = (self.out_space.dim, self.in_space.dim)
        for k in ks:
            if k.shape != shape:
                raise ValueError(f"Kraus operator shape {k.shape} != {shape}")
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ks)

    def __call__(self, sigma: Operator) -> Operator:
        if sigma.space != self.in_space:
            raise ValueError(f"input lives on {sigma.space}, map expects {self.in_space}")
        return Operator(self.out_space, self.apply_matrix(sigma.matrix))

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        out = np.zeros((self.out_space.dim, self.out_space.dim), dtype=complex)
        for k in self.kraus:
            out += k @ m @ k.conj().T
        return out

    def adjoint_matrix(self, m: np.ndarray) -> np.ndarray:
        out = np.zeros((self.in_space.dim, self.in_space.dim), dtype=complex)
        for k in self.kraus:
            out += k.conj().T @ m @ k
        return out

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Matrix acting on row-major vectorized operators."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    @cached_property
    def choi(self) -> np.ndarray:
        """``sum_ij |i><j| (x) phi(|i><j|)`` with the input factor first."""
        vecs = np.array([k.T.reshape(-1) for k in self.kraus])
        return vecs.T @ vecs.conj()

    def kraus_sum(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)

    def is_trace_preserving(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.kraus_sum() - np.eye(self.in_space.dim))) <= tol)

    def is_trace_nonincreasing(self, tol: float = 1e-9) -> bool:
        return bool(np.linalg.eigvalsh(hermitian_part(self.kraus_sum()))[-1] <= 1 + tol)

    def is_unital(self, tol: float = 1e-9) -> bool:
        if self.in_space.dim != self.out_space.dim:
            return False
        return bool(np.max(np.abs(self.apply_matrix(np.eye(self.in_space.dim)) - np.eye(self.out_space.dim))) <= tol)

    def scaled(self, c: float) -> CPM:
        if c < 0:
            raise ValueError("CPMs can only be scaled by non-negative numbers")
        return CPM(self.in_space, self.out_space, tuple(np.sqrt(c) * k for k in self.kraus))

    def then(self, other: CPM) -> CPM:
        """``other o self``."""
        return compose(other, self)


def compose(*maps: CPM) -> CPM:
    """``maps[0] o maps[1] o ...``: the last map acts first."""
    result = maps[-1]
    for m in reversed(maps[:-1]):
        if m.in_space != result.out_space:
            raise ValueError(f"cannot compose: {m.in_space} vs {result.out_space}")
        ks = tuple(a @ b for a in m.kraus for b in result.kraus)
        result = CPM(result.in_space, m.out_space, ks)
    return result


def kraus_cpm(in_space: TensorSpace, out_space: TensorSpace, ops: Iterable[np.ndarray | Operator]) -> CPM:
    return CPM(in_space, out_space, tuple(o.matrix if isinstance(o, Operator) else o for o in ops))


def identity_cpm(space: TensorSpace) -> CPM:
    return CPM(space, space, (np.eye(space.dim),))


def unitary_cpm(v: Operator) -> CPM:
    return CPM(v.space, v.space, (v.matrix,))


def sandwich_cpm(a: Operator) -> CPM:
    """``Q -> a Q a^dagger``."""
    return CPM(a.space, a.space, (a.matrix,))


def depolarizing_cpm(space: TensorSpace, p: float) -> CPM:
    """``sigma -> (1-p) sigma + p Tr(sigma) 1/d``."""
    d = space.dim
    ks = [np.sqrt(1 - p) * np.eye(d)]
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = np.sqrt(p / d)
            ks.append(e)
    return CPM(space, space, tuple(ks))


def replacement_cpm(in_space: TensorSpace, rho: Operator) -> CPM:
    """Constant channel ``sigma -> Tr(sigma) rho``."""
    w, v = eigh(rho)
    ks = []
    for p, e in zip(w, v.T):
        if p > 1e-15:
            for i in range(in_space.dim):
                k = np.zeros((rho.space.dim, in_space.dim), dtype=complex)
                k[:, i] = np.sqrt(p) * e
                ks.append(k)
    return CPM(in_space, rho.space, tuple(ks))


def restrict_input(cpm: CPM, indices: Sequence[int], label: str | None = None) -> CPM:
    """Restrict the input to the span of the given computational basis vectors."""
    idx = np.asarray(list(indices), dtype=int)
    lab = label if label is not None else "window"
    space = TensorSpace.single(lab, len(idx))
    return CPM(space, cpm.out_space, tuple(k[:, idx] for k in cpm.kraus))


def _spectral_pairs(q: Operator, tol: float, cutoff: float = 1e-15) -> list[tuple[float, np.ndarray]]:
    w, v = eigh(q, tol)
    top = max(float(np.max(np.abs(w), initial=0.0)), 1e-300)
    return [(float(p), v[:, a]) for a, p in enumerate(w) if p > cutoff * top]


def induced_cpm(
    v: Operator,
    env_state: Operator,
    final_effect: Operator | None = None,
    tol: float = HERMITIAN_TOL,
) -> CPM:
    """Map ``sigma -> Tr_env([Q (x) 1] V [rho (x) sigma] V^dagger)`` on the remaining factors.

    The traced factors and their order are those of ``env_state.space``. Pass
    ``v.dag()`` to get the backward-in-time variant.
    """
    if not v.is_unitary(1e-9):
        raise ValueError("global operator is not unitary")
    if not env_state.is_state(1e-9):
        raise ValueError("env_state is not a density operator")
    env_labels = env_state.space.labels
    if final_effect is not None:
        if final_effect.space != env_state.space:
            raise ValueError("final_effect must live on the same space as env_state")
        if not final_effect.is_effect(1e-9):
            raise ValueError("final_effect is not an effect (0 <= Q <= 1)")
    kept = [lab for lab in v.space.labels if lab not in env_labels]
    if len(kept) + len(env_labels) != len(v.space.labels):
        raise ValueError("env_state labels are not factors of the global space")
    if not kept:
        raise ValueError("nothing left after tracing")
    vp = permute_factors(v, list(env_labels) + kept)
    dt = env_state.space.dim
    dk = vp.space.dim // dt
    v4 = vp.matrix.reshape(dt, dk, dt, dk)

    states = _spectral_pairs(env_state, tol)
    p = np.array([s for s, _ in states])
    e = np.array([vec for _, vec in states]).T
    if final_effect is None:
        q = np.ones(dt)
        f = np.eye(dt, dtype=complex)
    else:
        eff = _spectral_pairs(final_effect, tol)
        if not eff:
            return CPM(vp.space.sub(kept), vp.space.sub(kept), (np.zeros((dk, dk)),))
        q = np.array([s for s, _ in eff])
        f = np.array([vec for _, vec in eff]).T

    a = np.einsum("ikjl,ja->ikal", v4, e)
    k = np.einsum("ib,ikal->bakl", f.conj(), a)
    weights = np.sqrt(np.outer(q, p))
    ks = (weights[:, :, None, None] * k).reshape(-1, dk, dk)
    space = vp.space.sub(kept)
    return CPM(space, space, tuple(ks))


def conjugate_cpm(phi: CPM) -> CPM:
    """Heisenberg-picture map ``Y -> sum_k K_k^dagger Y K_k``."""
    return CPM(phi.out_space, phi.in_space, tuple(k.conj().T for k in phi.kraus))


def choi_matrix(phi: CPM) -> Operator:
    space = TensorSpace(
        tuple((f"in:{lab}", d) for lab, d in phi.in_space.factors)
        + tuple((f"out:{lab}", d) for lab, d in phi.out_space.factors)
    )
    return Operator(space, phi.choi)


def _check_endpoints(a: CPM, b: CPM) -> None:
    if a.in_space.dims != b.in_space.dims or a.out_space.dims != b.out_space.dims:
        raise ValueError("CPM endpoint spaces do not match")


def _choi_factor(phi: CPM) -> np.ndarray:
    return np.array([k.T.reshape(-1) for k in phi.kraus]).T


def cpm_difference(a: CPM, b: CPM) -> tuple[float, float]:
    """(trace norm of Choi difference, max-abs superoperator entry difference)."""
    _check_endpoints(a, b)
    dc = a.choi - b.choi
    if 2 * (len(a.kraus) + len(b.kraus)) < dc.shape[0]:
        # both Choi matrices are low rank: factor through their Kraus vectors
        norm = lowrank_trace_norm(_choi_factor(a), _choi_factor(b))
    else:
        norm = trace_norm(hermitian_part(dc))
    return norm, float(np.max(np.abs(dc)))


def cpm_distance(a: CPM, b: CPM) -> float:
    return cpm_difference(a, b)[0]


def cpms_equal(a: CPM, b: CPM, tol: float = CHANNEL_TOL) -> bool:
    return cpm_distance(a, b) <= tol


def pinv_sqrt(m: np.ndarray, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """``m^{-1/2}`` on the support of PSD ``m``; eigenvalues below cutoff*max count as zero."""
    w, v = np.linalg.eigh(hermitian_part(m))
    top = float(np.max(w, initial=0.0))
    inv = np.zeros_like(w)
    mask = w > cutoff * top
    inv[mask] = 1.0 / np.sqrt(w[mask])
    return (v * inv) @ v.conj().T


def petz_recovery(phi: CPM, reference: Operator, cutoff: float = PINV_CUTOFF) -> CPM:
    """``sigma -> sqrt(ref) phi*(phi(ref)^{-1/2} sigma phi(ref)^{-1/2}) sqrt(ref)``."""
    if reference.space != phi.in_space:
        raise ValueError("reference must live on the input space of phi")
    if not reference.is_positive_semidefinite(1e-9):
        raise ValueError("reference must be positive semidefinite")
    image = phi.apply_matrix(reference.matrix)
    if np.max(np.abs(image)) == 0:
        raise ValueError("phi(reference) vanishes; recovery undefined")
    m = pinv_sqrt(image, cutoff)
    w, v = np.linalg.eigh(hermitian_part(reference.matrix))
    sr = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    ks = tuple(sr @ k.conj().T @ m for k in phi.kraus)
    return CPM(phi.out_space, phi.in_space, ks)
