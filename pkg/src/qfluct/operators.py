"""Dense operators on labeled tensor-product spaces.

Every Hamiltonian, state, effect and unitary in the package is an
:class:`Operator`: a square complex matrix attached to a :class:`TensorSpace`
that records the ordered (label, dimension) factors.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class TensorSpace:
    """Ordered list of ``(label, dim)`` factors."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        factors = tuple((str(lab), int(d)) for lab, d in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels: {labels}")
        if any(d < 1 for _, d in factors):
            raise ValueError("factor dimensions must be positive")

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> TensorSpace:
        return cls(tuple(pairs))

    @classmethod
    def single(cls, label: str, dim: int) -> TensorSpace:
        return cls(((label, dim),))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r} in space {self.labels}") from None

    def sub(self, labels: Iterable[str]) -> TensorSpace:
        return TensorSpace(tuple((lab, self.dim_of(lab)) for lab in labels))

    def concat(self, other: TensorSpace) -> TensorSpace:
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise ValueError(f"label collision: {sorted(clash)}")
        return TensorSpace(self.factors + other.factors)

    def __str__(self) -> str:
        return "⊗".join(f"{lab}({d})" for lab, d in self.factors)


class Operator:
    """Immutable square complex matrix on a :class:`TensorSpace`."""

    __slots__ = ("space", "matrix")

    def __init__(self, space: TensorSpace, matrix: np.ndarray | Sequence) -> None:
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape != (space.dim, space.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match space {space} of dim {space.dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def __repr__(self) -> str:
        return f"Operator(space={self.space}, dim={self.space.dim})"

    def _check(self, other: Operator) -> None:
        if other.space != self.space:
            raise ValueError(f"space mismatch: {self.space} vs {other.space}")

    def __add__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> Operator:
        return Operator(self.space, -self.matrix)

    def __mul__(self, c: complex) -> Operator:
        return Operator(self.space, c * self.matrix)

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> Operator:
        return Operator(self.space, self.matrix / c)

    def __matmul__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def dag(self) -> Operator:
        return Operator(self.space, self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def is_unitary(self, tol: float = HERMITIAN_TOL) -> bool:
        d = self.space.dim
        return bool(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(d))) <= tol)

    def is_positive_semidefinite(self, tol: float = HERMITIAN_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        return bool(np.linalg.eigvalsh(hermitian_part(self.matrix))[0] >= -tol)

    def is_effect(self, tol: float = HERMITIAN_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        ev = np.linalg.eigvalsh(hermitian_part(self.matrix))
        return bool(ev[0] >= -tol and ev[-1] <= 1 + tol)

    def is_state(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.is_positive_semidefinite(tol) and abs(self.trace() - 1) <= tol


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def identity(space: TensorSpace) -> Operator:
    return Operator(space, np.eye(space.dim))


def zeros(space: TensorSpace) -> Operator:
    return Operator(space, np.zeros((space.dim, space.dim)))


def ket(space: TensorSpace, index: int | Sequence[int]) -> np.ndarray:
    """Computational basis vector; ``index`` may be a multi-index over factors."""
    v = np.zeros(space.dim, dtype=complex)
    if isinstance(index, (int, np.integer)):
        v[int(index)] = 1.0
    else:
        v[np.ravel_multi_index(tuple(index), space.dims)] = 1.0
    return v


def projector(space: TensorSpace, vector: np.ndarray) -> Operator:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return Operator(space, np.outer(v, v.conj()))


def matrix_unit(space: TensorSpace, i: int, j: int) -> Operator:
    m = np.zeros((space.dim, space.dim), dtype=complex)
    m[i, j] = 1.0
    return Operator(space, m)


def tensor_product(*ops: Operator) -> Operator:
    """Kronecker product in argument order on the concatenated space."""
    if not ops:
        raise ValueError("need at least one operator")
    space = reduce(lambda a, b: a.concat(b), (op.space for op in ops))
    return Operator(space, reduce(np.kron, (op.matrix for op in ops)))


def _as_label_order(space: TensorSpace, labels: Iterable[str]) -> tuple[str, ...]:
    if isinstance(labels, (set, frozenset)):
        unknown = set(labels) - set(space.labels)
        if unknown:
            raise KeyError(f"unknown labels {sorted(unknown)}")
        return tuple(lab for lab in space.labels if lab in labels)
    if isinstance(labels, str):
        labels = (labels,)
    out = tuple(labels)
    for lab in out:
        space.index(lab)
    return out


def permute_factors(op: Operator, order: Sequence[str]) -> Operator:
    """Reorder tensor factors so that the result lives on ``space.sub(order)``."""
    space = op.space
    order = tuple(order)
    if sorted(order) != sorted(space.labels):
        raise ValueError(f"order {order} is not a permutation of {space.labels}")
    perm = [space.index(lab) for lab in order]
    n = len(perm)
    t = op.matrix.reshape(space.dims + space.dims)
    t = t.transpose(perm + [p + n for p in perm])
    new = space.sub(order)
    return Operator(new, t.reshape(new.dim, new.dim))


def permute_vector(vec: np.ndarray, space: TensorSpace, order: Sequence[str]) -> np.ndarray:
    perm = [space.index(lab) for lab in order]
    return np.asarray(vec).reshape(space.dims).transpose(perm).reshape(-1)


def partial_trace(op: Operator, keep: Iterable[str]) -> Operator:
    """Trace out every factor not in ``keep``.

    A set keeps the operator's own factor order; a sequence fixes the order of
    the result.
    """
    space = op.space
    keep = _as_label_order(space, keep)
    traced = [lab for lab in space.labels if lab not in keep]
    if not traced:
        return permute_factors(op, keep)
    order = list(keep) + traced
    perm = [space.index(lab) for lab in order]
    n = len(perm)
    dk = int(np.prod([space.dim_of(lab) for lab in keep], dtype=np.int64))
    dt = int(np.prod([space.dim_of(lab) for lab in traced], dtype=np.int64))
    t = op.matrix.reshape(space.dims + space.dims)
    t = t.transpose(perm + [p + n for p in perm]).reshape(dk, dt, dk, dt)
    return Operator(space.sub(keep), np.einsum("iaja->ij", t))


def embed(op: Operator, space: TensorSpace) -> Operator:
    """Extend ``op`` by identities to ``space`` (factor order of ``space``)."""
    rest = [lab for lab in space.labels if lab not in op.space.labels]
    full = op if not rest else tensor_product(op, identity(space.sub(rest)))
    return permute_factors(full, space.labels)


def eigh(h: Operator, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    if not h.is_hermitian(tol):
        raise ValueError("operator is not Hermitian within tolerance")
    return np.linalg.eigh(hermitian_part(h.matrix))


def hermitian_function(
    h: Operator, f: Callable[[np.ndarray], np.ndarray], tol: float = HERMITIAN_TOL
) -> Operator:
    """Apply ``f`` to the spectrum of Hermitian ``h``: sum_k f(lambda_k) P_k."""
    w, v = eigh(h, tol)
    return Operator(h.space, (v * np.asarray(f(w), dtype=complex)) @ v.conj().T)


def expm_h(h: Operator, c: complex = 1.0) -> Operator:
    """``exp(c*h)`` for Hermitian ``h``."""
    return hermitian_function(h, lambda w: np.exp(c * w))


def sqrtm_psd(q: Operator, tol: float = HERMITIAN_TOL) -> Operator:
    return hermitian_function(q, lambda w: np.sqrt(np.clip(w, 0.0, None)), tol)


def operator_norm(op: Operator | np.ndarray) -> float:
    m = op.matrix if isinstance(op, Operator) else np.asarray(op)
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def trace_norm(op: Operator | np.ndarray) -> float:
    m = op.matrix if isinstance(op, Operator) else np.asarray(op)
    if m.size == 0:
        return 0.0
    if m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, atol=1e-13, rtol=0):
        return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(m)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def lowrank_trace_norm(pos: np.ndarray, neg: np.ndarray) -> float:
    """``|| P P^dag - N N^dag ||_1`` through a QR of the stacked columns."""
    x = np.hstack([pos, neg])
    _, r = np.linalg.qr(x)
    sign = np.concatenate([np.ones(pos.shape[1]), -np.ones(neg.shape[1])])
    core = (r * sign) @ r.conj().T
    return float(np.sum(np.abs(np.linalg.eigvalsh((core + core.conj().T) / 2))))


def max_abs(op: Operator | np.ndarray) -> float:
    m = op.matrix if isinstance(op, Operator) else np.asarray(op)
    return float(np.max(np.abs(m), initial=0.0))


# Random generators used by tests, probes and scenarios.


def random_unitary_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_orthogonal_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_hermitian(space: TensorSpace, rng: np.random.Generator, scale: float = 1.0) -> Operator:
    d = space.dim
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return Operator(space, scale * hermitian_part(a))


def random_unitary(space: TensorSpace, rng: np.random.Generator) -> Operator:
    return Operator(space, random_unitary_matrix(space.dim, rng))


def random_density(space: TensorSpace, rng: np.random.Generator, rank: int | None = None) -> Operator:
    d = space.dim
    k = d if rank is None else rank
    a = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = a @ a.conj().T
    return Operator(space, rho / np.trace(rho))


def random_effect(space: TensorSpace, rng: np.random.Generator) -> Operator:
    d = space.dim
    u = random_unitary_matrix(d, rng)
    return Operator(space, (u * rng.uniform(0.0, 1.0, d)) @ u.conj().T)
