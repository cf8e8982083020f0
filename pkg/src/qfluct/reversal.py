"""Time-reversal maps ``T(Q) = U Q^t U^dagger`` and the ominus transform on CPMs.

A reversal is stored constructively as a transpose basis (columns of a unitary
``basis``) and a twist unitary ``U`` with ``U^t = sign * U`` in that basis.
Antilinear (complex conjugation) reversals are not representable here; the
maps are linear by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import CPM
from .operators import HERMITIAN_TOL, Operator, TensorSpace, matrix_unit, operator_norm, trace_norm


def _mat(x: Operator | np.ndarray) -> np.ndarray:
    return x.matrix if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def basis_transpose(basis: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Transpose of ``m`` taken in the orthonormal basis formed by the columns of ``basis``."""
    return basis @ (basis.conj().T @ m @ basis).T @ basis.conj().T


@dataclass(frozen=True)
class TimeReversal:
    """Twisted transpose on ``space``. Construct via :func:`make_reversal` to get checks."""

    space: TensorSpace
    basis: np.ndarray = field(repr=False)
    twist: np.ndarray = field(repr=False)
    sign: int = 1

    def transpose(self, m: np.ndarray) -> np.ndarray:
        return basis_transpose(self.basis, m)

    def __call__(self, q: Operator) -> Operator:
        return apply_reversal(self, q)

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        return self.twist @ self.transpose(m) @ self.twist.conj().T


def make_reversal(
    space: TensorSpace,
    basis: Operator | np.ndarray | None = None,
    twist: Operator | np.ndarray | None = None,
    tol: float = HERMITIAN_TOL,
) -> TimeReversal:
    """Validated reversal; ``None`` means the computational basis or the identity twist."""
    d = space.dim
    b = np.eye(d, dtype=complex) if basis is None else _mat(basis)
    u = np.eye(d, dtype=complex) if twist is None else _mat(twist)
    for name, m in (("basis", b), ("twist", u)):
        if m.shape != (d, d):
            raise ValueError(f"{name} has shape {m.shape}, expected {(d, d)}")
        if np.max(np.abs(m.conj().T @ m - np.eye(d))) > tol:
            raise ValueError(f"{name} is not unitary")
    ut = basis_transpose(b, u)
    if np.max(np.abs(ut - u)) <= tol:
        sign = 1
    elif np.max(np.abs(ut + u)) <= tol:
        sign = -1
    else:
        raise ValueError("twist is neither symmetric nor skew-symmetric in the given basis")
    b.setflags(write=False)
    u.setflags(write=False)
    return TimeReversal(space, b, u, sign)


def transpose_reversal(space: TensorSpace) -> TimeReversal:
    return make_reversal(space)


def apply_reversal(t: TimeReversal, q: Operator) -> Operator:
    if q.space != t.space:
        raise ValueError(f"space mismatch: reversal on {t.space}, operator on {q.space}")
    return Operator(t.space, t.apply_matrix(q.matrix))


def product_reversal(t1: TimeReversal, t2: TimeReversal) -> TimeReversal:
    space = t1.space.concat(t2.space)
    basis = np.kron(t1.basis, t2.basis)
    twist = np.kron(t1.twist, t2.twist)
    basis.setflags(write=False)
    twist.setflags(write=False)
    return TimeReversal(space, basis, twist, t1.sign * t2.sign)


def reverse_between(t_in: TimeReversal, t_out: TimeReversal, k: np.ndarray) -> np.ndarray:
    """Reverse an operator ``k`` mapping the ``t_in`` space into the ``t_out`` space.

    The result maps back from the ``t_out`` space into the ``t_in`` space.
    """
    kt = t_in.basis @ (t_out.basis.conj().T @ k @ t_in.basis).T @ t_out.basis.conj().T
    return t_in.twist @ kt @ t_out.twist.conj().T


def ominus(cpm: CPM, t_in: TimeReversal, t_out: TimeReversal | None = None) -> CPM:
    """``T o cpm* o T``, realized by reversing every Kraus operator."""
    t_out = t_in if t_out is None else t_out
    if cpm.in_space != t_in.space or cpm.out_space != t_out.space:
        raise ValueError("CPM endpoints do not match the reversal spaces")
    kraus = tuple(reverse_between(t_in, t_out, k) for k in cpm.kraus)
    return CPM(cpm.out_space, cpm.in_space, kraus)


@dataclass
class ReversalReport:
    """Largest violation found for each defining property."""

    antimultiplicative: float
    adjoint: float
    trace: float
    involution: float
    sign: int

    @property
    def max_violation(self) -> float:
        return max(self.antimultiplicative, self.adjoint, self.trace, self.involution)

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_violation <= tol


def validate_reversal(t: TimeReversal, rng: np.random.Generator | None = None) -> ReversalReport:
    """Check the four defining properties on matrix units (and random pairs if large)."""
    d = t.space.dim
    units = [matrix_unit(t.space, i, j).matrix for i in range(d) for j in range(d)]
    images = [t.apply_matrix(e) for e in units]

    adj = max(np.max(np.abs(t.apply_matrix(e.conj().T) - im.conj().T)) for e, im in zip(units, images))
    tr = max(abs(np.trace(im) - np.trace(e)) for e, im in zip(units, images))
    inv = max(np.max(np.abs(t.apply_matrix(im) - e)) for e, im in zip(units, images))

    if d <= 6:
        pairs = [(a, b) for a in range(d * d) for b in range(d * d)]
        mats = units
        imgs = images
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        mats = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(16)]
        imgs = [t.apply_matrix(m) for m in mats]
        pairs = [(a, b) for a in range(16) for b in range(16)]
    mult = 0.0
    for a, b in pairs:
        lhs = t.apply_matrix(mats[a] @ mats[b])
        mult = max(mult, float(np.max(np.abs(lhs - imgs[b] @ imgs[a]))))
    return ReversalReport(float(mult), float(adj), float(tr), float(inv), t.sign)


def norm_preservation(t: TimeReversal, q: Operator) -> tuple[float, float]:
    """Differences in operator norm and trace norm between ``q`` and ``T(q)``."""
    tq = apply_reversal(t, q)
    return abs(operator_norm(tq) - operator_norm(q)), abs(trace_norm(tq) - trace_norm(q))
