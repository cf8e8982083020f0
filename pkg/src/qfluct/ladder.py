"""Truncated energy ladders and energy-translation invariant dynamics.

The reservoir ``E`` has levels ``j`` in ``[j_min, j_max]`` with energies
``s * j``. A level system has integer levels ``z_n`` (energies ``s * z_n``) on
orthonormal vectors ``psi_n``. Global unitaries are assembled block by block
in the total-energy eigenspaces spanned by ``psi_n (x) |L - z_n>``.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .channels import CPM
from .operators import Operator, TensorSpace, tensor_product, trace_norm

ENERGY_TOL = 1e-9


@dataclass(frozen=True)
class LadderSpec:
    spacing: float
    j_min: int
    j_max: int
    label: str = "E"

    def __post_init__(self) -> None:
        if not self.spacing > 0:
            raise ValueError("ladder spacing must be positive")
        if self.j_max <= self.j_min:
            raise ValueError("need j_max > j_min")

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    @property
    def size(self) -> int:
        return self.j_max - self.j_min + 1

    @property
    def space(self) -> TensorSpace:
        return TensorSpace.single(self.label, self.size)

    @property
    def energies(self) -> np.ndarray:
        return self.spacing * self.levels

    def hamiltonian(self) -> Operator:
        return Operator(self.space, np.diag(self.energies))

    def index(self, j: int) -> int:
        if not self.j_min <= j <= self.j_max:
            raise IndexError(f"level {j} outside [{self.j_min}, {self.j_max}]")
        return j - self.j_min

    def ket(self, j: int) -> np.ndarray:
        v = np.zeros(self.size, dtype=complex)
        v[self.index(j)] = 1.0
        return v

    def interior(self, margin: int) -> list[int]:
        """Ladder indices at distance >= margin from both edges."""
        return list(range(margin, self.size - margin))


@dataclass(frozen=True, eq=False)
class LevelSystem:
    """System with Hamiltonian ``s * sum_n z_n |psi_n><psi_n|``."""

    space: TensorSpace
    levels: tuple[int, ...]
    basis: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        levels = tuple(int(z) for z in self.levels)
        object.__setattr__(self, "levels", levels)
        b = np.array(self.basis, dtype=complex)
        d = self.space.dim
        if b.shape != (d, d) or len(levels) != d:
            raise ValueError("basis and levels must match the space dimension")
        if np.max(np.abs(b.conj().T @ b - np.eye(d))) > 1e-10:
            raise ValueError("level basis is not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def diagonal(cls, label: str, levels: Sequence[int]) -> LevelSystem:
        return cls(TensorSpace.single(label, len(levels)), tuple(levels), np.eye(len(levels)))

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def span(self) -> int:
        return max(self.levels) - min(self.levels)

    def hamiltonian(self, spacing: float) -> Operator:
        z = np.asarray(self.levels, dtype=float)
        return Operator(self.space, (self.basis * (spacing * z)) @ self.basis.conj().T)

    def in_level_basis(self, u: Operator | np.ndarray) -> np.ndarray:
        m = u.matrix if isinstance(u, Operator) else np.asarray(u)
        return self.basis.conj().T @ m @ self.basis


def shift_operator(spec: LadderSpec, power: int = 1) -> Operator:
    """Truncated ``Delta^power`` with ``Delta |j> = |j+1>``."""
    if abs(power) >= spec.size:
        raise ValueError("shift power out of range")
    return Operator(spec.space, np.eye(spec.size, k=-power))


def total_hamiltonian(system: LevelSystem, spec: LadderSpec) -> Operator:
    hs = system.hamiltonian(spec.spacing)
    he = spec.hamiltonian()
    return tensor_product(hs, Operator(spec.space, np.eye(spec.size))) + tensor_product(
        Operator(system.space, np.eye(system.dim)), he
    )


def energy_blocks(system: LevelSystem, spec: LadderSpec) -> dict[int, list[tuple[int, int]]]:
    """Total level ``L`` -> list of ``(n, ladder index)`` with ``z_n + j = L``."""
    blocks: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for n, z in enumerate(system.levels):
        for j in spec.levels:
            blocks[z + int(j)].append((n, spec.index(int(j))))
    return dict(blocks)


def block_unitary(
    system: LevelSystem,
    spec: LadderSpec,
    block: Callable[[int, list[int]], np.ndarray | None],
) -> Operator:
    """Energy-conserving unitary assembled from total-level blocks.

    ``block(L, present)`` gets the level indices ``n`` whose partner
    ``|L - z_n>`` lies on the ladder (sorted) and returns a unitary on them in
    that order, or ``None`` to act as the identity on the block.
    """
    n_sys, d = system.dim, spec.size
    v = np.eye(n_sys * d, dtype=complex)
    for total, members in energy_blocks(system, spec).items():
        members = sorted(members)
        b = block(total, [n for n, _ in members])
        if b is None:
            continue
        b = np.asarray(b, dtype=complex)
        if b.shape != (len(members), len(members)):
            raise ValueError(f"block for level {total} has shape {b.shape}")
        idx = np.array([n * d + j for n, j in members])
        v[np.ix_(idx, idx)] = b
    rot = np.kron(system.basis, np.eye(d))
    m = rot @ v @ rot.conj().T
    if np.max(np.abs(m.conj().T @ m - np.eye(n_sys * d))) > 1e-9:
        raise ValueError("energy blocks are not unitary")
    return Operator(system.space.concat(spec.space), m)


def energy_block_unitary(
    system: LevelSystem,
    spec: LadderSpec,
    block: Callable[[int], np.ndarray],
) -> Operator:
    """Like :func:`block_unitary`, but only complete blocks are touched.

    ``block(L)`` returns an ``N x N`` unitary in the level basis. Blocks that
    reach past an edge are left as the identity.
    """
    n_sys = system.dim
    return block_unitary(system, spec, lambda total, present: block(total) if len(present) == n_sys else None)


def censored_v_of_u(u: Operator | np.ndarray, system: LevelSystem, spec: LadderSpec) -> Operator:
    """Translation-invariant lift of ``u``, acting trivially on edge-deficient blocks."""
    ub = system.in_level_basis(u)
    if np.max(np.abs(ub.conj().T @ ub - np.eye(system.dim))) > 1e-9:
        raise ValueError("u is not unitary")
    return energy_block_unitary(system, spec, lambda _: ub)


def ideal_v_of_u(u: Operator | np.ndarray, system: LevelSystem, spec: LadderSpec) -> np.ndarray:
    """``sum |psi_n><psi_n|U|psi_n'><psi_n'| (x) Delta^{z_n' - z_n}`` with truncated shifts.

    Not unitary near the edges; only useful for comparisons on interior vectors.
    """
    ub = system.in_level_basis(u)
    out = np.zeros((system.dim * spec.size,) * 2, dtype=complex)
    for n, zn in enumerate(system.levels):
        for k, zk in enumerate(system.levels):
            proj = np.outer(system.basis[:, n], system.basis[:, k].conj()) * ub[n, k]
            out += np.kron(proj, shift_operator(spec, zk - zn).matrix)
    return out


def _energies(h_reservoir: Operator | np.ndarray | None, dim: int) -> np.ndarray:
    if h_reservoir is None:
        return np.arange(dim, dtype=float)
    m = h_reservoir.matrix if isinstance(h_reservoir, Operator) else np.asarray(h_reservoir)
    if m.ndim == 1:
        e = m.astype(float)
    else:
        if np.max(np.abs(m - np.diag(np.diag(m)))) > 1e-12:
            raise ValueError("reservoir Hamiltonian must be diagonal in the computational basis")
        e = np.real(np.diag(m))
    return e


def _require_nondegenerate(e: np.ndarray) -> None:
    s = np.sort(e)
    if np.any(np.diff(s) < ENERGY_TOL):
        raise ValueError("reservoir spectrum is degenerate")


def _kraus_stack(cpm: CPM) -> np.ndarray:
    return np.stack(cpm.kraus)


def diagonal_probs(cpm: CPM, h_reservoir: Operator | np.ndarray | None = None) -> np.ndarray:
    """``p[m, n] = <m|F(|n><n|)|m>``."""
    if h_reservoir is not None:
        _require_nondegenerate(_energies(h_reservoir, cpm.in_space.dim))
    k = _kraus_stack(cpm)
    return np.sum(np.abs(k) ** 2, axis=0)


def _partners(e: np.ndarray, delta: float) -> dict[int, int]:
    """``n -> n'`` with ``E_n - E_n' = delta``."""
    out = {}
    for n, en in enumerate(e):
        hits = np.flatnonzero(np.abs(en - e - delta) < ENERGY_TOL)
        if hits.size:
            out[n] = int(hits[0])
    return out


def offdiag_amplitudes(
    cpm: CPM, delta: float, h_reservoir: Operator | np.ndarray | None = None
) -> dict[tuple[int, int], complex]:
    """``q[(m, n)] = <m|F(|n><n'|)|m'>`` with ``E_n - E_n' = E_m - E_m' = delta``.

    Without ``h_reservoir`` the energies are the indices (unit ladder).
    """
    e_in = _energies(h_reservoir, cpm.in_space.dim)
    e_out = _energies(h_reservoir, cpm.out_space.dim)
    _require_nondegenerate(e_in)
    pin, pout = _partners(e_in, delta), _partners(e_out, delta)
    k = _kraus_stack(cpm)
    table = {}
    for n, n2 in pin.items():
        for m, m2 in pout.items():
            table[(m, n)] = complex(np.sum(k[:, m, n] * k[:, m2, n2].conj()))
    return table


def interference_probability(cpm: CPM, n: int, n2: int, m: int, m2: int, theta: float) -> float:
    """Exact ``Tr(A F(psi))`` for ``psi = (|n> + e^{i theta}|n2>)/sqrt 2`` and ``A = |a><a|``,
    ``a = (|m> + |m2>)/sqrt 2``."""
    d_in, d_out = cpm.in_space.dim, cpm.out_space.dim
    psi = np.zeros(d_in, dtype=complex)
    psi[n], psi[n2] = 1 / np.sqrt(2), np.exp(1j * theta) / np.sqrt(2)
    a = np.zeros(d_out, dtype=complex)
    a[m], a[m2] = 1 / np.sqrt(2), 1 / np.sqrt(2)
    out = cpm.apply_matrix(np.outer(psi, psi.conj()))
    return float(np.real(a.conj() @ out @ a))


def interference_prediction(p: np.ndarray, q: complex, n: int, n2: int, m: int, m2: int, theta: float) -> float:
    """Outcome probability predicted from diagonal probabilities and one coherence amplitude.

    ``1/4 (p(m|n) + p(m2|n) + p(m|n2) + p(m2|n2)) + 1/2 |q| cos(arg q - theta)``
    """
    diag = 0.25 * (p[m, n] + p[m2, n] + p[m, n2] + p[m2, n2])
    return float(diag + 0.5 * abs(q) * np.cos(np.angle(q) - theta))


def work_distribution(
    cpm: CPM, sigma: Operator | np.ndarray, h_reservoir: Operator | np.ndarray, decimals: int = 9
) -> dict[float, float]:
    """``P(w) = sum_{E_n - E_m = w} p(m|n) <n|sigma|n>``."""
    sm = sigma.matrix if isinstance(sigma, Operator) else np.asarray(sigma)
    e = _energies(h_reservoir, cpm.in_space.dim)
    p = diagonal_probs(cpm)
    pops = np.real(np.diag(sm))
    dist: dict[float, float] = defaultdict(float)
    for n in np.flatnonzero(np.abs(pops) > 0):
        for m in np.flatnonzero(p[:, n] > 0):
            w = round(float(e[n] - e[m]), decimals) + 0.0
            dist[w] += float(p[m, n] * pops[n])
    return dict(sorted(dist.items()))


def decoupling_check(cpm: CPM, h_reservoir: Operator | np.ndarray | None = None) -> float:
    """Largest ``|<m|F(|n><n'|)|m'>|`` with ``E_m - E_n != E_m' - E_n'``."""
    e = _energies(h_reservoir, cpm.in_space.dim)
    _require_nondegenerate(e)
    k = _kraus_stack(cpm)
    t = np.einsum("kmn,kpq->mnpq", k, k.conj())
    gap = (e[:, None] - e[None, :])[:, :, None, None] - (e[:, None] - e[None, :])[None, None, :, :]
    mask = np.abs(gap) > ENERGY_TOL
    return float(np.max(np.abs(t[mask]), initial=0.0))


def translation_invariance_check(cpm: CPM, spec: LadderSpec, window: Sequence[int], max_shift: int = 2) -> float:
    """Largest ``|| D^j F(s) D^{-k} - F(D^j s D^{-k}) ||_1`` over matrix units inside ``window``."""
    win = sorted(set(int(i) for i in window))
    if not win:
        return 0.0
    if win[0] < 0 or win[-1] >= spec.size:
        raise ValueError("window exceeds the ladder")
    inside = set(win)
    shifts = {p: shift_operator(spec, p).matrix for p in range(-max_shift, max_shift + 1)}
    d = spec.size
    worst = 0.0
    for a in win:
        for b in win:
            unit = np.zeros((d, d), dtype=complex)
            unit[a, b] = 1.0
            image = cpm.apply_matrix(unit)
            for j in range(-max_shift, max_shift + 1):
                if a + j not in inside:
                    continue
                for k in range(-max_shift, max_shift + 1):
                    if b + k not in inside:
                        continue
                    moved = np.zeros((d, d), dtype=complex)
                    moved[a + j, b + k] = 1.0
                    lhs = shifts[j] @ image @ shifts[k].conj().T
                    worst = max(worst, trace_norm(lhs - cpm.apply_matrix(moved)))
    return worst


def transitions_from_origin(p: np.ndarray, origin: int) -> dict[int, float]:
    """``k -> p(origin + k | origin)``."""
    return {m - origin: float(p[m, origin]) for m in range(p.shape[0]) if p[m, origin] != 0}


def rebuild_from_transitions(p_k: dict[int, float], rho: np.ndarray) -> np.ndarray:
    """``sum_k p(k|0) sum_{n n'} <n|rho|n'> |n+k><n'+k|`` on the same truncated index range."""
    d = rho.shape[0]
    out = np.zeros_like(rho, dtype=complex)
    for k, pk in p_k.items():
        lo, hi = max(0, -k), min(d, d - k)
        if lo < hi:
            out[lo + k : hi + k, lo + k : hi + k] += pk * rho[lo:hi, lo:hi]
    return out
