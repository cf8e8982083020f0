"""Concrete models: global unitaries, the reservoir maps they induce, and the
partition values that enter the relations.

Controlled ladder models use a system ``S`` with levels ``z^i`` (eigenvectors
``chi^i_n``) before and ``z^f`` (``chi^f_m``) after the process, a control ``C``
and a truncated ladder ``E``. With a two-dimensional control the sectors are
``[i, f]``. With four dimensions they are ``[i+, i-, f+, f-]`` and the
reversal on ``C`` swaps the signs.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .channels import CPM, induced_cpm
from .gibbs import ThermalContext, gibbs_map, partition_map
from .ladder import LadderSpec, LevelSystem, block_unitary, censored_v_of_u, ideal_v_of_u, total_hamiltonian
from .operators import (
    Operator,
    TensorSpace,
    identity,
    random_orthogonal_matrix,
    random_unitary_matrix,
    tensor_product,
)
from .reversal import TimeReversal, make_reversal, product_reversal, transpose_reversal
from .verify import CrooksScenario

I_PLUS, I_MINUS, F_PLUS, F_MINUS = range(4)
SIGNED_SECTORS = ("i+", "i-", "f+", "f-")

# (level, present i-indices, present f-indices) -> blocks, or None for the identity
PairFn = Callable[[int, list[int], list[int]], tuple[np.ndarray, ...] | None]


def control_swap() -> np.ndarray:
    """``Y``: exchanges ``c_{i+} <-> c_{i-}`` and ``c_{f+} <-> c_{f-}``."""
    return np.eye(4)[[1, 0, 3, 2]]


def control_projector(sector: int, dim: int = 4) -> Operator:
    p = np.zeros((dim, dim))
    p[sector, sector] = 1.0
    return Operator(TensorSpace.single("C", dim), p)


def _thermal_weights(levels: Sequence[int], s: float, beta: float) -> np.ndarray:
    return np.exp(-beta * s * np.asarray(levels, dtype=float))


def level_gibbs(levels: Sequence[int], basis: np.ndarray, s: float, beta: float, label: str = "S") -> Operator:
    w = _thermal_weights(levels, s, beta)
    return Operator(TensorSpace.single(label, len(levels)), (basis * (w / w.sum())) @ basis.conj().T)


# Controlled unitaries on S (x) C (x) E


@dataclass(frozen=True, eq=False)
class ControlledLadder:
    """Global unitary with the level system it was built on."""

    system: LevelSystem
    spec: LadderSpec
    v: Operator
    levels_i: tuple[int, ...]
    levels_f: tuple[int, ...]
    basis_i: np.ndarray = field(repr=False)
    basis_f: np.ndarray = field(repr=False)
    signed: bool

    @property
    def span(self) -> int:
        return self.system.span

    @property
    def h_total(self) -> Operator:
        return total_hamiltonian(self.system, self.spec)

    def system_reversal(self) -> TimeReversal:
        """Transpose on ``S`` (real level bases) twisted by ``Y`` on a four-level control."""
        d = self.system.space.dim_of("S")
        twist = np.kron(np.eye(d), control_swap()) if self.signed else None
        return make_reversal(self.system.space, twist=twist)

    def global_reversal(self) -> TimeReversal:
        return product_reversal(self.system_reversal(), transpose_reversal(self.spec.space))


def controlled_ladder(
    levels_i: Sequence[int],
    levels_f: Sequence[int],
    spec: LadderSpec,
    pair_fn: PairFn,
    basis_i: np.ndarray | None = None,
    basis_f: np.ndarray | None = None,
    signed: bool = True,
) -> ControlledLadder:
    """Assemble ``V`` block by block in the total-energy eigenspaces.

    ``pair_fn(L, ni, mf)`` returns ``(A, B)`` or, for probes, ``(A, B, A2, B2)``.
    ``A`` (shape ``len(mf) x len(ni)``) moves ``i(+)`` to ``f(+)`` and ``B`` moves back.
    With ``signed=True`` the blocks ``i- <- f-`` and ``f- <- i-`` default to
    ``A^t`` and ``B^t``, which makes ``V`` invariant under the reversal.
    Blocks where ``len(ni) != len(mf)`` are left as the identity.
    """
    n = len(levels_i)
    if len(levels_f) != n:
        raise ValueError("initial and final level lists must have equal length")
    bi = np.eye(n) if basis_i is None else np.asarray(basis_i)
    bf = np.eye(n) if basis_f is None else np.asarray(basis_f)
    n_ctrl = 4 if signed else 2
    sectors = [(I_PLUS, bi, levels_i), (I_MINUS, bi, levels_i), (F_PLUS, bf, levels_f), (F_MINUS, bf, levels_f)]
    if not signed:
        sectors = [(0, bi, levels_i), (1, bf, levels_f)]
    cols, levels = [], []
    for c, b, lv in sectors:
        e = np.zeros(n_ctrl)
        e[c] = 1.0
        cols += [np.kron(b[:, k], e) for k in range(n)]
        levels += [int(z) for z in lv]
    space = TensorSpace.of(("S", n), ("C", n_ctrl))
    system = LevelSystem(space, tuple(levels), np.array(cols).T)
    f_sector = 2 if signed else 1

    def block(total: int, present: list[int]) -> np.ndarray | None:
        pos = {k: a for a, k in enumerate(present)}
        ni = [k for k in present if k // n == 0]
        mf = [k - f_sector * n for k in present if k // n == f_sector]
        if not ni or len(ni) != len(mf):
            return None
        nn = [k % n for k in ni]
        blocks = pair_fn(total, nn, mf)
        if blocks is None:
            return None
        a, b = (np.asarray(x, dtype=complex) for x in blocks[:2])
        a2, b2 = (a.T, b.T) if len(blocks) == 2 else (np.asarray(blocks[2]), np.asarray(blocks[3]))
        out = np.zeros((len(present),) * 2, dtype=complex)
        for ia, x in enumerate(nn):
            for im, y in enumerate(mf):
                fi, ff = pos[x], pos[f_sector * n + y]
                out[ff, fi] = a[im, ia]
                out[fi, ff] = b[ia, im]
                if signed:
                    gi, gf = pos[n + x], pos[3 * n + y]
                    out[gi, gf] = a2[ia, im]
                    out[gf, gi] = b2[im, ia]
        return out

    v = block_unitary(system, spec, block)
    return ControlledLadder(system, spec, v, tuple(levels_i), tuple(levels_f), bi, bf, signed)


def constant_pairs(a: np.ndarray, b: np.ndarray) -> PairFn:
    """Translation-invariant blocks; edge-deficient blocks stay the identity."""
    n = a.shape[0]
    return lambda total, ni, mf: (a, b) if len(ni) == n else None


def varying_pairs(rng: np.random.Generator) -> PairFn:
    """Fresh random unitaries for every total level (cached, so calls are repeatable)."""
    cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def fn(total: int, ni: list[int], mf: list[int]):
        key = (total, len(ni))
        if key not in cache:
            cache[key] = (random_unitary_matrix(len(ni), rng), random_unitary_matrix(len(ni), rng))
        return cache[key]

    return fn


def asymmetric_pairs(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> PairFn:
    """Probe: the ``-`` sector gets unrelated unitaries, so ``T(V) != V``."""
    n = a.shape[0]
    a2, b2 = random_unitary_matrix(n, rng), random_unitary_matrix(n, rng)
    return lambda total, ni, mf: (a, b, a2, b2) if len(ni) == n else None


# Scenario records


@dataclass(frozen=True, eq=False)
class ReservoirModel:
    """Forward and reverse maps on a ladder reservoir under perfect control."""

    beta: float
    h_reservoir: Operator
    reversal: TimeReversal
    f_plus: CPM
    f_minus: CPM
    r_plus: CPM
    z_i: float
    z_f: float
    window: tuple[int, ...] | None = None
    ladder: ControlledLadder | None = None

    @property
    def ctx(self) -> ThermalContext:
        return ThermalContext(self.beta, self.h_reservoir)

    def crooks(self, beta: float | None = None, window: Sequence[int] | None = None) -> CrooksScenario:
        """``beta`` overrides the temperature of the J-maps (wrong-temperature probe)."""
        ctx = self.ctx if beta is None else ThermalContext(beta, self.h_reservoir)
        win = self.window if window is None else tuple(window)
        return CrooksScenario(self.f_plus, self.f_minus, self.z_i, self.z_f, ctx, self.reversal, window=win)

    def intermediate(self) -> CrooksScenario:
        """Relation with the backward map ``R+`` entering through its conjugate."""
        return CrooksScenario(
            self.f_plus, self.r_plus, self.z_i, self.z_f, self.ctx, use_ominus=False, window=self.window
        )


def _partition(levels: Sequence[int], s: float, beta: float) -> float:
    return float(np.sum(_thermal_weights(levels, s, beta)))


def ladder_model(
    cl: ControlledLadder,
    beta: float,
    initial_state: Operator | None = None,
    margin: int | None = None,
) -> ReservoirModel:
    """Induced maps of a controlled ladder.

    ``F+`` starts from ``G(H^i) (x) |c_{i+}>``; ``F-`` from ``G(H^f) (x) |c_{f-}>``;
    ``R+`` runs ``V^dag`` from ``G(H^f) (x) |c_{f+}>``. With a two-level control
    the ``+`` and ``-`` sectors coincide. ``initial_state`` replaces ``G(H^i)``
    in ``F+`` (non-Gibbs probe).
    """
    s = cl.spec.spacing
    n_ctrl = 4 if cl.signed else 2
    ip, fm, fp = (I_PLUS, F_MINUS, F_PLUS) if cl.signed else (0, 1, 1)
    g_i = level_gibbs(cl.levels_i, cl.basis_i, s, beta)
    g_f = level_gibbs(cl.levels_f, cl.basis_f, s, beta)
    rho = g_i if initial_state is None else initial_state
    f_plus = induced_cpm(cl.v, tensor_product(rho, control_projector(ip, n_ctrl)))
    f_minus = induced_cpm(cl.v, tensor_product(g_f, control_projector(fm, n_ctrl)))
    r_plus = induced_cpm(cl.v.dag(), tensor_product(g_f, control_projector(fp, n_ctrl)))
    m = cl.span if margin is None else margin
    return ReservoirModel(
        beta,
        cl.spec.hamiltonian(),
        transpose_reversal(cl.spec.space),
        f_plus,
        f_minus,
        r_plus,
        _partition(cl.levels_i, s, beta),
        _partition(cl.levels_f, s, beta),
        tuple(cl.spec.interior(m)),
        cl,
    )


def random_real_basis(n: int, rng: np.random.Generator | None) -> np.ndarray:
    return np.eye(n) if rng is None else random_orthogonal_matrix(n, rng)


def symmetric_ladder(
    levels_i: Sequence[int],
    levels_f: Sequence[int],
    spec: LadderSpec,
    beta: float,
    rng: np.random.Generator,
    mode: str = "constant",
    rotate_bases: bool = True,
) -> ReservoirModel:
    """Four-control model with random blocks.

    ``mode="constant"`` gives a translation-invariant ``V(U)`` (unital ``R+`` on
    the interior), ``"varying"`` draws new blocks for every total level.
    """
    n = len(levels_i)
    bi = random_real_basis(n, rng if rotate_bases else None)
    bf = random_real_basis(n, rng if rotate_bases else None)
    if mode == "constant":
        pairs = constant_pairs(random_unitary_matrix(n, rng), random_unitary_matrix(n, rng))
    elif mode == "varying":
        pairs = varying_pairs(rng)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ladder_model(controlled_ladder(levels_i, levels_f, spec, pairs, bi, bf), beta)


def intermediate_model(
    levels_i: Sequence[int],
    levels_f: Sequence[int],
    spec: LadderSpec,
    beta: float,
    rng: np.random.Generator,
    mode: str = "varying",
) -> ReservoirModel:
    """Two-control model without any time-reversal symmetry (complex bases and blocks)."""
    n = len(levels_i)
    bi, bf = random_unitary_matrix(n, rng), random_unitary_matrix(n, rng)
    pairs = (
        constant_pairs(random_unitary_matrix(n, rng), random_unitary_matrix(n, rng))
        if mode == "constant"
        else varying_pairs(rng)
    )
    return ladder_model(controlled_ladder(levels_i, levels_f, spec, pairs, bi, bf, signed=False), beta)


def broken_symmetry_ladder(
    levels_i: Sequence[int], levels_f: Sequence[int], spec: LadderSpec, beta: float, rng: np.random.Generator
) -> ReservoirModel:
    n = len(levels_i)
    a, b = random_unitary_matrix(n, rng), random_unitary_matrix(n, rng)
    cl = controlled_ladder(levels_i, levels_f, spec, asymmetric_pairs(a, b, rng))
    return ladder_model(cl, beta)


def non_gibbs_ladder(
    levels_i: Sequence[int], levels_f: Sequence[int], spec: LadderSpec, beta: float, rng: np.random.Generator
) -> ReservoirModel:
    """Probe: ``F+`` starts from a thermal state at the wrong temperature instead of ``G(H^i)``."""
    n = len(levels_i)
    a, b = random_unitary_matrix(n, rng), random_unitary_matrix(n, rng)
    cl = controlled_ladder(levels_i, levels_f, spec, constant_pairs(a, b))
    rho = level_gibbs(cl.levels_i, cl.basis_i, spec.spacing, 3.0 * beta + 1.0)
    return ladder_model(cl, beta, initial_state=rho)


# Explicit violation of the standard work bound


def violation_model(K: int, s: float = 1.0, beta: float = 1.0, j_max: int | None = None) -> ReservoirModel:
    """``H^i = H^f = s sum_{k<=K} k``, ladder bounded below at 0.

    In the block of total level ``L <= K`` the state ``n`` goes to ``L - n``, so a
    reservoir starting in ``|0>`` absorbs all system energy. Other blocks act
    as the plain i -> f transfer.
    """
    levels = list(range(K + 1))
    spec = LadderSpec(s, 0, 2 * K + 4 if j_max is None else j_max)

    def pairs(total: int, ni: list[int], mf: list[int]):
        if total <= K:
            a = np.array([[1.0 if y == total - x else 0.0 for x in ni] for y in mf])
        else:
            a = np.array([[1.0 if y == x else 0.0 for x in ni] for y in mf])
        return a, a.T

    cl = controlled_ladder(levels, levels, spec, pairs)
    return ladder_model(cl, beta, margin=0)


# Pre-correlated system and reservoir


@dataclass(frozen=True, eq=False)
class PrecorrelatedModel:
    """Maps on the joint ``SE`` system; a bath ``B`` and control ``C`` are traced out."""

    beta: float
    h_i: Operator
    h_f: Operator
    f_plus: CPM
    f_minus: CPM
    v: Operator
    h_total: Operator
    global_reversal: TimeReversal

    def crooks(self, beta: float | None = None) -> CrooksScenario:
        b = self.beta if beta is None else beta
        t = transpose_reversal(self.h_i.space)
        return CrooksScenario(
            self.f_plus,
            self.f_minus,
            1.0,
            1.0,
            ThermalContext(b, self.h_i),
            t,
            ctx_out=ThermalContext(b, self.h_f),
        )


def _eigenspace_unitary(h: np.ndarray, rng: np.random.Generator, tol: float = 1e-9) -> np.ndarray:
    """Random unitary commuting with real symmetric ``h`` (block diagonal in its eigenspaces)."""
    w, vecs = np.linalg.eigh(h)
    x = np.zeros_like(h, dtype=complex)
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) < tol:
            stop += 1
        e = vecs[:, start:stop]
        x += e @ random_unitary_matrix(stop - start, rng) @ e.conj().T
        start = stop
    return x


def precorrelated_model(
    beta: float,
    rng: np.random.Generator,
    levels_se: Sequence[int] = (0, 1, 1, 2),
    levels_b: Sequence[int] = (0, 1, 2),
    s: float = 1.0,
) -> PrecorrelatedModel:
    """Interacting ``H^i_SE`` with integer spectrum and ``H^f_SE = W H^i_SE W^t``.

    ``U = (W (x) 1_B) X`` with ``X`` commuting with ``H^i_SE + H_B``, and
    ``V = U|f+><i+| + U^dag|i+><f+| + U^t|i-><f-| + conj(U)|f-><i-|``.
    """
    d, db = len(levels_se), len(levels_b)
    o = random_orthogonal_matrix(d, rng)
    w = random_orthogonal_matrix(d, rng)
    hi = o @ np.diag(s * np.asarray(levels_se, float)) @ o.T
    hf = w @ hi @ w.T
    hb = np.diag(s * np.asarray(levels_b, float))
    hib = np.kron(hi, np.eye(db)) + np.kron(np.eye(d), hb)
    u = np.kron(w, np.eye(db)) @ _eigenspace_unitary(hib, rng)
    blocks = {(F_PLUS, I_PLUS): u, (I_PLUS, F_PLUS): u.conj().T, (I_MINUS, F_MINUS): u.T, (F_MINUS, I_MINUS): u.conj()}
    v = np.zeros((d * db * 4,) * 2, dtype=complex)
    for (out, inp), blk in blocks.items():
        e = np.zeros((4, 4))
        e[out, inp] = 1.0
        v += np.kron(blk, e)
    space = TensorSpace.of(("SE", d), ("B", db), ("C", 4))
    ctrl_i = np.diag([1.0, 1.0, 0.0, 0.0])
    h_tot = np.kron(np.kron(hi, np.eye(db)), ctrl_i) + np.kron(np.kron(hf, np.eye(db)), np.eye(4) - ctrl_i)
    h_tot += np.kron(np.kron(np.eye(d), hb), np.eye(4))
    v_op = Operator(space, v)
    se = TensorSpace.single("SE", d)
    bspace = TensorSpace.single("B", db)
    g_b = gibbs_map(ThermalContext(beta, Operator(bspace, hb)), identity(bspace))
    env_plus = tensor_product(control_projector(I_PLUS), g_b)
    env_minus = tensor_product(control_projector(F_MINUS), g_b)
    t_global = make_reversal(space, twist=np.kron(np.eye(d * db), control_swap()))
    return PrecorrelatedModel(
        beta,
        Operator(se, hi),
        Operator(se, hf),
        induced_cpm(v_op, env_plus),
        induced_cpm(v_op, env_minus),
        v_op,
        Operator(space, h_tot),
        t_global,
    )


# Conditional relations


@dataclass(frozen=True, eq=False)
class ConditionalModel:
    """Conditioned maps ``F~+-`` on the reservoir for effects on ``S~``."""

    beta: float
    h_system: Operator
    h_reservoir: Operator
    reversal: TimeReversal
    f_plus: CPM
    f_minus: CPM
    z_qi: float
    z_qf: float
    q_i_plus: Operator
    q_f_plus: Operator
    q_i_minus: Operator
    q_f_minus: Operator
    v: Operator

    @property
    def ctx(self) -> ThermalContext:
        return ThermalContext(self.beta, self.h_reservoir)

    def crooks(self, window: Sequence[int] | None = None) -> CrooksScenario:
        return CrooksScenario(
            self.f_plus,
            self.f_minus,
            self.z_qi,
            self.z_qf,
            self.ctx,
            self.reversal,
            window=None if window is None else tuple(window),
        )


def conditional_model(
    v: Operator,
    h_system: Operator,
    h_reservoir: Operator,
    t_system: TimeReversal,
    t_reservoir: TimeReversal,
    q_i_plus: Operator,
    q_f_plus: Operator,
    beta: float,
) -> ConditionalModel:
    """``F~+(s) = Tr_S[(Qf+ (x) 1) V (G(Qi+) (x) s) V^dag]`` and the mirrored ``F~-``."""
    ctx = ThermalContext(beta, h_system)
    q_i_minus, q_f_minus = t_system(q_i_plus), t_system(q_f_plus)
    f_plus = induced_cpm(v, gibbs_map(ctx, q_i_plus), q_f_plus)
    f_minus = induced_cpm(v, gibbs_map(ctx, q_f_minus), q_i_minus)
    return ConditionalModel(
        beta,
        h_system,
        h_reservoir,
        t_reservoir,
        f_plus,
        f_minus,
        partition_map(ctx, q_i_plus),
        partition_map(ctx, q_f_plus),
        q_i_plus,
        q_f_plus,
        q_i_minus,
        q_f_minus,
        v,
    )


def conditional_ladder(
    levels_i: Sequence[int],
    levels_f: Sequence[int],
    spec: LadderSpec,
    beta: float,
    rng: np.random.Generator,
    diagonal_effects: bool = False,
) -> ConditionalModel:
    """Translation-invariant four-control ladder with random effects on ``S~ = S C``.

    Diagonal effects are diagonal in the level basis of ``S~``, hence commute with ``H_S~``.
    """
    n = len(levels_i)
    pairs = constant_pairs(random_unitary_matrix(n, rng), random_unitary_matrix(n, rng))
    cl = controlled_ladder(levels_i, levels_f, spec, pairs, random_real_basis(n, rng), random_real_basis(n, rng))
    space = cl.system.space
    h_sys = cl.system.hamiltonian(spec.spacing)

    def effect() -> Operator:
        if diagonal_effects:
            return Operator(space, (cl.system.basis * rng.uniform(0.2, 1.0, space.dim)) @ cl.system.basis.conj().T)
        m = rng.standard_normal((space.dim,) * 2) + 1j * rng.standard_normal((space.dim,) * 2)
        h = m @ m.conj().T
        return Operator(space, h / np.linalg.eigvalsh(h)[-1])

    return conditional_model(
        cl.v, h_sys, spec.hamiltonian(), cl.system_reversal(), transpose_reversal(spec.space), effect(), effect(), beta
    )


# Two resonant qubits


def two_qubit_block(theta: float, chi: float = 0.0, delta: float = 0.0) -> np.ndarray:
    """The general reversal-invariant unitary on ``span{|01>, |10>}``."""
    return np.exp(1j * chi) * np.array(
        [[-np.exp(-1j * delta) * np.cos(theta), np.sin(theta)], [np.sin(theta), np.exp(1j * delta) * np.cos(theta)]]
    )


def two_qubit_unitary(
    theta: float, chi: float = 0.0, delta: float = 0.0, chi_plus: float = 0.0, chi_minus: float = 0.0,
    block: np.ndarray | None = None,
) -> Operator:
    u = two_qubit_block(theta, chi, delta) if block is None else np.asarray(block)
    v = np.zeros((4, 4), dtype=complex)
    v[0, 0] = np.exp(1j * chi_minus)
    v[3, 3] = np.exp(1j * chi_plus)
    v[1:3, 1:3] = u
    return Operator(TensorSpace.of(("S", 2), ("E", 2)), v)


def qubit_hamiltonian(s: float, label: str) -> Operator:
    return Operator(TensorSpace.single(label, 2), np.diag([-s / 2, s / 2]))


PSI_PLUS_I = np.array([1.0, 1.0j]) / np.sqrt(2)


def two_qubit_model(
    theta: float,
    beta: float = 1.0,
    s: float = 1.0,
    chi: float = 0.0,
    delta: float = 0.0,
    chi_plus: float = 0.0,
    chi_minus: float = 0.0,
    q_i_plus: Operator | None = None,
    q_f_plus: Operator | None = None,
) -> ConditionalModel:
    """Defaults: ``Qi+ = 1`` and ``Qf+ = |psi><psi|`` with ``psi = (|0> + i|1>)/sqrt 2``."""
    hs, he = qubit_hamiltonian(s, "S"), qubit_hamiltonian(s, "E")
    qi = identity(hs.space) if q_i_plus is None else q_i_plus
    qf = Operator(hs.space, np.outer(PSI_PLUS_I, PSI_PLUS_I.conj())) if q_f_plus is None else q_f_plus
    v = two_qubit_unitary(theta, chi, delta, chi_plus, chi_minus)
    return conditional_model(v, hs, he, transpose_reversal(hs.space), transpose_reversal(he.space), qi, qf, beta)


def resonant_pair(
    levels: Sequence[int], s: float, rng: np.random.Generator, symmetric: bool = True
) -> tuple[Operator, Operator, Operator]:
    """``(h1, h2, V)`` for two copies of one level system with an energy-conserving ``V``.

    With ``symmetric=True`` every block is a complex-symmetric unitary, so ``V^t = V``.
    """
    d = len(levels)
    h = np.diag(s * np.asarray(levels, dtype=float))
    s1, s2 = TensorSpace.single("S", d), TensorSpace.single("E", d)
    tot = np.kron(h, np.eye(d)) + np.kron(np.eye(d), h)
    diag = np.real(np.diag(tot))
    v = np.zeros((d * d,) * 2, dtype=complex)
    for e in np.unique(np.round(diag, 9)):
        idx = np.flatnonzero(np.abs(diag - e) < 1e-9)
        k = len(idx)
        if symmetric:
            o = random_orthogonal_matrix(k, rng)
            blk = o @ np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, k))) @ o.T
        else:
            blk = random_unitary_matrix(k, rng)
        v[np.ix_(idx, idx)] = blk
    return Operator(s1, h), Operator(s2, h), Operator(s1.concat(s2), v)


# Censored control at the bottom of a ladder


@dataclass(frozen=True, eq=False)
class CensoredExample:
    system: LevelSystem
    spec: LadderSpec
    censored: Operator
    ideal: np.ndarray = field(repr=False)


def censored_example(s: float = 1.0, j_max: int = 12) -> CensoredExample:
    """``H^i`` levels ``s, 2s`` with control ``c_i``; ``H^f`` levels ``3s, 4s`` with ``c_f``.

    ``U`` swaps the two sectors and the ladder starts at ``|0>``.
    """
    cols = [np.kron(np.eye(2)[:, n], np.eye(2)[:, c]) for c in (0, 1) for n in (0, 1)]
    system = LevelSystem(TensorSpace.of(("S", 2), ("C", 2)), (1, 2, 3, 4), np.array(cols).T)
    spec = LadderSpec(s, 0, j_max)
    swap = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    b = system.basis
    u = b @ swap @ b.conj().T
    return CensoredExample(system, spec, censored_v_of_u(u, system, spec), ideal_v_of_u(u, system, spec))
