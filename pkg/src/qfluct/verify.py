"""Residual checkers for the fluctuation relations.

Every checker returns numbers (residuals, both sides, slacks). Pass/fail
thresholds are applied by callers.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .channels import CPM, compose, cpm_difference, induced_cpm, restrict_input
from .gibbs import ThermalContext, gibbs_map, j_cpm, j_map, partition_map
from .ladder import diagonal_probs, offdiag_amplitudes, work_distribution
from .operators import Operator, max_abs, trace_norm
from .reversal import TimeReversal, apply_reversal, ominus

# Crooks-type channel relations


@dataclass(frozen=True, eq=False)
class CrooksScenario:
    """Ingredients of ``z_i F+ = z_f J_out o F-^ominus o J_in^{-1}``.

    With ``use_ominus=False`` the reverse map enters through its conjugate
    instead (the intermediate relation with a globally inverted evolution).
    ``window`` restricts the comparison to inputs spanned by those basis indices.
    """

    forward: CPM
    reverse: CPM
    z_i: float
    z_f: float
    ctx_in: ThermalContext
    reversal_in: TimeReversal | None = None
    ctx_out: ThermalContext | None = None
    reversal_out: TimeReversal | None = None
    use_ominus: bool = True
    window: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not (self.z_i > 0 and self.z_f > 0):
            raise ValueError("partition values must be positive")
        out_ctx = self.output_context
        if self.forward.in_space != self.ctx_in.space or self.forward.out_space != out_ctx.space:
            raise ValueError("forward map endpoints do not match the thermal contexts")
        if self.reverse.in_space != out_ctx.space or self.reverse.out_space != self.ctx_in.space:
            raise ValueError("reverse map endpoints do not match the thermal contexts")
        if self.use_ominus and self.reversal_in is None:
            raise ValueError("the ominus form needs a time-reversal")
        if self.window is not None:
            object.__setattr__(self, "window", tuple(int(i) for i in self.window))

    @property
    def output_context(self) -> ThermalContext:
        return self.ctx_in if self.ctx_out is None else self.ctx_out

    def lhs(self) -> CPM:
        return self._restrict(self.forward.scaled(self.z_i))

    def rhs(self) -> CPM:
        if self.use_ominus:
            t_out = self.reversal_in if self.reversal_out is None else self.reversal_out
            # reverse maps out -> in, so its ominus maps in -> out
            rev = ominus(self.reverse, t_out, self.reversal_in)
        else:
            rev = CPM(self.reverse.out_space, self.reverse.in_space, tuple(k.conj().T for k in self.reverse.kraus))
        m = compose(j_cpm(self.output_context, "forward"), rev, j_cpm(self.ctx_in, "inverse"))
        return self._restrict(m.scaled(self.z_f))

    def _restrict(self, m: CPM) -> CPM:
        return m if self.window is None else restrict_input(m, self.window)


@dataclass(frozen=True)
class CrooksResult:
    residual: float
    max_abs: float
    scale: float

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual


def crooks_report(s: CrooksScenario) -> CrooksResult:
    lhs, rhs = s.lhs(), s.rhs()
    dist, mx = cpm_difference(lhs, rhs)
    return CrooksResult(dist, mx, trace_norm(lhs.choi))


def crooks_residual(s: CrooksScenario) -> float:
    """Choi trace distance between both sides of the relation."""
    return crooks_report(s).residual


# Diagonal, off-diagonal and classical relations


def _pairs(indices: Sequence[int] | None, n: int) -> list[int]:
    return list(range(n)) if indices is None else [int(i) for i in indices]


def diagonal_crooks_check(
    p_fwd: np.ndarray,
    p_rev: np.ndarray,
    z_i: float,
    z_f: float,
    energies: np.ndarray,
    beta: float,
    indices: Sequence[int] | None = None,
) -> float:
    """``max |Z_i p+(m|n) - e^{b(E_n - E_m)} Z_f p-(n|m)|`` over ``m, n`` in ``indices``."""
    if p_fwd.shape != p_rev.shape or p_fwd.shape[0] != len(energies):
        raise ValueError("transition tables and energies disagree in size")
    idx = _pairs(indices, len(energies))
    worst = 0.0
    for m in idx:
        for n in idx:
            r = z_i * p_fwd[m, n] - np.exp(beta * (energies[n] - energies[m])) * z_f * p_rev[n, m]
            worst = max(worst, abs(r))
    return float(worst)


def offdiag_crooks_check(
    f_plus: CPM,
    f_minus: CPM,
    z_i: float,
    z_f: float,
    energies: np.ndarray,
    beta: float,
    delta: float,
    indices: Sequence[int] | None = None,
) -> float:
    """``max |Z_i q+(m|n) - e^{b(E_n - E_m)} Z_f q-(n|m)|`` for one coherence offset."""
    qp = offdiag_amplitudes(f_plus, delta, energies)
    qm = offdiag_amplitudes(f_minus, delta, energies)
    keep = None if indices is None else set(int(i) for i in indices)
    worst = 0.0
    for (m, n), val in qp.items():
        if keep is not None and (m not in keep or n not in keep):
            continue
        if (n, m) not in qm:
            continue
        r = z_i * val - np.exp(beta * (energies[n] - energies[m])) * z_f * qm[(n, m)]
        worst = max(worst, abs(r))
    return float(worst)


def classical_crooks_check(
    f_plus: CPM,
    f_minus: CPM,
    sigma: Operator | np.ndarray,
    h_reservoir: Operator | np.ndarray,
    z_i: float,
    z_f: float,
    beta: float,
) -> float:
    """``max_w |Z_i P+(w) - e^{b w} Z_f P-(-w)|`` from two-point work statistics."""
    pp = work_distribution(f_plus, sigma, h_reservoir)
    pm = work_distribution(f_minus, sigma, h_reservoir)
    worst = 0.0
    for w in set(pp) | {-w for w in pm}:
        lhs = z_i * pp.get(w, 0.0)
        rhs = np.exp(beta * w) * z_f * pm.get(round(-w, 9) + 0.0, 0.0)
        worst = max(worst, abs(lhs - rhs))
    return float(worst)


def classical_jarzynski(dist: dict[float, float], beta: float) -> float:
    """``sum_w e^{-b w} P(w)``."""
    return float(sum(np.exp(-beta * w) * p for w, p in dist.items()))


# Jarzynski family and work bound


@dataclass(frozen=True)
class SidesResult:
    lhs: complex
    rhs: complex

    @property
    def residual(self) -> float:
        return float(abs(self.lhs - self.rhs))


def _weight(h: np.ndarray, c: complex) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(c * w)) @ v.conj().T


def jarzynski_check(
    f_plus: CPM,
    r_plus: CPM,
    h_reservoir: Operator,
    beta: float,
    z_i: float,
    z_f: float,
    rho: Operator | np.ndarray,
    r: float = 0.0,
    z: complex = 0.0,
) -> SidesResult:
    """Both sides of
    ``Tr[e^{bH} F+(e^{(-b+r+z)H/2} rho e^{(-b+r-z)H/2})] = Z_f/Z_i Tr[e^{rH/2} R+(1) e^{rH/2} rho]``.
    """
    h = h_reservoir.matrix
    rm = rho.matrix if isinstance(rho, Operator) else np.asarray(rho)
    arg = _weight(h, (-beta + r + z) / 2) @ rm @ _weight(h, (-beta + r - z) / 2)
    lhs = np.trace(_weight(h, beta) @ f_plus.apply_matrix(arg))
    r1 = r_plus.apply_matrix(np.eye(r_plus.in_space.dim))
    half = _weight(h, r / 2)
    rhs = z_f / z_i * np.trace(half @ r1 @ half @ rm)
    return SidesResult(complex(lhs), complex(rhs))


def jarzynski_unital_rhs(h_reservoir: Operator, z_i: float, z_f: float, rho: Operator | np.ndarray, r: float) -> complex:
    """``Z_f/Z_i Tr(e^{rH} rho)``, valid when ``R+`` is unital."""
    rm = rho.matrix if isinstance(rho, Operator) else np.asarray(rho)
    return complex(z_f / z_i * np.trace(_weight(h_reservoir.matrix, r) @ rm))


@dataclass(frozen=True)
class WorkBound:
    energy_drop: float
    free_energy_delta: float
    correction: float

    @property
    def slack(self) -> float:
        """Slack in the bound that includes the ``R+(1)`` correction; never negative."""
        return self.energy_drop - self.free_energy_delta - self.correction

    @property
    def standard_slack(self) -> float:
        """Slack against ``<W> >= dF`` alone; negative means the standard bound fails."""
        return self.energy_drop - self.free_energy_delta


def work_bound_check(
    f_plus: CPM, r_plus: CPM, h_reservoir: Operator, sigma: Operator | np.ndarray, beta: float, z_i: float, z_f: float
) -> WorkBound:
    h = h_reservoir.matrix
    sm = sigma.matrix if isinstance(sigma, Operator) else np.asarray(sigma)
    drop = np.real(np.trace(h @ sm) - np.trace(h @ f_plus.apply_matrix(sm)))
    df = -np.log(z_f / z_i) / beta
    r1 = r_plus.apply_matrix(np.eye(r_plus.in_space.dim))
    corr = -np.log(np.real(np.trace(sm @ r1))) / beta
    return WorkBound(float(drop), float(df), float(corr))


# Explicit violation of the standard bound


@dataclass(frozen=True)
class ViolationResult:
    min_energy_cost: float
    free_energy_delta: float
    permutations: tuple[tuple[int, ...], ...]

    @property
    def gap(self) -> float:
        return self.free_energy_delta - self.min_energy_cost


def _gibbs_probs(levels: Sequence[float], beta: float) -> np.ndarray:
    w = np.exp(-beta * np.asarray(levels, dtype=float))
    return w / w.sum()


def _block_weights(zi: Sequence[int], reservoir: dict[int, float], gi: np.ndarray) -> dict[int, np.ndarray]:
    """Total level ``j`` -> diagonal of ``r_j(G(H^i))`` indexed by ``n``."""
    out: dict[int, np.ndarray] = {}
    for j0, pj in reservoir.items():
        for n, z in enumerate(zi):
            j = j0 + z
            out.setdefault(j, np.zeros(len(zi)))[n] += pj * gi[n]
    return out


def _energy_cost(zi, zf, s, beta, reservoir, perms_value) -> tuple[float, float]:
    gi = _gibbs_probs(s * np.asarray(zi), beta)
    zi_val = np.sum(np.exp(-beta * s * np.asarray(zi, dtype=float)))
    zf_val = np.sum(np.exp(-beta * s * np.asarray(zf, dtype=float)))
    df = -np.log(zf_val / zi_val) / beta
    entropy = -float(np.sum(gi * np.log(gi)))
    return df, df - entropy / beta - perms_value / beta


def violation_minimizer(
    zi: Sequence[int],
    zf: Sequence[int],
    s: float,
    beta: float,
    reservoir: dict[int, float] | None = None,
) -> ViolationResult:
    """Least average energy loss over time-symmetric energy-block unitaries.

    The reservoir starts diagonal with populations ``reservoir`` (default ``|0><0|``).
    Per block the optimum pairs sorted weights with sorted ``ln G(H^f)``.
    """
    if len(set(zi)) != len(zi):
        raise ValueError("initial levels must be nondegenerate")
    reservoir = {0: 1.0} if reservoir is None else reservoir
    gi = _gibbs_probs(s * np.asarray(zi), beta)
    log_gf = np.log(_gibbs_probs(s * np.asarray(zf), beta))
    order_f = np.argsort(-log_gf, kind="stable")
    total = 0.0
    perms = []
    for _, weights in sorted(_block_weights(zi, reservoir, gi).items()):
        order_i = np.argsort(-weights, kind="stable")
        perm = np.empty(len(zi), dtype=int)
        perm[order_i] = order_f
        perms.append(tuple(int(p) for p in perm))
        total += float(np.sum(weights[order_i] * log_gf[order_f]))
    df, cost = _energy_cost(zi, zf, s, beta, reservoir, total)
    return ViolationResult(cost, df, tuple(perms))


def violation_brute_force(
    zi: Sequence[int], zf: Sequence[int], s: float, beta: float, reservoir: dict[int, float] | None = None
) -> ViolationResult:
    """Same minimum by enumerating every permutation in every block."""
    reservoir = {0: 1.0} if reservoir is None else reservoir
    gi = _gibbs_probs(s * np.asarray(zi), beta)
    log_gf = np.log(_gibbs_probs(s * np.asarray(zf), beta))
    total = 0.0
    perms = []
    for _, weights in sorted(_block_weights(zi, reservoir, gi).items()):
        best, best_perm = -np.inf, None
        for perm in itertools.permutations(range(len(zi))):
            val = float(sum(weights[n] * log_gf[perm[n]] for n in range(len(zi))))
            if val > best:
                best, best_perm = val, perm
        total += best
        perms.append(best_perm)
    df, cost = _energy_cost(zi, zf, s, beta, reservoir, total)
    return ViolationResult(cost, df, tuple(perms))


def violation_gap_closed_form(K: int, s_beta: float) -> float:
    """Gap in units of ``kT`` for ``H^i = H^f = s sum_{k=0}^K k |k><k|``."""
    x = s_beta
    return x * np.exp(-x) / (1 - np.exp(-x)) - x * (K + 1) * np.exp(-x * (K + 1)) / (1 - np.exp(-x * (K + 1)))


# Global and transition-probability forms


class PreconditionError(ValueError):
    """Raised when a checker's assumptions fail, as opposed to the relation itself."""


def global_invariance_check(
    h: Operator,
    v: Operator,
    t: TimeReversal,
    q_i: Operator,
    q_f: Operator,
    beta: float,
    tol: float = 1e-9,
) -> float:
    """``|Tr(Qf V J(Qi) V^dag) - Tr(T(Qi) V J(T(Qf)) V^dag)|``."""
    hm, vm = h.matrix, v.matrix
    if max_abs(hm @ vm - vm @ hm) > tol:
        raise PreconditionError("[H, V] != 0")
    if max_abs(t.apply_matrix(hm) - hm) > tol:
        raise PreconditionError("T(H) != H")
    if max_abs(t.apply_matrix(vm) - vm) > tol:
        raise PreconditionError("T(V) != V")
    ctx = ThermalContext(beta, h)
    fwd = np.trace(q_f.matrix @ vm @ j_map(ctx, q_i).matrix @ vm.conj().T)
    qi_m, qf_m = apply_reversal(t, q_i), apply_reversal(t, q_f)
    rev = np.trace(qi_m.matrix @ vm @ j_map(ctx, qf_m).matrix @ vm.conj().T)
    return float(abs(fwd - rev))


def transition_probability(
    process: CPM | Operator, ctx: ThermalContext, q_i: Operator, q_f: Operator
) -> float:
    """``Tr(Qf F(G(Qi)))``; a global unitary ``V`` acts as ``rho -> V rho V^dag``."""
    rho = gibbs_map(ctx, q_i)
    if isinstance(process, CPM):
        out = process.apply_matrix(rho.matrix)
    else:
        out = process.matrix @ rho.matrix @ process.matrix.conj().T
    return float(np.real(np.trace(q_f.matrix @ out)))


# Conditional Jarzynski


@dataclass(frozen=True)
class ConditionalJarzynski:
    lhs: float
    rhs: float
    f_plus: float
    f_minus: float
    success_spread: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def conditional_jarzynski_check(
    f_plus: CPM,
    f_minus: CPM,
    h_reservoir: Operator,
    beta: float,
    z_qi: float,
    z_qf: float,
    sigmas: Sequence[Operator | np.ndarray],
) -> ConditionalJarzynski:
    """``<e^{-bW}|Qf+> = (f-/f+) Z(Qf)/Z(Qi)`` from two-point statistics of ``sigmas[0]``.

    ``success_spread`` is the largest deviation of ``Tr F(sigma)`` from ``f Tr(sigma)``
    over all supplied states and both directions.
    """
    mats = [s.matrix if isinstance(s, Operator) else np.asarray(s) for s in sigmas]
    tp = [float(np.real(np.trace(f_plus.apply_matrix(m)))) for m in mats]
    tm = [float(np.real(np.trace(f_minus.apply_matrix(m)))) for m in mats]
    fp, fm = tp[0], tm[0]
    spread = max(max(abs(a - fp) for a in tp), max(abs(a - fm) for a in tm))
    dist = work_distribution(f_plus, mats[0], h_reservoir)
    lhs = classical_jarzynski(dist, beta) / fp
    rhs = fm / fp * z_qf / z_qi
    return ConditionalJarzynski(lhs, rhs, fp, fm, spread)


# Detailed balance


def detailed_balance_check(h1: Operator, h2: Operator, v: Operator, beta: float) -> float:
    """``max |p(n'|n) G_n - p(n|n') G_n'|`` for the channel induced on system 1.

    System 2 starts in its Gibbs state and is traced out afterwards.
    """
    w = np.linalg.eigvalsh(h1.matrix)
    if np.any(np.diff(np.sort(w)) < 1e-9):
        raise ValueError("h1 must be nondegenerate")
    if np.max(np.abs(h1.matrix - np.diag(np.diag(h1.matrix)))) > 1e-12:
        raise ValueError("h1 must be diagonal in the computational basis")
    g2 = ThermalContext(beta, h2).gibbs_state()
    phi = induced_cpm(v, g2)
    if phi.in_space != h1.space:
        raise ValueError("system 1 must be the factor left after tracing system 2")
    p = diagonal_probs(phi)
    g1 = np.real(np.diag(ThermalContext(beta, h1).gibbs_state().matrix))
    flux = p * g1[None, :]
    return float(np.max(np.abs(flux - flux.T)))


def z_weighted_transition_check(
    f_plus: CPM, f_minus: CPM, ctx: ThermalContext, t: TimeReversal, z_i: float, z_f: float, q_i: Operator, q_f: Operator
) -> float:
    """Reservoir-level form: ``Z_i Z(Qi) P+[Qi -> Qf] = Z_f Z(Qf) P-[T(Qf) -> T(Qi)]``."""
    fwd = z_i * partition_map(ctx, q_i) * transition_probability(f_plus, ctx, q_i, q_f)
    qi_m, qf_m = apply_reversal(t, q_i), apply_reversal(t, q_f)
    rev = z_f * partition_map(ctx, qf_m) * transition_probability(f_minus, ctx, qf_m, qi_m)
    return float(abs(fwd - rev))
