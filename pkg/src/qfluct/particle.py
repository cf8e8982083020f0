"""A spin-half particle on a 1D grid acting as control and energy reservoir,
plus a three-system variant with a separate control particle.

Units: ``E0 = y0 = hbar = 1`` unless a model says otherwise. The kinetic term is
``-(kappa/2) d^2/dy^2`` with ``kappa = hbar^2 / (M E0 y0^2)`` and hard walls
one grid step outside each end of the grid.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .channels import CPM, compose, cpm_difference, induced_cpm
from .gibbs import ThermalContext, j_cpm
from .operators import Operator, TensorSpace, hermitian_function, lowrank_trace_norm
from .reversal import ominus, transpose_reversal

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y_REAL = np.array([[0.0, 1.0], [-1.0, 0.0]])  # i * sigma_y, kept real
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]])  # |1><1| - |0><0|
KINETIC_SCHEMES = ("fd3", "fd5", "sine")
LEAKAGE_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    y_min: float = -20.0
    y_max: float = 20.0
    n_points: int = 512

    def __post_init__(self) -> None:
        if self.n_points < 64:
            raise ValueError("need at least 64 grid points")
        if not self.y_max > self.y_min:
            raise ValueError("empty grid interval")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n_points)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.n_points - 1)

    @property
    def space(self) -> TensorSpace:
        return TensorSpace.single("X", self.n_points)

    def doubled(self) -> GridSpec:
        """Same interval at (about) half the spacing."""
        return replace(self, n_points=2 * self.n_points)


def kinetic_matrix(grid: GridSpec, coefficient: float, scheme: str = "sine") -> np.ndarray:
    """``-coefficient * d^2/dy^2`` with Dirichlet walls at ``y_min - dy`` and ``y_max + dy``."""
    n, dy = grid.n_points, grid.dy
    if scheme == "fd3":
        lap = (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / dy**2
    elif scheme == "fd5":
        lap = (
            np.diag(-30.0 * np.ones(n))
            + np.diag(16.0 * np.ones(n - 1), 1)
            + np.diag(16.0 * np.ones(n - 1), -1)
            - np.diag(np.ones(n - 2), 2)
            - np.diag(np.ones(n - 2), -2)
        )
        # the ghost point two steps out mirrors oddly through the wall
        lap[0, 0] += 1.0
        lap[-1, -1] += 1.0
        lap /= 12 * dy**2
    elif scheme == "sine":
        j = np.arange(1, n + 1)
        s = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, j) / (n + 1))
        k = np.pi * j / ((n + 1) * dy)
        lap = -(s * k**2) @ s
    else:
        raise ValueError(f"kinetic scheme must be one of {KINETIC_SCHEMES}")
    return -coefficient * lap


@dataclass(frozen=True)
class SpinFieldModel:
    """``H = K + (E0/2) sigma . n(y)`` with the piecewise field profile.

    ``n = (0,0,1)`` below ``-y0``; in ``[-y0, y0]`` it rotates in the xz-plane with
    magnitude ``3/4 - y/(4 y0)``; above ``y0`` it is ``(1/2, 0, 0)``.
    """

    e0: float = 1.0
    kappa: float = 0.1
    y0: float = 1.0
    field_scale: float = 1.0

    @property
    def kinetic_coefficient(self) -> float:
        return self.kappa * self.e0 * self.y0**2 / 2

    def field(self, y: np.ndarray | float) -> np.ndarray:
        """Shape ``(3, len(y))``; the y-component is always zero."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        u = y / self.y0
        amp = 0.75 - u / 4
        ang = np.pi * (u + 1) / 4
        nx = np.where(u < -1, 0.0, np.where(u > 1, 0.5, amp * np.sin(ang)))
        nz = np.where(u < -1, 1.0, np.where(u > 1, 0.0, amp * np.cos(ang)))
        return self.field_scale * np.array([nx, np.zeros_like(nx), nz])

    def spin_hamiltonian(self, n_vec: np.ndarray) -> np.ndarray:
        return self.e0 / 2 * (n_vec[0] * SIGMA_X + n_vec[2] * SIGMA_Z)


def build_hamiltonian(model: SpinFieldModel, grid: GridSpec, kinetic: str = "sine") -> Operator:
    """Real symmetric ``H`` on spin (x) grid, ordered ``("S", "X")``."""
    n = grid.n_points
    k = kinetic_matrix(grid, model.kinetic_coefficient, kinetic)
    f = model.field(grid.points)
    h = np.kron(np.eye(2), k) + model.e0 / 2 * (np.kron(SIGMA_X, np.diag(f[0])) + np.kron(SIGMA_Z, np.diag(f[2])))
    return Operator(TensorSpace.of(("S", 2), ("X", n)), h)


def gaussian_leakage(grid: GridSpec, center: float, sigma: float) -> float:
    """Continuum weight of ``|psi|^2`` outside the grid interval."""
    r2 = sigma * math.sqrt(2)
    return 0.5 * math.erfc((center - grid.y_min) / r2) + 0.5 * math.erfc((grid.y_max - center) / r2)


def coherent_state(grid: GridSpec, alpha: complex, sigma: float, check: bool = True) -> np.ndarray:
    """Unit vector sampling ``exp[-(y/sigma - 2 alpha)^2 / 4]``.

    Mean position ``2 sigma Re(alpha)``, mean momentum ``Im(alpha) / sigma``.
    """
    if check:
        if sigma < 3 * grid.dy:
            raise ValueError("wave packet narrower than three grid steps")
        leak = gaussian_leakage(grid, 2 * sigma * alpha.real, sigma)
        if leak > LEAKAGE_TOL:
            raise ValueError(f"coherent state leaks {leak:.2e} past the grid edges")
    psi = np.exp(-0.25 * (grid.points / sigma - 2 * alpha) ** 2)
    return psi / np.linalg.norm(psi)


def evolve(h: Operator, t: float) -> Operator:
    """``exp(-i t H)`` (hbar = 1)."""
    return hermitian_function(h, lambda w: np.exp(-1j * t * w))


class SpectralPropagator:
    """Caches one eigendecomposition for repeated time evolution and J-maps."""

    def __init__(self, h: np.ndarray) -> None:
        self.w, self.v = np.linalg.eigh(h)

    def _apply(self, psi: np.ndarray, weights: np.ndarray) -> np.ndarray:
        c = self.v.conj().T @ psi
        return self.v @ (weights * c if c.ndim == 1 else weights[:, None] * c)

    def propagate(self, psi: np.ndarray, t: float) -> np.ndarray:
        return self._apply(psi, np.exp(-1j * t * self.w))

    def unitary(self, t: float) -> np.ndarray:
        return (self.v * np.exp(-1j * t * self.w)) @ self.v.conj().T

    def half_weight(self, psi: np.ndarray, beta: float) -> np.ndarray:
        """``exp(-beta H / 2) psi``."""
        return self._apply(psi, np.exp(-beta * self.w / 2))


def _spin_half_weights(h_spin: np.ndarray, beta: float) -> np.ndarray:
    w, v = np.linalg.eigh(h_spin)
    return (v * np.exp(-beta * w / 2)) @ v.conj().T


def _partition(h: np.ndarray, beta: float) -> float:
    return float(np.sum(np.exp(-beta * np.linalg.eigvalsh(h))))


# The joint control/reservoir experiment


@dataclass(frozen=True)
class H3Params:
    kappa: float = 0.1
    beta_e0: float = 1.0
    sigma: float = 0.5
    t: float = 21.5
    alpha_i: complex = -4 + 2j
    alpha_f: complex = 4 + 2j
    kinetic: str = "sine"
    curve_r: tuple[float, ...] = tuple(np.linspace(-10.0, 10.0, 41))
    leakage_samples: int = 22


@dataclass
class H3Result:
    n_points: int
    kinetic: str
    p_plus: float
    p_minus: float
    z_i: float
    z_f: float
    residual: float
    relative: float
    deficit_i: float
    deficit_f: float
    wall_leakage: float
    seconds: float
    curves: dict[str, list[float]] = field(default_factory=dict)

    @property
    def bound(self) -> float:
        # all effect norms are one here
        return self.deficit_i + self.deficit_f


class H3Experiment:
    """Shared state for one grid: Hamiltonian spectrum and kinetic J-map."""

    def __init__(self, grid: GridSpec, params: H3Params, model: SpinFieldModel | None = None) -> None:
        self.grid, self.params = grid, params
        self.model = SpinFieldModel(kappa=params.kappa) if model is None else model
        self.beta = params.beta_e0 / self.model.e0
        self.h = build_hamiltonian(self.model, grid, params.kinetic)
        self.prop = SpectralPropagator(self.h.matrix)
        k = kinetic_matrix(grid, self.model.kinetic_coefficient, params.kinetic)
        self.kin = SpectralPropagator(k)
        e0 = self.model.e0
        self.h_spin_i = e0 * SIGMA_Z / 2
        self.h_spin_f = e0 * SIGMA_X / 4

    def packet(self, alpha: complex) -> np.ndarray:
        return coherent_state(self.grid, alpha, self.params.sigma)

    def _initial(self, alpha: complex) -> tuple[np.ndarray, float]:
        """Normalized ``exp(-bK/2)|alpha>`` and ``Z_K(|alpha><alpha|)``."""
        phi = self.kin.half_weight(self.packet(alpha), self.beta)
        z = float(np.vdot(phi, phi).real)
        return phi / math.sqrt(z), z

    def transition(self, h_spin: np.ndarray, alpha_start: complex, alpha_end: complex) -> tuple[float, float]:
        """``(P, Z)`` for start effect ``1 (x) |a_start>`` and end effect ``1 (x) |a_end>``."""
        phi, z_k = self._initial(alpha_start)
        end = self.packet(alpha_end)
        w, vecs = np.linalg.eigh(h_spin)
        pops = np.exp(-self.beta * w)
        z_s = float(pops.sum())
        n = self.grid.n_points
        prob = 0.0
        for p, vec in zip(pops / z_s, vecs.T):
            out = self.prop.propagate(np.kron(vec, phi), self.params.t)
            amp = out.reshape(2, n) @ end.conj()
            prob += p * float(np.vdot(amp, amp).real)
        return prob, z_s * z_k

    def deficit(self, h_spin: np.ndarray, alpha: complex) -> float:
        """``|| J_spin(1) (x) J_K(|a><a|) - J_H(1 (x) |a><a|) ||_1``."""
        a = self.packet(alpha)
        loc_k = self.kin.half_weight(a, self.beta)
        ws = _spin_half_weights(h_spin, self.beta)
        pos = np.column_stack([np.kron(ws[:, s], loc_k) for s in range(2)])
        neg = np.column_stack([self.prop.half_weight(np.kron(np.eye(2)[:, s], a), self.beta) for s in range(2)])
        return lowrank_trace_norm(pos, neg)

    def wall_leakage(self) -> float:
        """Largest weight on the two grid points next to each wall during both runs."""
        n, p = self.grid.n_points, self.params
        worst = 0.0
        times = np.linspace(0.0, p.t, p.leakage_samples)
        for h_spin, a in ((self.h_spin_i, p.alpha_i), (self.h_spin_f, np.conj(p.alpha_f))):
            phi, _ = self._initial(a)
            for s in range(2):
                psi0 = np.kron(np.eye(2)[:, s], phi)
                for t in times:
                    dens = np.abs(self.prop.propagate(psi0, t).reshape(2, n)) ** 2
                    edge = dens[:, :2].sum() + dens[:, -2:].sum()
                    worst = max(worst, float(edge))
        return worst

    def curves(self) -> dict[str, list[float]]:
        """Deficit curves over ``alpha = r + 2i`` for three choices of spin Hamiltonian."""
        out: dict[str, list[float]] = {"r": [], "deficit_i": [], "deficit_f": [], "deficit_local": []}
        for r in self.params.curve_r:
            alpha = complex(r, 2.0)
            local = self.model.spin_hamiltonian(self.model.field(r * self.model.y0)[:, 0])
            out["r"].append(float(r))
            out["deficit_i"].append(self.deficit(self.h_spin_i, alpha))
            out["deficit_f"].append(self.deficit(self.h_spin_f, alpha))
            out["deficit_local"].append(self.deficit(local, alpha))
        return out

    def run(self, with_curves: bool = True, with_leakage: bool = True) -> H3Result:
        start = time.perf_counter()
        p = self.params
        p_plus, z_i = self.transition(self.h_spin_i, p.alpha_i, p.alpha_f)
        p_minus, z_f = self.transition(self.h_spin_f, np.conj(p.alpha_f), np.conj(p.alpha_i))
        resid = abs(z_i * p_plus - z_f * p_minus)
        rel = resid / (abs(z_i * p_plus) + abs(z_f * p_minus))
        d_i = self.deficit(self.h_spin_i, p.alpha_i)
        d_f = self.deficit(self.h_spin_f, p.alpha_f)
        leak = self.wall_leakage() if with_leakage else float("nan")
        curves = self.curves() if with_curves else {}
        return H3Result(
            self.grid.n_points, p.kinetic, p_plus, p_minus, z_i, z_f, resid, rel, d_i, d_f, leak,
            time.perf_counter() - start, curves,
        )


def h3_scenario(
    grid: GridSpec | None = None, params: H3Params | None = None, with_curves: bool = True
) -> H3Result:
    return H3Experiment(GridSpec() if grid is None else grid, H3Params() if params is None else params).run(
        with_curves
    )


def same_to_digits(a: float, b: float, digits: int = 3) -> bool:
    """True when ``a`` and ``b`` agree to ``digits`` significant digits (half-unit slack)."""
    if a == b:
        return True
    scale = 10.0 ** (math.floor(math.log10(max(abs(a), abs(b)))) - digits + 1)
    return abs(a - b) <= 0.5 * scale


# Separate control particle with a qubit system and a qubit reservoir


@dataclass(frozen=True)
class ConditionalParams:
    kappa: float = 0.1
    beta: float = 1.0
    sigma: float = 0.5
    t: float = 25.0
    x_in: float = -5.0
    x_out: float = 5.0
    momentum: float = 2.0  # Im(alpha)
    region: tuple[float, float] = (-1.0, 1.0)
    coupling: float = 0.5
    s_system: float = 1.0
    s_reservoir: float = 1.5
    family_size: int = 200


@dataclass
class ConditionalResult:
    choi_residual: float
    diff_estimate: float
    d_i_lower: float
    d_f_lower: float
    bound_estimate: float
    z_i: float
    z_f: float
    effect_overlap: float
    seconds: float


def _bump(x: np.ndarray, region: tuple[float, float]) -> np.ndarray:
    lo, hi = region
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    inside = np.abs(x - mid) <= half
    return np.where(inside, np.cos(np.pi * (x - mid) / (2 * half)) ** 2, 0.0)


def bloch_family(m: int) -> list[np.ndarray]:
    """Identity plus ``m`` pure qubit states spread over the Bloch sphere (Fibonacci lattice)."""
    fam = [np.eye(2, dtype=complex)]
    golden = math.pi * (3 - math.sqrt(5))
    for k in range(m):
        z = 1 - 2 * (k + 0.5) / m
        theta, phi = math.acos(z), golden * k
        u = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
        fam.append(np.outer(u, u.conj()))
    return fam


def _psd_columns(q: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(q)
    keep = w > 1e-14
    return v[:, keep] * np.sqrt(w[keep])


def _lopsided_norm(x: np.ndarray) -> float:
    """``sup_{0 <= Q <= 1} |Tr(Q X)|`` for Hermitian ``X``."""
    w = np.linalg.eigvalsh((x + x.conj().T) / 2)
    return float(max(w[w > 0].sum(), -w[w < 0].sum(), 0.0))


class ControlParticleExperiment:
    """Control particle ``X`` passing an interaction region where qubits ``S`` and ``E``
    exchange energy. Space order ``(S, X, E)``.

    ``H = K + s_S sigma_z/2 + s_E sigma_z/2 + lambda b(x) (XX + YY)/2`` with a
    cos^2 bump ``b`` supported on the region, so the local Hamiltonians are exact
    outside it.
    """

    def __init__(self, grid: GridSpec, params: ConditionalParams) -> None:
        self.grid, self.params = grid, params
        n = grid.n_points
        p = params
        k = kinetic_matrix(grid, p.kappa / 2, "sine")
        self.h_s = p.s_system * SIGMA_Z / 2
        self.h_e = p.s_reservoir * SIGMA_Z / 2
        exchange = (np.kron(SIGMA_X, SIGMA_X) - np.kron(SIGMA_Y_REAL, SIGMA_Y_REAL)) / 2
        b = _bump(grid.points, p.region)
        h = np.kron(np.kron(self.h_s, np.eye(n)), np.eye(2))
        h += np.kron(np.kron(np.eye(2), k), np.eye(2))
        h += np.kron(np.eye(2 * n), self.h_e)
        inter = np.zeros((2, n, 2, 2, n, 2))
        blk = (p.coupling * exchange).reshape(2, 2, 2, 2)
        for x in np.flatnonzero(b):
            inter[:, x, :, :, x, :] = b[x] * blk
        h += inter.reshape(4 * n, 4 * n)
        self.space = TensorSpace.of(("S", 2), ("X", n), ("E", 2))
        self.h = Operator(self.space, h)
        self.prop = SpectralPropagator(h)
        self.kin = SpectralPropagator(k)
        self.v = Operator(self.space, self.prop.unitary(p.t))

    def packet(self, x: float, momentum: float) -> np.ndarray:
        return coherent_state(self.grid, complex(x / (2 * self.params.sigma), momentum), self.params.sigma)

    def overlap(self, x: float) -> float:
        lo, hi = self.params.region
        pts = self.grid.points
        a = np.abs(self.packet(x, self.params.momentum)) ** 2
        return float(a[(pts >= lo) & (pts <= hi)].sum())

    def _effect(self, psi: np.ndarray) -> Operator:
        st = TensorSpace.of(("S", 2), ("X", self.grid.n_points))
        return Operator(st, np.kron(np.eye(2), np.outer(psi, psi.conj())))

    def _gibbs(self, psi: np.ndarray) -> tuple[Operator, float]:
        beta = self.params.beta
        phi = self.kin.half_weight(psi, beta)
        z_k = float(np.vdot(phi, phi).real)
        ws = _spin_half_weights(self.h_s, beta) @ _spin_half_weights(self.h_s, beta)
        z_s = float(np.trace(ws).real)
        st = TensorSpace.of(("S", 2), ("X", self.grid.n_points))
        return Operator(st, np.kron(ws / z_s, np.outer(phi, phi.conj()) / z_k)), z_s * z_k

    def maps(self) -> tuple[CPM, CPM, float, float]:
        p = self.params
        a_i = self.packet(p.x_in, p.momentum)
        a_f = self.packet(p.x_out, p.momentum)
        # reversed effects flip momentum (complex conjugation of the packet)
        g_plus, z_i = self._gibbs(a_i)
        g_minus, z_f = self._gibbs(a_f.conj())
        f_plus = induced_cpm(self.v, g_plus, self._effect(a_f))
        f_minus = induced_cpm(self.v, g_minus, self._effect(a_i.conj()))
        return f_plus, f_minus, z_i, z_f

    def deficit_lower_bound(self, x: float, family: list[np.ndarray]) -> float:
        """Largest ``d(1 (x) |a><a|, Q)`` over the family (all members have norm one)."""
        beta = self.params.beta
        a = self.packet(x, self.params.momentum)
        ws = _spin_half_weights(self.h_s, beta)
        we = _spin_half_weights(self.h_e, beta)
        ka = self.kin.half_weight(a, beta)
        best = 0.0
        for q in family:
            cols = _psd_columns(q)
            pos, neg = [], []
            for s in range(2):
                for c in cols.T:
                    pos.append(np.kron(np.kron(ws[:, s], ka), we @ c))
                    neg.append(self.prop.half_weight(np.kron(np.kron(np.eye(2)[:, s], a), c), beta))
            best = max(best, lowrank_trace_norm(np.column_stack(pos), np.column_stack(neg)))
        return best

    def run(self) -> ConditionalResult:
        start = time.perf_counter()
        p = self.params
        f_plus, f_minus, z_i, z_f = self.maps()
        e_space = TensorSpace.single("E", 2)
        ctx = ThermalContext(p.beta, Operator(e_space, self.h_e))
        t_e = transpose_reversal(e_space)
        lhs = compose(f_plus, j_cpm(ctx)).scaled(z_i)
        rhs = compose(j_cpm(ctx), ominus(f_minus, t_e)).scaled(z_f)
        choi, _ = cpm_difference(lhs, rhs)
        family = bloch_family(p.family_size)
        diff = max(_lopsided_norm(rhs.apply_matrix(q) - lhs.apply_matrix(q)) for q in family)
        d_i = self.deficit_lower_bound(p.x_in, family)
        d_f = self.deficit_lower_bound(p.x_out, family)
        overlap = max(self.overlap(p.x_in), self.overlap(p.x_out))
        return ConditionalResult(choi, diff, d_i, d_f, d_i + d_f, z_i, z_f, overlap, time.perf_counter() - start)


def approx_conditional_scenario(
    grid: GridSpec | None = None, params: ConditionalParams | None = None
) -> ConditionalResult:
    g = GridSpec(-12.0, 12.0, 192) if grid is None else grid
    return ControlParticleExperiment(g, ConditionalParams() if params is None else params).run()
