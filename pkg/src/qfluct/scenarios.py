"""Registry of runnable scenarios.

Each runner receives its resolved parameters and a seeded generator and fills a
:class:`Outcome`; :func:`run_scenario` times it and wraps it into a report.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .channels import cpm_difference, petz_recovery, restrict_input
from .ladder import (
    LadderSpec,
    decoupling_check,
    translation_invariance_check,
    work_distribution,
)
from .models import (
    conditional_ladder,
    intermediate_model,
    non_gibbs_ladder,
    broken_symmetry_ladder,
    precorrelated_model,
    resonant_pair,
    symmetric_ladder,
    two_qubit_model,
    violation_model,
)
from .operators import Operator, TensorSpace, random_density, random_effect
from .particle import ConditionalParams, ControlParticleExperiment, GridSpec, H3Experiment, H3Params, same_to_digits
from .report import Check, ScenarioReport
from .verify import (
    classical_crooks_check,
    classical_jarzynski,
    conditional_jarzynski_check,
    crooks_residual,
    detailed_balance_check,
    jarzynski_check,
    jarzynski_unital_rhs,
    violation_brute_force,
    violation_gap_closed_form,
    violation_minimizer,
    work_bound_check,
    z_weighted_transition_check,
)

DEFAULT_SEED = 20240


@dataclass
class Outcome:
    values: dict[str, float] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    curves: dict[str, list[float]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def at_most(self, name: str, value: float, tol: float) -> None:
        self.checks.append(Check(name, float(value), float(tol), "<="))

    def at_least(self, name: str, value: float, tol: float) -> None:
        self.checks.append(Check(name, float(value), float(tol), ">="))


Runner = Callable[[dict[str, Any], np.random.Generator, Outcome], None]


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    defaults: dict[str, Any]
    runner: Runner


REGISTRY: dict[str, Scenario] = {}


def scenario(name: str, summary: str, **defaults: Any) -> Callable[[Runner], Runner]:
    def deco(fn: Runner) -> Runner:
        REGISTRY[name] = Scenario(name, summary, defaults, fn)
        return fn

    return deco


# parameter coercion


def parse_levels(text: str | tuple | list) -> tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(x) for x in text)
    return tuple(int(x) for x in str(text).replace(" ", "").split(",") if x)


def coerce(default: Any, raw: Any) -> Any:
    """Convert ``raw`` to the type of ``default``; strings come from the command line."""
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        s = str(raw).strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, int):
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError(f"not an integer: {raw!r}")
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, complex):
        return complex(str(raw).replace(" ", "")) if isinstance(raw, str) else complex(raw)
    if isinstance(default, tuple):
        return parse_levels(raw)
    return str(raw)


def resolve_params(name: str, overrides: dict[str, Any]) -> dict[str, Any]:
    sc = REGISTRY[name]
    unknown = sorted(set(overrides) - set(sc.defaults))
    if unknown:
        raise KeyError(f"unknown parameter(s) for {name}: {', '.join(unknown)}")
    out = dict(sc.defaults)
    for k, v in overrides.items():
        out[k] = coerce(sc.defaults[k], v)
    return out


def _echo(v: Any) -> Any:
    if isinstance(v, complex):
        return str(v).strip("()")
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return v


def run_scenario(name: str, overrides: dict[str, Any] | None = None, seed: int = DEFAULT_SEED) -> ScenarioReport:
    if name not in REGISTRY:
        raise KeyError(f"unknown scenario {name!r}")
    params = resolve_params(name, overrides or {})
    rng = np.random.default_rng(seed)
    out = Outcome()
    start = time.perf_counter()
    REGISTRY[name].runner(params, rng, out)
    echo = {k: _echo(v) for k, v in params.items()}
    echo["seed"] = seed
    return ScenarioReport(name, echo, out.values, out.checks, time.perf_counter() - start, out.curves, out.warnings)


# shared ladder parameters

LADDER = dict(levels_i=(0, 1, 3), levels_f=(1, 2, 2), j_min=-20, j_max=20, s=1.0, beta=0.7)


def _spec(p: dict[str, Any]) -> LadderSpec:
    return LadderSpec(p["s"], p["j_min"], p["j_max"])


def _interior_state(spec: LadderSpec, window: tuple[int, ...], rng: np.random.Generator, width: int = 5) -> np.ndarray:
    """Random density matrix on ``width`` levels around the middle of ``window``."""
    mid = window[len(window) // 2]
    idx = [mid + k - width // 2 for k in range(width)]
    if idx[0] < window[0] or idx[-1] > window[-1]:
        raise ValueError("ladder too short for the interior probe state")
    rho = np.zeros((spec.size,) * 2, dtype=complex)
    rho[np.ix_(idx, idx)] = random_density(TensorSpace.single("E", width), rng).matrix
    return rho


# scenarios


@scenario("two_qubit", "Conditional relation for two resonant qubits", theta=0.7, beta=1.0, s=1.0, tol=1e-12)
def _two_qubit(p, rng, out):
    m = two_qubit_model(p["theta"], p["beta"], p["s"])
    out.values["z_qi"] = m.z_qi
    out.values["z_qf"] = m.z_qf
    out.values["decoupling_f_plus"] = decoupling_check(m.f_plus, m.h_reservoir)
    out.at_most("crooks_residual", crooks_residual(m.crooks()), p["tol"])


@scenario(
    "ladder_crooks",
    "Crooks relation on the interior of a ladder, plus broken probes",
    **LADDER, n_unitaries=10, tol=1e-10, broken_min=1e-3,
)
def _ladder_crooks(p, rng, out):
    spec, li, lf, b = _spec(p), p["levels_i"], p["levels_f"], p["beta"]
    worst = max(crooks_residual(symmetric_ladder(li, lf, spec, b, rng).crooks()) for _ in range(p["n_unitaries"]))
    out.at_most("crooks_translation_invariant", worst, p["tol"])
    varying = symmetric_ladder(li, lf, spec, b, rng, mode="varying")
    out.at_most("crooks_varying_blocks", crooks_residual(varying.crooks()), p["tol"])
    out.at_most("intermediate", crooks_residual(intermediate_model(li, lf, spec, b, rng).intermediate()), p["tol"])
    out.at_least("broken_symmetry", crooks_residual(broken_symmetry_ladder(li, lf, spec, b, rng).crooks()), p["broken_min"])
    out.at_least("wrong_beta", crooks_residual(varying.crooks(beta=1.3 * b)), p["broken_min"])
    out.at_least("non_gibbs_initial", crooks_residual(non_gibbs_ladder(li, lf, spec, b, rng).crooks()), p["broken_min"])


@scenario(
    "ladder_classical",
    "Two-point work statistics on a translation-invariant ladder",
    **LADDER, offsets=(-5, 0, 5), tol=1e-10, sigma_tol=1e-12,
)
def _ladder_classical(p, rng, out):
    spec = _spec(p)
    m = symmetric_ladder(p["levels_i"], p["levels_f"], spec, p["beta"], rng)
    d = spec.size
    dists, crooks, jar = [], 0.0, 0.0
    for j in parse_levels(p["offsets"]):
        sig = np.zeros((d, d))
        sig[spec.index(j), spec.index(j)] = 1.0
        dist = work_distribution(m.f_plus, sig, m.h_reservoir)
        dists.append(dist)
        crooks = max(crooks, classical_crooks_check(m.f_plus, m.f_minus, sig, m.h_reservoir, m.z_i, m.z_f, m.beta))
        jar = max(jar, abs(classical_jarzynski(dist, m.beta) - m.z_f / m.z_i))
    keys = set().union(*dists)
    spread = max(abs(a.get(w, 0.0) - dists[0].get(w, 0.0)) for a in dists for w in keys)
    out.values["mean_work"] = sum(w * q for w, q in dists[0].items())
    out.at_most("classical_crooks", crooks, p["tol"])
    out.at_most("work_distribution_spread", spread, p["sigma_tol"])
    out.at_most("classical_jarzynski", jar, p["tol"])
    out.at_most("translation_invariance", translation_invariance_check(m.f_plus, spec, m.window[:8]), p["sigma_tol"])


@scenario("jarzynski_family", "Generalized Jarzynski equalities over r and z", **LADDER, tol=1e-10)
def _jarzynski(p, rng, out):
    spec = _spec(p)
    unital = symmetric_ladder(p["levels_i"], p["levels_f"], spec, p["beta"], rng)
    general = symmetric_ladder(p["levels_i"], p["levels_f"], spec, p["beta"], rng, mode="varying")
    grid = [(r, z) for r in (-1.0, 0.0, 1.0) for z in (0.0, 0.5, 0.3j)]
    for label, m in (("unital", unital), ("non_unital", general)):
        rho = _interior_state(spec, m.window, rng)
        worst = max(
            jarzynski_check(m.f_plus, m.r_plus, m.h_reservoir, m.beta, m.z_i, m.z_f, rho, r, z).residual
            for r, z in grid
        )
        out.at_most(f"general_{label}", worst, p["tol"])
        spec_gap = max(
            abs(
                jarzynski_check(m.f_plus, m.r_plus, m.h_reservoir, m.beta, m.z_i, m.z_f, rho, r, z).lhs
                - jarzynski_unital_rhs(m.h_reservoir, m.z_i, m.z_f, rho, r)
            )
            for r, z in grid
        )
        if label == "unital":
            out.at_most("unital_specialization", spec_gap, p["tol"])
        else:
            out.values["unital_formula_on_non_unital"] = spec_gap
    d = spec.size
    sig = np.zeros((d, d))
    sig[spec.index(0), spec.index(0)] = 1.0
    dist = work_distribution(unital.f_plus, sig, unital.h_reservoir)
    out.at_most("classical_jarzynski", abs(classical_jarzynski(dist, unital.beta) - unital.z_f / unital.z_i), p["tol"])


@scenario("work_bound", "Average work bound with the R+(1) correction", **LADDER, n_states=5, k=3, tol=1e-10)
def _work_bound(p, rng, out):
    spec = _spec(p)
    worst = math.inf
    for mode in ("constant", "varying"):
        m = symmetric_ladder(p["levels_i"], p["levels_f"], spec, p["beta"], rng, mode=mode)
        for _ in range(p["n_states"]):
            rho = _interior_state(spec, m.window, rng)
            wb = work_bound_check(m.f_plus, m.r_plus, m.h_reservoir, rho, m.beta, m.z_i, m.z_f)
            worst = min(worst, wb.slack)
    vm = violation_model(p["k"])
    sig = np.zeros((vm.h_reservoir.space.dim,) * 2)
    sig[0, 0] = 1.0
    wb = work_bound_check(vm.f_plus, vm.r_plus, vm.h_reservoir, sig, vm.beta, vm.z_i, vm.z_f)
    out.values["violation_standard_slack"] = wb.standard_slack
    out.values["violation_corrected_slack"] = wb.slack
    out.at_least("min_slack", min(worst, wb.slack), -p["tol"])


@scenario(
    "violation",
    "Optimal violation of the standard work bound",
    k_max=8, s_beta=1.0, brute_force_max_n=4, tol=1e-12, model_tol=1e-10,
)
def _violation(p, rng, out):
    sb = p["s_beta"]
    closed = 0.0
    for k in range(1, p["k_max"] + 1):
        levels = range(k + 1)
        g = violation_minimizer(levels, levels, sb, 1.0).gap
        out.values[f"gap_K{k}"] = g
        closed = max(closed, abs(g - violation_gap_closed_form(k, sb)))
    out.at_most("closed_form", closed, p["tol"])
    brute = 0.0
    for n in range(2, p["brute_force_max_n"] + 1):
        levels = range(n)
        a = violation_minimizer(levels, levels, sb, 1.0)
        b = violation_brute_force(levels, levels, sb, 1.0)
        brute = max(brute, abs(a.min_energy_cost - b.min_energy_cost))
    out.at_most("brute_force", brute, p["tol"])
    k = min(3, p["k_max"])
    vm = violation_model(k, s=sb)
    sig = np.zeros((vm.h_reservoir.space.dim,) * 2)
    sig[0, 0] = 1.0
    wb = work_bound_check(vm.f_plus, vm.r_plus, vm.h_reservoir, sig, vm.beta, vm.z_i, vm.z_f)
    target = violation_minimizer(range(k + 1), range(k + 1), sb, 1.0).min_energy_cost
    out.at_most("model_attains_minimum", abs(wb.energy_drop - target), p["model_tol"])


@scenario(
    "conditional_ladder",
    "Conditional relation with random effects on the system and control",
    levels_i=(0, 1), levels_f=(2, 0), j_min=-8, j_max=8, s=1.0, beta=0.6, tol=1e-10,
)
def _conditional_ladder(p, rng, out):
    spec = _spec(p)
    m = conditional_ladder(p["levels_i"], p["levels_f"], spec, p["beta"], rng)
    out.at_most("crooks_residual", crooks_residual(m.crooks()), p["tol"])
    qi, qf = random_effect(spec.space, rng), random_effect(spec.space, rng)
    zw = z_weighted_transition_check(m.f_plus, m.f_minus, m.ctx, m.reversal, m.z_qi, m.z_qf, qi, qf)
    out.at_most("weighted_transition", zw, p["tol"])
    d = spec.size
    sig = [np.diag(np.eye(d)[spec.index(j)]) for j in (-2, 0, 2)]
    cj = conditional_jarzynski_check(m.f_plus, m.f_minus, m.h_reservoir, m.beta, m.z_qi, m.z_qf, sig)
    out.values["success_forward"] = cj.f_plus
    out.values["success_reverse"] = cj.f_minus
    out.at_most("conditional_jarzynski", cj.residual, p["tol"])


@scenario("precorrelated_se", "Relation for an interacting system-reservoir pair", beta=0.8, s=1.0, tol=1e-10)
def _precorrelated(p, rng, out):
    m = precorrelated_model(p["beta"], rng, s=p["s"])
    out.at_most("crooks_residual", crooks_residual(m.crooks()), p["tol"])


@scenario(
    "particle_h3",
    "Spin-half particle as control and reservoir",
    kappa=0.1, beta_e0=1.0, sigma=0.5, t=21.5, alpha_i=complex(-4, 2), alpha_f=complex(4, 2),
    y_min=-20.0, y_max=20.0, n_points=512, kinetic="sine", curves=True, convergence=True,
    residual_max=1e-6, bound_ref=1.2e-5, p_plus_ref=0.36, p_minus_ref=0.39, p_tol=0.01, leak_tol=1e-8,
)
def _particle(p, rng, out):
    params = H3Params(p["kappa"], p["beta_e0"], p["sigma"], p["t"], p["alpha_i"], p["alpha_f"], p["kinetic"])
    grid = GridSpec(p["y_min"], p["y_max"], p["n_points"])
    r = H3Experiment(grid, params).run(with_curves=p["curves"])
    out.values.update(
        p_plus=r.p_plus, p_minus=r.p_minus, z_i=r.z_i, z_f=r.z_f, residual=r.residual,
        relative_residual=r.relative, deficit_i=r.deficit_i, deficit_f=r.deficit_f, bound=r.bound,
    )
    out.curves = r.curves
    out.at_most("residual", r.residual, p["residual_max"])
    out.at_most("residual_minus_bound", r.residual - r.bound, 0.0)
    out.at_most("bound_log10_ratio", abs(math.log10(r.bound / p["bound_ref"])), 1.0)
    out.at_most("p_plus_error", abs(r.p_plus - p["p_plus_ref"]), p["p_tol"])
    out.at_most("p_minus_error", abs(r.p_minus - p["p_minus_ref"]), p["p_tol"])
    out.at_most("wall_leakage", r.wall_leakage, p["leak_tol"])
    if p["convergence"]:
        fine = H3Experiment(grid.doubled(), params).run(with_curves=False, with_leakage=False)
        out.values["p_plus_doubled"] = fine.p_plus
        out.values["p_minus_doubled"] = fine.p_minus
        stable = same_to_digits(r.p_plus, fine.p_plus) and same_to_digits(r.p_minus, fine.p_minus)
        out.at_most("grid_doubling_unstable", 0.0 if stable else 1.0, 0.0)


@scenario(
    "approx_conditional",
    "Control particle with separate qubit system and reservoir",
    kappa=0.1, beta=1.0, sigma=0.5, t=25.0, x_in=-5.0, x_out=5.0, momentum=2.0, region_lo=-1.0,
    region_hi=1.0, coupling=0.5, s_system=1.0, s_reservoir=1.5, family_size=200,
    y_min=-12.0, y_max=12.0, n_points=192, overlap_warn=1e-6,
)
def _approx_conditional(p, rng, out):
    params = ConditionalParams(
        p["kappa"], p["beta"], p["sigma"], p["t"], p["x_in"], p["x_out"], p["momentum"],
        (p["region_lo"], p["region_hi"]), p["coupling"], p["s_system"], p["s_reservoir"], p["family_size"],
    )
    r = ControlParticleExperiment(GridSpec(p["y_min"], p["y_max"], p["n_points"]), params).run()
    out.values.update(
        choi_residual=r.choi_residual, diff_estimate=r.diff_estimate, d_i_lower=r.d_i_lower,
        d_f_lower=r.d_f_lower, bound_estimate=r.bound_estimate, z_i=r.z_i, z_f=r.z_f, effect_overlap=r.effect_overlap,
    )
    out.at_most("diff_minus_bound", r.diff_estimate - r.bound_estimate, 0.0)
    if r.effect_overlap > p["overlap_warn"]:
        out.warnings.append(f"effects overlap the interaction region (weight {r.effect_overlap:.2e})")


@scenario(
    "detailed_balance",
    "Detailed balance of a thermal bath acting through a symmetric unitary",
    s=1.0, beta=1.0, tol=1e-12, broken_min=1e-3,
)
def _detailed_balance(p, rng, out):
    for label, levels in (("qubits", (0, 1)), ("qutrits", (0, 1, 2))):
        h1, h2, v = resonant_pair(levels, p["s"], rng)
        out.at_most(f"symmetric_{label}", detailed_balance_check(h1, h2, v, p["beta"]), p["tol"])
    h1, h2, v = resonant_pair((0, 1, 2), p["s"], rng, symmetric=False)
    out.at_least("non_symmetric_qutrits", detailed_balance_check(h1, h2, v, p["beta"]), p["broken_min"])


@scenario(
    "petz",
    "Reverse process against the Petz recovery of the forward map",
    levels_i=(0, 2), levels_f=(1, 1), j_min=-20, j_max=20, s=1.0, beta=0.7, tol=1e-10,
)
def _petz(p, rng, out):
    spec = _spec(p)
    m = intermediate_model(p["levels_i"], p["levels_f"], spec, p["beta"], rng)
    ref = Operator(spec.space, np.diag(np.exp(-m.beta * spec.energies)))
    rec = petz_recovery(m.r_plus, ref)
    out.values["full_space_distance"] = cpm_difference(rec, m.f_plus)[0]
    win = m.window
    out.at_most("petz_window", cpm_difference(restrict_input(rec, win), restrict_input(m.f_plus, win))[0], p["tol"])
