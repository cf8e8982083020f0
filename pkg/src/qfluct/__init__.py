"""Quantum fluctuation relations for finite-dimensional models.

Operators and channels live in :mod:`qfluct.operators` and :mod:`qfluct.channels`,
time reversals in :mod:`qfluct.reversal`, thermal maps in :mod:`qfluct.gibbs`,
energy ladders in :mod:`qfluct.ladder`, the relations themselves in
:mod:`qfluct.verify`, concrete models in :mod:`qfluct.models` and
:mod:`qfluct.particle`, and the command line in :mod:`qfluct.cli`.
"""

from .channels import CPM, choi_matrix, conjugate_cpm, induced_cpm, petz_recovery
from .gibbs import (
    ThermalContext,
    factorization_deficit,
    generalized_j_deficit,
    gibbs_map,
    j_map,
    partition_map,
)
from .ladder import (
    LadderSpec,
    LevelSystem,
    censored_v_of_u,
    decoupling_check,
    diagonal_probs,
    shift_operator,
    translation_invariance_check,
    work_distribution,
)
from .operators import Operator, TensorSpace, hermitian_function, operator_norm, partial_trace, tensor_product
from .particle import approx_conditional_scenario, build_hamiltonian, coherent_state, evolve, h3_scenario
from .report import ScenarioReport, emit_report
from .reversal import TimeReversal, apply_reversal, make_reversal, ominus, product_reversal, validate_reversal
from .scenarios import run_scenario
from .verify import (
    classical_crooks_check,
    conditional_jarzynski_check,
    crooks_residual,
    detailed_balance_check,
    diagonal_crooks_check,
    global_invariance_check,
    jarzynski_check,
    transition_probability,
    violation_minimizer,
    work_bound_check,
)

__version__ = "0.1.0"
