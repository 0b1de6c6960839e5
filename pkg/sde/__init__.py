from sde.calculus import (
    directional_derivative_sigma,
    ito_correction,
    ito_to_stratonovich_drift,
    jump_compensator,
)
from sde.coefficients import CoefficientSet, JumpMeasure, SDEProblem
from sde.examples import (
    closed_form_oracle,
    example_coefficients,
    make_builtin_problem,
    oracle_for_path,
)
from sde.lipschitz import LipschitzData, estimate_lipschitz, verify_lipschitz
from sde.simulator import JumpEvent, PathRecord, euler_step, sample_jump_times, simulate
