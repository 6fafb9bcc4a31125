"""Vaccinated SIQR epidemic model: simulation, stability, controllability and LQR."""

from ._jit import JIT_ENABLED
from .control import (
    DEFAULT_WEIGHTS,
    LinearSystem,
    LqrWeights,
    RiccatiMode,
    RiccatiSolution,
    build_system,
    closed_loop,
    controllability_matrix,
    dre_integrate,
    evaluate_cost,
    is_controllable,
    lqr_gain,
    simulate_controlled,
    vaccination_feedback,
)
from .model import (
    REFERENCE_PARAMS,
    ModelParams,
    StateVec,
    disease_free_equilibrium,
    endemic_equilibrium,
    jacobian,
    r0,
    r0_gradient,
    rhs,
    simulate,
    validate_params,
)
from .ode import OdeProblem, Trajectory, integrate, rk4_step
from .stability import classify

__version__ = "0.1.0"
