"""
Core Package Initialization
---------------------------
Numerical library for downlink coverage and capacity of ultra-dense
networks: path-loss models, deployments, analytic limits, Monte Carlo
simulation and the design problems built on the ASE.
"""

__version__ = "0.3.0"

from core.analytic import coverage_limit, dense_coverage_approx, laplace_interference, mean_interference
from core.capacity import (
    CoverageCurve,
    DesignSolution,
    EngineSpec,
    LimitAseProfile,
    ase_finite,
    ase_from_curve,
    ase_limit,
    linear_scaling_ase,
    solve_bs_deployment,
    solve_ue_scheduling,
)
from core.channel import LinkState, PathLossModel, eval_pathloss, get_model, los_probability, three_gpp_case
from core.deployment import NetworkParams, active_bs_density, sample_hppp
from core.errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    ModelError,
    NoSolutionError,
    NumericalError,
    UdnError,
)
from core.quadrature import QuadratureSpec
from core.simulator import estimate_active_density, estimate_coverage, estimate_coverage_curve, simulate_trials

__all__ = [
    "__version__",
    # Channel and deployment
    "LinkState", "PathLossModel", "eval_pathloss", "los_probability", "three_gpp_case", "get_model",
    "NetworkParams", "active_bs_density", "sample_hppp",
    # Analytic
    "QuadratureSpec", "coverage_limit", "dense_coverage_approx", "laplace_interference", "mean_interference",
    # Simulation
    "simulate_trials", "estimate_coverage", "estimate_coverage_curve", "estimate_active_density",
    # Capacity
    "CoverageCurve", "DesignSolution", "EngineSpec", "LimitAseProfile", "ase_from_curve", "ase_limit",
    "ase_finite", "solve_bs_deployment", "solve_ue_scheduling", "linear_scaling_ase",
    # Errors
    "UdnError", "DomainError", "ModelError", "DivergenceError", "NumericalError", "NoSolutionError",
    "ConfigError",
]
