"""Nonlocal p-Laplace toolbox: generalized-kernel energies, solver, tails,
and measured regularity inequalities on truncated lattice domains."""

from .errors import (
    CapacityError,
    ConfigError,
    DivergenceError,
    ResolutionError,
)
from .kernels import (
    KernelSpec,
    LogBorderline,
    LogPerturbedPower,
    Min,
    Power,
    PureLog,
    Sum,
    Tabulated,
    capital_phi,
    check_dini,
    check_scaling_bounds,
    exterior_kernel_mass,
    get_phi_table,
    phi_eval,
    sphere_area,
)
from .grid import (
    Ball,
    Box,
    DiscreteDomain,
    GridFunction,
    build_domain,
    impose_exterior_data,
    interaction_pairs,
    sample_point_function,
)
from .energy import (
    EnergyParams,
    NonlocalEnergy,
    energy_gradient,
    gagliardo_seminorm_p,
    local_p_dirichlet_energy,
    nonlocal_energy_F,
)
from .solver import (
    RangeCheck,
    SolveOptions,
    SolveResult,
    range_bounds_check,
    solve_dirichlet,
    weak_residual,
)
from .tail import (
    FarFieldModel,
    TailQuery,
    TailResult,
    analytic_tail_of_one,
    compute_tail,
    nonlocal_tail,
    tail_scale,
)
from .verify import (
    DEFAULT_CEILING,
    InequalityReport,
    caccioppoli_report,
    embedding_report,
    harnack_report,
    holder_exponent_fit,
    local_boundedness_report,
    log_estimate_report,
    log_oscillation_composite_report,
    p_star,
    sobolev_poincare_report,
    weak_harnack_report,
)
from .stability import (
    BBMPoint,
    LocalLimitRow,
    bbm_energy_curve,
    bbm_limit_constant,
    bbm_reference_limit,
    extrapolate_limit,
    local_limit_solution_study,
)
from .expressions import ExpressionError, compile_expression
from .config import LoadedConfig, load_config
from .reporting import emit_report, write_solution_csv

__version__ = "0.1.0"

__all__ = [
    "BBMPoint",
    "Ball",
    "Box",
    "CapacityError",
    "ConfigError",
    "DEFAULT_CEILING",
    "DiscreteDomain",
    "DivergenceError",
    "EnergyParams",
    "ExpressionError",
    "FarFieldModel",
    "GridFunction",
    "InequalityReport",
    "KernelSpec",
    "LoadedConfig",
    "LocalLimitRow",
    "LogBorderline",
    "LogPerturbedPower",
    "Min",
    "NonlocalEnergy",
    "Power",
    "PureLog",
    "RangeCheck",
    "ResolutionError",
    "SolveOptions",
    "SolveResult",
    "Sum",
    "Tabulated",
    "TailQuery",
    "TailResult",
    "analytic_tail_of_one",
    "bbm_energy_curve",
    "bbm_limit_constant",
    "bbm_reference_limit",
    "build_domain",
    "caccioppoli_report",
    "capital_phi",
    "check_dini",
    "check_scaling_bounds",
    "compile_expression",
    "compute_tail",
    "embedding_report",
    "emit_report",
    "energy_gradient",
    "exterior_kernel_mass",
    "extrapolate_limit",
    "gagliardo_seminorm_p",
    "get_phi_table",
    "harnack_report",
    "holder_exponent_fit",
    "impose_exterior_data",
    "interaction_pairs",
    "load_config",
    "local_boundedness_report",
    "local_limit_solution_study",
    "local_p_dirichlet_energy",
    "log_estimate_report",
    "log_oscillation_composite_report",
    "nonlocal_energy_F",
    "nonlocal_tail",
    "p_star",
    "phi_eval",
    "range_bounds_check",
    "sample_point_function",
    "sobolev_poincare_report",
    "solve_dirichlet",
    "sphere_area",
    "tail_scale",
    "weak_harnack_report",
    "weak_residual",
    "write_solution_csv",
]
