"""Fractional Laplacian on weighted graphs and signed solutions of fractional
Schrodinger equations."""
from .calculus import (
    PotentialH,
    VectorField,
    divergence_s,
    embedding_check,
    frac_dot,
    frac_gradient,
    hs_norm,
    ibp_residual,
    lambda1,
    norm_report,
    sobolev_norm_s2,
)
from .errors import FracGraphError
from .graph import (
    WeightedGraph,
    build_graph,
    generate_standard,
    load_graph,
    save_graph,
    validate_graph,
)
from .kernel import (
    FracKernel,
    QuadratureConfig,
    cxs_bounds,
    frac_laplacian_apply,
    kernel_diagnostics,
    ws_quadrature,
    ws_spectral,
)
from .nonlinearity import Nonlinearity, builtin_nonlinearity, check_hypotheses
from .schrodinger import (
    Solution,
    SolverConfig,
    energy,
    energy_gradient,
    ground_state_solve,
    mountain_pass_solve,
    nehari_project,
    sphere_barrier,
    verify_solution,
)
from .spectral import Spectrum, eigendecompose, heat_kernel, mass_check

__version__ = "0.1.0"

__all__ = [
    "FracGraphError",
    "WeightedGraph",
    "build_graph",
    "generate_standard",
    "load_graph",
    "save_graph",
    "validate_graph",
    "Spectrum",
    "eigendecompose",
    "heat_kernel",
    "mass_check",
    "FracKernel",
    "QuadratureConfig",
    "ws_spectral",
    "ws_quadrature",
    "frac_laplacian_apply",
    "cxs_bounds",
    "kernel_diagnostics",
    "VectorField",
    "PotentialH",
    "frac_gradient",
    "frac_dot",
    "divergence_s",
    "ibp_residual",
    "sobolev_norm_s2",
    "hs_norm",
    "lambda1",
    "embedding_check",
    "norm_report",
    "Nonlinearity",
    "builtin_nonlinearity",
    "check_hypotheses",
    "SolverConfig",
    "Solution",
    "energy",
    "energy_gradient",
    "nehari_project",
    "ground_state_solve",
    "mountain_pass_solve",
    "sphere_barrier",
    "verify_solution",
]
