"""Native Banach spaces of spline-admissible operators ``D**m`` on the real line.

Grid functions and weighted norms live in :mod:`nativespace.gridfn`, operators
in :mod:`nativespace.operator`, biorthogonal systems in
:mod:`nativespace.biortho`, norms and pseudo-inverses in
:mod:`nativespace.native` and the interpolation solvers in
:mod:`nativespace.solve`.
"""
from .biortho import (
    BiorthoSystem,
    change_of_basis,
    delta_system,
    gaussian_system,
    hermite_gaussian_system,
    make_biortho_system,
    nullspace_norm,
    proj_np,
    proj_nphi,
    projector_bound,
)
from .gridfn import (
    DeltaAtom,
    GaussianProduct,
    GreenAtom,
    Grid,
    GridFunction,
    Polynomial,
    Sum,
    WeightSpec,
    fd_derivative,
    inner,
    weighted_l1_norm,
    weighted_sup_norm,
)
from .kernels import BACKEND
from .native import (
    NativeSpaceSpec,
    PrimaryNorm,
    decompose,
    identity_suite,
    make_native_space,
    native_norm,
    predual_norm,
    stabilized_inverse,
    stabilized_inverse_adjoint,
)
from .operator import (
    OperatorDescriptor,
    admissibility_check,
    anti_derivative_delta,
    apply,
    apply_adjoint,
    canonical_inverse,
    green,
    make_derivative_operator,
)
from .solve import (
    DataSet,
    GtvConfig,
    Solution,
    conditional_pd_check,
    evaluate_solution,
    kernel_h,
    solve_gtv,
    solve_l2,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    "BiorthoSystem",
    "change_of_basis",
    "delta_system",
    "gaussian_system",
    "hermite_gaussian_system",
    "make_biortho_system",
    "nullspace_norm",
    "proj_np",
    "proj_nphi",
    "projector_bound",
    "DeltaAtom",
    "GaussianProduct",
    "GreenAtom",
    "Grid",
    "GridFunction",
    "Polynomial",
    "Sum",
    "WeightSpec",
    "fd_derivative",
    "inner",
    "weighted_l1_norm",
    "weighted_sup_norm",
    "NativeSpaceSpec",
    "PrimaryNorm",
    "decompose",
    "identity_suite",
    "make_native_space",
    "native_norm",
    "predual_norm",
    "stabilized_inverse",
    "stabilized_inverse_adjoint",
    "OperatorDescriptor",
    "admissibility_check",
    "anti_derivative_delta",
    "apply",
    "apply_adjoint",
    "canonical_inverse",
    "green",
    "make_derivative_operator",
    "DataSet",
    "GtvConfig",
    "Solution",
    "conditional_pd_check",
    "evaluate_solution",
    "kernel_h",
    "solve_gtv",
    "solve_l2",
]
