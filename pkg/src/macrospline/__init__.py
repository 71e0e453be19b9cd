"""C1 macro-element spline interpolation on tensor-product rectangle meshes.

The package provides the one-dimensional C1 quadratic macro-spline
machinery, the full/reduced/quasi macro-element interpolation operators,
the bicubic Hermite element, an anisotropic two-element macro operator,
a Shishkin-mesh generator with a composite interpolant whose normal
derivative is continuous across long edges, quadrature-based error
norms, and a verification CLI.
"""

from .fields import (
    ScalarField,
    get_field,
    make_layer_decomposition,
    make_polynomial_field,
    make_smooth_field,
)
from .interpolation import (
    CompositeInterpolant,
    PiecewisePoly2D,
    build_composite,
    evaluate,
    interp_aniso,
    interp_bfs,
    interp_full,
    interp_full_macro,
    interp_reduced,
    interp_reduced_macro,
    nodal_q2,
    quasi_interp,
)
from .mesh import (
    Grid1D,
    MacroMesh,
    ShishkinMesh,
    build_macro_mesh,
    build_shishkin,
    classify_edges,
    select_sigma,
)
from .norms import NormReport, compute_norm_report, edge_l2, gauss_rule, jump_norm_sum, linf_sampled, seminorm
from .spline_core import (
    DualWeight,
    HermiteData1D,
    KnotSequence,
    MacroSpline1D,
    divided_difference,
    eval_dual_weight,
    eval_ref_basis,
    eval_world_basis,
    hermite_interpolate_1d,
    integrate_dual_weight,
)

__version__ = "0.1.0"

__all__ = [
    "ScalarField",
    "get_field",
    "make_layer_decomposition",
    "make_polynomial_field",
    "make_smooth_field",
    "CompositeInterpolant",
    "PiecewisePoly2D",
    "build_composite",
    "evaluate",
    "interp_aniso",
    "interp_bfs",
    "interp_full",
    "interp_full_macro",
    "interp_reduced",
    "interp_reduced_macro",
    "nodal_q2",
    "quasi_interp",
    "Grid1D",
    "MacroMesh",
    "ShishkinMesh",
    "build_macro_mesh",
    "build_shishkin",
    "classify_edges",
    "select_sigma",
    "NormReport",
    "compute_norm_report",
    "edge_l2",
    "gauss_rule",
    "jump_norm_sum",
    "linf_sampled",
    "seminorm",
    "DualWeight",
    "HermiteData1D",
    "KnotSequence",
    "MacroSpline1D",
    "divided_difference",
    "eval_dual_weight",
    "eval_ref_basis",
    "eval_world_basis",
    "hermite_interpolate_1d",
    "integrate_dual_weight",
    "__version__",
]
