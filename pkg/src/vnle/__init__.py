"""Spectral theory of the Laplacian on the loop-closed Vicsek fractal.

Graph approximations of the fractal, recursive spectrum generation through
the decimation cubic x(3-x)(5-x), explicit eigenbases, Weyl counting, and
restrictions of eigenfunctions to the central Cantor circle, all
cross-checkable against a dense eigensolver.
"""

__version__ = "0.1.0"

from .circlegraph import (
    CirclePoint,
    LaplacianMatrix,
    LevelGraph,
    Vertex,
    apply_laplacian,
    build_level,
    canonical_vertex,
    laplacian_matrix,
    partner_numerator,
)
from .decimation import (
    COUNTING_EXPONENT,
    LAMBDA_DOMAIN_MAX,
    SPECTRUM_SUP,
    WEYL_ALPHA,
    BranchPath,
    EigenvalueRecord,
    Spectrum,
    counting_function,
    inverse_branch,
    level_spectrum,
    limit_eigenvalue,
    parse_branch_path,
    phi1_derivative_at_zero,
    renorm_poly,
    weyl_ratio,
)
from .eigenbasis import (
    NodeFunction,
    SymmetryType,
    born_lambda1_basis,
    born_lambda3_basis,
    extend,
    full_eigenbasis,
    limit_eigenfunction,
    miniaturize,
    symmetry_dimensions,
    symmetry_type,
)
from .oracle import DenseSpectrum, compare_spectra, dense_spectrum, residual
from .restriction import (
    RestrictionFn,
    TriadicPoint,
    a_coeff,
    b_coeff,
    difference,
    extend_restriction,
    lipschitz_diagnostic,
    midpoint_derivative,
    one_sided_derivatives,
    restrict,
    restriction_along_path,
    t_to_circle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
