"""Spectral theory of discrete symplectic systems on a finite interval."""

from .bvp import (
    BvpSolution,
    ExpansionResult,
    expand,
    fourier_coefficients,
    pencil_eigenvalues,
    pointwise_expansion,
    solve_bvp,
    solve_bvp_dense_oracle,
    stacked_matrices,
    truncation_bound,
)
from .core import (
    SymplecticSystem,
    ValidationReport,
    as_boundary,
    lagrange_residual,
    psi_from_v,
    psi_ranks,
    semi_inner_product,
    semi_norm,
    space_dimensions,
    symplectic_unit,
    v_from_psi,
    validate_system,
)
from .eigenbasis import EigenEntry, OrthonormalEigenSet, omega_matrix, orthonormal_eigen_set, orthonormalize
from .errors import *  # noqa: F401,F403
from .families import block_ab, conditioned_problem, random_boundary, random_system, shooting_growth, sl_scalar
from .measure import (
    IntegralRepresentation,
    SpectralStepFunction,
    imaginary_excess,
    linear_term,
    m_integral_representation,
    m_stacked,
    rs_step_integral,
    spectral_function,
)
from .propagation import FundamentalPair, fundamental_solutions, solve_ivp, step_residual, transition, transition_inverse
from .spectrum import AtkinsonResult, CharPoly, Eigenvalue, Spectrum, char_poly, check_atkinson, eigenvalues
from .weyl import (
    GreenKernel,
    MFunctionValue,
    ResidueMatrix,
    green_bessel_gap,
    green_kernel,
    m_function,
    m_residue,
    weyl_solution,
)
