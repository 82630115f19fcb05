"""Weighted l1 sparse polynomial approximation from noisy or corrupted samples."""
from .basis import DesignProblem, assemble, basis_matrix, eval_basis, expansion, sample_measure, sample_problem
from .indexsets import (
    BasisKind,
    IndexSet,
    best_lower_s_term,
    hyperbolic_cross,
    intrinsic_lower_sparsity,
    intrinsic_weight_sq,
    intrinsic_weights,
    is_lower,
    iter_lower_sets,
    weighted_cardinality,
)
from .metrics import ReferenceSolution, l2_error, least_squares_reference, linf_surrogate, tail_Q, tail_term
from .solvers import (
    DECODERS,
    DecoderKind,
    DecoderSolution,
    InfeasibleError,
    SolverOptions,
    solve,
    wladlasso,
    wlasso,
    wqcbp,
    wsrlasso,
)
from .tuning import CvSpec, cross_validate, parse_grid, recommend, recommended_m, theta, theta_minimizer

__version__ = "0.1.0"
