"""Smallest-singular-value toolkit for diagonal-plus-permutation matrices.

A square matrix A = D + M, with D diagonal and M a permutation matrix,
splits along the permutation's cycles into independent diagonal-plus-shift
blocks.  This package computes, per cycle and globally:

  * invertibility and the determinant criterion,
  * deterministic lower/upper bounds on the smallest squared singular
    value, in O(N) per cycle,
  * the exact smallest singular value through the explicit block inverse,
  * the random-walk functionals of the entry log-magnitudes that control
    those bounds,
  * Monte Carlo experiments for the tail laws of the smallest singular
    value under i.i.d. diagonal entries,

with an independent dense oracle for verification and a CLI front end.
All products of entries are carried in log-magnitude/phase form so cycles
of length in the thousands do not overflow double precision.
"""

from .perm import (
    CycleDecomposition,
    Permutation,
    PermutationError,
    apply,
    decompose,
    l_functional,
    ordering_permutation,
    sample_uniform,
)
from .spectral import (
    BoundReport,
    CycleDiagonal,
    GlobalBoundReport,
    NonConvergenceError,
    SingularCycleError,
    beta_sq,
    bounds_cycle,
    bounds_global,
    c0,
    dual_hat,
    eps_bound,
    gamma,
    is_invertible,
    phi,
    rayleigh,
    rho1,
    rho2,
    smin_exact,
    smin_global_exact,
    smin_scalar,
    solve,
    solve_adjoint,
    test_vector_bound,
    u_root,
)
from .walk import (
    ExcursionDecomposition,
    ExcursionBoundCheck,
    WalkPath,
    excursion_bound_check,
    from_diagonal,
    k_constant,
    ladder,
    m_functional,
    t_functional,
    u_functionals,
    x_functional,
)
from .dist import (
    AnnulusMixture,
    DriftError,
    HypothesisReport,
    LogNormalRadial,
    RadialModel,
    ThetaNotFound,
    TwoPointRadial,
    hypothesis_report,
    mean_log,
    sample,
    theta,
)

__version__ = "0.1.0"
