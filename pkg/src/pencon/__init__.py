"""Constrained versus penalized convex problems: solvers, thresholds and the parameter map between them."""
__version__ = "0.1.0"

from .builtins import CATALOG, builtin_phi
from .coercivity import (
    CoercivityVerdict,
    DecomposedFn,
    coercivity_probe,
    composite_coercive,
    is_normcoercive,
    sum_coercivity,
)
from .correspondence import (
    compute_c,
    compute_d,
    f_of_lambda,
    g_of_tau,
    invert_g,
    classify_regime,
    sample_curve,
    thresholds,
    verify_sol_equality,
)
from .errors import (
    PenconError,
    DimensionMismatch,
    AmbientMismatch,
    NotDirect,
    ConjugateUnavailable,
    UnknownName,
    CapabilityMissing,
    BoxTooLarge,
    Infeasible,
    DualUnbounded,
    NotConverged,
    NonPositiveC,
    NotBracketed,
    RouteDisagreement,
)
from .functions import Caps, ConvexFn, SubgradientDescriptor, conjugate_fn, fenchel_young_gap, semidirect_sum
from .kernels import available_backends, default_backend
from .norms import NormPair
from .solvers import (
    ProblemInstance,
    SolveReport,
    brute_force_argmin,
    certificate_check,
    solve_constrained,
    solve_dual_constrained,
    solve_dual_penalized,
    solve_penalized,
)
from .structured import StructuredPhi, structured_from_coordinates
from .subspaces import Subspace, attachment_constant, nullspace, range_of_adjoint
