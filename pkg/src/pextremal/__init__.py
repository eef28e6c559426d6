"""Numerical toolkit for P-extremal functions of convex bodies, P-potentials and
complex Monge-Ampere checks."""

from .calculus import (
    ScalarField,
    complex_hessian,
    complex_hessian_batch,
    domination_check,
    ma_density,
    ma_vanishing_scan,
    product_hessian_closed_form,
    prop31_check,
    strict_psh_check,
    tada_identity_check,
)
from .checks import SUITES, run_suite
from .convex_body import (
    ConvexBody,
    axis_intercepts,
    cone_condition,
    direction_set,
    extreme_points,
    membership,
    outer_polytope_approximation,
    support_value,
)
from .errors import (
    ConeConditionError,
    DimensionMismatchError,
    GridTooCoarseError,
    NotDifferentiableError,
    NotSmoothBodyError,
    NumericalError,
    PExtremalError,
    PreconditionViolatedError,
    UnsupportedBodyError,
    UntrustedDerivativeError,
)
from .grid import AxisSpec, GridSpec
from .mass import MassReport, grid_for_sets, ma_mass, support_explore
from .potentials import (
    PotentialSpec,
    Variant,
    epsilon_split,
    gap_bound,
    gap_bound_check,
    indicator_H,
    monomial_modulus,
    potential_u,
)
from .product import lq_closed_form, p_extremal, torus_extremal
from .univariate import (
    NORMALIZATION_NOTE,
    Disk,
    Interval,
    PlanarSet,
    UnitCircle,
    arcsine_density,
    equilibrium_mass,
    green_gradient,
    green_value,
)

__version__ = "0.1.0"
