"""Weighted logarithmic and identric means, Hermite-Hadamard refinements
and a randomised verification harness for the inequalities between them."""

from __future__ import annotations

from .chains import (
    ChainReport,
    SequenceReport,
    amgm_ratio_bounds,
    arith_log_gap_bounds,
    eight_term_chain,
    five_term_chain,
    identric_kantorovich_bounds,
    identric_upper_bound_check,
    log_mean_geometric_gap_bounds,
    self_improving_sequence,
    young_pq_chain,
)
from .errors import (
    ConfigError,
    DiagonalArgument,
    DomainError,
    FnSyntaxError,
    HHMeansError,
    NegativeFunction,
    OutOfDomain,
    QuadratureFailure,
    UnknownFunction,
)
from .fnspec import eval_fnspec, fn_from_text, natural_domain, parse_fnspec, to_text
from .functions import BUILTINS, ConvexFn, Interval, builtin, convexity_probe, power_base
from .hh import (
    FunctionalResult,
    averaged_max_weight,
    averaged_min_weight,
    hh_functional,
    hh_lower_gap_bounds,
    hh_ratio_bounds,
    hh_upper_gap_bounds,
    integrated_jensen_bounds,
    refined_jensen_bound,
    uniform_upper_gap_bounds,
)
from .means import (
    DEFAULT_POLICY,
    LimitPolicy,
    am_gm_correction,
    kantorovich,
    log_weighted_identric,
    logarithmic_mean,
    representing_function,
    weighted_arithmetic,
    weighted_geometric,
    weighted_identric,
    weighted_logarithmic,
)
from .quadrature import QuadratureSpec, integrate
from .young import BoundPair, Direction, young_gap

__version__ = "0.1.0"
