"""Exact p-adic shift dynamics: Mahler expansions, locally scaling maps,
Mahler-Bernoulli class checks and conjugacy to the shift."""

from .conjugacy import (
    ConjugacyReport,
    phi_digits,
    verify_bijectivity_on_residues,
    verify_conjugacy,
)
from .errors import (
    HenselConditionFailed,
    NotAUnit,
    PadicError,
    ParseError,
    PrecisionExhausted,
    PreconditionFailed,
    PrimeMismatch,
    ScalingAssumptionViolated,
    Undecidable,
)
from .mahler import (
    MahlerSeries,
    binom_eval,
    binomial_series,
    empirical_lipschitz,
    evaluate_series,
    lipschitz_bound,
    mahler_coefficients,
    parse_mahler_text,
)
from .maps import AffineCombination, FunctionMap, ResidueMap, constant_map, identity_map
from .padic_core import (
    PadicInt,
    PadicNumber,
    chop,
    distance,
    encode_integer,
    first_difference,
    hensel_lift,
    parse_padic_int,
    parse_padic_number,
    qp_scale,
    ring_arithmetic,
    unit_invert,
)
from .scaling_dynamics import (
    Ball,
    ClassReport,
    ScalingReport,
    class_check,
    iterated_preimage_structure,
    mixing_measure,
    parse_ball,
    perturbation_check,
    preimage_ball,
    verify_locally_scaling,
)
from .shift_maps import (
    ChopMap,
    ShiftMap,
    WoodcockSmartMap,
    f_a_apply,
    shift_iterate,
    shift_mahler_direct,
    shift_mahler_series,
    verify_coefficient_theorem,
    woodcock_smart,
)

__version__ = "0.1.0"
