"""Certified numerics for discrete weighted Hardy inequalities on
quasi-monotone sequences and for the associated extrapolation constants."""

from .classes import (ConstantEstimate, Verdict, b_constant, check_doubling_2n,
                      check_weighted_doubling, equivalence_transform, find_doubling_m,
                      generalized_psi_condition, qb_constant)
from .errors import HardyWeightsError
from .extrapolation import (PhiFunction, embedding_weight_constant, extrapolation_constant,
                            extrapolation_tilde_phi, openended_epsilon, parse_phi,
                            run_extrapolation_check, verify_embedding_weight)
from .operators import (PsiWeight, generalized_hardy_average, hardy_average,
                        smoothing_operator_T)
from .sequences import (Interval, QuasiSequence, TailMode, TruncationPolicy, WeightSequence,
                        is_quasi_nonincreasing, parse_weight, tail_power_sum)
from .verifier import (extremal_truncated_power, hardy_sandwich, lower_bound_constant,
                       upper_bound_constant, verify_hardy_inequality)

__version__ = "0.1.0"
