"""Empirical and predicted densities of primitive-cyclic reductions of
elliptic curves, with certified rational truncation bounds."""

from .curves import (CurveSpec, ExcludedPrime, GroupStructure, ReducedCurve,
                     ReductionRecord, check_divisibility_relations,
                     count_points, decompose_point, group_structure,
                     is_primitive_cyclic, quotient_invariants, reduce_curve,
                     reduction_record, splitting_witness)
from .density import (GENERIC_CURVE_BUDGET, ComparisonVerdict, DensityInterval,
                      ErrorBudget, FamilyDescriptor, InvalidBudget,
                      InvalidDescriptor, NotMultiplicative, PositivityVerdict,
                      chebotarev_error, compare_families, cutoff_s, cutoff_y,
                      cyclicity_family, density_with_interval,
                      discriminant_log_bound, error_envelope, euler_product,
                      log_integral, partial_density, positivity_check,
                      tail_bound, tail_term_envelope, truncated_series)
from .galois import (CongruenceCondition, ExplicitGroupModel,
                     GenericImageModel, InsufficientSamples, ProbeVerdict,
                     brute_force_count, delta_CF_k, delta_k, euler_phi,
                     generic_degree, gl2_order, image_probe,
                     required_frobenius_classes)
from .primes import (CapacityError, PrimeRange, SquarefreeTerm, factor_counts,
                     factorize, is_prime, sieve_primes, squarefree_stream)

__version__ = "0.1.0"
