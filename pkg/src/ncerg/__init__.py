"""Numerical laboratory for weighted noncommutative ergodic averages."""

from .algebra import (AlgebraContext, HermitianOperator, Projection, func_calc,
                      fractional_power, hermitian, loewner_leq, loewner_margin,
                      lp_norm, positive_four_split, projection,
                      projection_meet, spectral_projection)
from .averages import (AverageResult, SectorSequence, average_stream,
                       diagonal_sequence, interleave, normalized_weighted_average,
                       sector_indices, weighted_average)
from .brunel import (BrunelWeights, brunel_operator, domination_check,
                     geometric_weights, search_parameters, uniform_box_weights)
from .convergence import (BauCertificate, bau_limit_estimate,
                          bww_membership_check, closure_transfer_check,
                          jdlg_flight_decay_check, subsequential_uniqueness_check)
from .dsop import DSMap, DSTuple, jdlg_split, tuple_power, verify_ds
from .maximal import (ConjugatePair, convexity_counterexample,
                      holder_contraction_check, holder_scalar_check,
                      kadison_check, mei_compression_check,
                      uem_one_sided_certificate, weak_type_constant,
                      weak_type_pp_certificate, yeadon_certificate)
from .reporting import CertificateReport
from .weights import (SectorSpec, TrigPolynomial, WeightSequence,
                      besicovitch_distance, besicovitch_generate,
                      decompose_four_nonneg, finiteness_transfer_check,
                      hartman_estimate, sector_sup_seminorm, trig_eval,
                      trig_materialize, wq_seminorm_estimate)

__version__ = "0.1.0"
