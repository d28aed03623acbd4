"""randsym: least singular values, small-ball probabilities and GAP
structure of random symmetric matrices, computed exactly at desk scale
and measured by reproducible Monte Carlo.

Layout:

* laws        entry laws, spacing certificates, truncated sampling
* gap         generalized arithmetic progressions and rank reduction
* smallball   exact / Monte Carlo concentration of linear, bilinear
              and quadratic forms
* structure   row-rewrite matrices, bipartition decoupling, inverse
              Littlewood-Offord search, forward bounds
* ensembles   random symmetric matrices, spectra, exact ranks,
              cofactor identities, rank growth, subspace membership
* detconc     cutoff log-determinants, spectral window counts, the
              concentration and tail experiments
* cli         the `randsym` experiment runner
"""

from .laws import (AtomicLaw, ContinuousLaw, DegenerateLaw, RejectionDiverges,
                   SamplerConfig, SpacingCertificate, atom_bound_holds,
                   auto_certificate, bernoulli, difference_law, gaussian,
                   lazy_difference_law, lazy_sign, parse_law, point_mass,
                   sample_truncated, standardize, uniform3, uniform_continuous,
                   verify_spacing)
from .gap import (Gap, GapReduction, OutOfBox, ReductionStalled, VolumeTooLarge,
                  beta_close, enumerate_values, evaluate, format_gap,
                  integer_hyperplane, is_proper, parse_gap, rank_reduce, spans)
from .exactlinalg import FullRank, bareiss_det, exact_rank as rational_rank
from .smallball import (AtomBlowup, EnumerationTooLarge, LinearForm,
                        QuadraticForm, SmallBallEstimate, bilinear_small_ball,
                        central_binomial_rho, linear_small_ball_exact,
                        linear_small_ball_mc, linear_window_mass,
                        quadratic_small_ball_exact, quadratic_small_ball_mc,
                        suffix_smallball_factors, truncated_product_bound)
from .structure import (Bipartition, DecouplingCheck, DECOUPLING_CONST,
                        ForwardBound, InverseLOReport, OverlapError,
                        RowMatrixSpec, bipartition_matrix, build_row_matrix,
                        conditioning_check, decoupling_scan, forward_lo_bound,
                        inverse_lo_search, row_matrix_det, verify_decoupling)
from .ensembles import (BoundViolation, ConvergenceFailure, NoPivot,
                        SpectralSummary, SymmetricSample, cofactor_expansion_check,
                        cofactor_inequality_check, exact_det, exact_rank,
                        grow_and_track, near_kernel_vector, remove_pivot_row,
                        sample_symmetric, spectral_summary, subspace_membership_mc)
from .detconc import (CutoffSpec, DegenerateSpectrum, DetConcReport,
                      SpacingUnverified, TailReport, concentration_experiment,
                      cutoff_log, spectral_window_count, tail_experiment,
                      truncated_log_det, wilson_interval)

__version__ = "0.1.0"
