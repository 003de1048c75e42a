"""Transient mean workload of the M/G/1 FIFO queue, three independent ways.

Exact M/M/1 series built from scaled modified Bessel functions, a numeric
renewal-equation solution, and regenerative Monte-Carlo simulation, plus
decay-rate fitting to measure how fast the transient mean approaches its
stationary value.
"""

from .analysis import (EXP_WITH_SQRT_T, PURE_EXPONENTIAL, FitResult, UnfitError,
                       compare_methods, fit_decay_rate, stationary_pk)
from .busy_period import (CycleMoments, IterationLimitError, QueueModel,
                          busy_cramer_abscissa, busy_lst, busy_mean,
                          cycle_moments)
from .distributions import (DIVERGENT, Deterministic, DistributionSpecError,
                            Erlang, Exponential, HyperExponential,
                            ServiceDistribution, Uniform, parse_service_spec)
from .mm1 import (Mm1Model, SeriesTruncationError, bessel_i_scaled,
                  bessel_i_scaled_array, log_bessel_i_scaled, phi_asymptotic,
                  phi_curve, phi_exact, pn_array, pn_t, theoretical_rate)
from .renewal import (Curve, TimeGrid, asymptote_remainder, default_grid,
                      phi_via_renewal, read_curve_csv, renewal_density,
                      renewal_function, renewal_residual, write_curve_csv)
from .simulate import (CyclePath, CycleTruncationError, FirstCycleStats,
                       McConfig, estimate_phi, estimate_q, estimate_stationary,
                       first_cycle_study, simulate_cycle,
                       simulated_cycle_moments, workload_at)

__version__ = "0.1.0"
