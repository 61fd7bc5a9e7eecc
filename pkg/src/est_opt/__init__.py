"""Effective secrecy throughput of wiretap channels with a multi-antenna eavesdropper."""

from .adaptive import (
    AdaptiveScenario,
    asymptotic_redundancy_rate_high_eve_snr,
    average_max_est_adaptive,
    est_adaptive,
    est_adaptive_derivative,
    est_adaptive_second_derivative,
    fixed_point_map,
    max_est_adaptive,
    secrecy_outage_adaptive,
    solve_redundancy_rate,
)
from .annulus import (
    AnnulusModel,
    EvePosition,
    annulus_secure_probability,
    avg_est_adaptive_annulus,
    avg_est_fixed_annulus,
    optimize_annulus_adaptive,
    optimize_annulus_fixed,
    pathloss_snr,
    sample_eve_position,
)
from .core import (
    ChannelParams,
    Classification,
    HessianReport,
    QuadratureConfig,
    RatePair,
    SolverConfig,
    SolverReport,
    capacity,
    est,
    secrecy_outage,
)
from .errors import (
    DomainError,
    EstError,
    InfeasibleError,
    NoInteriorStationaryPointError,
    NotConvergedError,
    QuadratureNotConvergedError,
)
from .fixed import (
    asymptotic_rate_pair_high_eve_snr,
    asymptotic_rate_pair_low_eve_snr,
    est_fixed,
    f_term,
    g_term,
    gradient_fixed,
    hessian_fixed,
    reliability_outage_fixed,
    secrecy_outage_fixed,
    solve_rate_pair,
)
from .montecarlo import (
    SimEstimate,
    SimulationConfig,
    estimate_outage_probabilities,
    sample_eve_snr,
    sample_main_snr,
    simulate_annulus,
    simulate_est_adaptive,
    simulate_est_fixed,
)
from .special import (
    db_to_linear,
    exp_snr_cdf,
    gamma_snr_cdf,
    gamma_snr_sf,
    linear_to_db,
    lower_incomplete_gamma,
)

__version__ = "0.1.0"
