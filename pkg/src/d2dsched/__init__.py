"""SINR-threshold binary scheduling for D2D interference networks."""
from .analytic import AnalyticSumRateK2, ergodic_sum_rate_k2, exp_integral_e1, optimal_gamma_k2, prob_active
from .channel import (
    ChannelRealization,
    NetworkConfig,
    drop_topology,
    link_budget_gain_linear,
    noise_power_w,
    pathloss_db,
    realize_channel,
    realize_iid_rayleigh,
)
from .optimizer import ThresholdSearchResult, empirical_mean_sum_rate, lemma2_search
from .scheduler import (
    RateReport,
    ScheduleDecision,
    fair_itlinq_schedule,
    flashlinq_schedule,
    itlinq_schedule,
    modified1_schedule,
    modified2_schedule,
    rates_of_schedule,
    sinr_threshold_schedule,
    snr_based_schedule,
)

__version__ = "0.1.0"
