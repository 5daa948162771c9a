"""Guesswork moments, exponents and multi-agent attack simulation."""
from .analytics import (
    AnalyticMoment,
    GuessList,
    MomentParam,
    arikan_bounds,
    exact_guesswork_moment,
    geometric_moment,
    iid_g_moment_numeric,
    iid_v_moment,
    j_guesswork_exponent,
    mismatch_exponent,
    optimal_iid_distribution,
    optimal_list,
    sync_exponent,
)
from .exponents import (
    ExponentReport,
    ListGrowthRate,
    async_success_exponent,
    failure_exponent,
    min_beta_async_exponent,
    sync_success_exponent,
    threshold_type,
)
from .markov import MarkovModel, markov_sync_exponent, optimal_markov_guesser, perron
from .probability import (
    ConditionalPmf,
    Pmf,
    ZipfSpec,
    cross_entropy,
    kl_divergence,
    renyi_entropy,
    shannon_entropy,
    tilt,
    zipf_pmf,
)
from .simulator import (
    AttackPlan,
    ExplicitPermutation,
    IidSampler,
    IidSource,
    MarkovSampler,
    MarkovSource,
    PartitionedLists,
    RandomInterleave,
    ReplicatedOptimalList,
    RoundRobin,
    SharedOptimalList,
    SimStats,
    WorstCase,
    monte_carlo,
    run_trial,
)

__version__ = "0.1.0"
