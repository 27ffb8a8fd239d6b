"""Probabilistic mutation testing for stochastic learned models.

Given evaluation metrics for populations of trained "healthy" and "mutant"
model instances, this package estimates the full posterior distribution of
the probability that a mutation test kills the mutant, and converts that
posterior into a stable, graded kill decision with quantified approximation
error.
"""

from probmut.decision import (
    EffectReport,
    EffectScale,
    IdealPosteriors,
    classify_effect,
    hellinger_beta,
    hellinger_numeric,
    mutation_score,
    similarity_ratio,
)
from probmut.errors import ConfigError, DataError, ProbmutError, ToleranceError
from probmut.mce import MCEReport, TradeoffReport, jackknife_error, replicate_bagged, tradeoff_study
from probmut.mtest import MutationTest, TestVerdict, cohens_d, run_test, two_sample_p_value
from probmut.pools import (
    InstancePool,
    InstanceRecord,
    PoolSchema,
    RunConfig,
    derive_metric,
    load_config,
    load_pool,
    write_pool,
)
from probmut.posterior import (
    BaggedPosterior,
    BetaDist,
    CredibleInterval,
    TrialOutcome,
    bayes_bag,
    beta_posterior,
    credible_interval,
    map_estimate,
    mmse,
    run_trials,
)
from probmut.rng import Stream
from probmut.synth import PopulationSpec, brute_force_kill_prob, gen_population

__version__ = "0.1.0"

__all__ = [
    "BaggedPosterior",
    "BetaDist",
    "ConfigError",
    "CredibleInterval",
    "DataError",
    "EffectReport",
    "EffectScale",
    "IdealPosteriors",
    "InstancePool",
    "InstanceRecord",
    "MCEReport",
    "MutationTest",
    "PoolSchema",
    "PopulationSpec",
    "ProbmutError",
    "RunConfig",
    "Stream",
    "TestVerdict",
    "ToleranceError",
    "TradeoffReport",
    "TrialOutcome",
    "bayes_bag",
    "beta_posterior",
    "brute_force_kill_prob",
    "classify_effect",
    "cohens_d",
    "credible_interval",
    "derive_metric",
    "gen_population",
    "hellinger_beta",
    "hellinger_numeric",
    "jackknife_error",
    "load_config",
    "load_pool",
    "map_estimate",
    "mmse",
    "mutation_score",
    "replicate_bagged",
    "run_test",
    "run_trials",
    "similarity_ratio",
    "tradeoff_study",
    "two_sample_p_value",
    "write_pool",
]
