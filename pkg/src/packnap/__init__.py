"""Online contextual knapsack benchmark.

A particle posterior over a sigmoid-linear predictor drives a
chance-constrained integer knapsack each stage; three baselines (stochastic
particle selection, fit-loss Adam, decision-loss Adam) share the same data
streams and decision oracle.
"""

from .baselines import AdamState, ScoreGradConfig, adam_step, bgs_select, dfl_param_grad, mse_loss_grad, score_function_grad
from .datagen import ArmaConfig, ArmaState, StageDatum, arma_step, generate_stream, synthesize_weights
from .errors import NumericError
from .harness import (ExperimentConfig, ExperimentResult, StageRecord, SummaryStats,
                      run_experiment, run_trial, running_mean_curves, summarize)
from .knapsack import (Decision, KnapsackInstance, ScenarioSet, evaluate_reward,
                       hindsight_optimum, regret, solve_chance, solve_deterministic)
from .predictor import N_PARAMS, jacobian, predict, predict_batch
from .smc import (LiuWestKernel, MixabilityRecord, ParticleCloud, SmcConfig, ess,
                  free_energy, full_history_accept_ratio, gibbs_posterior_discrete,
                  init_cloud, liu_west_params, mh_accept_ratio, mh_rejuvenate,
                  mixability_check, reweight)

__version__ = "0.1.0"
