"""Experiment orchestration: the online decide/observe/update loop for each
framework, multi-trial execution, summary statistics, percentile bands, and
the delimited file outputs.

Frameworks
----------
bma  chance-constrained decision against the whole weighted particle cloud,
     Gibbs reweighting + rejuvenation updates
bgs  decision from one categorically sampled particle, same posterior updates
pto  deterministic predictor trained online on the prediction-fit loss (Adam)
dfl  deterministic predictor trained online on the decision loss via the
     score-function gradient (Adam)

Seeding
-------
Every independent random stream is seeded by a SeedSequence over the tuple
(base_seed, trial_index, stream_tag), so frameworks compared on the same trial
index consume the identical data stream, and trials are independent units that
may run serially or in a process pool with byte-identical output.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import AdamState, ScoreGradConfig, adam_step, bgs_select, dfl_param_grad, mse_loss_grad
from .datagen import ArmaConfig, StageDatum, generate_stream
from .knapsack import (KnapsackInstance, ScenarioSet, evaluate_reward,
                       hindsight_optimum, solve_chance, solve_deterministic)
from .predictor import N_PARAMS, predict, predict_batch
from .smc import ParticleCloud, SmcConfig, ess, init_cloud, liu_west_params, mh_rejuvenate, reweight

FRAMEWORKS = ("bma", "bgs", "pto", "dfl")

# stream tags for seed mixing
TAG_DATA = 0
TAG_SMC = 1
TAG_INIT = 2
TAG_BGS = 3
TAG_DFL = 4


def subseed(base_seed: int, trial: int, tag: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=(base_seed, trial, tag))


def substream(base_seed: int, trial: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(subseed(base_seed, trial, tag)))


@dataclass(frozen=True)
class ExperimentConfig:
    framework: str = "bma"
    horizon: int = 1000
    trials: int = 100
    base_seed: int = 0
    alpha: float = 0.9
    smc: SmcConfig = field(default_factory=SmcConfig)
    adam_lr0: float = 0.1
    adam_decay: float = 0.99
    score_k: int = 20
    z_cap: int = 64
    instance: KnapsackInstance = field(default_factory=KnapsackInstance)
    arma: ArmaConfig = field(default_factory=ArmaConfig)
    out_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.framework not in FRAMEWORKS:
            raise ValueError(f"framework must be one of {FRAMEWORKS}")
        if self.horizon < 0 or self.trials < 1 or self.workers < 1:
            raise ValueError("horizon must be >= 0, trials and workers >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class StageRecord:
    trial: int
    t: int
    framework: str
    z: np.ndarray
    reward: float
    feasible: bool
    hindsight: float
    regret: float
    ess: float | None = None
    rejuvenated: bool | None = None


@dataclass(frozen=True)
class SummaryStats:
    framework: str
    trials: int
    horizon: int
    mean_r_full: float
    std_r_full: float
    mean_r_half: float
    std_r_half: float
    mean_feas_full: float
    std_feas_full: float
    mean_feas_half: float
    std_feas_half: float
    per_trial_r_full: np.ndarray
    per_trial_r_half: np.ndarray
    per_trial_feas_full: np.ndarray
    per_trial_feas_half: np.ndarray


def _stage_losses(preds, datum: StageDatum, hs_value: float, cfg: ExperimentConfig) -> np.ndarray:
    losses = np.empty(len(preds))
    for i, pred in enumerate(preds):
        dec = solve_deterministic(pred, cfg.instance, cfg.z_cap)
        losses[i] = hs_value - evaluate_reward(dec.z, datum.A, cfg.instance)[0]
    return losses


def _posterior_update(cloud: ParticleCloud, preds, datum: StageDatum, hs_value: float,
                      cfg: ExperimentConfig) -> tuple[ParticleCloud, float, bool]:
    """Reweight by the stage losses, rejuvenate on ESS collapse, and report
    the post-reweight ESS together with the rejuvenation flag."""
    losses = _stage_losses(preds, datum, hs_value, cfg)
    cloud = reweight(cloud, losses, cfg.smc.lam)
    e = ess(cloud.weights)
    triggered = e <= cfg.smc.ess_threshold * cloud.n
    if triggered:
        kernel = liu_west_params(cloud, cfg.smc.shrinkage, cfg.smc.jitter_floor)

        def loss_of(theta):
            dec = solve_deterministic(predict(theta, datum.x), cfg.instance, cfg.z_cap)
            return hs_value - evaluate_reward(dec.z, datum.A, cfg.instance)[0]

        cloud = mh_rejuvenate(cloud, kernel, loss_of, cfg.smc, current_losses=losses)
    return cloud, e, triggered


def run_stage_bma(cloud: ParticleCloud, datum: StageDatum,
                  cfg: ExperimentConfig, trial: int = 0) -> tuple[StageRecord, ParticleCloud]:
    """Decide via the chance-constrained program over the predictions of the
    whole cloud, then observe the stage and update the posterior."""
    preds = predict_batch(cloud.thetas, datum.x)
    dec = solve_chance(ScenarioSet(preds, cloud.weights, cfg.alpha), cfg.instance, cfg.z_cap)
    reward, feasible = evaluate_reward(dec.z, datum.A, cfg.instance)
    hs = hindsight_optimum(datum.A, cfg.instance).value
    cloud, e, triggered = _posterior_update(cloud, preds, datum, hs, cfg)
    rec = StageRecord(trial, datum.t, "bma", dec.z, reward, feasible, hs,
                      hs - reward, ess=e, rejuvenated=triggered)
    return rec, cloud


def run_stage_bgs(cloud: ParticleCloud, datum: StageDatum, cfg: ExperimentConfig,
                  bgs_rng: np.random.Generator, trial: int = 0) -> tuple[StageRecord, ParticleCloud]:
    """Decide from one categorically sampled particle; posterior updates are
    identical to the aggregated framework."""
    preds = predict_batch(cloud.thetas, datum.x)
    idx = bgs_select(cloud, bgs_rng)
    dec = solve_deterministic(preds[idx], cfg.instance, cfg.z_cap)
    reward, feasible = evaluate_reward(dec.z, datum.A, cfg.instance)
    hs = hindsight_optimum(datum.A, cfg.instance).value
    cloud, e, triggered = _posterior_update(cloud, preds, datum, hs, cfg)
    rec = StageRecord(trial, datum.t, "bgs", dec.z, reward, feasible, hs,
                      hs - reward, ess=e, rejuvenated=triggered)
    return rec, cloud


def run_stage_pto(theta, adam: AdamState, datum: StageDatum, cfg: ExperimentConfig,
                  trial: int = 0) -> tuple[StageRecord, np.ndarray, AdamState]:
    """Deterministic predict-then-optimize stage with a fit-loss Adam update."""
    dec = solve_deterministic(predict(theta, datum.x), cfg.instance, cfg.z_cap)
    reward, feasible = evaluate_reward(dec.z, datum.A, cfg.instance)
    hs = hindsight_optimum(datum.A, cfg.instance).value
    _, grad = mse_loss_grad(theta, datum.x, datum.A)
    delta, adam = adam_step(adam, grad)
    rec = StageRecord(trial, datum.t, "pto", dec.z, reward, feasible, hs, hs - reward)
    return rec, theta + delta, adam


def run_stage_dfl(theta, adam: AdamState, datum: StageDatum, cfg: ExperimentConfig,
                  dfl_rng: np.random.Generator, trial: int = 0) -> tuple[StageRecord, np.ndarray, AdamState]:
    """Deterministic stage updated by the score-function decision gradient."""
    dec = solve_deterministic(predict(theta, datum.x), cfg.instance, cfg.z_cap)
    reward, feasible = evaluate_reward(dec.z, datum.A, cfg.instance)
    hs = hindsight_optimum(datum.A, cfg.instance).value
    grad = dfl_param_grad(theta, datum.x, datum.A, cfg.instance,
                          ScoreGradConfig(k=cfg.score_k), dfl_rng,
                          z_cap=cfg.z_cap, hindsight_value=hs)
    delta, adam = adam_step(adam, grad)
    rec = StageRecord(trial, datum.t, "dfl", dec.z, reward, feasible, hs, hs - reward)
    return rec, theta + delta, adam


def run_trial(cfg: ExperimentConfig, trial: int) -> list[StageRecord]:
    """All stage records of one trial; a pure function of (cfg, trial)."""
    stream = generate_stream(cfg.arma, subseed(cfg.base_seed, trial, TAG_DATA), cfg.horizon)
    records = []
    if cfg.framework in ("bma", "bgs"):
        cloud = init_cloud(cfg.smc, subseed(cfg.base_seed, trial, TAG_SMC))
        bgs_rng = substream(cfg.base_seed, trial, TAG_BGS)
        for datum in stream:
            if cfg.framework == "bma":
                rec, cloud = run_stage_bma(cloud, datum, cfg, trial)
            else:
                rec, cloud = run_stage_bgs(cloud, datum, cfg, bgs_rng, trial)
            records.append(rec)
    else:
        init_rng = substream(cfg.base_seed, trial, TAG_INIT)
        theta = init_rng.standard_normal(N_PARAMS)
        adam = AdamState(lr0=cfg.adam_lr0, decay=cfg.adam_decay)
        dfl_rng = substream(cfg.base_seed, trial, TAG_DFL)
        for datum in stream:
            if cfg.framework == "pto":
                rec, theta, adam = run_stage_pto(theta, adam, datum, cfg, trial)
            else:
                rec, theta, adam = run_stage_dfl(theta, adam, datum, cfg, dfl_rng, trial)
            records.append(rec)
    return records


def _records_by_trial(records) -> list[list[StageRecord]]:
    trials: dict[int, list[StageRecord]] = {}
    for rec in records:
        trials.setdefault(rec.trial, []).append(rec)
    groups = [sorted(v, key=lambda r: r.t) for _, v in sorted(trials.items())]
    lengths = {len(g) for g in groups}
    if len(lengths) > 1:
        raise ValueError("trials have unequal stage counts")
    return groups


def summarize(records) -> SummaryStats:
    """Per-trial means over all stages and over the last half, then the
    cross-trial mean and population standard deviation of each."""
    groups = _records_by_trial(records)
    horizon = len(groups[0])
    half = horizon // 2
    r = np.array([[rec.reward for rec in g] for g in groups])
    f = np.array([[1.0 if rec.feasible else 0.0 for rec in g] for g in groups])
    r_full = r.mean(axis=1)
    f_full = f.mean(axis=1)
    r_half = r[:, half:].mean(axis=1)
    f_half = f[:, half:].mean(axis=1)
    fw = groups[0][0].framework
    return SummaryStats(
        framework=fw, trials=len(groups), horizon=horizon,
        mean_r_full=float(r_full.mean()), std_r_full=float(r_full.std()),
        mean_r_half=float(r_half.mean()), std_r_half=float(r_half.std()),
        mean_feas_full=float(f_full.mean()), std_feas_full=float(f_full.std()),
        mean_feas_half=float(f_half.mean()), std_feas_half=float(f_half.std()),
        per_trial_r_full=r_full, per_trial_r_half=r_half,
        per_trial_feas_full=f_full, per_trial_feas_half=f_half,
    )


def running_mean_curves(records) -> dict[str, np.ndarray]:
    """Time-averaged cumulative reward and feasibility curves with the
    cross-trial mean and the 10th/90th percentile bands (linear-interpolation
    percentiles between closest ranks)."""
    groups = _records_by_trial(records)
    horizon = len(groups[0])
    steps = np.arange(1, horizon + 1, dtype=float)
    r = np.array([np.cumsum([rec.reward for rec in g]) / steps for g in groups])
    f = np.array([np.cumsum([1.0 if rec.feasible else 0.0 for rec in g]) / steps for g in groups])
    out = {"t": np.arange(horizon)}
    for name, mat in (("reward", r), ("feasibility", f)):
        out[f"{name}_mean"] = mat.mean(axis=0)
        out[f"{name}_p10"] = np.percentile(mat, 10, axis=0, method="linear")
        out[f"{name}_p90"] = np.percentile(mat, 90, axis=0, method="linear")
    return out


def _trial_worker(args):
    cfg, trial = args
    return run_trial(cfg, trial)


@dataclass(frozen=True)
class ExperimentResult:
    records: list
    summary: SummaryStats
    curves: dict


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all trials (serially or in a process pool), summarize, and write
    the stage/summary/curve files when an output directory is configured.

    Output is independent of the worker count: trial records are produced by
    a pure per-trial function and concatenated in trial order.
    """
    if cfg.out_path is not None:
        _prepare_out_dir(cfg.out_path)
    tasks = [(cfg, trial) for trial in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            per_trial = list(pool.map(_trial_worker, tasks))
    else:
        per_trial = [run_trial(cfg, trial) for trial in range(cfg.trials)]
    records = [rec for group in per_trial for rec in group]
    summary = summarize(records)
    curves = running_mean_curves(records)
    if cfg.out_path is not None:
        write_stage_csv(records, os.path.join(cfg.out_path, f"stages_{cfg.framework}.csv"))
        write_summary_csv([summary], os.path.join(cfg.out_path, f"summary_{cfg.framework}.csv"))
        write_curve_csv(curves, "reward", os.path.join(cfg.out_path, f"curve_reward_{cfg.framework}.csv"))
        write_curve_csv(curves, "feasibility",
                        os.path.join(cfg.out_path, f"curve_feasibility_{cfg.framework}.csv"))
    return ExperimentResult(records, summary, curves)


def _prepare_out_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
    probe = os.path.join(path, ".write_probe")
    with open(probe, "w", encoding="utf-8") as fh:
        fh.write("")
    os.remove(probe)


# ---------------------------------------------------------------------------
# delimited files

STAGE_HEADER = "trial,t,framework,z1,z2,z3,z4,reward,feasible,hindsight,regret,ess,rejuvenated"
SUMMARY_HEADER = ("framework,trials,T,mean_r_T,std_r_T,mean_r_half,std_r_half,"
                  "mean_feas_T,std_feas_T,mean_feas_half,std_feas_half")
CURVE_HEADER = "t,mean,p10,p90"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_stage_csv(records, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(STAGE_HEADER + "\n")
        for r in records:
            cells = [str(r.trial), str(r.t), r.framework]
            cells += [str(int(v)) for v in r.z]
            cells += [_fmt(r.reward), str(int(r.feasible)), _fmt(r.hindsight), _fmt(r.regret)]
            cells.append("" if r.ess is None else _fmt(r.ess))
            cells.append("" if r.rejuvenated is None else str(int(r.rejuvenated)))
            fh.write(",".join(cells) + "\n")


def read_stage_csv(path: str) -> list[StageRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != STAGE_HEADER:
            raise ValueError(f"unexpected stage CSV header in {path}")
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if len(cells) != 13:
                raise ValueError(f"malformed stage CSV row in {path}")
            records.append(StageRecord(
                trial=int(cells[0]), t=int(cells[1]), framework=cells[2],
                z=np.array([int(c) for c in cells[3:7]], dtype=np.int64),
                reward=float(cells[7]), feasible=bool(int(cells[8])),
                hindsight=float(cells[9]), regret=float(cells[10]),
                ess=None if cells[11] == "" else float(cells[11]),
                rejuvenated=None if cells[12] == "" else bool(int(cells[12])),
            ))
    return records


def write_summary_csv(stats_list, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for s in stats_list:
            cells = [s.framework, str(s.trials), str(s.horizon),
                     _fmt(s.mean_r_full), _fmt(s.std_r_full),
                     _fmt(s.mean_r_half), _fmt(s.std_r_half),
                     _fmt(s.mean_feas_full), _fmt(s.std_feas_full),
                     _fmt(s.mean_feas_half), _fmt(s.std_feas_half)]
            fh.write(",".join(cells) + "\n")


def write_curve_csv(curves: dict, which: str, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CURVE_HEADER + "\n")
        for i, t in enumerate(curves["t"]):
            fh.write(",".join([
                str(int(t)),
                _fmt(curves[f"{which}_mean"][i]),
                _fmt(curves[f"{which}_p10"][i]),
                _fmt(curves[f"{which}_p90"][i]),
            ]) + "\n")


# ---------------------------------------------------------------------------
# flat key = value config files

_INT_KEYS = {"horizon", "trials", "base_seed", "particles", "mh_steps", "score_k",
             "z_cap", "workers"}
_FLOAT_KEYS = {"alpha", "lambda", "shrinkage", "ess_threshold", "prior_std",
               "jitter_floor", "adam_lr0", "adam_decay"}
_VEC_KEYS = {"c", "b", "q"}
_STR_KEYS = {"framework", "out"}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _VEC_KEYS | _STR_KEYS


def parse_config_file(path: str) -> dict:
    """Flat UTF-8 `key = value` lines; `#` starts a comment; vectors are
    comma-separated."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key '{key}'")
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key in _VEC_KEYS:
                values[key] = [float(v) for v in val.split(",")]
            else:
                values[key] = val
    return values


def build_config(values: dict) -> ExperimentConfig:
    """ExperimentConfig from a flat key dict (defaults fill the gaps)."""
    smc = SmcConfig(
        n_particles=values.get("particles", 20),
        lam=values.get("lambda", 1e-4),
        shrinkage=values.get("shrinkage", 0.9),
        ess_threshold=values.get("ess_threshold", 0.5),
        mh_steps=values.get("mh_steps", 3),
        prior_std=values.get("prior_std", 1.0),
        jitter_floor=values.get("jitter_floor", 1e-9),
    )
    inst = KnapsackInstance(
        c=np.asarray(values.get("c", np.full(4, 12.0)), dtype=float),
        b=np.asarray(values.get("b", np.full(3, 8.0)), dtype=float),
        q=np.asarray(values.get("q", np.full(3, 3.0)), dtype=float),
    )
    return ExperimentConfig(
        framework=values.get("framework", "bma"),
        horizon=values.get("horizon", 1000),
        trials=values.get("trials", 100),
        base_seed=values.get("base_seed", 0),
        alpha=values.get("alpha", 0.9),
        smc=smc,
        adam_lr0=values.get("adam_lr0", 0.1),
        adam_decay=values.get("adam_decay", 0.99),
        score_k=values.get("score_k", 20),
        z_cap=values.get("z_cap", 64),
        instance=inst,
        out_path=values.get("out"),
        workers=values.get("workers", 1),
    )
