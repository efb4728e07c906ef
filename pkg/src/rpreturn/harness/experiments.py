"""Quadrature-error and servo-control experiments.

Every trial or training run draws its randomness from a stream keyed by its
coordinates (see ``rpreturn.rng``), and work is split into fixed-size blocks
whose results are merged by index. Tables are therefore identical for any
``jobs`` value.

Within one experiment the same signal (quadrature) or the same environment
and policy-initialization streams (control) are reused across the cells of a
trial or run index, so cell comparisons are paired.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .. import quadrature as q
from ..reinforce import PolicyNetwork, UpdateRule, train
from ..rng import stream
from ..servo_env import IntervalNoiseModel, ServoReacher, SimConfig, sample_interval
from ..signals import sample
from .config import ControlExperimentConfig, QuadExperimentConfig
from .results import ResultRow

BLOCK = 250


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


# --- quadrature --------------------------------------------------------------

@dataclass(frozen=True)
class _QuadTask:
    experiment: str
    cfg: QuadExperimentConfig
    family: str
    first: int
    stop: int


def _draw_signals(cfg, family, trial):
    """Return ``(weighting_sampler, reward_signal)`` for one trial.

    Discounted experiments key the reward signal on (family, trial) only, so
    fixed- and stochastic-partition runs with the same seed see the same
    signals.
    """
    parts = family.split("*")
    if len(parts) == 2:
        left = sample(parts[0], stream(cfg.seed, "product", family, 0, trial))
        right = sample(parts[1], stream(cfg.seed, "product", family, 1, trial))
        return left, right
    return None, sample(family, stream(cfg.seed, "signal", family, trial))


def _quad_block(task: _QuadTask):
    cfg = task.cfg
    domain = cfg.domain
    m = q.midpoints(domain)
    n_trials = task.stop - task.first
    shape = (len(cfg.gammas), len(cfg.ns), n_trials)
    err = {"dtr": np.empty(shape), "rp": np.empty(shape)}
    mean_delta = np.empty((len(cfg.ns), n_trials))
    discounts = [q.DiscountSpec(g) for g in cfg.gammas]
    disc_at_m = [d.weights(m - domain.start) for d in discounts]
    uniform = {n: q.uniform_partition(domain, n) for n in cfg.ns}

    for col, trial in enumerate(range(task.first, task.stop)):
        left, g = _draw_signals(cfg, task.family, trial)
        g_m = np.asarray(g(m), dtype=float)
        partitions = []
        for n in cfg.ns:
            if cfg.partition == "uniform":
                partitions.append(uniform[n])
            else:
                rng = stream(cfg.seed, "partition", task.family, n, trial)
                partitions.append(q.stochastic_partition(domain, n, rng))
        for j, p in enumerate(partitions):
            mean_delta[j, col] = domain.length / p.n
        for i, disc in enumerate(discounts):
            if left is None:
                f, f_m = disc, disc_at_m[i]
            else:
                f, f_m = left, np.asarray(left(m), dtype=float)
            ref = q.reference_from_values(f_m, g_m, domain)
            for j, p in enumerate(partitions):
                err["dtr"][i, j, col] = abs(q.generalized_dtr_sum(f, g, p) - ref)
                err["rp"][i, j, col] = abs(q.generalized_rp_sum(f, g, p) - ref)
    return err, mean_delta


def _run_quad(experiment: str, cfg: QuadExperimentConfig, jobs: int, per_trial: bool) -> list[ResultRow]:
    rows: list[ResultRow] = []
    products = experiment == "quad-products"
    for family in cfg.families:
        tasks = [_QuadTask(experiment, cfg, family, a, min(a + BLOCK, cfg.trials))
                 for a in range(0, cfg.trials, BLOCK)]
        blocks = _map(_quad_block, tasks, jobs)
        err = {k: np.concatenate([b[0][k] for b in blocks], axis=2) for k in ("dtr", "rp")}
        mean_delta = np.concatenate([b[1] for b in blocks], axis=1)
        for i, gamma in enumerate(cfg.gammas):
            gamma_field = None if products else gamma
            for j, n in enumerate(cfg.ns):
                coords = dict(experiment=experiment, family=family, gamma=gamma_field, n=n, seed=cfg.seed)
                for method in ("dtr", "rp"):
                    mean, se = _mean_se(err[method][i, j])
                    rows.append(ResultRow(metric=f"{method}_abs_error_mean", value=mean, **coords))
                    rows.append(ResultRow(metric=f"{method}_abs_error_se", value=se, **coords))
                rows.append(ResultRow(metric="trials", value=float(cfg.trials), **coords))
                if cfg.partition == "stochastic":
                    rows.append(ResultRow(metric="mean_delta", value=float(np.mean(mean_delta[j])), **coords))
                if per_trial:
                    for t in range(cfg.trials):
                        for method in ("dtr", "rp"):
                            rows.append(ResultRow(metric=f"{method}_abs_error", value=float(err[method][i, j, t]),
                                                  index=t, **coords))
    return rows


def run_quad_fixed(cfg: QuadExperimentConfig, jobs: int = 1, per_trial: bool = False) -> list[ResultRow]:
    """Discounted random signals on uniform partitions."""
    if cfg.partition != "uniform":
        raise ValueError("run_quad_fixed needs partition='uniform'")
    return _run_quad("quad-fixed", cfg, jobs, per_trial)


def run_quad_stochastic(cfg: QuadExperimentConfig, jobs: int = 1, per_trial: bool = False) -> list[ResultRow]:
    """Discounted random signals on sorted-uniform random partitions.

    ``mean_delta`` rows give the realized average interval width per cell.
    """
    if cfg.partition != "stochastic":
        raise ValueError("run_quad_stochastic needs partition='stochastic'")
    return _run_quad("quad-stochastic", cfg, jobs, per_trial)


def run_quad_products(cfg: QuadExperimentConfig, jobs: int = 1, per_trial: bool = False) -> list[ResultRow]:
    """Undiscounted products of two random signals; ``gammas`` is ignored."""
    if any("*" not in fam for fam in cfg.families):
        raise ValueError("run_quad_products needs family pairs such as 'periodic*periodic'")
    return _run_quad("quad-products", replace(cfg, gammas=(1.0,)), jobs, per_trial)


# --- servo control -------------------------------------------------------------

def noise_model(cfg: ControlExperimentConfig, delta_mu: float) -> IntervalNoiseModel:
    if not cfg.interval_noise:
        return IntervalNoiseModel.constant(delta_mu)
    return IntervalNoiseModel(target_mean=delta_mu, catastrophe_prob=cfg.catastrophe_prob)


def _cell_key(delta_mu: float) -> int:
    return int(round(delta_mu * 1e6))


@dataclass(frozen=True)
class RunSpec:
    cfg: ControlExperimentConfig
    delta_mu: float
    alpha: float
    variant: str
    run: int
    record_params: bool = False


def training_run(spec: RunSpec):
    """One independent training run; returns its ``TrainingLog``."""
    cfg = spec.cfg
    key = _cell_key(spec.delta_mu)
    env = ServoReacher(noise=noise_model(cfg, spec.delta_mu), config=SimConfig(gamma=cfg.gamma),
                       rng=stream(cfg.seed, "env", key, spec.run))
    net = PolicyNetwork.initialize(stream(cfg.seed, "init", key, spec.run), hidden=tuple(cfg.hidden))
    rule = UpdateRule(spec.variant, spec.alpha, cfg.gamma)
    return train(env, net, rule, cfg.budget, stream(cfg.seed, "action", key, spec.run),
                 record_params=spec.record_params)


def _sweep_task(spec: RunSpec):
    log = training_run(spec)
    return log.diverged, log.final_mean(spec.cfg.budget, spec.cfg.final_fraction)


def run_servo_sweep(cfg: ControlExperimentConfig, jobs: int = 1, per_trial: bool = True) -> list[ResultRow]:
    """Final-performance sweep over (delta_mu, alpha, variant).

    Per run: mean episodic integral return over episodes ending in the last
    ``final_fraction`` of the budget. Diverged runs are flagged and left out
    of the cell mean.
    """
    specs = [RunSpec(cfg, d, a, v, r) for d in cfg.delta_mus for a in cfg.alphas
             for v in cfg.variants for r in range(cfg.runs)]
    outcomes = _map(_sweep_task, specs, jobs)
    rows: list[ResultRow] = []
    pos = 0
    for d in cfg.delta_mus:
        for a in cfg.alphas:
            for v in cfg.variants:
                coords = dict(experiment="servo-sweep", delta_mu=d, alpha=a, variant=v, gamma=cfg.gamma,
                              seed=cfg.seed)
                finals, diverged = [], 0
                for r in range(cfg.runs):
                    bad, final = outcomes[pos]
                    pos += 1
                    if bad or not math.isfinite(final):
                        diverged += bad
                        if per_trial:
                            rows.append(ResultRow(metric="diverged" if bad else "no_final_episodes",
                                                  value=1.0, index=r, **coords))
                        continue
                    finals.append(final)
                    if per_trial:
                        rows.append(ResultRow(metric="final_return", value=final, index=r, **coords))
                mean, se = _mean_se(np.array(finals))
                rows.append(ResultRow(metric="final_return_mean", value=mean, **coords))
                rows.append(ResultRow(metric="final_return_se", value=se, **coords))
                rows.append(ResultRow(metric="runs_ok", value=float(len(finals)), **coords))
                rows.append(ResultRow(metric="runs_diverged", value=float(diverged), **coords))
    return rows


def best_alphas(rows: list[ResultRow], delta_mu: float) -> dict[str, float]:
    """Best step size per variant; ties go to the smaller alpha."""
    best: dict[str, tuple[float, float]] = {}
    for r in rows:
        if r.experiment != "servo-sweep" or r.metric != "final_return_mean" or r.index is not None:
            continue
        if r.delta_mu is None or abs(r.delta_mu - delta_mu) > 1e-12 or not math.isfinite(r.value):
            continue
        cur = best.get(r.variant)
        if cur is None or r.value > cur[1] or (r.value == cur[1] and r.alpha < cur[0]):
            best[r.variant] = (r.alpha, r.value)
    return {v: a for v, (a, _) in best.items()}


def _curve_task(spec: RunSpec):
    log = training_run(spec)
    cfg = spec.cfg
    n_bins = int(math.ceil(cfg.budget / cfg.curve_bin - 1e-9))
    sums = np.zeros(n_bins)
    counts = np.zeros(n_bins)
    for end, ret in zip(log.episode_end, log.episode_return):
        b = min(int(end // cfg.curve_bin), n_bins - 1)
        sums[b] += ret
        counts[b] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        return log.diverged, sums / counts


def run_servo_curves(cfg: ControlExperimentConfig, alphas: dict[str, float] | None = None,
                     jobs: int = 1) -> list[ResultRow]:
    """Learning curves binned by simulated time (``curve_bin`` seconds).

    ``alphas`` maps variant to step size; defaults to ``alpha_dtr`` /
    ``alpha_rp`` from the config. Only the first ``delta_mus`` entry is used.
    """
    if alphas is None:
        alphas = {"dtr": cfg.alpha_dtr, "rp": cfg.alpha_rp}
    missing = [v for v in cfg.variants if alphas.get(v) is None]
    if missing:
        raise ValueError(f"no step size selected for {', '.join(missing)}")
    if cfg.budget <= 0.0:
        return []
    d = cfg.delta_mus[0]
    specs = [RunSpec(cfg, d, alphas[v], v, r) for v in cfg.variants for r in range(cfg.runs)]
    outcomes = _map(_curve_task, specs, jobs)
    rows: list[ResultRow] = []
    for k, v in enumerate(cfg.variants):
        series = [c for bad, c in outcomes[k * cfg.runs:(k + 1) * cfg.runs] if not bad]
        coords = dict(experiment="servo-curves", delta_mu=d, alpha=alphas[v], variant=v, gamma=cfg.gamma,
                      seed=cfg.seed)
        if not series:
            continue
        stacked = np.vstack(series)
        for b in range(stacked.shape[1]):
            col = stacked[:, b]
            col = col[np.isfinite(col)]
            mean, se = _mean_se(col)
            rows.append(ResultRow(metric="return_mean", value=mean, index=b, **coords))
            rows.append(ResultRow(metric="return_se", value=se, index=b, **coords))
            rows.append(ResultRow(metric="runs", value=float(col.size), index=b, **coords))
    return rows


def expected_step_discount(noise: IntervalNoiseModel, gamma: float, samples: int = 100_000,
                           seed: int = 0) -> float:
    """Monte Carlo estimate of ``E[gamma ** delta]`` under the interval model."""
    rng = stream(seed, "expected-discount")
    deltas = np.array([sample_interval(noise, rng) for _ in range(samples)])
    return float(np.mean(np.exp(deltas * math.log(gamma))))
