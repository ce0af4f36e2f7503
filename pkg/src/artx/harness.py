"""Seeded training runs, multi-seed suites, and their CSV outputs."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .config import RunConfig
from .env_ordeal import N_ACTIONS, OrdealEnv
from .neural import AdamState, Hidden, Mlp, Output
from .ppo import RolloutBuffer, Transition, act, ppo_update

log = logging.getLogger(__name__)

# SeedSequence children, in spawn order
STREAMS = ("env", "policy_init", "sampling", "art_shuffle", "rnd_init", "update")


class RunFailure(RuntimeError):
    pass


@dataclass
class MetricsRow:
    iteration: int
    env_steps: int
    episodes_completed: int
    mean_episode_extrinsic: float
    mean_episode_intrinsic: float
    mean_episode_length: float
    art_category_count: int
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float


METRICS_HEADER = [f.name for f in fields(MetricsRow)]
EPISODE_HEADER = ["episode", "env_steps", "extrinsic", "intrinsic", "length"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(ss)) for name, ss in zip(STREAMS, children)}


def build_networks(obs_dim: int, hidden: int, rng: np.random.Generator) -> tuple[Mlp, Mlp]:
    policy = Mlp([obs_dim, hidden, hidden, N_ACTIONS], Hidden.TANH, Output.SOFTMAX, rng, output_gain=0.01)
    value_net = Mlp([obs_dim, hidden, hidden, 1], Hidden.TANH, Output.LINEAR, rng)
    return policy, value_net


@dataclass
class RunResult:
    rows: list[MetricsRow]
    episodes: list[tuple[int, int, float, float, int]]
    out_dir: Path
    policy: Mlp
    value_net: Mlp
    provider: object


def run_training(config: RunConfig, env=None, out_dir: str | Path | None = None) -> RunResult:
    """Train PPO on extrinsic + intrinsic reward until the step budget is spent.

    Writes ``metrics.csv`` (one row per update), ``episodes.csv`` (one row
    per finished episode), the resolved config and the final checkpoints.
    ``env`` may be any object with ``reset()``/``step(a)`` returning results
    carrying ``obs``, ``extrinsic`` and ``done``.
    """
    out = Path(out_dir if out_dir is not None else config["out_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(config.dumps())
    except OSError as e:
        raise RunFailure(f"cannot prepare output directory {out}: {e}") from e

    ppo_cfg = config.ppo()
    streams = make_streams(config["seed"])
    if env is None:
        env = OrdealEnv(config["env.layout"] or None, max_steps=config["env.max_steps"])
    provider = config.build_provider(streams["rnd_init"])

    first = env.reset()
    obs = first.obs
    obs_dim = int(np.asarray(obs).size)
    policy, value_net = build_networks(obs_dim, config["net.hidden"], streams["policy_init"])
    policy_adam = AdamState(policy, lr=ppo_cfg.lr)
    value_adam = AdamState(value_net, lr=ppo_cfg.lr)
    sampling, update_rng = streams["sampling"], streams["update"]

    n_iter = config["total_env_steps"] // ppo_cfg.steps_per_rollout
    T = ppo_cfg.steps_per_rollout
    rows: list[MetricsRow] = []
    episodes: list[tuple[int, int, float, float, int]] = []
    ep_ext = ep_int = 0.0
    ep_len = 0
    env_steps = 0

    try:
        metrics_f = open(out / "metrics.csv", "w", newline="")
        episodes_f = open(out / "episodes.csv", "w", newline="")
    except OSError as e:
        raise RunFailure(f"cannot open metrics files in {out}: {e}") from e
    with metrics_f, episodes_f:
        mw, ew = csv.writer(metrics_f), csv.writer(episodes_f)
        mw.writerow(METRICS_HEADER)
        ew.writerow(EPISODE_HEADER)
        try:
            x = np.asarray(obs, dtype=np.float64).ravel()
            for it in range(1, n_iter + 1):
                buf = RolloutBuffer()
                inputs = np.empty((T, obs_dim))
                finished = []
                for t in range(T):
                    a, logp, v = act(policy, value_net, x, sampling)
                    res = env.step(a)
                    bonus = 0.0 if res.done else float(provider(res.obs))
                    buf.add(Transition(obs, a, logp, v, res.extrinsic, bonus, res.done))
                    inputs[t] = x
                    env_steps += 1
                    ep_ext += res.extrinsic
                    ep_int += bonus
                    ep_len += 1
                    if res.done:
                        finished.append((len(episodes) + len(finished) + 1, env_steps, ep_ext, ep_int, ep_len))
                        ep_ext = ep_int = 0.0
                        ep_len = 0
                        res = env.reset()
                    obs = res.obs
                    x = np.asarray(obs, dtype=np.float64).ravel()
                last_value = 0.0 if buf.transitions[-1].done else float(value_net.forward(x)[0])
                buf.finalize(last_value, ppo_cfg.gamma, ppo_cfg.lambda_gae)
                stats = ppo_update(buf, policy, value_net, policy_adam, value_adam, ppo_cfg, update_rng, inputs)

                if finished:
                    arr = np.array([f[2:] for f in finished], dtype=np.float64)
                    means = arr.mean(axis=0)
                else:
                    means = np.full(3, np.nan)
                row = MetricsRow(
                    iteration=it,
                    env_steps=env_steps,
                    episodes_completed=len(finished),
                    mean_episode_extrinsic=float(means[0]),
                    mean_episode_intrinsic=float(means[1]),
                    mean_episode_length=float(means[2]),
                    art_category_count=int(provider.n_categories),
                    policy_loss=stats.policy_loss,
                    value_loss=stats.value_loss,
                    entropy=stats.entropy,
                    clip_fraction=stats.clip_fraction,
                )
                rows.append(row)
                episodes.extend(finished)
                mw.writerow([_fmt(getattr(row, k)) for k in METRICS_HEADER])
                ew.writerows([[_fmt(v) for v in f] for f in finished])
                metrics_f.flush()
                episodes_f.flush()
                if it % config["log_interval"] == 0 or it == n_iter:
                    log.info(
                        "iter %d steps %d ext %.3f int %.3f len %.1f cats %d",
                        it, env_steps, row.mean_episode_extrinsic, row.mean_episode_intrinsic,
                        row.mean_episode_length, row.art_category_count,
                    )
        except OSError as e:
            raise RunFailure(f"I/O failure during training: {e}") from e

    try:
        (out / "policy.mlp").write_text(policy.dumps())
        (out / "value.mlp").write_text(value_net.dumps())
        if getattr(provider, "kind", None) == "art":
            (out / "art.txt").write_text(provider.model.dumps())
        elif getattr(provider, "kind", None) == "rnd":
            (out / "rnd_predictor.mlp").write_text(provider.predictor.dumps())
            (out / "rnd_target.mlp").write_text(provider.target.dumps())
    except OSError as e:
        raise RunFailure(f"cannot write checkpoints: {e}") from e
    return RunResult(rows, episodes, out, policy, value_net, provider)


def read_metrics(path: str | Path) -> list[dict[str, float]]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != METRICS_HEADER:
            raise ValueError(f"{path}: header {reader.fieldnames} does not match {METRICS_HEADER}")
        return [{k: float(v) for k, v in row.items()} for row in reader]


def read_episodes(path: str | Path) -> list[dict[str, float]]:
    with open(path, newline="") as f:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(f)]


# aggregate column stem -> metrics.csv field
AGG_METRICS = {
    "extrinsic": "mean_episode_extrinsic",
    "intrinsic": "mean_episode_intrinsic",
    "length": "mean_episode_length",
    "categories": "art_category_count",
}
AGG_HEADER = ["variant", "iteration", "env_steps", "n_runs"] + [
    f"{stem}_{stat}" for stem in AGG_METRICS for stat in ("mean", "std")
] + ["note"]


def aggregate_runs(runs: dict[str, list[list[dict[str, float]]]]) -> list[list[str]]:
    """Per-iteration mean and sample std across seeds, for each variant."""
    table = []
    for variant, per_seed in runs.items():
        if not per_seed:
            continue
        n_rows = min(len(r) for r in per_seed)
        for i in range(n_rows):
            rows = [r[i] for r in per_seed]
            line = [variant, str(int(rows[0]["iteration"])), str(int(rows[0]["env_steps"])), str(len(rows))]
            for field in AGG_METRICS.values():
                vals = np.array([r[field] for r in rows])
                vals = vals[~np.isnan(vals)]
                if vals.size == 0:
                    mean = std = math.nan
                else:
                    mean = float(vals.mean())
                    std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                line += [_fmt(mean), _fmt(std)]
            table.append(line + [""])
    return table


def run_suite(
    base: RunConfig,
    seeds: list[int],
    variants: list[str],
    out_dir: str | Path | None = None,
    runner=run_training,
) -> Path:
    """Train every (variant, seed) pair and write ``aggregate.csv``.

    Failed runs are logged, recorded as a note row, and left out of the
    aggregate.
    """
    if not seeds:
        raise ValueError("run_suite needs at least one seed")
    out = Path(out_dir if out_dir is not None else base["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    collected: dict[str, list[list[dict[str, float]]]] = {}
    notes = []
    for variant in variants:
        collected[variant] = []
        for seed in seeds:
            run_dir = out / variant / f"seed{seed}"
            try:
                cfg = base.with_variant(variant).replace(seed=seed, out_dir=str(run_dir))
                runner(cfg, out_dir=run_dir)
                collected[variant].append(read_metrics(run_dir / "metrics.csv"))
            except Exception as e:  # noqa: BLE001 - one failed run must not sink the suite
                log.warning("run %s seed %s failed: %s", variant, seed, e)
                notes.append([variant, "", "", "0"] + [""] * (2 * len(AGG_METRICS)) + [f"run failed (seed {seed}): {e}"])
    path = out / "aggregate.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(AGG_HEADER)
        w.writerows(aggregate_runs(collected))
        w.writerows(notes)
    return path


def final_fraction_mean(rows: list, field: str = "mean_episode_extrinsic", fraction: float = 0.1) -> float:
    """Mean of ``field`` over the last ``fraction`` of metric rows, ignoring NaNs."""
    if not rows:
        return math.nan
    n = max(1, int(round(len(rows) * fraction)))
    vals = [r[field] if isinstance(r, dict) else getattr(r, field) for r in rows[-n:]]
    vals = [v for v in vals if not math.isnan(v)]
    return float(np.mean(vals)) if vals else math.nan


def metrics_as_dicts(rows: list[MetricsRow]) -> list[dict]:
    return [asdict(r) for r in rows]
