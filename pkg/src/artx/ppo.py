"""Clipped-surrogate PPO over hand-rolled numpy networks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .neural import AdamState, Mlp, adam_step, log_softmax, softmax


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = 0.99
    lambda_gae: float = 0.95
    clip_epsilon: float = 0.2
    epochs_per_update: int = 4
    minibatch_size: int = 256
    steps_per_rollout: int = 2048
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    lr: float = 3e-4
    max_grad_norm: float | None = 0.5

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.lambda_gae <= 1.0:
            raise ValueError(f"lambda_gae must lie in [0, 1], got {self.lambda_gae}")
        if not self.clip_epsilon > 0:
            raise ValueError(f"clip_epsilon must be > 0, got {self.clip_epsilon}")
        if self.epochs_per_update < 1 or self.minibatch_size < 1 or self.steps_per_rollout < 1:
            raise ValueError("epochs_per_update, minibatch_size and steps_per_rollout must be >= 1")
        if self.value_coef < 0 or self.entropy_coef < 0:
            raise ValueError("value_coef and entropy_coef must be >= 0")
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")


@dataclass
class Transition:
    obs: np.ndarray
    action: int
    log_prob: float
    value: float
    extrinsic: float
    intrinsic: float
    done: bool


@dataclass
class RolloutBuffer:
    transitions: list[Transition] = field(default_factory=list)
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    def add(self, t: Transition) -> None:
        self.transitions.append(t)

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([t.extrinsic + t.intrinsic for t in self.transitions])

    @property
    def dones(self) -> np.ndarray:
        return np.array([t.done for t in self.transitions], dtype=bool)

    @property
    def values(self) -> np.ndarray:
        return np.array([t.value for t in self.transitions])

    def finalize(self, last_value: float, gamma: float, lambda_gae: float, normalize: bool = True) -> None:
        if not self.transitions:
            raise ValueError("cannot finalize an empty rollout buffer")
        adv, ret = gae(self.rewards, self.values, self.dones, last_value, gamma, lambda_gae)
        if normalize:
            adv = normalize_advantages(adv)
        self.advantages, self.returns = adv, ret


def act(policy: Mlp, value_net: Mlp, x: np.ndarray, rng: np.random.Generator) -> tuple[int, float, float]:
    """Sample an action from the policy; return it with its log-probability and the value estimate."""
    logp = log_softmax(policy.logits(x))
    u = rng.random()
    cdf = np.cumsum(np.exp(logp))
    a = min(int(np.searchsorted(cdf, u * cdf[-1], side="right")), logp.shape[0] - 1)
    value = float(value_net.forward(x)[0])
    return a, float(logp[a]), value


def discounted_return(rewards, gamma: float, dones=None) -> np.ndarray:
    """G_t = sum_j gamma^(j-t) r_j, restarting after each done flag."""
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.zeros(len(rewards), dtype=bool) if dones is None else np.asarray(dones, dtype=bool)
    out = np.empty_like(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        if dones[t]:
            running = 0.0
        running = rewards[t] + gamma * running
        out[t] = running
    return out


def gae(rewards, values, dones, last_value: float, gamma: float, lambda_gae: float):
    """Generalized advantage estimates and value targets (un-normalized)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    n = len(rewards)
    if n == 0:
        raise ValueError("empty rollout")
    adv = np.empty(n)
    next_value = last_value
    running = 0.0
    for t in range(n - 1, -1, -1):
        live = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * live - values[t]
        running = delta + gamma * lambda_gae * live * running
        adv[t] = running
        next_value = values[t]
    return adv, adv + values


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    std = adv.std()
    return (adv - adv.mean()) / (std if std > 1e-8 else 1.0)


def compute_gae(buffer: RolloutBuffer, value_net: Mlp, gamma: float, lambda_gae: float, bootstrap_obs=None):
    """Finalize ``buffer`` using ``value_net`` on ``bootstrap_obs`` for a truncated tail."""
    last_value = 0.0
    if buffer.transitions and not buffer.transitions[-1].done:
        if bootstrap_obs is None:
            raise ValueError("bootstrap observation required when the rollout ends mid-episode")
        last_value = float(value_net.forward(bootstrap_obs)[0])
    buffer.finalize(last_value, gamma, lambda_gae)
    return buffer.advantages, buffer.returns


def clipped_surrogate(ratio, advantage, epsilon: float):
    ratio = np.asarray(ratio, dtype=np.float64)
    return np.minimum(ratio * advantage, np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage)


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float


def ppo_update(
    buffer: RolloutBuffer,
    policy: Mlp,
    value_net: Mlp,
    policy_adam: AdamState,
    value_adam: AdamState,
    config: PpoConfig,
    rng: np.random.Generator,
    inputs: np.ndarray | None = None,
) -> UpdateStats:
    """Several epochs of minibatch Adam steps on the clipped PPO objective.

    ``inputs`` holds the network input row per transition; by default the
    transitions' observations are flattened.
    """
    if buffer.advantages is None:
        raise ValueError("buffer must be finalized before the update")
    n = len(buffer)
    x_all = inputs if inputs is not None else np.stack([np.asarray(t.obs, np.float64).ravel() for t in buffer.transitions])
    actions = np.array([t.action for t in buffer.transitions])
    old_logp = np.array([t.log_prob for t in buffer.transitions])
    adv_all, ret_all = buffer.advantages, buffer.returns
    eps = config.clip_epsilon
    sums = np.zeros(5)
    n_batches = 0
    for _ in range(config.epochs_per_update):
        perm = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            idx = perm[start : start + config.minibatch_size]
            m = len(idx)
            x, a, adv = x_all[idx], actions[idx], adv_all[idx]

            logits = policy.logits(x)
            logp_all = log_softmax(logits)
            p = np.exp(logp_all)
            logp = logp_all[np.arange(m), a]
            log_ratio = logp - old_logp[idx]
            ratio = np.exp(log_ratio)
            surr = clipped_surrogate(ratio, adv, eps)
            entropy = -(p * logp_all).sum(axis=1)
            # d surr / d logp is ratio * A where the unclipped term is the active minimum
            unclipped_active = ratio * adv <= np.clip(ratio, 1 - eps, 1 + eps) * adv
            g_logp = np.where(unclipped_active, ratio * adv, 0.0)
            onehot = np.zeros_like(p)
            onehot[np.arange(m), a] = 1.0
            grad = -g_logp[:, None] * (onehot - p)
            grad += config.entropy_coef * p * (logp_all + entropy[:, None])
            policy.backward(grad / m, at_logits=True)
            adam_step(policy, policy_adam, config.max_grad_norm)

            v = value_net.forward(x)[:, 0]
            err = v - ret_all[idx]
            value_net.backward((config.value_coef * 2.0 * err / m)[:, None])
            adam_step(value_net, value_adam, config.max_grad_norm)

            sums += [
                -surr.mean(),
                (err * err).mean(),
                entropy.mean(),
                (np.abs(ratio - 1.0) > eps).mean(),
                ((ratio - 1.0) - log_ratio).mean(),
            ]
            n_batches += 1
    s = sums / max(n_batches, 1)
    return UpdateStats(*(float(v) for v in s))


def policy_probs(policy: Mlp, x) -> np.ndarray:
    return softmax(policy.logits(x))
