"""Intrinsic reward providers: ART pseudo-counts, RND, and none."""

from __future__ import annotations

import math

import numpy as np

from .encoder import Encoder, EncoderSpec
from .fuzzy_art import ArtModel, ArtParams
from .neural import AdamState, Hidden, Mlp, Output, adam_step


class RunningMoments:
    """Welford accumulator for a scalar stream."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else 0.0


def combine_rewards(extrinsic: float, intrinsic: float) -> float:
    return extrinsic + intrinsic


def zero_bonus(obs=None) -> float:
    return 0.0


class NoBonus:
    kind = "none"

    def __call__(self, obs) -> float:
        return 0.0

    @property
    def n_categories(self) -> int:
        return -1


class ArtBonus:
    """Count-based bonus ``k / sqrt(N(j))`` over Fuzzy ART categories.

    Uses the count after the current visit has been credited, so a first
    visit pays exactly ``k``.
    """

    kind = "art"

    def __init__(self, k: float = 0.1, encoder: Encoder | None = None, params: ArtParams | None = None):
        if not k > 0:
            raise ValueError(f"bonus scale k must be > 0, got {k}")
        self.k = k
        self.encoder = encoder if encoder is not None else Encoder()
        self.model = ArtModel(self.encoder.out_dim, params)

    def __call__(self, obs) -> float:
        j = self.model.classify_learn(self.encoder(obs))
        return self.k / math.sqrt(self.model._n[j])

    @property
    def n_categories(self) -> int:
        return self.model.n_categories


class RndBonus:
    """Prediction error of a trained network against a frozen random one.

    The raw error is divided by the running standard deviation of all errors
    seen so far (1 until two errors have been seen).
    """

    kind = "rnd"

    def __init__(
        self,
        k: float = 0.1,
        lr: float = 1e-3,
        encoder: Encoder | None = None,
        rng: np.random.Generator | None = None,
        sizes=(200, 64, 32),
        predictor: Mlp | None = None,
        target: Mlp | None = None,
    ):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.k = k
        self.encoder = encoder if encoder is not None else Encoder()
        sizes = (self.encoder.out_dim, *sizes[1:])
        self.target = target if target is not None else Mlp(sizes, Hidden.RELU, Output.LINEAR, rng)
        self.predictor = predictor if predictor is not None else Mlp(sizes, Hidden.RELU, Output.LINEAR, rng)
        self.adam = AdamState(self.predictor, lr=lr)
        self.moments = RunningMoments()
        self.last_error = 0.0

    def raw_error(self, x: np.ndarray) -> float:
        diff = self.predictor.forward(x) - self.target.forward(x)
        return float(np.mean(diff * diff))

    def __call__(self, obs) -> float:
        x = self.encoder(obs)
        diff = self.predictor.forward(x) - self.target.forward(x)
        err = float(np.mean(diff * diff))
        self.predictor.backward(2.0 * diff / diff.size)
        adam_step(self.predictor, self.adam)
        self.moments.update(err)
        self.last_error = err
        if self.k == 0 or err == 0.0:
            return 0.0
        scale = math.sqrt(self.moments.variance + 1e-8) if self.moments.count >= 2 else 1.0
        return self.k * err / scale

    @property
    def n_categories(self) -> int:
        return -1


def art_bonus(obs, provider: ArtBonus) -> float:
    return provider(obs)


def rnd_bonus(obs, provider: RndBonus) -> float:
    return provider(obs)
