"""Observation encoders producing ART-ready vectors in [0, 1]^d."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

OBS_SHAPE = (8, 5, 5)
OBS_DIM = 8 * 5 * 5


class ObservationIntegrityError(ValueError):
    """Observation is not a one-hot tile map."""


class EncoderMode(str, Enum):
    HEADLESS = "headless"
    STATIC_HEAD = "static_head"


@dataclass(frozen=True)
class EncoderSpec:
    mode: EncoderMode = EncoderMode.HEADLESS
    head_dim: int = 16
    seed: int = 0
    input_shape: tuple[int, int, int] = OBS_SHAPE

    def __post_init__(self):
        object.__setattr__(self, "mode", EncoderMode(self.mode))
        if self.head_dim < 1:
            raise ValueError(f"head_dim must be >= 1, got {self.head_dim}")

    @property
    def out_dim(self) -> int:
        if self.mode is EncoderMode.HEADLESS:
            return int(np.prod(self.input_shape))
        return self.head_dim


def check_observation(obs, shape=OBS_SHAPE) -> np.ndarray:
    obs = np.asarray(obs)
    if obs.shape != tuple(shape):
        raise ObservationIntegrityError(f"observation shape {obs.shape}, expected {tuple(shape)}")
    if ((obs != 0) & (obs != 1)).any():
        raise ObservationIntegrityError("observation entries must be 0 or 1")
    active = obs.sum(axis=0)
    bad = np.argwhere(active != 1)
    if bad.size:
        r, c = bad[0]
        raise ObservationIntegrityError(
            f"cell ({r}, {c}) has {int(active[r, c])} active channels, expected exactly 1"
        )
    return obs


class Encoder:
    """Headless flatten or a fixed random projection head squashed by a logistic.

    The projection matrix is drawn once from ``spec.seed`` and never trained.
    """

    def __init__(self, spec: EncoderSpec | None = None):
        self.spec = spec if spec is not None else EncoderSpec()
        n_in = int(np.prod(self.spec.input_shape))
        self._proj = None
        if self.spec.mode is EncoderMode.STATIC_HEAD:
            rng = np.random.default_rng(self.spec.seed)
            self._proj = rng.standard_normal((self.spec.head_dim, n_in)) / np.sqrt(n_in)

    @property
    def out_dim(self) -> int:
        return self.spec.out_dim

    def __call__(self, obs) -> np.ndarray:
        return self.encode(obs)

    def encode(self, obs) -> np.ndarray:
        flat = check_observation(obs, self.spec.input_shape).reshape(-1).astype(np.float64)
        if self._proj is None:
            return flat
        return 1.0 / (1.0 + np.exp(-(self._proj @ flat)))


def encode(obs, spec: EncoderSpec) -> np.ndarray:
    return Encoder(spec).encode(obs)
