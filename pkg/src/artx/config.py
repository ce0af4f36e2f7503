"""Flat ``key = value`` run configuration with dotted keys."""

from __future__ import annotations

import os
from pathlib import Path

from .curiosity import ArtBonus, NoBonus, RndBonus
from .encoder import Encoder, EncoderMode, EncoderSpec
from .fuzzy_art import ArtParams
from .ppo import PpoConfig


class ConfigError(ValueError):
    pass


# value type is taken from the default; None defaults are resolved at build time
DEFAULTS: dict[str, object] = {
    "seed": 0,
    "total_env_steps": 200_000,
    "log_interval": 10,
    "out_dir": "runs/default",
    "env.layout": "",
    "env.max_steps": 500,
    "curiosity.kind": "art",
    "curiosity.k": 0.1,
    "curiosity.rnd_lr": 1e-3,
    "art.alpha": 0.01,
    "art.rho": "auto",
    "art.beta": 1.0,
    "art.max_categories": 0,
    "encoder.mode": "headless",
    "encoder.head_dim": 16,
    "encoder.seed": 0,
    "net.hidden": 64,
    "ppo.gamma": 0.99,
    "ppo.lambda_gae": 0.95,
    "ppo.clip_epsilon": 0.2,
    "ppo.epochs_per_update": 4,
    "ppo.minibatch_size": 256,
    "ppo.steps_per_rollout": 2048,
    "ppo.value_coef": 0.5,
    "ppo.entropy_coef": 0.01,
    "ppo.lr": 3e-4,
    "ppo.max_grad_norm": 0.5,
}

VARIANTS: dict[str, dict[str, object]] = {
    "art": {"curiosity.kind": "art", "encoder.mode": "static_head"},
    "art-hl": {"curiosity.kind": "art", "encoder.mode": "headless"},
    "rnd": {"curiosity.kind": "rnd"},
    "none": {"curiosity.kind": "none"},
}


def _coerce(key: str, raw) -> object:
    default = DEFAULTS[key]
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict[str, object]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, val)
    return values


class RunConfig:
    """Resolved run settings; ``values`` maps every dotted key to a typed value."""

    def __init__(self, values: dict[str, object] | None = None):
        merged = dict(DEFAULTS)
        for k, v in (values or {}).items():
            if k not in DEFAULTS:
                raise ConfigError(f"unknown key {k!r}")
            merged[k] = _coerce(k, v)
        self.values = merged
        self.validate()

    @classmethod
    def from_file(cls, path: str | Path | None, overrides: list[str] | None = None) -> "RunConfig":
        values = {}
        if path is not None:
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {p}")
            values.update(parse_config_text(p.read_text(), str(p)))
        for item in overrides or []:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            k, v = item.split("=", 1)
            k = k.strip()
            if k not in DEFAULTS:
                raise ConfigError(f"unknown key {k!r}")
            values[k] = _coerce(k, v)
        cfg = cls(values)
        env_out = os.environ.get("ARTX_OUT_DIR")
        if env_out:
            cfg.values["out_dir"] = env_out
        return cfg

    def replace(self, **updates) -> "RunConfig":
        vals = dict(self.values)
        vals.update(updates)
        return RunConfig(vals)

    def with_variant(self, variant: str) -> "RunConfig":
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
        return self.replace(**VARIANTS[variant])

    def __getitem__(self, key: str):
        return self.values[key]

    def validate(self) -> None:
        v = self.values
        if v["curiosity.kind"] not in ("art", "rnd", "none"):
            raise ConfigError(f"curiosity.kind must be art, rnd or none, got {v['curiosity.kind']!r}")
        if v["encoder.mode"] not in ("headless", "static_head"):
            raise ConfigError(f"encoder.mode must be headless or static_head, got {v['encoder.mode']!r}")
        if v["art.rho"] != "auto":
            try:
                float(v["art.rho"])
            except ValueError:
                raise ConfigError(f"art.rho must be a number or 'auto', got {v['art.rho']!r}") from None
        if v["env.layout"] and not Path(str(v["env.layout"])).is_file():
            raise ConfigError(f"env.layout not found: {v['env.layout']}")
        try:
            ppo = self.ppo()
            if v["curiosity.kind"] == "art":
                self.art_params()
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if v["total_env_steps"] < ppo.steps_per_rollout:
            raise ConfigError("total_env_steps must be >= ppo.steps_per_rollout")
        if v["log_interval"] < 1:
            raise ConfigError("log_interval must be >= 1")

    def ppo(self) -> PpoConfig:
        v = self.values
        mgn = float(v["ppo.max_grad_norm"])
        return PpoConfig(
            gamma=v["ppo.gamma"],
            lambda_gae=v["ppo.lambda_gae"],
            clip_epsilon=v["ppo.clip_epsilon"],
            epochs_per_update=v["ppo.epochs_per_update"],
            minibatch_size=v["ppo.minibatch_size"],
            steps_per_rollout=v["ppo.steps_per_rollout"],
            value_coef=v["ppo.value_coef"],
            entropy_coef=v["ppo.entropy_coef"],
            lr=v["ppo.lr"],
            max_grad_norm=mgn if mgn > 0 else None,
        )

    def encoder_spec(self) -> EncoderSpec:
        v = self.values
        return EncoderSpec(EncoderMode(v["encoder.mode"]), v["encoder.head_dim"], v["encoder.seed"])

    def art_params(self) -> ArtParams:
        v = self.values
        rho = v["art.rho"]
        if rho == "auto":
            rho = 1.0 if v["encoder.mode"] == "headless" else 0.9
        cap = v["art.max_categories"]
        return ArtParams(alpha=v["art.alpha"], rho=float(rho), beta=v["art.beta"], max_categories=cap or None)

    def build_provider(self, rng):
        kind = self.values["curiosity.kind"]
        k = self.values["curiosity.k"]
        if kind == "none":
            return NoBonus()
        encoder = Encoder(self.encoder_spec())
        if kind == "art":
            return ArtBonus(k, encoder, self.art_params())
        hidden = self.values["net.hidden"]
        return RndBonus(k, self.values["curiosity.rnd_lr"], encoder, rng, sizes=(0, hidden, hidden // 2))

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.values.items())
