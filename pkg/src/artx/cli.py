"""Command line entry point: ``artx train | suite | plot | play``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import VARIANTS, ConfigError, RunConfig
from .env_ordeal import Action, OrdealEnv
from .harness import RunFailure, run_suite, run_training
from .neural import Mlp, softmax
from .plots import PlotParseError, emit_plots

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("artx")


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artx", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train one PPO agent")
    train.add_argument("--config", help="key = value config file")
    train.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    suite = sub.add_parser("suite", help="train every variant for every seed and aggregate")
    suite.add_argument("--config")
    suite.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    suite.add_argument("--seeds", type=_int_list, default=[1, 2, 3])
    suite.add_argument("--variants", default="art,art-hl,rnd,none")

    plot = sub.add_parser("plot", help="render SVG charts from an aggregate CSV")
    plot.add_argument("--input", required=True)
    plot.add_argument("--out", required=True)

    play = sub.add_parser("play", help="print an ASCII trace of one episode under a saved policy")
    play.add_argument("--policy", required=True, help="policy checkpoint (policy.mlp)")
    play.add_argument("--layout", default=None)
    play.add_argument("--seed", type=int, default=0)
    play.add_argument("--greedy", action="store_true", help="take the most probable action")
    play.add_argument("--max-steps", type=int, default=500)
    return parser


def play_episode(policy: Mlp, env: OrdealEnv, rng: np.random.Generator, greedy: bool = False, out=None) -> float:
    out = out or sys.stdout
    res = env.reset()
    total = 0.0
    print(f"step 0\n{env.ascii()}", file=out)
    while not res.done:
        p = softmax(policy.logits(res.obs.reshape(-1).astype(np.float64)))
        a = int(np.argmax(p)) if greedy else int(rng.choice(len(p), p=p))
        res = env.step(a)
        total += res.extrinsic
        s = env.state
        print(f"\nstep {s.step_count} action {Action(a).name} reward {res.extrinsic:+g} "
              f"room {s.room.name} sword {s.has_sword}", file=out)
        print(env.ascii(), file=out)
    print(f"\nepisode total {total:+g} in {env.state.step_count} steps", file=out)
    return total


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        if args.command == "train":
            cfg = RunConfig.from_file(args.config, args.overrides)
            result = run_training(cfg)
            print(f"wrote {result.out_dir / 'metrics.csv'} ({len(result.rows)} iterations)")
        elif args.command == "suite":
            cfg = RunConfig.from_file(args.config, args.overrides)
            variants = [v.strip() for v in args.variants.split(",") if v.strip()]
            unknown = [v for v in variants if v not in VARIANTS]
            if unknown or not variants:
                raise ConfigError(f"unknown variants {unknown}; choose from {sorted(VARIANTS)}")
            if not args.seeds:
                raise ConfigError("--seeds must list at least one seed")
            path = run_suite(cfg, args.seeds, variants)
            print(f"wrote {path}")
        elif args.command == "plot":
            for p in emit_plots(args.input, args.out):
                print(f"wrote {p}")
        elif args.command == "play":
            policy = Mlp.loads(Path(args.policy).read_text())
            env = OrdealEnv(args.layout, max_steps=args.max_steps)
            play_episode(policy, env, np.random.default_rng(args.seed), args.greedy)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunFailure, PlotParseError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
