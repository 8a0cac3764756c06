"""Command-line entry point.

Every figure/table analog has one subcommand:
  setting, grid, sweep-r, distances, robustness, complexity, render, advinit.
All take --config <json>; --seed and --out override the config in place.
"""

from __future__ import annotations

import argparse
import os
from dataclasses import replace

from ..advinit import make_adversarial_init
from ..errors import ConfigError
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import ExperimentConfig, load_config
from .experiments import (build_datasets, heuristic_grid, run_complexity,
                          run_distances, run_robustness, run_setting, sweep_r,
                          _margin_box, _role_seed, _vanilla, _CORPUS, _PRETRAIN)
from .render import render_decision_boundary
from .results import emit_results

DEFAULT_OUT_ENV = "SGDLAB_OUT"


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    out = args.out or os.environ.get(DEFAULT_OUT_ENV)
    if out:
        cfg = replace(cfg, output_dir=out)
    return cfg


def _emit(table, cfg: ExperimentConfig) -> None:
    csv_path, json_path = emit_results(table, cfg.output_dir)
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sgdlab",
                                     description="Desk-scale SGD training laboratory")
    parser.add_argument("--config", help="JSON experiment configuration")
    parser.add_argument("--seed", type=int, help="run a single seed only")
    parser.add_argument("--out", help="output directory override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setting", help="run one of the four intro protocols")
    p.add_argument("k", type=int, choices=(1, 2, 3, 4))
    sub.add_parser("grid", help="8 heuristic modes x 2 initializations")
    p = sub.add_parser("sweep-r", help="replication-factor sweep")
    p.add_argument("--r-values", type=int, nargs="+", default=None)
    sub.add_parser("distances", help="travelled-distance table")
    sub.add_parser("robustness", help="FGSM robustness curves")
    sub.add_parser("complexity", help="norm proxies of trained models")
    p = sub.add_parser("render", help="render a checkpoint's decision boundary")
    p.add_argument("checkpoint")
    p.add_argument("svg_out")
    p.add_argument("--grid-res", type=int, default=None)
    sub.add_parser("advinit", help="build and save an adversarial initializer")

    args = parser.parse_args(argv)
    cfg = _load(args)

    if args.command == "setting":
        table, _ = run_setting(args.k, cfg)
        _emit(table, cfg)
    elif args.command == "grid":
        table, _ = heuristic_grid(cfg)
        _emit(table, cfg)
    elif args.command == "sweep-r":
        table = sweep_r(cfg, args.r_values)
        _emit(table, cfg)
    elif args.command == "distances":
        table, _ = run_distances(cfg)
        _emit(table, cfg)
    elif args.command == "robustness":
        table = run_robustness(cfg)
        _emit(table, cfg)
    elif args.command == "complexity":
        table = run_complexity(cfg)
        _emit(table, cfg)
    elif args.command == "render":
        ckpt = load_checkpoint(args.checkpoint)
        train_ds, _ = build_datasets(cfg)
        if train_ds.dim != 2:
            raise ConfigError("rendering needs a 2-D dataset")
        render_decision_boundary(ckpt.spec, ckpt.to_weights(), train_ds,
                                 _margin_box(train_ds),
                                 args.grid_res or cfg.grid_res, args.svg_out)
        print(f"wrote {args.svg_out}")
    elif args.command == "advinit":
        train_ds, _ = build_datasets(cfg)
        os.makedirs(cfg.output_dir, exist_ok=True)
        for seed in cfg.seeds:
            corpus = replace(cfg.adv, seed=_role_seed(seed, _CORPUS))
            result = make_adversarial_init(
                train_ds, cfg.spec, corpus,
                _vanilla(cfg, _role_seed(seed, _PRETRAIN)), seed)
            path = os.path.join(cfg.output_dir, f"advinit_seed{seed}.ckpt")
            save_checkpoint(Checkpoint.from_weights(cfg.spec, result.weights), path)
            print(f"wrote {path} (corpus acc {result.corpus_train_acc:.3f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
