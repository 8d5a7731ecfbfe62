"""Command-line interface: train, eval, attack, rates, dump, batch and presets."""

import argparse
import json
import logging
import sys
from typing import List, Optional

from ..utils.errors import BidirError
from ..utils.log_setup import configure_logging
from .config import ExperimentConfig, load_config
from .presets import PRESETS
from . import runner

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, help="JSON config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    parser.add_argument("--preset", type=str, help=f"one of {', '.join(PRESETS)}")
    parser.add_argument("--regime", type=str, help="BP, BL or BL_THEN_BP")
    parser.add_argument("--dataset", type=str, help="mnist or cifar10")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--iters", type=int, help="total training iterations")
    parser.add_argument("--no-bias", action="store_true", help="build the preset without biases")
    parser.add_argument("--output", type=str, help="output directory for run folders")
    parser.add_argument("--data-root", type=str, help="dataset root (else $BIDIR_DATA_ROOT)")
    parser.add_argument("--no-progress", action="store_true", help="hide progress bars")
    parser.add_argument("--log-level", type=str, default="INFO")


def _add_checkpoint_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--checkpoint", type=str, required=True, help="checkpoint file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bidir", description="Bidirectional learning experiments"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="train a preset and write metrics and artifacts")
    _add_config_arguments(train)

    evaluate = commands.add_parser("eval", help="robustness report of a checkpoint")
    _add_config_arguments(evaluate)
    _add_checkpoint_argument(evaluate)

    attack = commands.add_parser("attack", help="FGSM accuracy of a checkpoint")
    _add_config_arguments(attack)
    _add_checkpoint_argument(attack)
    attack.add_argument("--epsilon", type=float, help="attack budget (default per dataset)")
    attack.add_argument("--images", type=str, help="write adversarial examples to this file")

    rates = commands.add_parser("rates", help="sigmoid and softmax noise rates of a checkpoint")
    _add_config_arguments(rates)
    _add_checkpoint_argument(rates)

    dump = commands.add_parser("dump", help="weight, adversarial and generated images")
    _add_config_arguments(dump)
    _add_checkpoint_argument(dump)
    dump.add_argument("--out", type=str, required=True, help="output directory")

    batch = commands.add_parser("batch", help="run several config files in parallel processes")
    batch.add_argument("configs", nargs="+", help="JSON config files")
    batch.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    batch.add_argument("--set", dest="overrides", action="append", default=[])
    batch.add_argument("--log-level", type=str, default="INFO")

    commands.add_parser("presets", help="list the named architectures")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults), then short flags, then ``--set`` overrides."""
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = []
    for flag, key in (
        ("preset", "preset"),
        ("regime", "regime"),
        ("dataset", "dataset"),
        ("seed", "seed"),
        ("iters", "total_iters"),
        ("output", "output_dir"),
        ("data_root", "data_root"),
        ("epsilon", "epsilon"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append(f"{key}={json.dumps(value)}")
    if args.no_bias:
        overrides.append("bias=false")
    if args.no_progress or not sys.stderr.isatty():
        overrides.append("progress=false")
    return config.with_overrides(overrides + list(args.overrides)).validate()


def _print_json(values) -> None:
    print(json.dumps(values, indent=2, sort_keys=True))


def dispatch(args: argparse.Namespace) -> None:
    if args.command == "presets":
        for preset in PRESETS.values():
            print(f"{preset.name:12s} {preset.method:7s} {preset.description}")
        return

    level = getattr(logging, args.log_level.upper(), logging.INFO)
    if args.command == "batch":
        configure_logging(level=level)
        _print_json(runner.run_batch(args.configs, args.overrides, args.workers))
        return

    config = config_from_args(args)
    if args.command == "train":
        configure_logging(config.run_dir, level)
        result = runner.run(config)
        final = result.final
        print(f"Run: {config.run_name}")
        print(
            f"Best test accuracy: {result.best_test_accuracy} "
            f"(iteration {result.best_iteration})"
        )
        print(
            f"Final: acc_test={final.acc_test:.4f} acc_noisy={final.acc_noisy:.4f} "
            f"acc_adv={final.acc_adv:.4f} sigmoid_rate={final.r_sigmoid:.4g} "
            f"softmax_rate={final.r_softmax:.4g}"
        )
        print(f"Artifacts saved to {result.run_dir}")
        return

    configure_logging(level=level)
    if args.command == "eval":
        _print_json(runner.evaluate_checkpoint(config, args.checkpoint).to_dict())
    elif args.command == "attack":
        _print_json(runner.attack_checkpoint(config, args.checkpoint, args.images))
    elif args.command == "rates":
        _print_json(runner.rates_checkpoint(config, args.checkpoint))
    elif args.command == "dump":
        runner.dump_checkpoint(config, args.checkpoint, args.out)
        print(f"Images saved to {args.out}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run a command.

    Returns:
        Process exit code: 0 on success, the error's ``exit_code`` for library
        errors (2 config, 3 data, 4 numeric, 5 checkpoint), 1 otherwise
    """
    args = build_parser().parse_args(argv)
    try:
        dispatch(args)
    except BidirError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_UNEXPECTED
    return EXIT_OK
