"""Runs one configured experiment end to end and evaluates saved checkpoints."""

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..data.dataset import Dataset, load_dataset
from ..layers.network import BidirNetwork
from ..optim.adam import Adam
from ..robustness.attacks import AttackConfig, fgsm
from ..robustness.evaluator import RobustnessEvaluator
from ..robustness.rates import accuracy, sigmoid_rate, softmax_rate
from ..tensor.rng import STREAM_ADVERSARY_INIT, STREAM_LATENT, Rng
from ..training.base import TrainResult
from ..training.bidir import BiPropTrainer, BidirOptimizers
from ..training.han import HANOptimizers, HANTrainer, LatentSampler, make_discriminator
from ..training.schedule import Regime, Schedule
from ..utils.log_setup import configure_logging
from ..utils.metrics import MetricsReport
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import ExperimentConfig, load_config, save_config
from .images import dump_image_grid, dump_weight_grid, dump_weight_image
from .metrics_csv import write_metrics_csv
from .presets import build_network

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"
ADVERSARY_CHECKPOINT = "adversary.ckpt"


@dataclass
class RunResult:
    """Outcome of ``run``: the evaluation series and where the artifacts went."""

    config: ExperimentConfig
    history: List[MetricsReport]
    best_iteration: int
    best_test_accuracy: Optional[float]
    run_dir: str

    @property
    def final(self) -> MetricsReport:
        return self.history[-1]


def make_adam(config: ExperimentConfig) -> Adam:
    return Adam(config.lr, config.beta1, config.beta2, config.eps_hat)


def load_splits(config: ExperimentConfig) -> Tuple[Dataset, Dataset]:
    """Train and test splits, cut to the configured limits."""
    train = load_dataset(config.dataset, "train", config.data_root)
    test = load_dataset(config.dataset, "test", config.data_root)
    if config.train_limit is not None:
        train = train.subset(config.train_limit)
    if config.test_limit is not None:
        test = test.subset(config.test_limit)
    return train, test


def make_evaluator(config: ExperimentConfig, test: Dataset) -> RobustnessEvaluator:
    return RobustnessEvaluator(
        test.images,
        test.labels,
        AttackConfig(config.attack_epsilon),
        noise_fraction=config.noise_fraction,
        noise_mode=config.noise_mode,
        seed=config.seed,
        batch_size=config.eval_batch_size,
    )


def build_trainer(config: ExperimentConfig, net: BidirNetwork, evaluator=None):
    """
    Trainer and its name-keyed optimizers for the config's method and regime.

    Returns:
        Tuple of (trainer, optimizers)
    """
    schedule = Schedule(Regime.parse(config.regime), config.iterations, config.eval_every)
    common = dict(
        batch_size=config.batch_size,
        seed=config.seed,
        evaluator=evaluator,
        progress=config.progress,
    )
    if config.method == "han":
        discriminator = make_discriminator(net, Rng(config.seed).derive(STREAM_ADVERSARY_INIT))
        opts = HANOptimizers(make_adam(config), make_adam(config), make_adam(config))
        trainer = HANTrainer(net, discriminator, schedule, opts, latent=config.latent, **common)
        optimizers = {
            "classifier": opts.classifier,
            "discriminator": opts.discriminator,
            "generator": opts.generator,
        }
    else:
        opts = BidirOptimizers(make_adam(config), make_adam(config))
        trainer = BiPropTrainer(
            net,
            schedule,
            opts,
            generator_loss=config.generator_loss,
            gen_first=config.gen_first,
            **common,
        )
        optimizers = {"disc": opts.disc, "gen": opts.gen}
    return trainer, optimizers


def first_parametric_layer(net: BidirNetwork):
    return net.layers[net.output_index]


def generated_images(net: BidirNetwork, config: ExperimentConfig) -> np.ndarray:
    """One image per class one-hot (biprop) or from ``dump_count`` latent draws (han)."""
    if config.method == "han":
        sampler = LatentSampler(
            Rng(config.seed).derive(STREAM_LATENT), net.n_classes, config.latent
        )
        return net.generate(sampler.sample(max(config.dump_count, 1)))
    return net.generate(np.eye(net.n_classes, dtype=net.dtype))


def dump_artifacts(
    net: BidirNetwork, config: ExperimentConfig, test: Dataset, out_dir: str
) -> None:
    """
    Write the first-layer weights, adversarial examples and generated images.

    Files: ``weights.pgm`` (all units), ``weights/unit_<i>.pgm`` per unit,
    ``adversarial.pgm`` (clean row on top, attacked row below) and
    ``generated.pgm``; ``.ppm`` instead for three-channel data.
    """
    ext = "ppm" if test.image_shape[0] == 3 else "pgm"
    layer = first_parametric_layer(net)
    image_shape = test.image_shape

    dump_weight_grid(layer, os.path.join(out_dir, f"weights.{ext}"), image_shape)
    unit_dir = os.path.join(out_dir, "weights")
    os.makedirs(unit_dir, exist_ok=True)
    for unit in range(min(layer.weights.shape[0], max(config.dump_count, net.n_classes))):
        dump_weight_image(layer, unit, os.path.join(unit_dir, f"unit_{unit}.{ext}"), image_shape)

    count = min(config.dump_count, len(test))
    if count > 0:
        x, y = test.images[:count], test.labels[:count]
        x_adv = fgsm(net, x, y, AttackConfig(config.attack_epsilon))
        dump_image_grid(
            np.concatenate([x, x_adv]),
            test.image_shape,
            os.path.join(out_dir, f"adversarial.{ext}"),
            columns=count,
        )
    dump_image_grid(
        generated_images(net, config), test.image_shape, os.path.join(out_dir, f"generated.{ext}")
    )


def _write_summary(result: TrainResult, config: ExperimentConfig, path: str) -> None:
    metrics = result.metrics
    summary = {
        "run_name": config.run_name,
        "best_iteration": result.best.iteration,
        "best_test_accuracy": result.best.best_test_accuracy,
        "iterations": metrics.iterations,
        "disc_updates": metrics.disc_updates,
        "gen_updates": metrics.gen_updates,
        "execution_time": metrics.execution_time,
        "final": result.history[-1].to_dict() if result.history else None,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def run(config: ExperimentConfig) -> RunResult:
    """
    Train per the config's regime, evaluating at every evaluation point.

    Writes into ``config.run_dir``: ``config.json``, ``metrics.csv``,
    ``losses.npz``, ``summary.json``, ``best.ckpt`` (the first evaluation
    point with the best test accuracy), ``last.ckpt`` (with optimizer
    states), for HAN ``adversary.ckpt`` (the final discriminator and its
    optimizer) and the image dumps of the best network.

    Raises:
        ConfigError: Before any compute, for an invalid config
    """
    config.validate()
    run_dir = config.run_dir
    os.makedirs(run_dir, exist_ok=True)
    save_config(config, os.path.join(run_dir, "config.json"))
    logger.info("Run %s -> %s", config.run_name, run_dir)

    train, test = load_splits(config)
    net = build_network(config.preset, config.dataset, config.bias, config.seed, config.dtype)
    evaluator = make_evaluator(config, test)
    trainer, optimizers = build_trainer(config, net, evaluator)

    result = trainer.train(train)
    write_metrics_csv(result.history, os.path.join(run_dir, METRICS_FILE))
    np.savez_compressed(
        os.path.join(run_dir, "losses.npz"),
        **{name: np.asarray(values) for name, values in result.metrics.losses.items()},
    )
    _write_summary(result, config, os.path.join(run_dir, "summary.json"))

    discriminator_opt = optimizers.pop("discriminator", None)
    save_checkpoint(
        net, optimizers, os.path.join(run_dir, LAST_CHECKPOINT), config.seed, config.iterations
    )
    if discriminator_opt is not None:
        save_checkpoint(
            trainer.discriminator,
            {"discriminator": discriminator_opt},
            os.path.join(run_dir, ADVERSARY_CHECKPOINT),
            config.seed,
            config.iterations,
        )
    result.best.restore(net)
    save_checkpoint(
        net, None, os.path.join(run_dir, BEST_CHECKPOINT), config.seed, result.best.iteration
    )
    dump_artifacts(net, config, test, run_dir)

    logger.info(
        "Best test accuracy %s at iteration %d",
        result.best.best_test_accuracy,
        result.best.iteration,
    )
    return RunResult(
        config, result.history, result.best.iteration, result.best.best_test_accuracy, run_dir
    )


def load_model(config: ExperimentConfig, path: str) -> Checkpoint:
    """Load a checkpoint, rejecting it unless it holds the config's architecture."""
    config.validate()
    expected = build_network(config.preset, config.dataset, config.bias, dtype=config.dtype)
    return load_checkpoint(path, expected.describe())


def load_test_split(config: ExperimentConfig) -> Dataset:
    test = load_dataset(config.dataset, "test", config.data_root)
    if config.test_limit is not None:
        test = test.subset(config.test_limit)
    return test


def evaluate_checkpoint(config: ExperimentConfig, path: str) -> MetricsReport:
    """Full robustness report of a saved network on the test split."""
    checkpoint = load_model(config, path)
    return make_evaluator(config, load_test_split(config))(checkpoint.net, checkpoint.iteration)


def attack_checkpoint(
    config: ExperimentConfig, path: str, out_path: Optional[str] = None
) -> Dict[str, float]:
    """FGSM accuracy of a saved network; optionally dumps the first adversarial test images."""
    net = load_model(config, path).net
    test = load_test_split(config)
    attack = AttackConfig(config.attack_epsilon)
    x_adv = fgsm(net, test.images, test.labels, attack, config.eval_batch_size)
    if out_path is not None and config.dump_count > 0:
        count = min(config.dump_count, len(test))
        dump_image_grid(x_adv[:count], test.image_shape, out_path)
    return {
        "epsilon": attack.epsilon,
        "acc_test": accuracy(net, test.images, test.labels, config.eval_batch_size),
        "acc_adv": accuracy(net, x_adv, test.labels, config.eval_batch_size),
    }


def rates_checkpoint(config: ExperimentConfig, path: str) -> Dict[str, float]:
    """Sigmoid and softmax noise-over-data rates of a saved network."""
    net = load_model(config, path).net
    test = load_test_split(config)
    x_noise = make_evaluator(config, test).x_noise
    return {
        "sigmoid_rate": sigmoid_rate(net, x_noise, test.images),
        "softmax_rate": softmax_rate(net, x_noise, test.images),
    }


def dump_checkpoint(config: ExperimentConfig, path: str, out_dir: str) -> None:
    net = load_model(config, path).net
    os.makedirs(out_dir, exist_ok=True)
    dump_artifacts(net, config, load_test_split(config), out_dir)


def _run_config_file(path: str, overrides: Sequence[str]) -> Tuple[str, Dict[str, float]]:
    config = load_config(path).with_overrides(list(overrides)).validate()
    configure_logging(config.run_dir)
    config.progress = False
    result = run(config)
    return config.run_name, result.final.to_dict() if result.history else {}


def run_batch(
    paths: Sequence[str], overrides: Sequence[str] = (), workers: Optional[int] = None
) -> Dict[str, Dict[str, float]]:
    """
    Run several config files in independent worker processes.

    Configs are validated up front so a bad file fails the batch before
    any training starts.
    """
    for path in paths:
        load_config(path).with_overrides(list(overrides)).validate()
    results = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_config_file, path, list(overrides)) for path in paths]
        for future in futures:
            name, final = future.result()
            results[name] = final
            logger.info("Finished %s", name)
    return results
