"""Experiment configuration: one JSON key-value file plus command-line overrides."""

import json
import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional

from ..data.dataset import DATASETS
from ..robustness.attacks import PRESET_EPSILON
from ..robustness.noise import NOISE_MODES
from ..training.bidir import GENERATOR_LOSSES
from ..training.han import LATENT_DISTRIBUTIONS
from ..training.schedule import Regime
from ..utils.errors import ConfigError
from .presets import get_preset, run_name_stem

DEFAULT_ITERS = {"biprop": 50_000, "han": 500_000}
DTYPES = ("float32", "float64")


@dataclass
class ExperimentConfig:
    """
    Everything that defines one run.

    ``total_iters`` and ``epsilon`` default to the method's and dataset's
    standard values when left as None.
    """

    preset: str = "nn-none"
    bias: bool = True
    regime: str = "BP"
    dataset: str = "mnist"
    total_iters: Optional[int] = None
    eval_every: int = 1000
    seed: int = 0
    batch_size: int = 100
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    epsilon: Optional[float] = None
    noise_fraction: float = 0.1
    noise_mode: str = "additive"
    generator_loss: str = "sigmoid_ce"
    gen_first: bool = False
    latent: str = "uniform"
    dtype: str = "float32"
    train_limit: Optional[int] = None
    test_limit: Optional[int] = None
    eval_batch_size: int = 1000
    dump_count: int = 10
    data_root: Optional[str] = None
    output_dir: str = "runs"
    progress: bool = True

    @property
    def method(self) -> str:
        return get_preset(self.preset).method

    @property
    def iterations(self) -> int:
        return DEFAULT_ITERS[self.method] if self.total_iters is None else self.total_iters

    @property
    def attack_epsilon(self) -> float:
        return PRESET_EPSILON[self.dataset] if self.epsilon is None else self.epsilon

    @property
    def run_name(self) -> str:
        regime = Regime.parse(self.regime).value
        return f"{run_name_stem(self.preset, self.bias)}-{regime}-{self.dataset}"

    @property
    def run_dir(self) -> str:
        return os.path.join(self.output_dir, self.run_name)

    def validate(self) -> "ExperimentConfig":
        """
        Check every field before any compute.

        Raises:
            ConfigError: Naming the first invalid field
        """
        get_preset(self.preset)
        try:
            self.regime = Regime.parse(str(self.regime)).value
        except ValueError as e:
            raise ConfigError(str(e)) from None
        _check_choice("dataset", self.dataset, DATASETS)
        _check_choice("noise_mode", self.noise_mode, NOISE_MODES)
        _check_choice("generator_loss", self.generator_loss, GENERATOR_LOSSES)
        _check_choice("latent", self.latent, LATENT_DISTRIBUTIONS)
        _check_choice("dtype", self.dtype, DTYPES)
        for name in ("bias", "gen_first", "progress"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be true or false")
        if self.total_iters is not None and self.total_iters < 0:
            raise ConfigError("total_iters must be non-negative")
        for name in ("eval_every", "batch_size", "eval_batch_size"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.lr < 0 or self.eps_hat <= 0:
            raise ConfigError("lr must be non-negative and eps_hat positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("beta1 and beta2 must lie in [0, 1)")
        if self.epsilon is not None and self.epsilon < 0:
            raise ConfigError("epsilon must be non-negative")
        if self.noise_fraction < 0:
            raise ConfigError("noise_fraction must be non-negative")
        for name in ("train_limit", "test_limit"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.dump_count < 0:
            raise ConfigError("dump_count must be non-negative")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Convert the config to a dictionary."""
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**values)

    def with_overrides(self, overrides: List[str]) -> "ExperimentConfig":
        """
        Apply ``key=value`` overrides; values are parsed as JSON, else taken as strings.

        Raises:
            ConfigError: On a malformed override or unknown key
        """
        values = self.to_dict()
        for item in overrides:
            key, sep, raw = item.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"override '{item}' is not of the form key=value")
            if key not in values:
                raise ConfigError(f"unknown config key '{key}'")
            try:
                values[key] = json.loads(raw)
            except json.JSONDecodeError:
                values[key] = raw
        return type(self).from_dict(values)


def _check_choice(name: str, value: Any, choices) -> None:
    if value not in choices:
        raise ConfigError(f"invalid {name} '{value}', expected one of {', '.join(choices)}")


def load_config(path: str) -> ExperimentConfig:
    """
    Read a JSON config file.

    Raises:
        ConfigError: If the file is missing, not JSON, or not an object
    """
    try:
        with open(path, "r", encoding="utf-8") as config_file:
            values = json.load(config_file)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"{path} must contain a JSON object")
    return ExperimentConfig.from_dict(values)


def save_config(config: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as config_file:
        json.dump(config.to_dict(), config_file, indent=2, sort_keys=True)
        config_file.write("\n")
