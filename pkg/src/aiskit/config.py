"""Layered run configuration: flags > ``AIS_*`` environment > config file > defaults."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from .core import AffinityConfig
from .errors import ConfigError
from .hypermutation import MutationConfig
from .immune_pool import PoolConfig
from .negative_selection import GenerationConfig

ENV_PREFIX = "AIS_"


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return float(text)


# key -> (parser, default)
KEYS: dict[str, tuple[Callable[[Any], Any], Any]] = {
    "seed": (int, 0),
    # immune pool
    "capacity": (int, 10),
    "k2": (float, 0.1),
    "k3": (float, 0.05),
    "dt": (float, 1.0),
    "decay_mode": (str, "proportional"),
    "fixed_decay": (float, 0.05),
    "removal_floor": (_opt_float, None),
    "saturation_cap": (_opt_float, None),
    "stability_window": (int, 10),
    "max_iterations": (int, 10_000),
    "initial_concentration": (float, 1.0),
    # affinity
    "overlap_threshold": (int, 5),
    "contiguous_r": (int, 1),
    # negative selection
    "r": (int, None),
    "count": (int, 100),
    "max_candidates": (int, 10_000),
    "mutate_on_match": (_bool, False),
    "max_mutation_retries": (int, 3),
    "wildcard_prob": (float, 0.5),
    "mode": (str, "bits"),
    # paths
    "ratings": (str, None),
}


def _norm(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def read_config_file(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc.strerror})") from None
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key = _norm(key)
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


@dataclass
class RunConfig:
    values: dict[str, Any]
    sources: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        value = self.values.get(key)
        return default if value is None else value

    def pool_config(self, **overrides) -> PoolConfig:
        v = {**self.values, **overrides}
        try:
            return PoolConfig(
                capacity=v["capacity"], k2=v["k2"], k3=v["k3"], dt=v["dt"],
                decay_mode=v["decay_mode"], fixed_decay=v["fixed_decay"],
                removal_floor=v["removal_floor"], saturation_cap=v["saturation_cap"],
                stability_window=v["stability_window"], max_iterations=v["max_iterations"],
                initial_concentration=v["initial_concentration"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def affinity_config(self) -> AffinityConfig:
        try:
            return AffinityConfig("pearson", self["overlap_threshold"], self["contiguous_r"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def generation_config(self) -> GenerationConfig:
        try:
            return GenerationConfig(
                target_count=self["count"],
                max_candidates=self["max_candidates"],
                rng_seed=self["seed"],
                mutate_on_match=self["mutate_on_match"],
                max_mutation_retries=self["max_mutation_retries"],
                wildcard_prob=self["wildcard_prob"],
                mutation=MutationConfig(seed=self["seed"], wildcard_prob=self["wildcard_prob"]),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def resolve(flags: Mapping[str, Any] | None = None, env: Mapping[str, str] | None = None,
            config_path=None) -> RunConfig:
    """Merge the four layers; ``None`` flag values count as unset."""
    flags = {_norm(k): v for k, v in (flags or {}).items() if v is not None}
    env = os.environ if env is None else env
    if config_path is None:
        config_path = flags.pop("config", None) or env.get(ENV_PREFIX + "CONFIG")
    flags.pop("config", None)
    file_values = read_config_file(config_path) if config_path else {}

    values, sources = {}, {}
    for key, (parse, default) in KEYS.items():
        env_key = ENV_PREFIX + key.upper()
        if key in flags:
            raw, src = flags[key], "flag"
        elif env_key in env:
            raw, src = env[env_key], "env"
        elif key in file_values:
            raw, src = file_values[key], "file"
        else:
            values[key], sources[key] = default, "default"
            continue
        try:
            values[key] = parse(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"invalid value {raw!r} for {key} (from {src})") from None
        sources[key] = src
    return RunConfig(values, sources)
