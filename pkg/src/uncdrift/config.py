"""YAML experiment configuration with per-dataset sections."""

from __future__ import annotations

import copy
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigurationError
from .harness import ExperimentConfig
from .nn import TrainOptions
from .uncertainty import EstimatorConfig

_TOP_KEYS = set(ExperimentConfig.__dataclass_fields__) - {"estimator", "train"}


def default_config() -> dict:
    text = resources.files("uncdrift").joinpath("data/datasets.yaml").read_text()
    return yaml.safe_load(text)


def load_config(path=None) -> dict:
    """Bundled defaults, deep-merged with the file at ``path`` if given."""
    cfg = default_config()
    if path is None:
        return cfg
    with Path(path).open() as fh:
        user = yaml.safe_load(fh) or {}
    if not isinstance(user, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return _merge(cfg, user)


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def dataset_section(cfg: dict, name: str) -> dict:
    key = name.lower()
    for ds_name, section in (cfg.get("datasets") or {}).items():
        if key == ds_name.lower() or key in [a.lower() for a in section.get("aliases", [])]:
            return section
    return {}


def experiment_config(cfg: dict, dataset: str, overrides: Optional[dict[str, Any]] = None) -> ExperimentConfig:
    """Resolve defaults, then the dataset's section, then ``overrides``.

    Override keys may name any :class:`ExperimentConfig` field, any
    :class:`EstimatorConfig` field (``kind`` included), or ``train.<field>``.
    """
    merged = _merge(cfg.get("defaults", {}), dataset_section(cfg, dataset))
    merged.pop("aliases", None)
    estimator = dict(merged.pop("estimator", {}) or {})
    train = dict(merged.pop("train", {}) or {})
    for key, value in (overrides or {}).items():
        if key.startswith("train."):
            train[key[len("train."):]] = value
        elif key == "estimator":
            estimator["kind"] = value
        elif key in EstimatorConfig.__dataclass_fields__:
            estimator[key] = value
        elif key in _TOP_KEYS:
            merged[key] = value
        else:
            raise ConfigurationError(f"unknown configuration key {key!r}")
    unknown = set(merged) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown configuration keys {sorted(unknown)}")
    try:
        return ExperimentConfig(
            estimator=EstimatorConfig(**estimator),
            train=TrainOptions(**train),
            **merged,
        )
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
