"""Scenario configuration: JSON document -> validated :class:`ScenarioConfig`."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..beamforming import OptimizerConfig
from ..link import dbm_to_watts

SCHEMES = ("without_ris", "random_phase", "passive", "active")
WORKERS_ENV = "RIS_LINKSIM_WORKERS"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of a distance-sweep experiment.

    Powers are stored in watts; the JSON document gives them in dBm.
    `power_split` is the fraction of `total_power` given to the BS in the
    active scheme; the other schemes spend all of it at the BS.
    """

    bs_position: tuple[float, float] = (0.0, -60.0)
    ris_position: tuple[float, float] = (300.0, 10.0)
    user_radius: float = 5.0
    bs_antennas: int = 4
    ris_elements: int = 512
    users: int = 4
    bs_antenna_spacing: float = 0.5
    ris_element_spacing: float = 0.5
    kappa: float = 1.0
    receiver_noise_power: float = dbm_to_watts(-100.0)
    ris_noise_power: float = dbm_to_watts(-100.0)
    total_power: float = dbm_to_watts(10.0)
    power_split: float = 0.5
    schemes: tuple[str, ...] = SCHEMES
    trials: int = 1000
    master_seed: int = 1
    L_values: tuple[float, ...] = (150.0, 200.0, 250.0, 300.0)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    workers: int = 1

    def __post_init__(self):
        _check(self.trials >= 1, "trials", "must be >= 1")
        _check(len(self.schemes) > 0, "schemes", "must be non-empty")
        for s in self.schemes:
            _check(s in SCHEMES, "schemes", f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")
        _check(len(set(self.schemes)) == len(self.schemes), "schemes", "contains duplicates")
        _check(len(self.L_values) > 0, "L_values", "must be non-empty")
        _check(all(math.isfinite(v) for v in self.L_values), "L_values", "must be finite")
        _check(0 < self.power_split <= 1, "power_split", "must lie in (0, 1]")
        _check(self.user_radius >= 0, "user_radius", "must be >= 0")
        for key in ("bs_antennas", "ris_elements", "users"):
            _check(getattr(self, key) >= 1, key, "must be >= 1")
        for key in ("bs_antenna_spacing", "ris_element_spacing", "receiver_noise_power", "total_power"):
            _check(getattr(self, key) > 0, key, "must be positive")
        _check(self.ris_noise_power >= 0, "ris_noise_power", "must be >= 0")
        _check(math.isfinite(self.kappa) and self.kappa >= 0, "kappa", "must be finite and >= 0")
        _check(0 <= self.master_seed < 2**64, "master_seed", "must fit in an unsigned 64-bit integer")
        _check(self.workers >= 1, "workers", "must be >= 1")
        if "active" in self.schemes:
            _check(self.power_split < 1, "power_split", "must be < 1 when the active scheme runs")

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready description (dBm powers, nested optimizer)."""
        d = dataclasses.asdict(self)
        d["receiver_noise_dbm"] = _watts_to_dbm(d.pop("receiver_noise_power"))
        d["ris_noise_dbm"] = _watts_to_dbm(d.pop("ris_noise_power"))
        d["total_power_dbm"] = _watts_to_dbm(d.pop("total_power"))
        d.pop("workers")
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def digest(self) -> str:
        """Hash of every setting that affects results (worker count excluded)."""
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _watts_to_dbm(w: float) -> float:
    return -math.inf if w == 0 else 10.0 * math.log10(w / 1e-3)


def _check(ok: bool, key: str, msg: str):
    if not ok:
        raise ConfigError(f"{key}: {msg}")


_DBM_KEYS = {
    "receiver_noise_dbm": "receiver_noise_power",
    "ris_noise_dbm": "ris_noise_power",
    "total_power_dbm": "total_power",
}
_TUPLE_KEYS = {"bs_position", "ris_position", "schemes", "L_values"}
_INT_KEYS = {"bs_antennas", "ris_elements", "users", "trials", "master_seed", "workers"}
_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}
_OPT_FIELDS = {f.name for f in dataclasses.fields(OptimizerConfig)}


def config_from_mapping(doc: Mapping[str, Any]) -> ScenarioConfig:
    """Build a config from a mapping of JSON keys; omitted keys keep their defaults."""
    if not isinstance(doc, Mapping):
        raise ConfigError("<root>: configuration must be a JSON object")
    kwargs: dict[str, Any] = {}
    for key, value in doc.items():
        if key in _DBM_KEYS:
            value = _number(key, value)
            kwargs[_DBM_KEYS[key]] = 0.0 if value == -math.inf else dbm_to_watts(value)
        elif key == "optimizer":
            kwargs["optimizer"] = _optimizer(value)
        elif key in _FIELDS and key not in _DBM_KEYS.values():
            kwargs[key] = _coerce(key, value)
        else:
            raise ConfigError(f"{key}: unknown configuration key")
    if os.environ.get(WORKERS_ENV):
        kwargs["workers"] = _coerce(WORKERS_ENV, os.environ[WORKERS_ENV])
    return ScenarioConfig(**kwargs)


def parse_config(text: str) -> ScenarioConfig:
    """Parse a JSON document. Empty text yields the default scenario."""
    if not text.strip():
        return config_from_mapping({})
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<document>: not valid JSON ({exc})") from exc
    return config_from_mapping(doc)


def _number(key, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def _coerce(key: str, value):
    try:
        if key in _TUPLE_KEYS:
            if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
                raise TypeError
            if key == "schemes":
                return tuple(str(v) for v in value)
            return tuple(_number(key, v) for v in value)
        if key in _INT_KEYS or key == WORKERS_ENV:
            if isinstance(value, bool):
                raise TypeError
            if isinstance(value, str):
                value = int(value)
            if isinstance(value, float) and not value.is_integer():
                raise TypeError
            return int(value)
        return _number(key, value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: invalid value {value!r}") from None


def _optimizer(value) -> OptimizerConfig:
    if not isinstance(value, Mapping):
        raise ConfigError("optimizer: expected an object")
    for k in value:
        if k not in _OPT_FIELDS:
            raise ConfigError(f"optimizer.{k}: unknown configuration key")
    try:
        return OptimizerConfig(**value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"optimizer: {exc}") from exc
