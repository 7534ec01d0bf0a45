"""Experiment configuration: a single JSON document, strict about keys."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Optional

import numpy as np

from frisopt.channel import SystemGeometry, SystemParams
from frisopt.codebook import PhaseCodebook, RegularPolygonCodebook
from frisopt.errors import ConfigError, InvalidArgumentError
from frisopt.rng import stream

CODEBOOK_KINDS = {
    "polygon": {"m_p"},
    "angles": {"angles"},
    "random": {"size"},
}
SWEEPABLE = {"n", "m", "m_x", "m_o", "m_p", "snr_db", "w_x", "k_factor_db", "pathloss_exp", "codebook_size"}


def _default_codebook():
    return {"kind": "polygon", "m_p": 8}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 16
    m_x: int = 8
    m_y: Optional[int] = None
    m_o: int = 8
    snr_db: float = 0.0
    carrier_hz: float = 3.5e9
    pathloss_exp: float = 2.5
    k_factor_db: float = 3.0
    w_x: float = 2.0
    bs_pos: tuple = (0.0, 0.0, 5.0)
    fris_center: tuple = (10.0, 10.0, 5.0)
    user_pos: tuple = (50.0, 0.0, 0.0)
    codebook: dict = field(default_factory=_default_codebook)
    epsilon: float = 1e-6
    max_iters: int = 50
    trials: int = 1000
    master_seed: int = 0
    sweep: Optional[dict] = None
    out: Optional[str] = None

    def __post_init__(self):
        for name in ("bs_pos", "fris_center", "user_pos"):
            value = tuple(float(v) for v in getattr(self, name))
            if len(value) != 3:
                raise ConfigError(f"{name} must have three coordinates")
            object.__setattr__(self, name, value)
        _check_codebook(self.codebook)
        if self.sweep is not None:
            _check_sweep(self.sweep)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.m_x < 1 or (self.m_y is not None and self.m_y < 1):
            raise ConfigError("grid dimensions must be >= 1")
        if not 1 <= self.m_o <= self.geometry.num_ports:
            raise ConfigError(f"m_o={self.m_o} must lie in [1, {self.geometry.num_ports}]")

    @property
    def geometry(self) -> SystemGeometry:
        return SystemGeometry(self.bs_pos, self.fris_center, self.user_pos, self.m_x, self.w_x,
                              self.carrier_hz, self.m_y)

    @property
    def params(self) -> SystemParams:
        try:
            return SystemParams.from_snr_db(self.snr_db, n=self.n, m_o=self.m_o, k_factor_db=self.k_factor_db,
                                            pathloss_exp=self.pathloss_exp, epsilon=self.epsilon,
                                            max_iters=self.max_iters)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def num_ports(self) -> int:
        return self.geometry.num_ports

    def codebook_for_trial(self, trial: int):
        """Shared polygon/angle codebook, or per-port random phases drawn for this trial."""
        kind = self.codebook["kind"]
        if kind == "polygon":
            return RegularPolygonCodebook(int(self.codebook["m_p"]))
        if kind == "angles":
            return PhaseCodebook.from_angles(self.codebook["angles"])
        rng = stream(self.master_seed, trial, "codebook")
        size = int(self.codebook["size"])
        return [PhaseCodebook.from_angles(rng.uniform(0.0, 2.0 * np.pi, size)) for _ in range(self.num_ports)]

    def with_value(self, param: str, value) -> "ExperimentConfig":
        """Copy with one sweep parameter changed."""
        if param == "m":
            side = math.isqrt(int(value))
            if side * side != int(value):
                raise ConfigError(f"m={value} is not a square port count")
            return replace(self, m_x=side, m_y=None)
        if param == "m_p":
            if self.codebook["kind"] != "polygon":
                raise ConfigError("m_p sweeps need a polygon codebook")
            return replace(self, codebook={"kind": "polygon", "m_p": int(value)})
        if param == "codebook_size":
            if self.codebook["kind"] != "random":
                raise ConfigError("codebook_size sweeps need a random codebook")
            return replace(self, codebook={"kind": "random", "size": int(value)})
        kind = {f.name: f.type for f in fields(self)}[param]
        return replace(self, **{param: int(value) if "int" in str(kind) else float(value)})

    def points(self) -> list:
        """(sweep value, config) pairs; a single ``(None, self)`` when nothing is swept."""
        if self.sweep is None:
            return [(None, self)]
        base = replace(self, sweep=None)
        return [(v, base.with_value(self.sweep["param"], v)) for v in self.sweep["values"]]

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("bs_pos", "fris_center", "user_pos"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, raw: dict, **overrides) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
        try:
            return cls(**merged)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path, **overrides) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw, **overrides)


def _check_codebook(cb: Any):
    if not isinstance(cb, dict) or cb.get("kind") not in CODEBOOK_KINDS:
        raise ConfigError(f"codebook must be an object with kind in {sorted(CODEBOOK_KINDS)}")
    extra = set(cb) - {"kind"} - CODEBOOK_KINDS[cb["kind"]]
    missing = CODEBOOK_KINDS[cb["kind"]] - set(cb)
    if extra or missing:
        raise ConfigError(f"codebook keys for kind {cb['kind']!r}: missing {sorted(missing)}, unknown {sorted(extra)}")
    try:
        if cb["kind"] == "polygon":
            RegularPolygonCodebook(int(cb["m_p"]))
        elif cb["kind"] == "angles":
            PhaseCodebook.from_angles(cb["angles"])
        elif int(cb["size"]) < 1:
            raise ConfigError("random codebook size must be >= 1")
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc


def _check_sweep(sweep: Any):
    if not isinstance(sweep, dict) or set(sweep) != {"param", "values"}:
        raise ConfigError('sweep must be {"param": ..., "values": [...]}')
    if sweep["param"] not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {sweep['param']!r}; choose from {sorted(SWEEPABLE)}")
    if not isinstance(sweep["values"], list) or not sweep["values"]:
        raise ConfigError("sweep values must be a nonempty list")
