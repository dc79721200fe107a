"""Scenario configuration, loaded from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from ..consensus import SensorGraph
from ..gaussian import ContractError, GaussianMixture
from ..filters.models import BirthModel, MotionModel, SensorModel

FUSION_MODES = ("none", "aa", "ga", "consensus")
WEIGHT_MODES = ("uniform", "bfom")
FILTER_TYPES = ("phd", "lmb")


class ConfigError(ContractError):
    pass


@dataclass(frozen=True)
class TargetScript:
    """A target alive for steps ``birth <= k < death`` starting from ``state``."""

    birth: int
    death: int
    state: tuple[float, ...]


@dataclass(frozen=True)
class SensorSpec:
    p_detect: float = 0.9
    clutter_rate: float = 10.0
    sigma: float = 1.0


@dataclass(frozen=True)
class BlindWindow:
    """Sensor ``sensor`` never detects target ``target`` for steps ``start <= k < end``."""

    sensor: int
    target: int
    start: int
    end: int


@dataclass(frozen=True)
class ScenarioConfig:
    duration: int = 50
    dt: float = 1.0
    motion_noise: float = 0.5
    truth_noise: float = 0.1
    p_survival: float = 0.99
    region: tuple[tuple[float, float], tuple[float, float]] = ((-100.0, -100.0), (100.0, 100.0))
    sensors: tuple[SensorSpec, ...] = (SensorSpec(),)
    targets: tuple[TargetScript, ...] = ()
    birth_weight: float = 0.03
    birth_sigma: tuple[float, float] = (5.0, 2.0)  # position, velocity
    edges: tuple[tuple[int, int], ...] | None = None  # None: ring over the sensors
    fusion: str = "aa"
    weights: str = "uniform"
    consensus_iters: int = 10
    filter: str = "phd"
    blind: tuple[BlindWindow, ...] = ()
    ga_resolution: float = 2.0
    ospa_cutoff: float = 10.0
    ospa_order: float = 1.0
    seed: int = 0
    mc_runs: int = 1

    def __post_init__(self):
        if self.duration < 1:
            raise ConfigError("duration must be at least 1")
        if not self.sensors:
            raise ConfigError("at least one sensor is required")
        if self.fusion not in FUSION_MODES:
            raise ConfigError(f"fusion mode must be one of {FUSION_MODES}")
        if self.weights not in WEIGHT_MODES:
            raise ConfigError(f"weights mode must be one of {WEIGHT_MODES}")
        if self.filter not in FILTER_TYPES:
            raise ConfigError(f"filter must be one of {FILTER_TYPES}")
        if self.fusion in ("ga", "consensus") and self.filter != "phd":
            raise ConfigError(f"{self.fusion} fusion operates on PHDs and needs the phd filter")
        if self.consensus_iters < 0 or self.mc_runs < 1:
            raise ConfigError("consensus_iters must be nonnegative and mc_runs positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.ospa_cutoff <= 0 or self.ospa_order < 1:
            raise ConfigError("OSPA needs cutoff > 0 and order >= 1")
        for t in self.targets:
            if t.death <= t.birth or t.birth < 0:
                raise ConfigError(f"target script {t} needs 0 <= birth < death")
            if len(t.state) != 4:
                raise ConfigError("target states are [x, vx, y, vy]")
        for s in self.sensors:
            if not 0 <= s.p_detect <= 1 or s.clutter_rate < 0 or s.sigma <= 0:
                raise ConfigError(f"invalid sensor {s}")
        for b in self.blind:
            if not (0 <= b.sensor < len(self.sensors) and 0 <= b.target < len(self.targets)):
                raise ConfigError(f"blind window {b} refers to a missing sensor or target")
        lo, hi = np.asarray(self.region[0], float), np.asarray(self.region[1], float)
        if lo.shape != (2,) or hi.shape != (2,) or np.any(hi <= lo):
            raise ConfigError("region must be ((xmin, ymin), (xmax, ymax)) with positive extent")
        if self.ga_resolution <= 0:
            raise ConfigError("ga_resolution must be positive")
        try:
            graph = self.graph()
        except ContractError as e:
            raise ConfigError(str(e)) from e
        if self.fusion == "consensus" and not graph.connected:
            raise ConfigError("consensus needs a connected sensor graph")

    # derived models -------------------------------------------------------

    @property
    def sensor_count(self) -> int:
        return len(self.sensors)

    def graph(self) -> SensorGraph:
        if self.edges is None:
            return SensorGraph.ring(self.sensor_count)
        return SensorGraph.from_edge_list(self.sensor_count, self.edges)

    def motion(self) -> MotionModel:
        return MotionModel.constant_velocity(self.dt, self.motion_noise, self.p_survival)

    def truth_motion(self) -> MotionModel:
        return MotionModel.constant_velocity(self.dt, self.truth_noise, 1.0)

    def sensor_model(self, i: int) -> SensorModel:
        s = self.sensors[i]
        return SensorModel.position(s.sigma, s.p_detect, s.clutter_rate, self.region)

    def birth(self) -> BirthModel:
        """One birth component at the initial state of every scripted target."""
        ps, vs = self.birth_sigma
        cov = np.diag([ps**2, vs**2, ps**2, vs**2])
        if not self.targets:
            return BirthModel(GaussianMixture.empty(4))
        means = np.array([t.state for t in self.targets], dtype=float)
        return BirthModel(GaussianMixture(np.full(len(means), self.birth_weight), means,
                                          np.repeat(cov[None], len(means), axis=0)))

    def with_overrides(self, **changes) -> ScenarioConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    # serialization --------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> ScenarioConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        kw = dict(doc)
        try:
            if "sensors" in kw:
                kw["sensors"] = tuple(SensorSpec(**s) for s in kw["sensors"])
            if "targets" in kw:
                kw["targets"] = tuple(TargetScript(int(t["birth"]), int(t["death"]), tuple(map(float, t["state"])))
                                      for t in kw["targets"])
            if "blind" in kw:
                kw["blind"] = tuple(BlindWindow(**b) for b in kw["blind"])
            if kw.get("edges") is not None:
                kw["edges"] = tuple(tuple(int(v) for v in e) for e in kw["edges"])
            if "region" in kw:
                kw["region"] = tuple(tuple(map(float, b)) for b in kw["region"])
            if "birth_sigma" in kw:
                kw["birth_sigma"] = tuple(map(float, kw["birth_sigma"]))
            return cls(**kw)
        except (TypeError, KeyError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"malformed scenario: {e}") from e

    @classmethod
    def load(cls, path: str | Path) -> ScenarioConfig:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read scenario {path}: {e}") from e
        if not isinstance(doc, dict):
            raise ConfigError("a scenario file holds one JSON object")
        return cls.from_dict(doc)


def crossing_scenario(**changes) -> ScenarioConfig:
    """Four sensors, three targets whose tracks cross near the origin."""
    targets = (
        TargetScript(0, 50, (-50.0, 2.0, -5.0, 0.2)),
        TargetScript(0, 50, (5.0, -0.2, -50.0, 2.0)),
        TargetScript(0, 50, (-45.0, 1.8, 45.0, -1.8)),
    )
    base = dict(
        duration=50,
        sensors=tuple(SensorSpec(0.7, 10.0, 1.0) for _ in range(4)),
        targets=targets,
    )
    base.update(changes)
    return ScenarioConfig(**base)
