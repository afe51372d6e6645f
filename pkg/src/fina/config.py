"""Experiment configuration.

The reference encoding is a JSON object with the sections ``experiment``,
``fina``, ``thermal``, ``schedules`` and ``output``; every section and key is
optional, unknown ones are rejected. See ``README.md`` for the full list.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

from .activity import ACTIVITIES, Activity, Archetype, DEFAULT_SETPOINTS_F
from .core import FinaParams, HVAC_RANGE_F
from .thermal import BreathProfile, DEFAULT_BREATH, OccupantModel, ThermalParams, steps_per_period

STRATEGIES = ("approach1", "approach2", "approach3", "approach4", "approach5",
              "mean", "round_robin", "weighted")
FORMATS = ("csv", "json", "both")
DEFAULT_ARCHETYPES = (Archetype.ROUTINE, Archetype.INTERMEDIATE, Archetype.RANDOM)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HumanSchedule:
    """``archetype`` is one of the generator archetypes or ``"fixed"``."""

    archetype: str = "routine"
    seed: Optional[int] = None
    activity: Optional[str] = None


@dataclass(frozen=True)
class OutdoorModel:
    """Constant outdoor temperature, or a daily sinusoid peaking at ``peak_hour``."""

    mode: str = "constant"
    mean: float = 10.0
    amplitude: float = 0.0
    peak_hour: float = 15.0


@dataclass(frozen=True)
class ExperimentConfig:
    num_humans: int = 3
    samples: int = 3000
    sampling_period: float = 360.0
    window: int = 100
    strategy: str = "approach2"
    strategies: Tuple[str, ...] = ("approach1", "approach2", "approach3", "approach4",
                                   "approach5", "mean", "round_robin")
    candidate_mode: str = "grid:1"
    master_seed: int = 0
    action_range: Tuple[float, float] = HVAC_RANGE_F
    satisfaction_threshold: float = 2.5
    vacant_setpoint: float = 65.0
    weights: Optional[Tuple[float, ...]] = None
    fina: FinaParams = FinaParams()
    thermal: ThermalParams = ThermalParams()
    occupants: OccupantModel = OccupantModel()
    outdoor: OutdoorModel = OutdoorModel()
    initial_indoor_temp: float = 20.0
    setpoints: Dict[Activity, float] = field(default_factory=lambda: dict(DEFAULT_SETPOINTS_F))
    humans: Optional[Tuple[HumanSchedule, ...]] = None
    schedule_file: Optional[str] = None
    out_dir: str = "out"
    out_format: str = "both"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.num_humans < 1:
            raise ConfigError("num_humans must be >= 1")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.samples < self.window:
            raise ConfigError(f"samples ({self.samples}) must be >= window ({self.window})")
        if not self.sampling_period > 0:
            raise ConfigError("sampling_period must be positive")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}")
        parse_candidate_mode(self.candidate_mode)
        if self.out_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        lo, hi = self.action_range
        if not lo < hi:
            raise ConfigError("action_range must be increasing")
        if self.weights is not None:
            if len(self.weights) != self.num_humans or any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
                raise ConfigError("weights need one nonnegative entry per human, not all zero")
        if self.humans is not None and len(self.humans) != self.num_humans:
            raise ConfigError(f"schedules.humans lists {len(self.humans)} humans, expected {self.num_humans}")
        for h in self.humans or ():
            if h.archetype == "fixed":
                if h.activity is None:
                    raise ConfigError("a fixed schedule needs an activity")
                _activity(h.activity)
            elif h.archetype not in {a.value for a in Archetype}:
                raise ConfigError(f"unknown archetype {h.archetype!r}")
        if self.outdoor.mode not in ("constant", "sinusoidal"):
            raise ConfigError("outdoor.mode must be 'constant' or 'sinusoidal'")
        for act in ACTIVITIES:
            if act is not Activity.AWAY and act not in self.setpoints:
                raise ConfigError(f"missing setpoint for {act.value}")
        try:
            steps_per_period(self.sampling_period, self.thermal)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def human_schedules(self) -> Tuple[HumanSchedule, ...]:
        if self.humans is not None:
            return self.humans
        return tuple(HumanSchedule(DEFAULT_ARCHETYPES[i % 3].value) for i in range(self.num_humans))

    def with_overrides(self, **kw) -> "ExperimentConfig":
        try:
            return replace(self, **{k: v for k, v in kw.items() if v is not None})
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> Dict[str, Any]:
        """Inverse of :func:`config_from_dict` (JSON-ready)."""
        return {
            "experiment": {
                "num_humans": self.num_humans, "samples": self.samples,
                "sampling_period": self.sampling_period, "window": self.window,
                "strategy": self.strategy, "strategies": list(self.strategies),
                "candidate_mode": self.candidate_mode, "master_seed": self.master_seed,
                "action_range": list(self.action_range),
                "satisfaction_threshold": self.satisfaction_threshold,
                "vacant_setpoint": self.vacant_setpoint,
                "weights": None if self.weights is None else list(self.weights),
            },
            "fina": asdict(self.fina),
            "thermal": {
                **asdict(self.thermal),
                "initial_indoor_temp": self.initial_indoor_temp,
                "outdoor": asdict(self.outdoor),
                "metabolic_offset": self.occupants.metabolic_offset,
                "breath": {a.value: [bp.rmv_l_per_min, bp.ebt_c] for a, bp in self.occupants.breath.items()},
            },
            "schedules": {
                "humans": None if self.humans is None else [asdict(h) for h in self.humans],
                "file": self.schedule_file,
                "setpoints": {a.value: v for a, v in self.setpoints.items()},
            },
            "output": {"dir": self.out_dir, "format": self.out_format},
        }


def parse_candidate_mode(mode: str) -> Optional[float]:
    """``"union"`` -> None, ``"grid:<step>"`` -> step."""
    if mode == "union":
        return None
    if mode.startswith("grid"):
        _, _, step = mode.partition(":")
        try:
            value = float(step) if step else 1.0
        except ValueError:
            raise ConfigError(f"bad grid step in candidate mode {mode!r}") from None
        if value <= 0:
            raise ConfigError("grid step must be positive")
        return value
    raise ConfigError(f"candidate mode must be 'union' or 'grid:<step>', got {mode!r}")


def _activity(name: str) -> Activity:
    try:
        return Activity(name)
    except ValueError:
        raise ConfigError(f"unknown activity {name!r}") from None


def _take(section: Dict[str, Any], allowed, where: str) -> Dict[str, Any]:
    if not isinstance(section, dict):
        raise ConfigError(f"[{where}] must be an object")
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    return section


def _names(cls) -> List[str]:
    return [f.name for f in fields(cls)]


def config_from_dict(doc: Dict[str, Any]) -> ExperimentConfig:
    _take(doc, ("experiment", "fina", "thermal", "schedules", "output"), "root")
    kw: Dict[str, Any] = {}
    try:
        exp = _take(doc.get("experiment", {}), (
            "num_humans", "samples", "sampling_period", "window", "strategy", "strategies",
            "candidate_mode", "master_seed", "action_range", "satisfaction_threshold",
            "vacant_setpoint", "weights"), "experiment")
        kw.update(exp)
        for key in ("strategies", "action_range", "weights"):
            if kw.get(key) is not None:
                kw[key] = tuple(kw[key])

        kw["fina"] = FinaParams(**_take(doc.get("fina", {}), _names(FinaParams), "fina"))

        th = dict(_take(doc.get("thermal", {}), _names(ThermalParams) + [
            "initial_indoor_temp", "outdoor", "metabolic_offset", "breath"], "thermal"))
        if "initial_indoor_temp" in th:
            kw["initial_indoor_temp"] = th.pop("initial_indoor_temp")
        if "outdoor" in th:
            kw["outdoor"] = OutdoorModel(**_take(th.pop("outdoor"), _names(OutdoorModel), "thermal.outdoor"))
        occ: Dict[str, Any] = {}
        if "metabolic_offset" in th:
            occ["metabolic_offset"] = th.pop("metabolic_offset")
        if "breath" in th:
            breath = dict(DEFAULT_BREATH)
            for name, (rmv, ebt) in th.pop("breath").items():
                breath[_activity(name)] = BreathProfile(float(rmv), float(ebt))
            occ["breath"] = breath
        kw["occupants"] = OccupantModel(**occ)
        kw["thermal"] = ThermalParams(**th)

        sch = _take(doc.get("schedules", {}), ("humans", "file", "setpoints"), "schedules")
        if sch.get("humans") is not None:
            kw["humans"] = tuple(HumanSchedule(**_take(h, _names(HumanSchedule), "schedules.humans"))
                                 for h in sch["humans"])
        kw["schedule_file"] = sch.get("file")
        if "setpoints" in sch:
            table = dict(DEFAULT_SETPOINTS_F)
            table.update({_activity(k): float(v) for k, v in sch["setpoints"].items()})
            kw["setpoints"] = table

        out = _take(doc.get("output", {}), ("dir", "format"), "output")
        if "dir" in out:
            kw["out_dir"] = out["dir"]
        if "format" in out:
            kw["out_format"] = out["format"]
        return ExperimentConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(doc)
