"""Lumped RC multi-room house with hysteresis thermostats on a shared setpoint.

Each room is a single thermal node::

    C dT/dt = Q_hvac + Q_human - (T - T_out) / R
    Q_hvac  = k (T_flow - T)   with T_flow = heater / cooler flow temp, 0 when idle

integrated with explicit Euler steps of ``ThermalParams.dt`` seconds.
Temperatures are in degrees Celsius throughout this module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .activity import Activity

PLAUSIBLE_RANGE_C = (-20.0, 60.0)

RHO_AIR = 1.2  # kg/m^3
CP_AIR = 1005.0  # J/(kg K)


class Mode(enum.IntEnum):
    IDLE = kernels.IDLE
    HEATING = kernels.HEATING
    COOLING = kernels.COOLING


class DivergenceError(RuntimeError):
    """Indoor temperature left the physically plausible range."""


def f_to_c(f):
    return (f - 32.0) * 5.0 / 9.0


def c_to_f(c):
    return c * 9.0 / 5.0 + 32.0


@dataclass(frozen=True)
class ThermalParams:
    """Per-room RC values (scalars are broadcast to every room)."""

    thermal_resistance: float = 0.02  # K/W
    thermal_capacitance: float = 2e6  # J/K
    heater_flow_temp: float = 50.0
    cooler_flow_temp: float = 10.0
    hvac_mass_flow_heat_capacity: float = 500.0  # W/K
    thermostat_band: float = 2.5  # K
    dt: float = 30.0  # s, one Euler step

    def __post_init__(self):
        for name in ("thermal_resistance", "thermal_capacitance", "hvac_mass_flow_heat_capacity",
                     "thermostat_band", "dt"):
            if np.any(np.asarray(getattr(self, name)) <= 0):
                raise ValueError(f"{name} must be positive")
        if self.heater_flow_temp <= self.cooler_flow_temp:
            raise ValueError("heater flow temperature must exceed cooler flow temperature")

    def per_room(self, n_rooms: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        def bc(x):
            arr = np.broadcast_to(np.asarray(x, dtype=float), (n_rooms,))
            return np.ascontiguousarray(arr)
        return (bc(self.thermal_resistance), bc(self.thermal_capacitance),
                bc(self.hvac_mass_flow_heat_capacity))


@dataclass(frozen=True)
class RoomState:
    indoor_temp: float
    mode: Mode = Mode.IDLE
    occupant_heat: float = 0.0

    def __post_init__(self):
        lo, hi = PLAUSIBLE_RANGE_C
        if not lo <= self.indoor_temp <= hi:
            raise DivergenceError(f"indoor temperature {self.indoor_temp:.3f} C outside [{lo}, {hi}]")


@dataclass(frozen=True)
class HouseState:
    rooms: Tuple[RoomState, ...]
    outdoor_temp: float
    clock: float = 0.0

    @classmethod
    def initial(cls, n_rooms: int, indoor_temp: float = 20.0, outdoor_temp: float = 10.0) -> "HouseState":
        return cls(tuple(RoomState(indoor_temp) for _ in range(n_rooms)), outdoor_temp, 0.0)

    @property
    def temps(self) -> np.ndarray:
        return np.array([r.indoor_temp for r in self.rooms])

    @property
    def modes(self) -> np.ndarray:
        return np.array([int(r.mode) for r in self.rooms], dtype=np.int8)


# ---------------------------------------------------------------------------
# thermostat and occupants
# ---------------------------------------------------------------------------

def thermostat_mode(indoor_temp: float, setpoint: float, band: float, prev_mode: Mode) -> Mode:
    """Hysteresis thermostat.

    Heating starts below ``setpoint - band`` and runs until the setpoint is
    reached; cooling mirrors it above ``setpoint + band``. Leaving heating or
    cooling always goes through idle.
    """
    if band <= 0:
        raise ValueError("band must be positive")
    return Mode(kernels._next_mode(indoor_temp, setpoint, band, int(prev_mode)))


@dataclass(frozen=True)
class BreathProfile:
    """Respiratory parameters for one activity."""

    rmv_l_per_min: float
    ebt_c: float


DEFAULT_BREATH: Dict[Activity, BreathProfile] = {
    Activity.SLEEPING: BreathProfile(6.0, 34.0),
    Activity.RELAXING: BreathProfile(8.0, 34.5),
    Activity.DOMESTIC_WORK: BreathProfile(20.0, 35.0),
    Activity.WORK_FROM_HOME: BreathProfile(10.0, 34.5),
}


@dataclass(frozen=True)
class OccupantModel:
    breath: Dict[Activity, BreathProfile] = field(default_factory=lambda: dict(DEFAULT_BREATH))
    metabolic_offset: float = 0.0  # W
    air_density: float = RHO_AIR
    air_heat_capacity: float = CP_AIR
    floor: float = 0.0  # W, lower clamp when the room is warmer than the breath


def human_heat_output(activity: Activity, room_temp: float, model: OccupantModel = OccupantModel()) -> float:
    """Heat released by breathing plus ``metabolic_offset`` (W)."""
    if activity is Activity.AWAY:
        return 0.0
    try:
        bp = model.breath[activity]
    except KeyError:
        raise ValueError(f"no breath parameters for activity {activity!r}") from None
    flow = bp.rmv_l_per_min * 1e-3 / 60.0  # m^3/s
    q = flow * model.air_density * model.air_heat_capacity * (bp.ebt_c - room_temp)
    return max(q, model.floor) + model.metabolic_offset


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def euler_update(temp: float, outdoor_temp: float, q_hvac: float, q_human: float,
                 resistance: float, capacitance: float, dt: float) -> float:
    """One explicit Euler step of a single room node."""
    return temp + dt / capacitance * (q_hvac + q_human - (temp - outdoor_temp) / resistance)


def hvac_heat(mode: Mode, temp: float, params: ThermalParams) -> float:
    if mode == Mode.HEATING:
        return params.hvac_mass_flow_heat_capacity * (params.heater_flow_temp - temp)
    if mode == Mode.COOLING:
        return params.hvac_mass_flow_heat_capacity * (params.cooler_flow_temp - temp)
    return 0.0


def advance(state: HouseState, setpoint: float, params: ThermalParams,
            occupant_heats: Sequence[float], n_steps: int = 1,
            outdoor_temps: Optional[np.ndarray] = None,
            mode_log: Optional[np.ndarray] = None) -> HouseState:
    """Run ``n_steps`` Euler steps with a fixed setpoint and occupant heat.

    ``outdoor_temps`` optionally gives the outdoor temperature for each step
    (defaults to the state's current value). ``mode_log``, if given, must be
    an ``(n_steps, n_rooms)`` int8 array and receives the mode of every step.
    """
    n_rooms = len(state.rooms)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    temps = state.temps
    modes = state.modes
    q_h = np.ascontiguousarray(np.broadcast_to(np.asarray(occupant_heats, dtype=float), (n_rooms,)))
    if outdoor_temps is None:
        outdoor_temps = np.full(n_steps, state.outdoor_temp)
    t_out = np.ascontiguousarray(outdoor_temps, dtype=float)
    if t_out.shape != (n_steps,):
        raise ValueError("need one outdoor temperature per step")
    if mode_log is None:
        mode_log = np.empty((n_steps, n_rooms), dtype=np.int8)
    R, C, k = params.per_room(n_rooms)
    lo, hi = PLAUSIBLE_RANGE_C
    bad = kernels.integrate(temps, modes, float(setpoint), t_out, q_h, R, C, k,
                            float(params.heater_flow_temp), float(params.cooler_flow_temp),
                            float(params.thermostat_band), float(params.dt), lo, hi, mode_log)
    if bad >= 0:
        raise DivergenceError(
            f"indoor temperature diverged at step {bad} (temps {np.round(temps, 2).tolist()} C); "
            f"check R={params.thermal_resistance}, C={params.thermal_capacitance}, "
            f"k={params.hvac_mass_flow_heat_capacity}, dt={params.dt}")
    rooms = tuple(RoomState(float(t), Mode(int(m)), float(q)) for t, m, q in zip(temps, modes, q_h))
    return HouseState(rooms, float(t_out[-1]), state.clock + n_steps * params.dt)


def step(state: HouseState, setpoint: float, params: ThermalParams,
         occupant_heats: Sequence[float]) -> HouseState:
    """One Euler step: update thermostat modes, then temperatures; clock += dt."""
    return advance(state, setpoint, params, occupant_heats, 1)


def steps_per_period(period: float, params: ThermalParams) -> int:
    """Number of Euler steps covering one control period (must divide evenly)."""
    n = int(round(period / params.dt))
    if n < 1 or not math.isclose(n * params.dt, period):
        raise ValueError(f"control period {period}s is not a multiple of dt={params.dt}s")
    return n
