"""Occupant activities, their desired setpoints, and weekly schedule generation.

A schedule is built from a weekly *template*: for every (day of week, hour)
slot a set of admissible activities. Each day of the horizon then draws one
activity per slot uniformly from that set. A template without alternatives
therefore realizes the same week over and over.

Schedule CSV format (one row per slot, slots tile every day from 0 to 24)::

    human_id,day_of_week,start_hour,end_hour,activity,alternatives
    0,0,0,7,sleeping,
    2,5,9,12,domestic_work,relaxing|away

``day_of_week`` is 0 (Monday) to 6; ``alternatives`` is a ``|``-separated
list that may be empty. Simulation time 0 is Monday 00:00.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

HOUR = 3600.0
DAY = 24 * HOUR
WEEK = 7 * DAY


class Activity(str, enum.Enum):
    SLEEPING = "sleeping"
    RELAXING = "relaxing"
    DOMESTIC_WORK = "domestic_work"
    WORK_FROM_HOME = "work_from_home"
    AWAY = "away"

    @property
    def code(self) -> int:
        return _CODES[self]


ACTIVITIES: Tuple[Activity, ...] = tuple(Activity)
_CODES = {a: i for i, a in enumerate(ACTIVITIES)}

DEFAULT_SETPOINTS_F: Dict[Activity, float] = {
    Activity.DOMESTIC_WORK: 72.0,
    Activity.RELAXING: 77.0,
    Activity.SLEEPING: 62.0,
    Activity.WORK_FROM_HOME: 67.0,
}


class Archetype(str, enum.Enum):
    ROUTINE = "routine"
    INTERMEDIATE = "intermediate"
    RANDOM = "random"


def desired_setpoint(activity: Activity, table: Optional[Mapping[Activity, float]] = None) -> Optional[float]:
    """Desired setpoint in degrees F, or ``None`` when the human is away."""
    if activity is Activity.AWAY:
        return None
    table = DEFAULT_SETPOINTS_F if table is None else table
    try:
        return float(table[activity])
    except KeyError:
        raise ValueError(f"no setpoint configured for {activity.value!r}") from None


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------

S, R, D, W, A = (Activity.SLEEPING, Activity.RELAXING, Activity.DOMESTIC_WORK,
                 Activity.WORK_FROM_HOME, Activity.AWAY)


def _day(*spans) -> List[Activity]:
    hours: List[Activity] = []
    for act, start, end in spans:
        assert start == len(hours), (start, len(hours))
        hours.extend([act] * (end - start))
    assert len(hours) == 24
    return hours


# Base layouts per archetype: [weekday, weekend] hourly activities.
_BASE = {
    Archetype.ROUTINE: (
        _day((S, 0, 7), (D, 7, 8), (W, 8, 17), (D, 17, 19), (R, 19, 23), (S, 23, 24)),
        _day((S, 0, 9), (D, 9, 12), (R, 12, 18), (D, 18, 20), (R, 20, 23), (S, 23, 24)),
    ),
    Archetype.INTERMEDIATE: (
        _day((S, 0, 8), (A, 8, 17), (D, 17, 19), (R, 19, 23), (S, 23, 24)),
        _day((S, 0, 9), (D, 9, 13), (A, 13, 18), (R, 18, 23), (S, 23, 24)),
    ),
    Archetype.RANDOM: (
        _day((S, 0, 7), (D, 7, 11), (W, 11, 16), (R, 16, 22), (S, 22, 24)),
        _day((S, 0, 10), (R, 10, 14), (D, 14, 18), (R, 18, 24)),
    ),
}

# (fraction of slots with alternatives, min alternatives, max alternatives, pool)
_VARIABILITY = {
    Archetype.ROUTINE: (0.0, 0, 0, ()),
    Archetype.INTERMEDIATE: (0.3, 1, 1, (S, A, D, R)),
    Archetype.RANDOM: (0.7, 1, 2, ACTIVITIES),
}


@dataclass(frozen=True)
class WeeklyTemplate:
    """``slots[dow][hour]`` is the tuple of admissible activities (base first)."""

    slots: Tuple[Tuple[Tuple[Activity, ...], ...], ...]

    def __post_init__(self):
        if len(self.slots) != 7 or any(len(day) != 24 for day in self.slots):
            raise ValueError("a weekly template needs 7 days of 24 hourly slots")
        if any(len(s) == 0 for day in self.slots for s in day):
            raise ValueError("every slot needs at least one activity")

    @classmethod
    def for_archetype(cls, archetype: Archetype, rng: np.random.Generator) -> "WeeklyTemplate":
        archetype = Archetype(archetype)
        weekday, weekend = _BASE[archetype]
        frac, lo, hi, pool = _VARIABILITY[archetype]
        days = []
        for dow in range(7):
            base = weekend if dow >= 5 else weekday
            day = []
            for hour in range(24):
                acts = [base[hour]]
                if frac > 0 and rng.random() < frac:
                    others = [a for a in pool if a != base[hour]]
                    k = int(rng.integers(lo, hi + 1))
                    picks = rng.choice(len(others), size=k, replace=False)
                    acts.extend(others[i] for i in sorted(picks))
                day.append(tuple(acts))
            days.append(tuple(day))
        return cls(tuple(days))

    @classmethod
    def constant(cls, activity: Activity) -> "WeeklyTemplate":
        return cls(tuple(tuple((Activity(activity),) for _ in range(24)) for _ in range(7)))

    @property
    def alternative_fraction(self) -> float:
        return float(np.mean([len(s) > 1 for day in self.slots for s in day]))


@dataclass(frozen=True)
class ActivitySchedule:
    """Realized hourly activities of one human over a horizon of whole days.

    ``entries`` holds ``(slot_start_s, slot_end_s, admissible)`` for every
    hourly slot; ``realized`` the drawn activity codes (same order).
    """

    template: WeeklyTemplate
    realized: np.ndarray
    archetype: Optional[Archetype] = None
    seed: Optional[int] = None

    @property
    def horizon(self) -> float:
        return self.realized.shape[0] * HOUR

    @property
    def entries(self) -> List[Tuple[float, float, Tuple[Activity, ...]]]:
        out = []
        for i in range(self.realized.shape[0]):
            dow, hour = (i // 24) % 7, i % 24
            out.append((i * HOUR, (i + 1) * HOUR, self.template.slots[dow][hour]))
        return out

    def activity_at(self, time: float) -> Activity:
        return activity_at(self, time)

    def codes_at(self, times: np.ndarray) -> np.ndarray:
        idx = np.floor_divide(np.asarray(times, dtype=float), HOUR).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= self.realized.shape[0]):
            raise ValueError("time outside schedule horizon")
        return self.realized[idx]


def realize(template: WeeklyTemplate, days: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one activity per hourly slot for ``days`` days."""
    if days < 1:
        raise ValueError("horizon must be at least one day")
    codes = np.empty(days * 24, dtype=np.int8)
    for d in range(days):
        week_day = template.slots[d % 7]
        for h in range(24):
            acts = week_day[h]
            pick = acts[0] if len(acts) == 1 else acts[int(rng.integers(len(acts)))]
            codes[d * 24 + h] = pick.code
    return codes


def generate_schedule(archetype, seed: int, horizon_days: int) -> ActivitySchedule:
    """Template and realization are both drawn from one PCG64 stream seeded with ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    archetype = Archetype(archetype)
    template = WeeklyTemplate.for_archetype(archetype, rng)
    return ActivitySchedule(template, realize(template, horizon_days, rng), archetype, seed)


def schedule_from_template(template: WeeklyTemplate, seed: int, horizon_days: int) -> ActivitySchedule:
    rng = np.random.Generator(np.random.PCG64(seed))
    return ActivitySchedule(template, realize(template, horizon_days, rng), None, seed)


def activity_at(schedule: ActivitySchedule, time: float) -> Activity:
    """Activity of the half-open hourly slot containing ``time`` (seconds)."""
    if not 0 <= time < schedule.horizon:
        raise ValueError(f"time {time}s outside schedule horizon [0, {schedule.horizon})")
    return ACTIVITIES[schedule.realized[int(time // HOUR)]]


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("human_id", "day_of_week", "start_hour", "end_hour", "activity", "alternatives")


def template_rows(human_id: int, template: WeeklyTemplate) -> List[tuple]:
    """Merge consecutive identical hourly slots into CSV rows."""
    rows = []
    for dow, day in enumerate(template.slots):
        start = 0
        for hour in range(1, 25):
            if hour == 24 or day[hour] != day[start]:
                acts = day[start]
                rows.append((human_id, dow, start, hour, acts[0].value, "|".join(a.value for a in acts[1:])))
                start = hour
    return rows


def write_schedule_csv(path, templates: Sequence[WeeklyTemplate]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for hid, tpl in enumerate(templates):
            w.writerows(template_rows(hid, tpl))


def read_schedule_csv(path) -> Dict[int, WeeklyTemplate]:
    """Load templates keyed by ``human_id``; every day must be tiled exactly once."""
    grid: Dict[int, List[List[Optional[Tuple[Activity, ...]]]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"schedule CSV must have columns {','.join(CSV_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                hid, dow = int(row["human_id"]), int(row["day_of_week"])
                start, end = int(row["start_hour"]), int(row["end_hour"])
                acts = [Activity(row["activity"])]
                alt = row["alternatives"] or ""
                acts += [Activity(a) for a in alt.split("|") if a]
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not (0 <= dow < 7 and 0 <= start < end <= 24):
                raise ValueError(f"{path}:{lineno}: bad slot day={dow} {start}-{end}")
            days = grid.setdefault(hid, [[None] * 24 for _ in range(7)])
            for h in range(start, end):
                if days[dow][h] is not None:
                    raise ValueError(f"{path}:{lineno}: slot day={dow} hour={h} overlaps an earlier row")
                days[dow][h] = tuple(acts)
    out = {}
    for hid, days in sorted(grid.items()):
        gaps = [(d, h) for d in range(7) for h in range(24) if days[d][h] is None]
        if gaps:
            raise ValueError(f"{path}: human {hid} has uncovered slots, first at day={gaps[0][0]} hour={gaps[0][1]}")
        out[hid] = WeeklyTemplate(tuple(tuple(day) for day in days))
    return out
