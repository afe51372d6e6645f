"""Closed-loop experiments: schedules -> setpoint decision -> house -> metrics.

Seed splitting: unless a human's schedule carries an explicit seed, human
``n`` uses the first 64-bit word of
``numpy.random.SeedSequence(master_seed, spawn_key=(n,))`` as its PCG64
seed. Schedules are realized once per run/comparison and shared by every
strategy, so adding a strategy never changes another strategy's trace.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import activity as act
from .activity import ACTIVITIES, Activity, ActivitySchedule
from .config import STRATEGIES, ConfigError, ExperimentConfig, parse_candidate_mode
from .core import (AdverseHistory, CandidateSet, PreferenceProfile, baseline_mean,
                   baseline_round_robin, baseline_weighted, history_accumulate,
                   select_approach1, select_approach2, select_approach3, select_approach4,
                   select_approach5)
from .metrics import (SR_EDGES, TDIFF_EDGES, Histogram, cov, histogram_overlap, jsd,
                      satisfaction_rate)
from .thermal import HouseState, Mode, advance, f_to_c, human_heat_output, steps_per_period

log = logging.getLogger(__name__)

AWAY = Activity.AWAY.code
MODE_NAMES = {int(m): m.name.lower() for m in Mode}


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

def derive_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def build_schedules(config: ExperimentConfig) -> List[ActivitySchedule]:
    days = max(1, math.ceil(config.samples * config.sampling_period / act.DAY))
    templates = act.read_schedule_csv(config.schedule_file) if config.schedule_file else None
    out = []
    for n, entry in enumerate(config.human_schedules()):
        seed = entry.seed if entry.seed is not None else derive_seed(config.master_seed, n)
        if templates is not None:
            if n not in templates:
                raise ConfigError(f"schedule file has no rows for human_id {n}")
            out.append(act.schedule_from_template(templates[n], seed, days))
        elif entry.archetype == "fixed":
            out.append(act.schedule_from_template(act.WeeklyTemplate.constant(Activity(entry.activity)), seed, days))
        else:
            out.append(act.generate_schedule(entry.archetype, seed, days))
    return out


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

@dataclass
class Trace:
    """Per-control-period record of one run. Temperatures in C, setpoints in F."""

    strategy: str
    window: int
    activity: np.ndarray  # (S, N) activity codes
    desired: np.ndarray  # (S, N) NaN when away
    applied: np.ndarray  # (S,)
    v: np.ndarray  # (S, N) NaN when away
    u: np.ndarray
    sr: np.ndarray  # NaN while the window is empty
    indoor: np.ndarray  # end of period
    modes: np.ndarray  # end of period
    fi_u: np.ndarray
    cov_u: np.ndarray
    fi_sr: np.ndarray
    cov_sr: np.ndarray
    conflict: np.ndarray
    feasible: np.ndarray
    aux_budget: np.ndarray
    aux_y: np.ndarray
    sampling_period: float = 360.0
    mode_log: Optional[np.ndarray] = field(default=None, repr=False)  # (S * substeps, N)

    @property
    def samples(self) -> int:
        return self.applied.shape[0]

    @property
    def num_humans(self) -> int:
        return self.v.shape[1]


@dataclass(frozen=True)
class Summary:
    strategy: str
    tdiff_overlap: float
    sr_jsd: float
    avg_fi_u: float
    avg_cov_u: float
    avg_fi_sr: float
    avg_cov_sr: float
    samples: int
    warmup: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ComparisonReport:
    config: ExperimentConfig
    traces: List[Trace]
    summaries: List[Summary]

    def summary(self, strategy: str) -> Summary:
        for s in self.summaries:
            if s.strategy == strategy:
                return s
        raise KeyError(strategy)

    def trace(self, strategy: str) -> Trace:
        for t in self.traces:
            if t.strategy == strategy:
                return t
        raise KeyError(strategy)


def _metric_pair(values: np.ndarray) -> Tuple[float, float]:
    c = cov(values) if values.size else math.nan
    return 1.0 / (1.0 + c * c), c


# ---------------------------------------------------------------------------
# the loop
# ---------------------------------------------------------------------------

class _Decider:
    def __init__(self, config: ExperimentConfig, strategy: str):
        self.cfg = config
        self.strategy = strategy
        self.turn = 0
        step = parse_candidate_mode(config.candidate_mode)
        self.grid = None if step is None else CandidateSet.grid(*config.action_range, step)
        self.weights = np.ones(config.num_humans) if config.weights is None else np.asarray(config.weights, float)

    def __call__(self, present: np.ndarray, desired: np.ndarray, u: np.ndarray):
        """Return ``(applied, feasible, aux_budget, aux_y)`` for a conflict step."""
        cfg, s = self.cfg, self.strategy
        td = desired[present]
        if s == "mean":
            return baseline_mean(td, cfg.action_range), True, math.nan, math.nan
        if s == "weighted":
            w = self.weights[present]
            if w.sum() <= 0:  # every weighted human is away
                w = np.ones_like(w)
            return baseline_weighted(td, w, cfg.action_range), True, math.nan, math.nan
        if s == "round_robin":
            ta, self.turn = baseline_round_robin(td, self.turn)
            return float(ta), True, math.nan, math.nan

        profiles = [PreferenceProfile.of(x) for x in td]
        cands = self.grid if self.grid is not None else CandidateSet(td)
        up = u[present]
        if s == "approach1":
            d = select_approach1(cands, profiles, cfg.fina)
        elif s == "approach2":
            d = select_approach2(cands, profiles, up)
        elif s == "approach3":
            d = select_approach3(cands, profiles, up, cfg.fina)
        elif s == "approach4":
            d = select_approach4(cands, profiles, up, cfg.fina)
        else:
            d = select_approach5(cands, profiles, up, cfg.fina)
        aux_b = math.nan if d.aux_budget is None else d.aux_budget
        aux_y = math.nan if d.aux_y is None else d.aux_y
        return d.value, d.feasible, aux_b, aux_y


def _outdoor(config: ExperimentConfig, times: np.ndarray) -> np.ndarray:
    o = config.outdoor
    if o.mode == "constant":
        return np.full(times.shape, float(o.mean))
    hours = times / 3600.0
    return o.mean + o.amplitude * np.cos(2 * np.pi * (hours - o.peak_hour) / 24.0)


def run_experiment(config: ExperimentConfig, strategy: Optional[str] = None,
                   schedules: Optional[Sequence[ActivitySchedule]] = None) -> Trace:
    """Simulate one strategy for ``config.samples`` control periods."""
    strategy = strategy or config.strategy
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}")
    if schedules is None:
        schedules = build_schedules(config)
    N, S, T = config.num_humans, config.samples, config.window
    if len(schedules) != N:
        raise ConfigError(f"got {len(schedules)} schedules for {N} humans")
    period = config.sampling_period
    n_sub = steps_per_period(period, config.thermal)
    dt = config.thermal.dt

    times = np.arange(S) * period
    codes = np.stack([s.codes_at(times) for s in schedules], axis=1).astype(np.int8)
    lookup = np.array([config.setpoints.get(a, math.nan) if a is not Activity.AWAY else math.nan
                       for a in ACTIVITIES])
    desired = lookup[codes]

    nan = lambda *shape: np.full(shape, math.nan)
    tr = Trace(strategy=strategy, window=T, activity=codes, desired=desired,
               applied=nan(S), v=nan(S, N), u=nan(S, N), sr=nan(S, N), indoor=nan(S, N),
               modes=np.zeros((S, N), np.int8), fi_u=nan(S), cov_u=nan(S), fi_sr=nan(S),
               cov_sr=nan(S), conflict=np.zeros(S, bool), feasible=np.ones(S, bool),
               aux_budget=nan(S), aux_y=nan(S), sampling_period=period,
               mode_log=np.zeros((S * n_sub, N), np.int8))

    decide = _Decider(config, strategy)
    histories = [AdverseHistory(T) for _ in range(N)]
    u = np.zeros(N)
    house = HouseState.initial(N, config.initial_indoor_temp, float(_outdoor(config, times[:1])[0]))
    sub_offsets = np.arange(n_sub) * dt
    acts = [ACTIVITIES[c] for c in range(len(ACTIVITIES))]

    for k in range(S):
        present = codes[k] != AWAY
        td = desired[k]
        idx = np.flatnonzero(present)
        if idx.size == 0:
            ta = config.vacant_setpoint
        elif np.all(td[idx] == td[idx[0]]):
            ta = float(td[idx[0]])
        else:
            tr.conflict[k] = True
            ta, ok, b, y = decide(present, td, u)
            tr.feasible[k], tr.aux_budget[k], tr.aux_y[k] = ok, b, y
        tr.applied[k] = ta

        for n in idx:
            vn = abs(ta - td[n])
            tr.v[k, n] = vn
            histories[n].push(vn)
        for n in range(N):
            if len(histories[n]):
                u[n] = history_accumulate(histories[n])
                tr.sr[k, n] = satisfaction_rate(histories[n], config.satisfaction_threshold)
        tr.u[k] = u
        active = np.array([len(h) > 0 for h in histories])
        tr.fi_u[k], tr.cov_u[k] = _metric_pair(u[active])
        tr.fi_sr[k], tr.cov_sr[k] = _metric_pair(tr.sr[k, active])

        q = [human_heat_output(acts[codes[k, n]], house.rooms[n].indoor_temp, config.occupants)
             for n in range(N)]
        house = advance(house, f_to_c(ta), config.thermal, q, n_sub,
                        _outdoor(config, times[k] + sub_offsets),
                        tr.mode_log[k * n_sub:(k + 1) * n_sub])
        tr.indoor[k] = house.temps
        tr.modes[k] = house.modes
    return tr


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

def summarize(trace: Trace, tdiff_edges=TDIFF_EDGES, sr_edges=SR_EDGES) -> Summary:
    """Table-style statistics over the post-warmup periods (``sample >= window``)."""
    w = trace.window
    N = trace.num_humans
    post = slice(w, None)
    if N >= 2:
        tdiff = [Histogram.from_samples(_finite(trace.v[post, n]), tdiff_edges) for n in range(N)]
        srh = [Histogram.from_samples(_finite(trace.sr[post, n]), sr_edges) for n in range(N)]
        usable = all(h.total > 0 for h in tdiff)
        overlap = histogram_overlap(tdiff) if usable else math.nan
        sr_jsd = jsd(srh) if all(h.total > 0 for h in srh) else math.nan
    else:
        overlap, sr_jsd = 100.0, 0.0
    return Summary(
        strategy=trace.strategy,
        tdiff_overlap=overlap,
        sr_jsd=sr_jsd,
        avg_fi_u=_mean(trace.fi_u[post]),
        avg_cov_u=_mean(trace.cov_u[post]),
        avg_fi_sr=_mean(trace.fi_sr[post]),
        avg_cov_sr=_mean(trace.cov_sr[post]),
        samples=trace.samples,
        warmup=w,
    )


def _finite(x: np.ndarray) -> np.ndarray:
    return x[np.isfinite(x)]


def _mean(x: np.ndarray) -> float:
    x = _finite(x)
    return float(x.mean()) if x.size else math.nan


def compare_strategies(config: ExperimentConfig, strategies: Optional[Sequence[str]] = None) -> ComparisonReport:
    strategies = list(config.strategies if strategies is None else strategies)
    if len(strategies) < 2:
        raise ConfigError("a comparison needs at least two strategies")
    schedules = build_schedules(config)
    traces = []
    for s in strategies:
        log.info("running %s", s)
        traces.append(run_experiment(config, s, schedules))
    return ComparisonReport(config, traces, [summarize(t) for t in traces])


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def trace_header(n: int) -> List[str]:
    per = lambda name: [f"{name}_h{i}" for i in range(n)]
    return (["sample", "time"] + per("activity") + per("td") + ["ta"] + per("v") + per("u")
            + per("sr") + per("indoor") + per("mode")
            + ["fi_u", "cov_u", "fi_sr", "cov_sr", "conflict", "feasible", "aux_budget", "aux_y"])


def write_trace_csv(trace: Trace, path) -> None:
    N = trace.num_humans
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(N))
        for k in range(trace.samples):
            row = [str(k), _fmt(k * trace.sampling_period)]
            row += [ACTIVITIES[c].value for c in trace.activity[k]]
            row += [_fmt(x) for x in trace.desired[k]]
            row.append(_fmt(trace.applied[k]))
            for arr in (trace.v, trace.u, trace.sr, trace.indoor):
                row += [_fmt(x) for x in arr[k]]
            row += [MODE_NAMES[int(m)] for m in trace.modes[k]]
            row += [_fmt(trace.fi_u[k]), _fmt(trace.cov_u[k]), _fmt(trace.fi_sr[k]), _fmt(trace.cov_sr[k]),
                    str(int(trace.conflict[k])), str(int(trace.feasible[k])),
                    _fmt(trace.aux_budget[k]), _fmt(trace.aux_y[k])]
            w.writerow(row)


def read_trace_csv(path, strategy: str = "", window: int = 100) -> Trace:
    """Parse a trace written by :func:`write_trace_csv` (``mode_log`` is not stored)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace file")
    header, body = rows[0], rows[1:]
    N = sum(1 for h in header if h.startswith("activity_h"))
    if header != trace_header(N):
        raise ValueError(f"{path}: not a trace file (unexpected header)")
    col = {h: i for i, h in enumerate(header)}
    S = len(body)

    def num(name):
        return np.array([float(r[col[name]]) if r[col[name]] else math.nan for r in body])

    def per(name, conv=num):
        return np.stack([conv(f"{name}_h{n}") for n in range(N)], axis=1) if S else np.zeros((0, N))

    by_name = {a.value: a.code for a in ACTIVITIES}
    mode_codes = {v: k for k, v in MODE_NAMES.items()}
    period = float(body[1][col["time"]]) if S > 1 else 360.0
    return Trace(
        strategy=strategy, window=window,
        activity=per("activity", lambda c: np.array([by_name[r[col[c]]] for r in body], np.int8)),
        desired=per("td"), applied=num("ta"), v=per("v"), u=per("u"), sr=per("sr"),
        indoor=per("indoor"),
        modes=per("mode", lambda c: np.array([mode_codes[r[col[c]]] for r in body], np.int8)),
        fi_u=num("fi_u"), cov_u=num("cov_u"), fi_sr=num("fi_sr"), cov_sr=num("cov_sr"),
        conflict=num("conflict").astype(bool), feasible=num("feasible").astype(bool),
        aux_budget=num("aux_budget"), aux_y=num("aux_y"), sampling_period=period)


def _dump_json(doc, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def emit_outputs(report: ComparisonReport, out_dir, fmt: str = "both",
                 summary_name: str = "summary.json") -> List[str]:
    """Write one trace CSV per strategy and/or the JSON summary; returns the paths."""
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"unknown output format {fmt!r}")
    if not report.traces:
        raise ConfigError("nothing to write: the strategy list is empty")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        for tr in report.traces:
            path = os.path.join(out_dir, f"trace_{tr.strategy}.csv")
            write_trace_csv(tr, path)
            written.append(path)
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, summary_name)
        _dump_json({
            "config": report.config.to_dict(),
            "strategies": [s.strategy for s in report.summaries],
            "summaries": [s.to_dict() for s in report.summaries],
        }, path)
        written.append(path)
    return written
