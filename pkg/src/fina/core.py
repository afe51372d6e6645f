"""Adverse effects, recency-weighted history and the FinA action selectors.

All selectors work over a finite :class:`CandidateSet` and are pure: the same
inputs always yield the same :class:`Decision`. Ties go to the candidate that
comes first in the canonical (lexicographic) order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels

#: legal setpoint range of the HVAC application, in degrees Fahrenheit
HVAC_RANGE_F = (60.0, 80.0)


def _as_action(a) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(a, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"an action must be a scalar or a 1-D vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PreferenceProfile:
    """The set of actions one human prefers, stored as a ``(g, d)`` array."""

    preferred: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.preferred, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("a preference profile needs at least one preferred action")
        arr.setflags(write=False)
        object.__setattr__(self, "preferred", arr)

    @classmethod
    def of(cls, *actions) -> "PreferenceProfile":
        """``PreferenceProfile.of(62)`` or ``PreferenceProfile.of((0, 0), (1, 2))``."""
        return cls(np.stack([_as_action(a) for a in actions]))

    @property
    def dim(self) -> int:
        return self.preferred.shape[1]


class CandidateSet:
    """Deduplicated, lexicographically ordered finite set of actions."""

    def __init__(self, actions: Iterable):
        rows = [tuple(_as_action(a)) for a in actions]
        if not rows:
            raise ValueError("candidate set is empty")
        dims = {len(r) for r in rows}
        if len(dims) != 1:
            raise ValueError(f"candidate actions have mixed dimensions {sorted(dims)}")
        self.actions = np.array(sorted(set(rows)), dtype=float)
        self.actions.setflags(write=False)

    @classmethod
    def union(cls, profiles: Sequence[PreferenceProfile]) -> "CandidateSet":
        return cls(row for p in profiles for row in p.preferred)

    @classmethod
    def grid(cls, lo: float = HVAC_RANGE_F[0], hi: float = HVAC_RANGE_F[1],
             step: float = 1.0) -> "CandidateSet":
        if step <= 0 or hi < lo:
            raise ValueError("grid needs step > 0 and hi >= lo")
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return cls(lo + step * np.arange(count))

    def __len__(self) -> int:
        return self.actions.shape[0]

    def __iter__(self):
        return iter(self.actions)

    def __repr__(self) -> str:
        return f"CandidateSet({self.actions.squeeze(-1).tolist() if self.dim == 1 else self.actions.tolist()})"

    @property
    def dim(self) -> int:
        return self.actions.shape[1]


def as_candidates(candidates) -> CandidateSet:
    return candidates if isinstance(candidates, CandidateSet) else CandidateSet(candidates)


class AdverseHistory:
    """Sliding window of the last ``capacity`` adverse-effect samples (oldest first)."""

    def __init__(self, capacity: int, samples: Iterable[float] = ()):
        if capacity < 1:
            raise ValueError("capacity must be a positive integer")
        self.capacity = int(capacity)
        self._buf: deque = deque(maxlen=self.capacity)
        for s in samples:
            self.push(s)

    def push(self, value: float) -> None:
        value = float(value)
        if not value >= 0.0:
            raise ValueError(f"adverse effect samples must be nonnegative, got {value}")
        self._buf.append(value)

    @property
    def samples(self) -> np.ndarray:
        return np.fromiter(self._buf, dtype=float, count=len(self._buf))

    def __len__(self) -> int:
        return len(self._buf)

    def __repr__(self) -> str:
        return f"AdverseHistory(capacity={self.capacity}, len={len(self)})"


def history_accumulate(history) -> float:
    """Recency-weighted accumulation ``(1/T) sum_j (j/T) v_j`` of a window.

    ``T`` is the current window length, so a partially filled window is
    treated as if it were the whole horizon. The oldest sample gets weight 0.
    """
    s = history.samples if isinstance(history, AdverseHistory) else np.asarray(history, dtype=float)
    t = s.shape[0]
    if t == 0:
        return 0.0
    return float(np.dot(np.arange(t, dtype=float), s) / (t * t))


@dataclass(frozen=True)
class FinaParams:
    """Tuning knobs shared by the five selectors.

    ``budget_history`` picks which history feeds the budget term of approach V:
    ``"updated"`` (history plus the candidate's own adverse effect) or
    ``"historical"`` (history only, as in approach II).
    """

    lam: float = 1.0
    alpha: float = 0.5
    beta: float = 0.5
    epsilon: float = 0.5
    budget_history: str = "updated"

    def __post_init__(self):
        for name in ("lam", "alpha", "beta", "epsilon"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.alpha + self.beta <= 0:
            raise ValueError("alpha + beta must be positive")
        if self.budget_history not in ("updated", "historical"):
            raise ValueError("budget_history must be 'updated' or 'historical'")


@dataclass
class Decision:
    action: np.ndarray
    objective: float
    adverse_effects: np.ndarray
    feasible: bool = True
    aux_budget: Optional[float] = None
    aux_budgets: Optional[np.ndarray] = None
    aux_y: Optional[float] = None
    index: int = field(default=-1, repr=False)

    @property
    def value(self) -> float:
        """The chosen action as a float (scalar actions only)."""
        if self.action.shape != (1,):
            raise ValueError("value is only defined for scalar actions")
        return float(self.action[0])


# ---------------------------------------------------------------------------
# adverse effects
# ---------------------------------------------------------------------------

def adverse_effect(action, profile: PreferenceProfile) -> float:
    """Largest Euclidean distance from ``action`` to any preferred action."""
    a = _as_action(action)
    if a.shape[0] != profile.dim:
        raise ValueError(f"action has dimension {a.shape[0]}, profile has {profile.dim}")
    return float(np.sqrt(((profile.preferred - a) ** 2).sum(axis=1)).max())


def adverse_effect_vector(action, profiles: Sequence[PreferenceProfile]) -> np.ndarray:
    if len(profiles) == 0:
        raise ValueError("at least one preference profile is required")
    return np.array([adverse_effect(action, p) for p in profiles])


def _pack(profiles: Sequence[PreferenceProfile], dim: int):
    if len(profiles) == 0:
        raise ValueError("at least one preference profile is required")
    for p in profiles:
        if p.dim != dim:
            raise ValueError(f"profile dimension {p.dim} does not match candidate dimension {dim}")
    prefs = np.concatenate([p.preferred for p in profiles])
    owner = np.repeat(np.arange(len(profiles)), [p.preferred.shape[0] for p in profiles])
    return np.ascontiguousarray(prefs), owner


def adverse_matrix(candidates: CandidateSet, profiles: Sequence[PreferenceProfile]) -> np.ndarray:
    """``(len(candidates), N)`` matrix of adverse effects."""
    prefs, owner = _pack(profiles, candidates.dim)
    return kernels.adverse_matrix(np.ascontiguousarray(candidates.actions), prefs, owner, len(profiles))


def _history_vector(u, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (n,):
        raise ValueError(f"history vector has shape {u.shape}, expected ({n},)")
    return u


def _argmin(values: np.ndarray) -> int:
    # np.argmin returns the first minimum, i.e. the canonical tie-break
    return int(np.argmin(values))


def _decision(cset, V, i, objective, **aux) -> Decision:
    return Decision(action=cset.actions[i].copy(), objective=float(objective),
                    adverse_effects=V[i].copy(), index=i, **aux)


# ---------------------------------------------------------------------------
# selectors
# ---------------------------------------------------------------------------

def select_approach1(candidates, profiles, params: FinaParams = FinaParams()) -> Decision:
    """Instantaneous fairness: spread of ``v(a)`` around its mean plus ``lam`` times the mean."""
    cset = as_candidates(candidates)
    V = adverse_matrix(cset, profiles)
    J = kernels.dispersion_objective(V, params.lam)
    i = _argmin(J)
    return _decision(cset, V, i, J[i])


def select_approach2(candidates, profiles, u) -> Decision:
    """Smallest common budget ``B`` with ``v_n(a) + u_n <= B`` for every human."""
    cset = as_candidates(candidates)
    V = adverse_matrix(cset, profiles)
    B = kernels.budget(V, _history_vector(u, V.shape[1]))
    i = _argmin(B)
    return _decision(cset, V, i, B[i], aux_budget=float(B[i]))


def select_approach3(candidates, profiles, u, params: FinaParams = FinaParams()) -> Decision:
    """Tradeoff between instantaneous dispersion and history-weighted per-human budgets.

    For a fixed action the per-human budgets are tight at ``b = v(a)``, which
    leaves ``alpha * J1(a) + beta * u.v(a)``.
    """
    cset = as_candidates(candidates)
    V = adverse_matrix(cset, profiles)
    u = _history_vector(u, V.shape[1])
    J = params.alpha * kernels.dispersion_objective(V, params.lam) + params.beta * kernels.weighted_history(V, u)
    i = _argmin(J)
    return _decision(cset, V, i, J[i], aux_budgets=V[i].copy())


def select_approach4(candidates, profiles, u_hist, params: FinaParams = FinaParams()) -> Decision:
    """Minimise the reciprocal fairness index of the updated histories.

    Candidates whose updated histories deviate from their mean by more than
    ``epsilon`` (relative) are infeasible. If nothing is feasible the
    candidate with the smallest worst-case deviation is returned and
    flagged ``feasible=False``.
    """
    cset = as_candidates(candidates)
    V = adverse_matrix(cset, profiles)
    y, dev = kernels.fairness_y(V, _history_vector(u_hist, V.shape[1]))
    ok = dev <= params.epsilon
    if ok.any():
        i = _argmin(np.where(ok, y, np.inf))
        return _decision(cset, V, i, y[i], aux_y=float(y[i]))
    i = _argmin(dev)
    return _decision(cset, V, i, y[i], aux_y=float(y[i]), feasible=False)


def select_approach5(candidates, profiles, u_hist, params: FinaParams = FinaParams()) -> Decision:
    """Tradeoff ``alpha * y + beta * B`` between the fairness term and the budget."""
    cset = as_candidates(candidates)
    V = adverse_matrix(cset, profiles)
    u_hist = _history_vector(u_hist, V.shape[1])
    y, _ = kernels.fairness_y(V, u_hist)
    if params.budget_history == "updated":
        # v <= B - u with u = u_hist + v
        B = kernels.budget(2.0 * V, u_hist)
    else:
        B = kernels.budget(V, u_hist)
    J = params.alpha * y + params.beta * B
    i = _argmin(J)
    return _decision(cset, V, i, J[i], aux_y=float(y[i]), aux_budget=float(B[i]))


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def _desired_array(desired) -> np.ndarray:
    arr = np.asarray(desired, dtype=float)
    if arr.ndim == 0 or arr.shape[0] == 0:
        raise ValueError("at least one desired action is required")
    return arr


def _clamp(value, bounds):
    if bounds is None:
        return value
    out = np.clip(value, bounds[0], bounds[1])
    return float(out) if np.ndim(out) == 0 else out


def baseline_mean(desired, bounds=HVAC_RANGE_F):
    """Componentwise mean of the desired actions, clamped to ``bounds``."""
    arr = _desired_array(desired)
    return _clamp(arr.mean(axis=0), bounds)


def baseline_round_robin(desired, turn: int):
    """Pick ``desired[turn mod N]``; returns ``(action, turn + 1)``."""
    if len(desired) == 0:
        raise ValueError("at least one desired action is required")
    if turn < 0:
        raise ValueError("turn must be nonnegative")
    return desired[turn % len(desired)], turn + 1


def baseline_weighted(desired, weights, bounds=HVAC_RANGE_F):
    """Static weighted sum of the desired actions (weights are normalised)."""
    arr = _desired_array(desired)
    w = np.asarray(weights, dtype=float)
    if w.shape != (arr.shape[0],):
        raise ValueError(f"expected {arr.shape[0]} weights, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    return _clamp(np.tensordot(w / total, arr, axes=1), bounds)
