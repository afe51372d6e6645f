"""Numeric inner loops.

Every kernel exists twice: a vectorised numpy version (``*_np``) and an
explicit-loop version compiled with ``numba.njit`` (``*_nb``). The public
name (no suffix) is bound to the numba variant unless numba is missing or
``FINA_DISABLE_NUMBA`` is set to a truthy value before import.

Mode codes used by the thermal kernels: 0 idle, 1 heating, 2 cooling.
"""

import os

import numpy as np

IDLE, HEATING, COOLING = 0, 1, 2

_DISABLED = os.environ.get("FINA_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAS_NUMBA = _numba is not None
USE_NUMBA = HAS_NUMBA and not _DISABLED


def _jit(fn):
    if not HAS_NUMBA:
        return fn
    return _numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------------------
# adverse effects
# ---------------------------------------------------------------------------

def adverse_matrix_np(cands, prefs, owner, n_humans):
    """``V[m, n] = max_{p: owner[p] == n} ||prefs[p] - cands[m]||``."""
    diff = prefs[None, :, :] - cands[:, None, :]
    dist = np.sqrt(np.einsum("mpd,mpd->mp", diff, diff))
    out = np.full((cands.shape[0], n_humans), -np.inf)
    for n in range(n_humans):
        sel = owner == n
        out[:, n] = dist[:, sel].max(axis=1)
    return out


def _adverse_matrix_loop(cands, prefs, owner, n_humans):
    m_count, dim = cands.shape
    out = np.full((m_count, n_humans), -np.inf)
    for m in range(m_count):
        for p in range(prefs.shape[0]):
            acc = 0.0
            for k in range(dim):
                d = prefs[p, k] - cands[m, k]
                acc += d * d
            dist = np.sqrt(acc)
            n = owner[p]
            if dist > out[m, n]:
                out[m, n] = dist
    return out


# ---------------------------------------------------------------------------
# per-candidate objectives
#
# Symmetric objectives are evaluated on row-sorted values so that relabelling
# the humans cannot change the result bits (ties stay ties).
# ---------------------------------------------------------------------------

def _row_sum_np(a):
    # sequential left-to-right sum, identical to the loop kernels
    acc = np.zeros(a.shape[0])
    for j in range(a.shape[1]):
        acc = acc + a[:, j]
    return acc


def dispersion_objective_np(V, lam):
    s = np.sort(V, axis=1)
    n = s.shape[1]
    mean = _row_sum_np(s) / n
    dev = np.sqrt(_row_sum_np((s - mean[:, None]) ** 2))
    return dev + lam * np.abs(mean)


def _dispersion_objective_loop(V, lam):
    m_count, n = V.shape
    out = np.empty(m_count)
    s = np.empty(n)
    for m in range(m_count):
        # insertion sort: rows are short, and numba's sort allocates
        for j in range(n):
            x = V[m, j]
            i = j
            while i > 0 and s[i - 1] > x:
                s[i] = s[i - 1]
                i -= 1
            s[i] = x
        tot = 0.0
        for j in range(n):
            tot += s[j]
        mean = tot / n
        sq = 0.0
        for j in range(n):
            d = s[j] - mean
            sq += d * d
        out[m] = np.sqrt(sq) + lam * abs(mean)
    return out


def budget_np(V, u):
    return (V + u[None, :]).max(axis=1)


def _budget_loop(V, u):
    m_count, n = V.shape
    out = np.empty(m_count)
    for m in range(m_count):
        best = V[m, 0] + u[0]
        for j in range(1, n):
            b = V[m, j] + u[j]
            if b > best:
                best = b
        out[m] = best
    return out


def weighted_history_np(V, u):
    return _row_sum_np(V * u[None, :])


def _weighted_history_loop(V, u):
    m_count, n = V.shape
    out = np.empty(m_count)
    for m in range(m_count):
        acc = 0.0
        for j in range(n):
            acc += V[m, j] * u[j]
        out[m] = acc
    return out


def fairness_y_np(V, u_hist):
    """Return ``(y, max_rel_dev)`` for the updated histories ``u_hist + V``."""
    s = np.sort(V + u_hist[None, :], axis=1)
    n = s.shape[1]
    mean = _row_sum_np(s) / n
    zero = mean == 0.0
    safe = np.where(zero, 1.0, mean)
    rel = np.abs(s - mean[:, None]) / safe[:, None]
    y = 1.0 + _row_sum_np(rel * rel) / n
    y[zero] = 1.0
    dev = rel.max(axis=1)
    dev[zero] = 0.0
    return y, dev


def _fairness_y_loop(V, u_hist):
    m_count, n = V.shape
    y = np.empty(m_count)
    dev = np.empty(m_count)
    s = np.empty(n)
    for m in range(m_count):
        for j in range(n):
            x = V[m, j] + u_hist[j]
            i = j
            while i > 0 and s[i - 1] > x:
                s[i] = s[i - 1]
                i -= 1
            s[i] = x
        tot = 0.0
        for j in range(n):
            tot += s[j]
        mean = tot / n
        if mean == 0.0:
            y[m] = 1.0
            dev[m] = 0.0
            continue
        sq = 0.0
        worst = 0.0
        for j in range(n):
            r = abs(s[j] - mean) / mean
            sq += r * r
            if r > worst:
                worst = r
        y[m] = 1.0 + sq / n
        dev[m] = worst
    return y, dev


# ---------------------------------------------------------------------------
# thermal integration
# ---------------------------------------------------------------------------

def _next_mode(temp, setpoint, band, prev):
    if prev == HEATING:
        return IDLE if temp >= setpoint else HEATING
    if prev == COOLING:
        return IDLE if temp <= setpoint else COOLING
    if temp < setpoint - band:
        return HEATING
    if temp > setpoint + band:
        return COOLING
    return IDLE


_next_mode_nb = _jit(_next_mode)


def _make_integrator(next_mode):
    def integrate(temps, modes, setpoint, t_out, q_human, R, C, k, heat_flow, cool_flow,
                  band, dt, lo, hi, mode_log):
        """Advance all rooms ``len(t_out)`` Euler steps in place.

        ``mode_log[s, r]`` receives the mode used during step ``s``. Returns the
        index of the first step that left ``[lo, hi]`` or -1.
        """
        n_steps = t_out.shape[0]
        n_rooms = temps.shape[0]
        for s in range(n_steps):
            for r in range(n_rooms):
                mode = next_mode(temps[r], setpoint, band, modes[r])
                modes[r] = mode
                mode_log[s, r] = mode
                if mode == HEATING:
                    q_hvac = k[r] * (heat_flow - temps[r])
                elif mode == COOLING:
                    q_hvac = k[r] * (cool_flow - temps[r])
                else:
                    q_hvac = 0.0
                loss = (temps[r] - t_out[s]) / R[r]
                temps[r] = temps[r] + dt / C[r] * (q_hvac + q_human[r] - loss)
                if not (lo <= temps[r] <= hi):
                    return s
        return -1
    return integrate


_integrate_loop = _make_integrator(_next_mode_nb if HAS_NUMBA else _next_mode)


def integrate_np(temps, modes, setpoint, t_out, q_human, R, C, k, heat_flow, cool_flow,
                 band, dt, lo, hi, mode_log):
    for s in range(t_out.shape[0]):
        heating = modes == HEATING
        cooling = modes == COOLING
        idle = ~(heating | cooling)
        new = modes.copy()
        new[heating & (temps >= setpoint)] = IDLE
        new[cooling & (temps <= setpoint)] = IDLE
        new[idle & (temps < setpoint - band)] = HEATING
        new[idle & (temps > setpoint + band)] = COOLING
        modes[:] = new
        mode_log[s, :] = new
        flow = np.where(new == HEATING, heat_flow, cool_flow)
        q_hvac = np.where(new == IDLE, 0.0, k * (flow - temps))
        temps[:] = temps + dt / C * (q_hvac + q_human - (temps - t_out[s]) / R)
        if not np.all((temps >= lo) & (temps <= hi)):
            return s
    return -1


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

adverse_matrix_nb = _jit(_adverse_matrix_loop)
dispersion_objective_nb = _jit(_dispersion_objective_loop)
budget_nb = _jit(_budget_loop)
weighted_history_nb = _jit(_weighted_history_loop)
fairness_y_nb = _jit(_fairness_y_loop)
integrate_nb = _jit(_integrate_loop)

if USE_NUMBA:
    adverse_matrix = adverse_matrix_nb
    dispersion_objective = dispersion_objective_nb
    budget = budget_nb
    weighted_history = weighted_history_nb
    fairness_y = fairness_y_nb
    integrate = integrate_nb
else:
    adverse_matrix = adverse_matrix_np
    dispersion_objective = dispersion_objective_np
    budget = budget_np
    weighted_history = weighted_history_np
    fairness_y = fairness_y_np
    integrate = integrate_np

BACKEND = "numba" if USE_NUMBA else "numpy"
