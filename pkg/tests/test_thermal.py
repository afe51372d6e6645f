import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fina.activity import Activity
from fina.thermal import (DivergenceError, HouseState, Mode, OccupantModel, RoomState, ThermalParams,
                          advance, c_to_f, euler_update, f_to_c, human_heat_output, hvac_heat, step,
                          steps_per_period, thermostat_mode)


@pytest.mark.parametrize("temp, sp, prev, expected", [
    (16, 20, Mode.IDLE, Mode.HEATING),
    (20, 20, Mode.IDLE, Mode.IDLE),
    (19, 20, Mode.HEATING, Mode.HEATING),
    (20, 20, Mode.HEATING, Mode.IDLE),
    (23, 20, Mode.IDLE, Mode.COOLING),
    (21, 20, Mode.COOLING, Mode.COOLING),
    (20, 20, Mode.COOLING, Mode.IDLE),
    (30, 20, Mode.HEATING, Mode.IDLE),
    (10, 20, Mode.COOLING, Mode.IDLE),
])
def test_thermostat(temp, sp, prev, expected):
    assert thermostat_mode(temp, sp, 2.5, prev) == expected


def test_thermostat_band_must_be_positive():
    with pytest.raises(ValueError):
        thermostat_mode(20, 20, 0, Mode.IDLE)


@given(st.floats(-20, 60), st.floats(10, 30), st.sampled_from(list(Mode)))
def test_thermostat_never_jumps_between_active_modes(temp, sp, prev):
    new = thermostat_mode(temp, sp, 2.5, prev)
    assert {int(prev), int(new)} != {int(Mode.HEATING), int(Mode.COOLING)}


def test_human_heat_examples():
    assert human_heat_output(Activity.SLEEPING, 20.0) == pytest.approx(1e-4 * 1.2 * 1005 * 14, rel=1e-12)
    assert human_heat_output(Activity.SLEEPING, 20.0) == pytest.approx(1.688, abs=1e-3)
    assert human_heat_output(Activity.SLEEPING, 34.0) == 0.0
    assert human_heat_output(Activity.SLEEPING, 20.0, OccupantModel(metabolic_offset=100)) == \
        pytest.approx(101.688, abs=1e-3)
    assert human_heat_output(Activity.AWAY, 20.0) == 0.0
    with pytest.raises(ValueError):
        human_heat_output(Activity.RELAXING, 20.0, OccupantModel(breath={}))


def test_euler_examples():
    assert euler_update(20, 10, 2000, 0, 0.02, 1e6, 60) == pytest.approx(20.09, abs=1e-12)
    assert euler_update(10, 10, 0, 0, 0.02, 2e6, 30) == 10
    assert euler_update(25, 25, 0, 0, 0.02, 2e6, 30) == 25


def test_step_matches_euler_and_advances_clock():
    params = ThermalParams()
    state = HouseState.initial(2, indoor_temp=16.0, outdoor_temp=10.0)
    new = step(state, 20.0, params, [1.5, 0.0])
    assert new.clock == params.dt
    assert tuple(new.modes) == (Mode.HEATING, Mode.HEATING)
    q = hvac_heat(Mode.HEATING, 16.0, params)
    expected = euler_update(16.0, 10.0, q, 1.5, params.thermal_resistance, params.thermal_capacitance, params.dt)
    assert new.temps[0] == expected


def test_equilibrium_idle_room_stays_put():
    state = HouseState.initial(1, indoor_temp=25.0, outdoor_temp=25.0)
    new = advance(state, 25.0, ThermalParams(), [0.0], n_steps=100)
    assert new.temps[0] == 25.0 and new.modes[0] == Mode.IDLE


def test_determinism_bitwise():
    params = ThermalParams()
    runs = []
    for _ in range(2):
        state = HouseState.initial(3, 18.0, 5.0)
        log = np.empty((500, 3), dtype=np.int8)
        state = advance(state, 22.0, params, [1.7, 2.0, 0.0], 500, mode_log=log)
        runs.append((state.temps.tobytes(), log.tobytes()))
    assert runs[0] == runs[1]


@pytest.mark.parametrize("sp_f", [60, 65, 70, 75, 80])
@pytest.mark.parametrize("t_out", [-5.0, 10.0, 35.0])
def test_bounded_after_transient(sp_f, t_out):
    params = ThermalParams()
    sp = f_to_c(sp_f)
    state = HouseState.initial(1, 20.0, t_out)
    state = advance(state, sp, params, [2.0], 500)
    temps = np.empty(0)
    for _ in range(200):
        state = advance(state, sp, params, [2.0], 5)
        temps = np.append(temps, state.temps)
    assert np.all(np.abs(temps - sp) <= 5.0)


def test_energy_sign():
    params = ThermalParams()
    R, C, dt = params.thermal_resistance, params.thermal_capacitance, params.dt
    for temp in np.linspace(-10, 45, 23):
        for t_out in (-20.0, 10.0, 40.0):
            idle = euler_update(temp, t_out, 0.0, 0.0, R, C, dt)
            heated = euler_update(temp, t_out, hvac_heat(Mode.HEATING, temp, params), 0.0, R, C, dt)
            cooled = euler_update(temp, t_out, hvac_heat(Mode.COOLING, temp, params), 0.0, R, C, dt)
            if params.heater_flow_temp > temp:
                assert heated >= idle
                if t_out >= temp:
                    assert heated >= temp
            if params.cooler_flow_temp < temp:
                assert cooled <= idle
                if t_out <= temp:
                    assert cooled <= temp
    # with the default k and R, heating outruns a -20 C outdoor loss up to 43.6 C
    for temp in np.linspace(-10, 43.5, 23):
        q = hvac_heat(Mode.HEATING, temp, params)
        assert euler_update(temp, -20.0, q, 0.0, 0.02, 2e6, 30) >= temp


def test_hysteresis_over_long_run():
    params = ThermalParams()
    state = HouseState.initial(2, 15.0, 30.0)
    logs = []
    for sp in (18, 26, 16, 27, 21) * 4:
        log = np.empty((60, 2), dtype=np.int8)
        state = advance(state, sp, params, [2.0, 0.0], 60, mode_log=log)
        logs.append(log)
    modes = np.concatenate(logs)
    prev, cur = modes[:-1], modes[1:]
    assert not np.any((prev == Mode.HEATING) & (cur == Mode.COOLING))
    assert not np.any((prev == Mode.COOLING) & (cur == Mode.HEATING))


def test_divergence_reported():
    params = ThermalParams(thermal_capacitance=1e3)
    with pytest.raises(DivergenceError, match="diverged"):
        advance(HouseState.initial(1, 20.0, 10.0), 20.0, params, [0.0], 10)
    with pytest.raises(DivergenceError):
        RoomState(80.0, Mode.IDLE, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        ThermalParams(heater_flow_temp=5.0)
    with pytest.raises(ValueError):
        ThermalParams(dt=0)
    assert steps_per_period(360, ThermalParams()) == 12
    with pytest.raises(ValueError):
        steps_per_period(100, ThermalParams())


def test_unit_conversion():
    assert f_to_c(32) == 0 and c_to_f(100) == 212
    assert f_to_c(c_to_f(21.3)) == pytest.approx(21.3)


@settings(max_examples=50, deadline=None)
@given(st.floats(5, 35), st.floats(-10, 40), st.floats(15, 27), st.integers(1, 40))
def test_advance_equals_repeated_step(t0, t_out, sp, n):
    params = ThermalParams()
    a = advance(HouseState.initial(1, t0, t_out), sp, params, [1.0], n)
    b = HouseState.initial(1, t0, t_out)
    for _ in range(n):
        b = step(b, sp, params, [1.0])
    assert a.temps[0] == b.temps[0] and a.modes[0] == b.modes[0] and a.clock == b.clock
