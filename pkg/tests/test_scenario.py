import json

import numpy as np
import pytest

from cellsim.errors import ScenarioError
from cellsim.scenario import (
    BUILTIN_SCENARIOS,
    builtin_scenario,
    load_current_profile,
    load_measurements,
    load_scenario,
    parse_scenario,
    profile_current,
    random_profile,
    write_current_profile,
    write_random_profile,
)


def _one_phase(**kw):
    return parse_scenario({"phases": [kw]}).phases[0]


def test_cc_phase_variants():
    ph = _one_phase(type="cc", i_a=1.5, duration=100.0)
    assert (ph.kind, ph.amps, ph.duration) == ("cc", 1.5, 100.0)
    ph = _one_phase(type="cc", c_rate=2.0, until_voltage="v_min")
    assert ph.c_rate == 2.0 and ph.until_tag == "v_min"
    ph = _one_phase(type="cc", i_a=-1.0, until_voltage=4.2)
    assert ph.until_voltage == 4.2 and ph.until_tag is None


def test_cc_phase_validation():
    with pytest.raises(ScenarioError):
        _one_phase(type="cc", duration=10.0)  # no current at all
    with pytest.raises(ScenarioError):
        _one_phase(type="cc", i_a=1.0, c_rate=1.0, duration=10.0)
    with pytest.raises(ScenarioError):
        _one_phase(type="cc", i_a=1.0)  # nothing ends it
    with pytest.raises(ScenarioError):
        _one_phase(type="cc", i_a=1.0, until_voltage="v_nominal")


def test_rest_phase():
    ph = _one_phase(type="rest", duration=600.0)
    assert ph.amps == 0.0 and ph.duration == 600.0
    with pytest.raises(ScenarioError):
        _one_phase(type="rest")


def test_cv_phase_variants():
    ph = _one_phase(type="cv", voltage=4.2, i_cut=0.05)
    assert ph.voltage == 4.2 and ph.i_cut == 0.05
    ph = _one_phase(type="cv", voltage="v_max", cut_c_rate=0.05)
    assert ph.voltage is None and ph.voltage_tag == "v_max"
    ph = _one_phase(type="cv", voltage=3.6, duration=300.0)
    assert ph.duration == 300.0


def test_cv_phase_validation():
    with pytest.raises(ScenarioError):
        _one_phase(type="cv", i_cut=0.05)  # no target voltage
    with pytest.raises(ScenarioError):
        _one_phase(type="cv", voltage=4.2)  # nothing ends it


def test_profile_phase_inline():
    ph = _one_phase(type="profile", times=[0.0, 10.0, 20.0],
                    currents=[1.0, -2.0, 3.0])
    assert ph.duration == 20.0
    assert np.allclose(ph.times, [0, 10, 20])


def test_profile_phase_validation():
    with pytest.raises(ScenarioError):
        _one_phase(type="profile")
    with pytest.raises(ScenarioError):
        _one_phase(type="profile", times=[0.0, 1.0], currents=[1.0])
    with pytest.raises(ScenarioError):
        _one_phase(type="profile", times=[1.0, 2.0], currents=[1.0, 1.0])
    with pytest.raises(ScenarioError):
        _one_phase(type="profile", times=[0.0, 2.0, 2.0],
                   currents=[1.0, 1.0, 1.0])


def test_unknown_kind_and_keys():
    with pytest.raises(ScenarioError):
        _one_phase(type="pulse", duration=1.0)
    with pytest.raises(ScenarioError):
        _one_phase(type="cc", i_a=1.0, duration=1.0, ramp=True)
    with pytest.raises(ScenarioError):
        parse_scenario({"phases": [{"type": "rest", "duration": 1.0}],
                        "temperature": 300.0})


def test_scenario_defaults_and_bounds():
    d = {"phases": [{"type": "rest", "duration": 1.0}]}
    sc = parse_scenario(d)
    assert (sc.dt, sc.t_amb, sc.soc0, sc.ocv0) == (1.0, 298.0, None, None)
    sc = parse_scenario({**d, "dt": 10.0, "t_amb": 273.0, "soc0": 0.5})
    assert sc.dt == 10.0 and sc.t_amb == 273.0 and sc.soc0 == 0.5
    for dt in (0.0, -1.0, 10.5):
        with pytest.raises(ScenarioError):
            parse_scenario({**d, "dt": dt})
    with pytest.raises(ScenarioError):
        parse_scenario({"phases": []})


def test_load_scenario_roundtrip(tmp_path):
    doc = {
        "name": "pulse-train", "dt": 0.5, "soc0": 0.8,
        "phases": [
            {"type": "cc", "i_a": 3.0, "duration": 10.0},
            {"type": "rest", "duration": 50.0},
        ],
    }
    path = tmp_path / "sc.json"
    path.write_text(json.dumps(doc))
    sc = load_scenario(path)
    assert sc.name == "pulse-train" and sc.dt == 0.5 and len(sc.phases) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(bad)


def test_builtin_scenarios_all_load():
    for name in BUILTIN_SCENARIOS:
        sc = builtin_scenario(name)
        assert sc.phases, name
    with pytest.raises(ScenarioError):
        builtin_scenario("discharge_9c")
    # the packaged random profile resolves its csv relative to the package
    rc = builtin_scenario("random_current")
    ph = rc.phases[0]
    assert ph.kind == "profile" and ph.times[-1] == pytest.approx(217.0)


def test_profile_current_zero_order_hold():
    ph = _one_phase(type="profile", times=[0.0, 10.0, 20.0],
                    currents=[1.0, -2.0, 3.0])
    assert profile_current(ph, 0.0) == 1.0
    assert profile_current(ph, 9.999) == 1.0
    assert profile_current(ph, 10.0) == -2.0
    assert profile_current(ph, 19.0) == -2.0
    assert profile_current(ph, 20.0) == 3.0
    # out-of-range lookups clamp to the nearest block
    assert profile_current(ph, 500.0) == 3.0
    assert profile_current(ph, -5.0) == 1.0


def test_current_profile_csv_roundtrip(tmp_path):
    path = tmp_path / "prof.csv"
    t = np.array([0.0, 5.0, 12.0])
    i = np.array([0.5, -1.25, 0.75])
    write_current_profile(path, t, i)
    t2, i2 = load_current_profile(path)
    assert np.allclose(t2, t) and np.allclose(i2, i)


def test_current_profile_csv_validation(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,amps\n0,1\n")
    with pytest.raises(ScenarioError):
        load_current_profile(bad)
    with pytest.raises(ScenarioError):
        load_current_profile(tmp_path / "missing.csv")


def test_measurements_loading(tmp_path):
    path = tmp_path / "meas.csv"
    path.write_text("t_s,V_measured,T_measured\n0,3.8,298\n10,3.7,299\n20,3.6,301\n")
    m = load_measurements(path)
    assert m.covers(0.0) and m.covers(20.0) and not m.covers(21.0)
    assert m.voltage_at(5.0) == pytest.approx(3.75)
    assert m.temperature_at(15.0) == pytest.approx(300.0)
    bare = tmp_path / "bare.csv"
    bare.write_text("t_s,V_measured\n0,3.8\n10,3.7\n")
    m = load_measurements(bare)
    assert m.temperature is None and m.temperature_at(5.0) is None


def test_measurements_validation(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("t_s,volts\n0,3.8\n1,3.7\n")
    with pytest.raises(ScenarioError):
        load_measurements(path)
    path.write_text("t_s,V_measured\n0,3.8\n")
    with pytest.raises(ScenarioError):
        load_measurements(path)
    path.write_text("t_s,V_measured\n0,3.8\n0,3.7\n")
    with pytest.raises(ScenarioError):
        load_measurements(path)


def test_random_profile_properties():
    t, i = random_profile(20260815)
    t2, i2 = random_profile(20260815)
    assert np.array_equal(t, t2) and np.array_equal(i, i2)
    assert t[0] == 0.0 and (np.diff(t) > 0.0).all()
    assert t[-1] == pytest.approx(217.0)
    assert i[-1] == i[-2]  # terminal repeat row marks the end
    assert i[0] > 0.0  # discharge-first
    assert np.abs(i).max() <= 1.5
    # cumulative throughput never goes net-charging at a block boundary
    dur = np.diff(t)
    thru = np.cumsum(i[:-1] * dur)
    assert (thru >= -1e-12).all()


def test_random_profile_seeds_differ():
    _, i1 = random_profile(1)
    _, i2 = random_profile(2)
    assert not np.array_equal(i1, i2)


def test_write_random_profile_roundtrip(tmp_path):
    path = tmp_path / "rand.csv"
    t, i = write_random_profile(path, seed=99, duration=60.0, i_peak=2.0)
    lines = path.read_text().splitlines()
    assert lines[0] == "t_s,I_A"
    assert lines[1].startswith("# seed=99")
    t2, i2 = load_current_profile(path)
    assert np.allclose(t2, t) and np.allclose(i2, i)
