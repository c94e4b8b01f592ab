import math

import numpy as np
import pytest

from cellsim.errors import ParameterError, TemperatureRangeError
from cellsim.parameters import (
    DS_FLOOR,
    PRESETS,
    RATINGS,
    CellRating,
    activity_term,
    arrhenius,
    diffusional_conductivity,
    electrolyte_diffusivity,
    ionic_conductivity,
    kd_group,
    load_parameters,
    load_preset,
    reaction_rate,
    solid_diffusivity,
)


def test_presets_load_and_agree_with_their_tables(presets):
    p = presets["ncm523"]
    assert p.neg.L == 8.1e-5 and p.pos.L == 7.75e-5 and p.sep.L == 2.0e-5
    assert p.neg.A == 6.41e-2 and p.pos.A == 6.10e-2 and p.sep.A == 6.36e-2
    assert p.t_plus0 == 0.38 and p.Rc == 6.4e-3
    assert p.neg.cs_max == 3.11e4 and p.pos.cs_max == 4.97e4
    assert p.neg.Rs == 7.5e-6 and p.pos.Rs == 5.0e-6
    assert p.ce0 == 1200.0 and p.Cp == 1000.0 and p.hc == 20.0 and p.p == 1.5
    assert p.neg.ks == pytest.approx(1.0 / 28.0, rel=1e-12)
    assert p.F == 96485.33 and p.R == 8.314

    lf = presets["lfpo"]
    assert lf.pos.cs_max == 2.28e4 and lf.pos.Rs == 5.2e-8
    assert lf.pos.a_s == 2.84e7
    assert lf.pos.ks == pytest.approx(1.0 / 9.0, rel=1e-12)
    assert lf.pos.jn_mode == "uniform" and lf.neg.jn_mode == "analytic"

    n8 = presets["ncm811"]
    assert n8.pos.cs_max == 4.93e4 and n8.pos.eps_e == 0.5038


def test_sigma_eff_uses_linear_porosity(presets):
    el = presets["ncm523"].neg
    assert el.sigma_eff == pytest.approx(47.42, rel=1e-12)


def test_bruggeman_exponent(presets):
    p = presets["ncm523"]
    assert p.brug(0.4) == pytest.approx(0.4 ** 1.5, rel=1e-12)


def test_ratings():
    assert set(RATINGS) == set(PRESETS)
    r = RATINGS["ncm523"]
    assert r.qc_mah == 1500.0 and r.v_min == 3.0
    assert r.i_1c == pytest.approx(1.5, rel=1e-12)
    assert RATINGS["lfpo"].v_max == 3.65
    assert CellRating(1000.0, 2.0, 4.0).i_1c == pytest.approx(1.0)


def test_solid_diffusivity_affine_at_reference(presets):
    var = presets["ncm523"].neg.varying
    # at T_ref both Arrhenius factors are 1: Ds = -2.4e-14*y + 2.9e-14
    assert solid_diffusivity(0.5, 298.0, var) == pytest.approx(1.7e-14, rel=1e-12)
    ds = solid_diffusivity(np.array([0.2, 0.5, 0.9]), 298.0, var)
    assert ds.shape == (3,)
    assert ds[1] == pytest.approx(1.7e-14, rel=1e-12)
    assert ds[0] > ds[1] > ds[2]  # graphite fit falls with lithiation


def test_solid_diffusivity_floor(presets):
    var = presets["lfpo"].pos.varying  # kDs_ref = 0, bDs_ref = 8e-18
    ds = solid_diffusivity(0.5, 220.0, var)  # deep Arrhenius suppression
    assert ds >= DS_FLOOR


def test_electrolyte_diffusivity_frozen_points():
    assert electrolyte_diffusivity(1200.0, 298.0) == pytest.approx(2.8107e-10, rel=2e-4)
    assert electrolyte_diffusivity(1000.0, 298.0) == pytest.approx(3.2088e-10, rel=2e-4)
    arr = electrolyte_diffusivity(np.array([1000.0, 1200.0]), 298.0)
    assert arr.shape == (2,) and arr[0] > arr[1]


def test_electrolyte_diffusivity_range_guard():
    with pytest.raises(TemperatureRangeError):
        electrolyte_diffusivity(1200.0, 238.0)  # denominator 3 K < guard


def test_ionic_conductivity_frozen_point():
    assert ionic_conductivity(1000.0, 298.0) == pytest.approx(1.19116, rel=2e-5)
    arr = ionic_conductivity(np.array([500.0, 1000.0, 2000.0]), 298.0)
    assert arr.shape == (3,) and np.all(arr > 0.0)


def test_activity_term_parabola():
    assert activity_term(0.0) == pytest.approx(-0.44, rel=1e-12)
    assert activity_term(1000.0) == pytest.approx(1.19, rel=1e-12)
    assert activity_term(1200.0) == pytest.approx(1.648, rel=1e-12)


def test_kd_group_sign_and_frozen_value():
    # t_plus0 < 1 makes the group negative wherever the activity term is positive
    assert kd_group(1200.0, 298.0, 0.38) < 0.0
    assert diffusional_conductivity(1200.0, 298.0, 1.2, 0.38) == pytest.approx(
        -0.062965, rel=2e-4)


def test_reaction_rate_arrhenius(presets):
    var = presets["ncm523"].neg.varying
    assert reaction_rate(298.0, var) == pytest.approx(2.3e-5, rel=1e-12)
    assert reaction_rate(313.0, var) == pytest.approx(8.569e-5, rel=2e-4)
    assert arrhenius(1.0, 0.0, 350.0) == 1.0


def test_unknown_preset_rejected():
    with pytest.raises(ParameterError):
        load_preset("nmc999")


def test_malformed_ini_rejected(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[geometry]\nL_neg = 8.1e-5\n")  # nearly everything missing
    with pytest.raises(ParameterError):
        load_parameters(bad)


def test_unknown_key_rejected(tmp_path, presets):
    import importlib.resources as resources

    text = (resources.files("cellsim") / "data" / "params" / "ncm523.ini").read_text()
    bad = tmp_path / "extra.ini"
    bad.write_text(text + "\n[material]\nmystery_knob = 1.0\n")
    with pytest.raises(ParameterError):
        load_parameters(bad)


def test_validated_physical_ranges(presets):
    for p in presets.values():
        for el in (p.neg, p.pos):
            assert 0.0 < el.eps_e < 1.0 and 0.0 < el.eps_s < 1.0
            assert el.cs_max > 0.0 and el.Rs > 0.0 and el.a_s > 0.0
        assert 0.0 < p.t_plus0 < 1.0
