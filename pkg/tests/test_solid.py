import math

import numpy as np
import pytest

from cellsim.solid import (
    CSS_MARGIN,
    bulk_update,
    offset_coefficients,
    offset_update,
    surface_concentration,
)


def test_bulk_update_integrates_constant_flux_exactly():
    cs = np.full(4, 2.0e4)
    jn = np.array([1.0e-5, 2.0e-5, -1.0e-5, 0.0])
    rs = 7.5e-6
    out = bulk_update(cs, jn, rs, 1.0)
    assert np.allclose(out, cs - 3.0 * jn / rs, rtol=1e-14)
    # two half steps equal one full step (linear dynamics)
    half = bulk_update(bulk_update(cs, jn, rs, 0.5), jn, rs, 0.5)
    assert np.allclose(half, out, rtol=1e-14)


def test_offset_coefficients_frozen_point():
    # ncm523 negative electrode at its 1C mean flux and reference diffusivity
    ds = 1.7e-14
    rs = 7.5e-6
    tau_s, w_inf = offset_coefficients(1.0506e-5, ds, rs, 1.0 / 28.0)
    assert tau_s == pytest.approx(118.17, rel=2e-4)
    assert w_inf == pytest.approx(-926.99, rel=2e-4)


def test_offset_relaxes_toward_asymptote():
    ds, rs, ks = 1.7e-14, 7.5e-6, 1.0 / 28.0
    jn = 1.0e-5
    tau_s, w_inf = offset_coefficients(jn, ds, rs, ks)
    w = np.zeros(1)
    for _ in range(int(20 * tau_s)):
        w = offset_update(w, jn, ds, rs, ks, 1.0)
    assert w[0] == pytest.approx(w_inf, rel=1e-6)


def test_offset_decays_at_rest():
    ds, rs, ks = 1.7e-14, 7.5e-6, 1.0 / 28.0
    tau_s, _ = offset_coefficients(0.0, ds, rs, ks)
    w = offset_update(np.array([-500.0]), 0.0, ds, rs, ks, tau_s)
    assert w[0] == pytest.approx(-500.0 * math.exp(-1.0), rel=1e-9)


def test_offset_vector_diffusivity():
    ds = np.array([1.0e-14, 2.0e-14, 3.0e-14, 4.0e-14])
    tau_s, w_inf = offset_coefficients(1.0e-5, ds, 5.0e-6, 1.0 / 28.0)
    assert tau_s.shape == (4,) and w_inf.shape == (4,)
    assert np.all(np.diff(tau_s) < 0.0)  # faster diffusion, shorter memory


def test_surface_concentration_passthrough_and_clamp():
    cs_max = 3.0e4
    css, clamped = surface_concentration(np.full(4, 1.0e4), np.full(4, -100.0), cs_max)
    assert not clamped and np.allclose(css, 9.9e3)
    css, clamped = surface_concentration(
        np.full(4, 50.0), np.full(4, -100.0), cs_max)
    assert clamped and np.all(css >= CSS_MARGIN)
    css, clamped = surface_concentration(
        np.full(4, cs_max - 10.0), np.full(4, 100.0), cs_max)
    assert clamped and np.all(css <= cs_max - CSS_MARGIN)
