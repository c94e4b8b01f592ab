import numpy as np
import pytest

from cellsim.sgfilter import (
    ChannelSmoother,
    SGFConfig,
    Stabilizer,
    detect_oscillation,
    sg_matrix,
)


def test_sg_matrix_is_a_projection():
    b = sg_matrix(2, 9)
    assert np.allclose(b, b.T, atol=1e-12)
    assert np.allclose(b @ b, b, atol=1e-12)
    assert np.allclose(b.sum(axis=1), 1.0, atol=1e-12)


def test_sg_matrix_center_row_classic():
    # quadratic on a 5-point window: the textbook 1/35*(-3,12,17,12,-3)
    b = sg_matrix(2, 5)
    assert np.allclose(b[2], np.array([-3.0, 12.0, 17.0, 12.0, -3.0]) / 35.0)


def test_sg_matrix_reproduces_polynomials():
    b = sg_matrix(2, 9)
    x = np.arange(-4.0, 5.0)
    for coeffs in ((1.0,), (0.5, -2.0), (0.2, 0.5, -2.0)):
        y = np.polyval(coeffs, x)
        assert np.allclose(b @ y, y, atol=1e-10)
    # a cubic is not in the range of a quadratic projection
    y3 = x**3
    assert not np.allclose(b @ y3, y3, atol=1e-6)


def test_sg_matrix_validation():
    with pytest.raises(ValueError):
        sg_matrix(2, 8)
    with pytest.raises(ValueError):
        sg_matrix(9, 9)


def test_config_validation():
    with pytest.raises(ValueError):
        SGFConfig(window=10)
    with pytest.raises(ValueError):
        SGFConfig(order=49, window=49)


def _alternation(n, center, amp):
    return center + amp * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def test_detector_fires_on_hard_alternation():
    cfg = SGFConfig()
    samples = _alternation(cfg.flip_span + 1, 1.0e4, 50.0)
    assert detect_oscillation(samples, 3.11e4, cfg)


def test_detector_ignores_small_or_smooth_signals():
    cfg = SGFConfig()
    n = cfg.flip_span + 1
    # amplitude below the material-relative floor
    assert not detect_oscillation(_alternation(n, 1.0e4, 0.01), 3.11e4, cfg)
    # monotone ramp: zero sign changes
    assert not detect_oscillation(1.0e4 + 50.0 * np.arange(n), 3.11e4, cfg)
    # too little history
    assert not detect_oscillation(_alternation(n - 1, 1.0e4, 50.0), 3.11e4, cfg)


def test_detector_plateaus_break_flip_chains():
    cfg = SGFConfig(flip_span=8, min_flips=5)
    a = 50.0
    samples = 1.0e4 + a * np.array([0, 1, 0, 1, 1, 1, 0, 1, 0], dtype=float)
    # diffs: +,-,+,0,0,-,+,- gives only 4 sign flips between consecutive pairs
    assert not detect_oscillation(samples, 3.11e4, cfg)


def test_channel_smoother_engages_and_damps():
    cfg = SGFConfig(order=2, window=9, flip_span=4, min_flips=3)
    ch = ChannelSmoother(cfg, 1.0, sg_matrix(cfg.order, cfg.window))
    out = []
    for k in range(20):
        v = 5.0 + (1.0 if k % 2 == 0 else -1.0)
        out.append(ch.push(v))
    # nothing smoothed before a full window of history exists
    assert all(flag is False for _, flag in out[: cfg.window - 1])
    tail = out[cfg.window:]
    assert all(flag for _, flag in tail)
    # the endpoint projection roughly halves the alternating component
    # (0.5152 is the window-9 quadratic endpoint gain on a pure alternation)
    assert all(abs(v - 5.0) == pytest.approx(0.51515, abs=1e-4) for v, _ in tail)


def test_channel_smoother_passes_quiet_signals_through():
    cfg = SGFConfig(order=2, window=9, flip_span=4, min_flips=3)
    ch = ChannelSmoother(cfg, 1.0, sg_matrix(cfg.order, cfg.window))
    for k in range(30):
        v, flag = ch.push(7.0 + 0.001 * k)
        assert flag is False
        assert v == 7.0 + 0.001 * k


def test_channel_smoother_hysteresis_outlasts_the_burst():
    cfg = SGFConfig(order=2, window=9, flip_span=4, min_flips=3)
    ch = ChannelSmoother(cfg, 1.0, sg_matrix(cfg.order, cfg.window))
    for k in range(12):
        ch.push(5.0 + (1.0 if k % 2 == 0 else -1.0))
    # burst over: constant feed stays smoothed while the hold-off runs down
    flags = [ch.push(5.0)[1] for _ in range(cfg.window + 5)]
    assert any(flags)
    assert not all(flags)
    assert flags[-1] is False


def test_stabilizer_smooths_only_the_noisy_channel(presets):
    p = presets["ncm523"]
    cfg = SGFConfig(order=2, window=9, flip_span=4, min_flips=3,
                    amp_fraction=1e-6)
    st = Stabilizer(p, cfg)
    css = np.array([1.0e4, 1.1e4, 1.2e4, 1.3e4])
    touched = False
    for k in range(15):
        wob = css.copy()
        wob[2] += 40.0 if k % 2 == 0 else -40.0
        out, touched = st.push("neg", wob)
    assert touched
    # quiet channels pass through exactly even while channel 2 is smoothed
    assert out[0] == css[0] and out[1] == css[1] and out[3] == css[3]
    assert abs(out[2] - css[2]) < 40.0


def test_stabilizer_has_default_config(presets):
    st = Stabilizer(presets["ncm523"])
    assert st.config.window == 49
    out, touched = st.push("pos", np.full(4, 2.0e4))
    assert not touched
    assert np.allclose(out, 2.0e4)
