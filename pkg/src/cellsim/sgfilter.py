"""Savitzky-Golay smoothing of the surface-concentration sequences.

Near the end of discharge the surface concentrations at stiff collocation
points can pick up a step-to-step alternating component (the discrete
updates overshoot once the local relaxation time drops below the step).
A least-squares polynomial projection over a moving window removes the
alternation without biasing slow trends; it only engages when a detector
sees sustained alternation above a material-relative amplitude.
"""

from __future__ import annotations

import dataclasses

import numpy as np


@dataclasses.dataclass(frozen=True)
class SGFConfig:
    order: int = 2  # projection polynomial degree
    window: int = 49  # samples, odd
    flip_span: int = 8  # first differences inspected by the detector
    min_flips: int = 5  # sign changes required to call it oscillation
    amp_fraction: float = 1e-3  # amplitude threshold relative to cs_max

    def __post_init__(self):
        if self.window % 2 != 1:
            raise ValueError("window length must be odd")
        if not 0 <= self.order < self.window:
            raise ValueError("polynomial order must be below window length")


def sg_matrix(order, window):
    """Projection matrix B onto degree<=order polynomials on the window.

    Abscissae are the symmetric integers -(window-1)/2 .. +(window-1)/2.
    B is symmetric and idempotent; each row sums to 1, so constants pass
    through untouched.
    """
    if window % 2 != 1 or not 0 <= order < window:
        raise ValueError("need odd window and order < window")
    half = (window - 1) // 2
    x = np.arange(-half, half + 1, dtype=float)
    design = np.vander(x, order + 1)
    gram = design.T @ design
    return design @ np.linalg.solve(gram, design.T)


def detect_oscillation(samples, cs_max, config):
    """True if the tail of `samples` alternates hard enough to smooth.

    Rule: among the last `flip_span` first differences, at least
    `min_flips` consecutive pairs change sign, and the mean absolute
    difference exceeds amp_fraction*cs_max.
    """
    # scalar arithmetic on purpose: this runs per channel per step, and
    # numpy dispatch on 9-element arrays costs more than the work itself
    vals = samples.tolist() if hasattr(samples, "tolist") else list(samples)
    span = config.flip_span
    if len(vals) < span + 1:
        return False
    tail = vals[-(span + 1):]
    flips = 0
    amp = 0.0
    prev = 0.0
    for k in range(span):
        d = tail[k + 1] - tail[k]
        amp += abs(d)
        if k > 0 and prev * d < 0.0:
            flips += 1
        prev = d
    return flips >= config.min_flips and amp / span > config.amp_fraction * cs_max


class ChannelSmoother:
    """History, detector hysteresis, and smoothing for one css sequence."""

    def __init__(self, config, cs_max, b_matrix):
        self.config = config
        self.cs_max = cs_max
        self._tail_row = b_matrix[-1]
        self._history = np.zeros(config.window)
        self._count = 0
        self._active_for = 0

    def push(self, value):
        """Record a raw sample; return (possibly smoothed) current value."""
        h = self._history
        h[:-1] = h[1:]
        h[-1] = float(value)
        if self._count < self.config.window:
            self._count += 1

        span = self.config.flip_span + 1
        if self._count >= span and detect_oscillation(
            h[-span:], self.cs_max, self.config
        ):
            self._active_for = self.config.window
        if self._active_for > 0 and self._count >= self.config.window:
            self._active_for -= 1
            return float(self._tail_row @ h), True
        if self._active_for > 0:
            self._active_for -= 1
        return float(value), False


class Stabilizer:
    """Smoothers for the 8 surface-concentration channels of a cell."""

    def __init__(self, params, config=None):
        self.config = config or SGFConfig()
        b = sg_matrix(self.config.order, self.config.window)
        self.channels = {
            "neg": [ChannelSmoother(self.config, params.neg.cs_max, b) for _ in range(4)],
            "pos": [ChannelSmoother(self.config, params.pos.cs_max, b) for _ in range(4)],
        }

    def push(self, side, css4):
        """Feed the 4 raw values of one electrode; returns (css4', any_smoothed)."""
        out = np.empty(4)
        touched = False
        for i, ch in enumerate(self.channels[side]):
            out[i], smoothed = ch.push(css4[i])
            touched |= smoothed
        return out, touched
