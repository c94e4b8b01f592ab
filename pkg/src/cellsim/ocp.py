"""Equilibrium-potential curves: tabulated data + monotone cubic interpolation.

Curves are shipped as two-column text tables (stoichiometry, potential) with a
``# material=<tag>`` header.  Interpolation is shape-preserving piecewise cubic
(PCHIP), so a strictly monotone table yields a strictly monotone interpolant
with a continuous first derivative; extrapolation beyond the tabulated range is
clamped to the end values.
"""

from __future__ import annotations

import numpy as np
from importlib import resources
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from cellsim.errors import OCPRangeError, ParameterError

MIN_SAMPLES = 50
SPAN_LO, SPAN_HI = 0.005, 0.995


class OCPCurve:
    """Monotone equilibrium potential U(y) of one electrode material."""

    def __init__(self, y, u, material="custom"):
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        if y.ndim != 1 or y.shape != u.shape:
            raise ParameterError("OCP table must be two columns of equal length")
        if len(y) < MIN_SAMPLES:
            raise ParameterError(f"OCP table needs >= {MIN_SAMPLES} samples, got {len(y)}")
        if np.any(np.diff(y) <= 0.0):
            raise ParameterError("OCP stoichiometry samples must be strictly increasing")
        if y[0] < 0.0 or y[-1] > 1.0:
            raise ParameterError("OCP stoichiometry samples must lie in [0, 1]")
        if y[0] > SPAN_LO + 1e-9 or y[-1] < SPAN_HI - 1e-9:
            raise ParameterError(
                f"OCP table must span [{SPAN_LO}, {SPAN_HI}], got [{y[0]}, {y[-1]}]"
            )
        du = np.diff(u)
        if np.all(du > 0.0):
            self.direction = 1
        elif np.all(du < 0.0):
            self.direction = -1
        else:
            raise ParameterError(f"OCP table for {material!r} is not strictly monotone")
        self.material = material
        self.y = y
        self.u = u
        pch = PchipInterpolator(y, u, extrapolate=False)
        # keep raw breakpoints/coefficients for fast manual evaluation
        self._x = pch.x
        self._c = pch.c
        self._dc = self._c[:3] * np.array([3.0, 2.0, 1.0])[:, None]

    def _eval(self, coeffs, yq):
        yq = np.asarray(yq, dtype=float)
        if yq.min() < -1e-12 or yq.max() > 1.0 + 1e-12:
            raise OCPRangeError(
                f"stoichiometry outside [0, 1] for {self.material}: {yq!r}"
            )
        # clamped extrapolation: evaluate at the nearest tabulated point
        yc = np.clip(yq, self._x[0], self._x[-1])
        idx = np.clip(np.searchsorted(self._x, yc) - 1, 0, len(self._x) - 2)
        t = yc - self._x[idx]
        out = coeffs[0, idx]
        for k in range(1, coeffs.shape[0]):
            out = out * t + coeffs[k, idx]
        return out if out.ndim else float(out)

    def potential(self, y):
        """U(y) [V]; y may be scalar or array, clamped to the tabulated span."""
        return self._eval(self._c, y)

    def slope(self, y):
        """dU/dy [V]; zero outside the tabulated span (clamped evaluation)."""
        return self._eval(self._dc, y)

    def inverse(self, u, lo=None, hi=None):
        """Stoichiometry with potential(y) = u, searched on [lo, hi].

        Raises OCPRangeError when u is not bracketed on the interval.
        """
        lo = self._x[0] if lo is None else max(lo, self._x[0])
        hi = self._x[-1] if hi is None else min(hi, self._x[-1])
        if not lo < hi:
            raise OCPRangeError("empty bracket for inverse OCP lookup")
        flo = self.potential(lo) - u
        fhi = self.potential(hi) - u
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if flo * fhi > 0.0:
            raise OCPRangeError(
                f"potential {u:.4f} V not bracketed on [{lo:.4f}, {hi:.4f}] "
                f"for {self.material}"
            )
        return brentq(lambda yy: self.potential(yy) - u, lo, hi, xtol=1e-14)


def load_ocp(path):
    """Load an OCPCurve from a two-column text table with a material header."""
    material = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") and "material=" in line:
                material = line.split("material=", 1)[1].strip()
                break
    if material is None:
        raise ParameterError(f"{path}: missing '# material=<tag>' header")
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ParameterError(f"{path}: expected two numeric columns")
    return OCPCurve(data[:, 0], data[:, 1], material=material)


_BUILTIN = ("graphite", "lfpo", "ncm523", "ncm811")
_cache = {}


def default_curve(tag):
    """Packaged equilibrium-potential curve for a material tag."""
    if tag not in _BUILTIN:
        raise ParameterError(f"no built-in OCP table {tag!r}; available: {_BUILTIN}")
    if tag not in _cache:
        ref = resources.files("cellsim") / "data" / "ocp" / f"{tag}.txt"
        with resources.as_file(ref) as path:
            _cache[tag] = load_ocp(path)
    return _cache[tag]
