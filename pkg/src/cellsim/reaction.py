"""Closed-form pore-wall flux distribution across each electrode.

The flux profile jn(x) follows from charge conservation in the two
conducting phases once the Butler-Volmer relation is linearized about the
electrode-average rate and the open-circuit potential along the electrode
is replaced by an interpolating cubic.  The resulting linear two-point
boundary value problem

    k2 * J'' - k1 * J = s * (k3*x^2 + k4*x + k5),   s = +1 neg / -1 pos

is solved in closed form for the flux antiderivative J(x) (the integral of
jn up to x), with boundary values pinned by the applied current.  Working
with the decaying basis {exp(-lam*x), exp(-lam*(L-x))} keeps the solve
well-posed for any lam*L; the textbook {exp(-lam*x), exp(+lam*x)} pair
overflows once lam*L passes a few hundred.

A uniform fallback (jn identical at all points) is available per electrode
and is the standard choice for flat-plateau chemistries where the cubic
OCP fit carries no information.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .electrolyte import COLLOCATION
from .errors import DegenerateModelError
from .parameters import FARADAY, GAS_CONSTANT

_SIGN = {"neg": 1.0, "pos": -1.0}


def exchange_current(kr, ce, css, cs_max):
    """i0 = kr*sqrt(ce*css*(cs_max-css)), A/m^2, for alpha_a=alpha_c=0.5."""
    ce = np.asarray(ce, dtype=float)
    css = np.asarray(css, dtype=float)
    return kr * np.sqrt(ce * css * (cs_max - css))


def average_rate(side, current, el, f=FARADAY):
    """Electrode-average pore-wall flux forced by the applied current.

    Positive current discharges the cell, so lithium leaves the negative
    electrode (jn > 0 there) and enters the positive one (jn < 0).
    """
    return _SIGN[side] * current / (el.a_s * f * el.A * el.L)


@dataclasses.dataclass(frozen=True)
class BVLinearization:
    """Tangent line of the inverse Butler-Volmer curve at the mean rate.

    eta(jn) ~= slope*jn + intercept near jn_mean; exact at jn_mean by
    construction.
    """

    slope: float  # V per mol/m^2/s
    intercept: float  # V
    i0_mean: float  # A/m^2
    jn_mean: float  # mol/m^2/s


def linearize_bv(jn_mean, i0_mean, temperature, f=FARADAY, r=GAS_CONSTANT):
    if i0_mean <= 0.0:
        raise DegenerateModelError("mean exchange current must be positive")
    rt = r * temperature
    u = f * jn_mean / (2.0 * i0_mean)
    slope = (rt / i0_mean) / math.sqrt(1.0 + u * u)
    intercept = (2.0 * rt / f) * math.asinh(u) - slope * jn_mean
    return BVLinearization(slope, intercept, i0_mean, jn_mean)


def ocp_cubic_fit(x4, u4):
    """Interpolating cubic through four (position, potential) pairs.

    Returns coefficients (c3, c2, c1, c0) of c3*x^3 + ... + c0 in physical
    units.  The solve runs in the scaled coordinate x/L where the fixed
    grid {0, 1/3, 2/3, 1} keeps the Vandermonde condition number around
    5e2; in metres it would be astronomically ill-conditioned.
    """
    x4 = np.asarray(x4, dtype=float)
    span = x4[-1]
    v = np.vander(x4 / span, 4)
    scaled = np.linalg.solve(v, np.asarray(u4, dtype=float))
    powers = span ** np.array([3.0, 2.0, 1.0, 0.0])
    return scaled / powers


@dataclasses.dataclass
class ReactionSolution:
    """Solved flux distribution for one electrode at one instant."""

    side: str
    mode: str  # 'analytic' or 'uniform'
    current: float
    length: float
    area: float
    a_s: float
    kappa_bar: float  # effective, S/m
    jn_mean: float
    jn4: np.ndarray  # flux at the 4 collocation points
    ocp4: np.ndarray  # OCP at the same points (reused by the heat model)
    bv: BVLinearization | None = None
    k: np.ndarray | None = None  # (k1..k5)
    lam: float | None = None  # 1/m
    n1: float | None = None  # amplitude on exp(-lam*x)
    n2: float | None = None  # amplitude on exp(-lam*(L-x))
    poly: np.ndarray | None = None  # particular part of J: (p2, p1, p0)
    ocp_poly: np.ndarray | None = None

    def flux_at(self, x):
        """Cumulative flux J(x) = integral of jn from the x=0 face."""
        x = np.asarray(x, dtype=float)
        if self.mode == "uniform":
            if self.side == "neg":
                return self.jn_mean * x
            return self.jn_mean * (self.length - x)
        p2, p1, p0 = self.poly
        return (
            self.n1 * np.exp(-self.lam * x)
            + self.n2 * np.exp(-self.lam * (self.length - x))
            + (p2 * x + p1) * x
            + p0
        )

    def jn_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.mode == "uniform":
            return np.full_like(x, self.jn_mean)
        p2, p1, _ = self.poly
        djdx = (
            -self.lam * self.n1 * np.exp(-self.lam * x)
            + self.lam * self.n2 * np.exp(-self.lam * (self.length - x))
            + 2.0 * p2 * x
            + p1
        )
        return _SIGN[self.side] * djdx

    def ohmic_drop(self):
        """Solution-phase ohmic potential change across the electrode, V.

        Oriented along global cell coordinates (negative collector toward
        positive collector), so both electrodes give a negative drop on
        discharge.
        """
        if self.mode == "uniform":
            return -self.current * self.length / (2.0 * self.kappa_bar * self.area)
        el_l = self.length
        p2, p1, p0 = self.poly
        decay = (1.0 - math.exp(-self.lam * el_l)) / self.lam
        int_j = (self.n1 + self.n2) * decay + (
            (p2 * el_l / 3.0 + p1 / 2.0) * el_l + p0
        ) * el_l
        return -_SIGN[self.side] * self.a_s * FARADAY / self.kappa_bar * int_j


def uniform_profile(side, current, el, kappa_bar, ocp4, f=FARADAY):
    """Flat jn profile carrying the whole applied current."""
    jbar = average_rate(side, current, el, f)
    return ReactionSolution(
        side=side,
        mode="uniform",
        current=current,
        length=el.L,
        area=el.A,
        a_s=el.a_s,
        kappa_bar=kappa_bar,
        jn_mean=jbar,
        jn4=np.full(4, jbar),
        ocp4=np.asarray(ocp4, dtype=float),
    )


def jn_profile(
    side,
    current,
    el,
    *,
    css4,
    ce4,
    temperature,
    kr,
    ae,
    be,
    kappa_bar,
    kd_bar,
    curve,
    f=FARADAY,
    r=GAS_CONSTANT,
):
    """Solve the analytic flux distribution for one electrode.

    css4/ce4 are the (lagged) surface and electrolyte concentrations at
    the collocation points; ae/be the local parabola coefficients of the
    electrolyte profile in this electrode; kappa_bar/kd_bar the effective
    conductivity and diffusional conductivity averaged over the points.
    """
    sign = _SIGN[side]
    length = el.L
    jbar = average_rate(side, current, el, f)
    u4 = curve.potential(np.asarray(css4, dtype=float) / el.cs_max)

    i0bar = float(
        exchange_current(kr, np.mean(ce4), np.mean(css4), el.cs_max)
    )
    bv = linearize_bv(jbar, i0bar, temperature, f, r)
    k2 = bv.slope + f * el.Rf
    if k2 <= 0.0:
        raise DegenerateModelError(f"{side}: nonpositive kinetic resistance")

    x4 = length * COLLOCATION
    cp3, cp2, cp1, cp0 = ocp_cubic_fit(x4, u4)  # cubic OCP-vs-position fit

    grad_ratio = 2.0 * ae * kd_bar / (be * kappa_bar)
    k1 = el.a_s * f * (1.0 / el.sigma_eff + 1.0 / kappa_bar)
    k3 = -3.0 * cp3
    k4 = grad_ratio - 2.0 * cp2
    k5 = -current / (el.A * el.sigma_eff) - cp1
    if side == "pos":
        # the ln-ce gradient is centred on the collector for this electrode
        k5 -= grad_ratio * length

    p2 = -sign * k3 / k1
    p1 = -sign * k4 / k1
    p0 = -sign * (k5 / k1 + 2.0 * k2 * k3 / (k1 * k1))

    lam = math.sqrt(k1 / k2)
    decay = math.exp(-lam * length)
    if side == "neg":
        j_lo, j_hi = 0.0, jbar * length  # J(0), J(L)
    else:
        j_lo, j_hi = jbar * length, 0.0
    rhs_lo = j_lo - p0
    rhs_hi = j_hi - ((p2 * length + p1) * length + p0)
    det = 1.0 - decay * decay
    n1 = (rhs_lo - decay * rhs_hi) / det
    n2 = (rhs_hi - decay * rhs_lo) / det

    sol = ReactionSolution(
        side=side,
        mode="analytic",
        current=current,
        length=length,
        area=el.A,
        a_s=el.a_s,
        kappa_bar=kappa_bar,
        jn_mean=jbar,
        jn4=np.empty(4),
        ocp4=u4,
        bv=bv,
        k=np.array([k1, k2, k3, k4, k5]),
        lam=lam,
        n1=n1,
        n2=n2,
        poly=np.array([p2, p1, p0]),
        ocp_poly=np.array([cp3, cp2, cp1, cp0]),
    )
    sol.jn4 = sol.jn_at(x4)
    return sol
