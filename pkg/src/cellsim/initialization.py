"""Stoichiometry window, equilibrium-voltage curve, and state setup.

The usable stoichiometry range of each electrode follows from the rated
capacity and the voltage limits: the capacity fixes the window width in
closed form, and the two cut-off voltages pin the window positions through
a 2-unknown nonlinear system on the equilibrium potentials.  Everything
downstream (state initialization, state-of-charge accounting, open-circuit
voltage lookup) is bookkeeping on that window.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .electrolyte import initial_amounts
from .errors import ConvergenceError, WindowError
from .output import QUAD_WEIGHTS
from .state import CellState

MAH_TO_COULOMB = 3.6

_NEWTON_TOL = 1e-6  # V, residual bound on the cut-off equations
_NEWTON_MAX_ITER = 60


@dataclasses.dataclass(frozen=True)
class StoichiometryWindow:
    """Usable stoichiometry intervals [y0, y1] of both electrodes.

    The negative electrode sits at y1_neg when the cell is full; the
    positive electrode at y0_pos.  Widths encode the rated capacity.
    """

    y0_neg: float
    y1_neg: float
    y0_pos: float
    y1_pos: float
    qc_mah: float
    v_min: float
    v_max: float

    @property
    def delta_neg(self):
        return self.y1_neg - self.y0_neg

    @property
    def delta_pos(self):
        return self.y1_pos - self.y0_pos

    def stoich_neg(self, soc):
        return self.y0_neg + soc * self.delta_neg

    def stoich_pos(self, soc):
        return self.y1_pos - soc * self.delta_pos


def window_width(qc_mah, el, f):
    """Stoichiometry span consumed by the rated capacity, dimensionless."""
    return MAH_TO_COULOMB * qc_mah / (f * el.A * el.L * el.cs_max * el.eps_s)


def solve_window(params, curve_neg, curve_pos, rating):
    """Find the stoichiometry window matching capacity and voltage limits.

    The window widths come in closed form; the positions (y0_pos, y0_neg)
    solve U_pos(y0_pos) - U_neg(y0_neg + d_neg) = v_max and
    U_pos(y0_pos + d_pos) - U_neg(y0_neg) = v_min.  Damped Newton with a
    monotone scalar-reduction fallback.
    """
    f = params.F
    d_neg = window_width(rating.qc_mah, params.neg, f)
    d_pos = window_width(rating.qc_mah, params.pos, f)
    for name, width in (("negative", d_neg), ("positive", d_pos)):
        if width >= 1.0:
            raise WindowError(
                f"capacity {rating.qc_mah} mAh infeasible: {name}-electrode "
                f"window width {width:.3f} >= 1"
            )

    v_min, v_max = rating.v_min, rating.v_max

    def residual(y0p, y0n):
        return np.array(
            [
                curve_pos.potential(y0p) - curve_neg.potential(y0n + d_neg) - v_max,
                curve_pos.potential(y0p + d_pos) - curve_neg.potential(y0n) - v_min,
            ]
        )

    lo = 1e-9
    y0p, y0n = 0.05, 0.02
    y0p = min(y0p, 1.0 - d_pos - lo)
    y0n = min(y0n, 1.0 - d_neg - lo)
    res = residual(y0p, y0n)
    converged = False
    for _ in range(_NEWTON_MAX_ITER):
        if np.max(np.abs(res)) < _NEWTON_TOL:
            converged = True
            break
        jac = np.array(
            [
                [curve_pos.slope(y0p), -curve_neg.slope(y0n + d_neg)],
                [curve_pos.slope(y0p + d_pos), -curve_neg.slope(y0n)],
            ]
        )
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            break
        alpha = 1.0
        improved = False
        while alpha > 2.0**-20:
            cand_p = float(np.clip(y0p + alpha * step[0], lo, 1.0 - d_pos - lo))
            cand_n = float(np.clip(y0n + alpha * step[1], lo, 1.0 - d_neg - lo))
            cand_res = residual(cand_p, cand_n)
            if np.max(np.abs(cand_res)) < np.max(np.abs(res)):
                y0p, y0n, res = cand_p, cand_n, cand_res
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break

    if not converged and np.max(np.abs(res)) >= _NEWTON_TOL:
        y0p, y0n = _window_fallback(curve_neg, curve_pos, d_neg, d_pos, v_min, v_max)
        res = residual(y0p, y0n)
        if np.max(np.abs(res)) >= _NEWTON_TOL:
            raise ConvergenceError(
                f"stoichiometry window solve stalled, residual {res}"
            )

    window = StoichiometryWindow(
        y0_neg=y0n,
        y1_neg=y0n + d_neg,
        y0_pos=y0p,
        y1_pos=y0p + d_pos,
        qc_mah=rating.qc_mah,
        v_min=v_min,
        v_max=v_max,
    )
    for y in (window.y0_neg, window.y1_neg, window.y0_pos, window.y1_pos):
        if not 0.0 < y < 1.0:
            raise WindowError(f"window endpoint {y:.4f} outside (0, 1)")
    return window


def _window_fallback(curve_neg, curve_pos, d_neg, d_pos, v_min, v_max):
    """Scalar reduction: eliminate y0_pos via the upper cut-off equation.

    For a given y0_neg the full-cell condition fixes y0_pos uniquely
    (positive OCP is strictly monotone), leaving one monotone residual in
    y0_neg for a bracketed root-find.
    """
    from scipy.optimize import brentq

    from .errors import OCPRangeError

    lo = 1e-9
    hi_n = 1.0 - d_neg - lo

    def y0p_of(y0n):
        target = v_max + curve_neg.potential(y0n + d_neg)
        try:
            return curve_pos.inverse(target, lo, 1.0 - lo)
        except OCPRangeError as exc:
            raise WindowError(
                f"upper cut-off {v_max} V unreachable with these electrodes"
            ) from exc

    def g(y0n):
        y0p = y0p_of(y0n)
        return curve_pos.potential(y0p + d_pos) - curve_neg.potential(y0n) - v_min

    glo, ghi = g(lo), g(hi_n)
    if glo * ghi > 0.0:
        raise WindowError(
            "voltage limits admit no stoichiometry window for this capacity"
        )
    y0n = brentq(g, lo, hi_n, xtol=1e-14)
    return y0p_of(y0n), y0n


@dataclasses.dataclass(frozen=True)
class SocOcvTable:
    """Equilibrium voltage sampled on a uniform state-of-charge grid."""

    soc: np.ndarray
    ocv: np.ndarray

    def ocv_at(self, soc):
        return np.interp(soc, self.soc, self.ocv)

    def soc_at(self, ocv):
        # OCV is strictly increasing in SOC, so the flipped interp is valid
        return np.interp(ocv, self.ocv, self.soc)


def soc_ocv_curve(window, curve_neg, curve_pos, n_points=201):
    soc = np.linspace(0.0, 1.0, n_points)
    ocv = curve_pos.potential(window.stoich_pos(soc)) - curve_neg.potential(
        window.stoich_neg(soc)
    )
    return SocOcvTable(soc=soc, ocv=ocv)


def initialize_state(params, window, *, soc0=None, ocv0=None, t_amb=298.0, table=None):
    """Equilibrium cell state at a given state of charge (or rest voltage).

    Uniform solid concentrations across the collocation points, relaxed
    surface offsets, nominal electrolyte content, ambient temperature.
    """
    if (soc0 is None) == (ocv0 is None):
        raise ValueError("specify exactly one of soc0 and ocv0")
    if ocv0 is not None:
        if not window.v_min - 1e-9 <= ocv0 <= window.v_max + 1e-9:
            raise WindowError(
                f"rest voltage {ocv0} outside [{window.v_min}, {window.v_max}]"
            )
        if table is None:
            raise ValueError("ocv0 initialization needs a SocOcvTable")
        soc0 = float(table.soc_at(ocv0))
    if not 0.0 <= soc0 <= 1.0:
        raise WindowError(f"initial state of charge {soc0} outside [0, 1]")

    cs_neg = params.neg.cs_max * window.stoich_neg(soc0)
    cs_pos = params.pos.cs_max * window.stoich_pos(soc0)
    qe_neg, qe_pos = initial_amounts(params)
    return CellState(
        cs_bulk_neg=np.full(4, cs_neg),
        cs_bulk_pos=np.full(4, cs_pos),
        w_neg=np.zeros(4),
        w_pos=np.zeros(4),
        qe_neg=qe_neg,
        qe_pos=qe_pos,
        temperature=t_amb,
    )


def state_soc(state, window, params):
    """State of charge from the negative-electrode average stoichiometry."""
    y_mean = float(np.dot(QUAD_WEIGHTS, state.cs_bulk_neg)) / params.neg.cs_max
    return (y_mean - window.y0_neg) / window.delta_neg
