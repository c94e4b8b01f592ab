"""Closed-loop correction of solid concentrations from measured voltage.

When the modeled terminal voltage drifts from a measurement by more than a
threshold, the measured voltage is stripped of every non-equilibrium term
(electrolyte drops, contact drop, interfacial overpotentials) to expose the
true open-circuit voltage.  A stoichiometry shift pair consistent with that
OCV and with exact lithium conservation between the electrodes is then fed
through a first-order relaxation into the bulk concentrations: direct
substitution of the full shift is unstable, the inertial form is not.
"""

from __future__ import annotations

import dataclasses
import math

from scipy.optimize import brentq

from .errors import CorrectionRangeError

_EDGE = 1e-6  # stoichiometry margin kept from the table edges
_BULK_MARGIN = 1.0  # mol/m^3 kept from 0 and cs_max when shifting


@dataclasses.dataclass(frozen=True)
class CorrectorConfig:
    threshold: float = 0.02  # V of model-vs-measured error before acting
    tau: float = 10.0  # s, relaxation time of the applied shift
    dy_limit: float = 0.2  # search range for the positive-electrode shift

    def __post_init__(self):
        if self.threshold <= 0 or self.tau <= 0 or self.dy_limit <= 0:
            raise ValueError("corrector settings must be positive")


def back_out_ocv(v_measured, electrolyte_drop, contact_drop, eta_total):
    """Equilibrium part of a measured terminal voltage.

    Inverts the voltage assembly: OCV = V - (electrolyte drops) + Rc*I -
    (film + kinetic overpotentials at the two collector boundaries).
    """
    return v_measured - electrolyte_drop + contact_drop - eta_total


def mass_ratio(params):
    """Shift ratio dy_neg = -rho*dy_pos that conserves total solid lithium."""
    pos = params.pos.A * params.pos.L * params.pos.eps_s * params.pos.cs_max
    neg = params.neg.A * params.neg.L * params.neg.eps_s * params.neg.cs_max
    return pos / neg


def solve_correction(ocv_true, y_neg, y_pos, rho, curve_neg, curve_pos, dy_limit=0.2):
    """Stoichiometry shifts matching an observed OCV, mass-conserving.

    Finds dy_pos with U_pos(y_pos+dy_pos) - U_neg(y_neg - rho*dy_pos) =
    ocv_true; the paired dy_neg = -rho*dy_pos is exact by construction.
    The residual is monotone in dy_pos (both half-cell curves are), so a
    bracketed root-find is enough.  A root beyond the trust range saturates
    at the nearer range edge: large state errors are then walked in over
    several correction events instead of being ignored.
    """

    def residual(dy):
        return (
            curve_pos.potential(y_pos + dy)
            - curve_neg.potential(y_neg - rho * dy)
            - ocv_true
        )

    lo = max(-dy_limit, _EDGE - y_pos, (y_neg - (1.0 - _EDGE)) / rho)
    hi = min(dy_limit, (1.0 - _EDGE) - y_pos, (y_neg - _EDGE) / rho)
    if not lo < hi:
        raise CorrectionRangeError("no admissible stoichiometry shift range")
    r_lo, r_hi = residual(lo), residual(hi)
    if r_lo == 0.0:
        dy_pos = lo
    elif r_hi == 0.0:
        dy_pos = hi
    elif r_lo * r_hi > 0.0:
        # monotone decreasing residual: same sign at both ends puts the
        # root outside; take the endpoint closest to it
        dy_pos = hi if abs(r_hi) < abs(r_lo) else lo
    else:
        dy_pos = brentq(residual, lo, hi, xtol=1e-14)
    return dy_pos, -rho * dy_pos


class Corrector:
    """Applies inertial concentration shifts to a cell state in place."""

    def __init__(self, params, curve_neg, curve_pos, config=None):
        self.params = params
        self.curve_neg = curve_neg
        self.curve_pos = curve_pos
        self.config = config or CorrectorConfig()
        self.rho = mass_ratio(params)

    def shift_targets(self, ocv_true, css_neg_boundary, css_pos_boundary):
        """Concentration shift pair (mol/m^3) matching a back-out OCV."""
        dy_pos, dy_neg = solve_correction(
            ocv_true,
            css_neg_boundary / self.params.neg.cs_max,
            css_pos_boundary / self.params.pos.cs_max,
            self.rho,
            self.curve_neg,
            self.curve_pos,
            self.config.dy_limit,
        )
        return dy_neg * self.params.neg.cs_max, dy_pos * self.params.pos.cs_max

    def relax(self, state, target_neg, target_pos, dt):
        """One inertial update of the shift states; mutates `state`.

        The increment of each shift state is added to all four bulk
        concentrations of its electrode.  Returns (applied, clamped):
        whether any change was made and whether it had to be scaled to
        keep the concentrations inside their physical range.
        """
        a = math.exp(-dt / self.config.tau)
        inc_neg = (state.dcs_neg * a + target_neg * (1.0 - a)) - state.dcs_neg
        inc_pos = (state.dcs_pos * a + target_pos * (1.0 - a)) - state.dcs_pos
        if inc_neg == 0.0 and inc_pos == 0.0:
            return False, False

        scale = 1.0
        for inc, cs, cs_max in (
            (inc_neg, state.cs_bulk_neg, self.params.neg.cs_max),
            (inc_pos, state.cs_bulk_pos, self.params.pos.cs_max),
        ):
            if inc > 0.0:
                room = (cs_max - _BULK_MARGIN) - cs.max()
                scale = min(scale, max(room, 0.0) / inc)
            elif inc < 0.0:
                room = cs.min() - _BULK_MARGIN
                scale = min(scale, max(room, 0.0) / -inc)
        clamped = scale < 1.0

        state.cs_bulk_neg += scale * inc_neg
        state.cs_bulk_pos += scale * inc_pos
        state.dcs_neg += scale * inc_neg
        state.dcs_pos += scale * inc_pos
        return True, clamped
