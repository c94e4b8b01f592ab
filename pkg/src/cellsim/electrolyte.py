"""Electrolyte-phase surrogate: parabolic profiles driven by two molar amounts.

The electrolyte concentration is represented per region as a parabola with its
vertex at each current collector (zero-flux there) and a straight line across
the separator.  Flux and concentration continuity at the two interfaces plus
the definition of the per-electrode electrolyte amounts Qe gives a 4x4 linear
system for the profile coefficients.  Interface continuity is written for the
total molar flow (area-weighted), which keeps Qe_neg + Qe_pos conserved when
the cross-section areas of the regions differ.

Each Qe follows a first-order process in normal form tau*dQe/dt = -Qe + K;
the stepper advances it with the exact zero-order-hold exponential update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cellsim.errors import DegenerateModelError, ProfileValidityError

# local collocation abscissae of one electrode, fractions of its thickness
COLLOCATION = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


def exp_update(x, tau, k, dt):
    """Exact zero-order-hold update of tau*dx/dt = -x + k over one step."""
    a = np.exp(-dt / np.asarray(tau, dtype=float))
    out = x * a + k * (1.0 - a)
    return float(out) if np.ndim(out) == 0 else out


def initial_amounts(params):
    """Equilibrium electrolyte amounts (Qe_neg, Qe_pos) [mol] at ce0."""
    n = params.neg.A * params.neg.L * params.neg.eps_e * params.ce0
    p = params.pos.A * params.pos.L * params.pos.eps_e * params.ce0
    return n, p


def interface_matrix(params, de4):
    """4x4 coefficient matrix for [ae_neg, be_neg, ae_pos, be_pos].

    de4 = (De_neg, De_sep0, De_sepL, De_pos): effective diffusivities at the
    negative/separator interface (electrode and separator side) and the
    separator/positive interface (separator and electrode side).
    Rows: total-flux continuity, concentration continuity, and the two
    integral identities tying the parabolas to Qe_neg and Qe_pos.
    """
    de_n, de_s0, de_sl, de_p = de4
    ln, lp, ls = params.neg.L, params.pos.L, params.sep.L
    rn = params.neg.A * de_n / (params.sep.A * de_s0)
    rp = params.pos.A * de_p / (params.sep.A * de_sl)
    return np.array([
        [rn * ln, 0.0, rp * lp, 0.0],
        [ln * (ln + rn * ls), 1.0, -lp * (lp + rp * ls), -1.0],
        [ln ** 3 / 3.0, ln, 0.0, 0.0],
        [0.0, 0.0, lp ** 3 / 3.0, lp],
    ])


@dataclass
class ElectrolyteProfile:
    """Piecewise profile coefficients and its evaluation points."""

    ae_neg: float
    be_neg: float
    ae_pos: float
    be_pos: float
    ae_sep: float
    be_sep: float
    ce_neg: np.ndarray    # at the 4 negative collocation points, collector->separator
    ce_pos: np.ndarray    # at the 4 positive collocation points, separator->collector
    ce_sep: np.ndarray    # separator at {0, L/2, L}, negative->positive side

    def eval_neg(self, x):
        return self.ae_neg * x * x + self.be_neg

    def eval_pos(self, x, L):
        d = x - L
        return self.ae_pos * d * d + self.be_pos

    def eval_sep(self, xi):
        return self.ae_sep * xi + self.be_sep


def solve_profile(qe_neg, qe_pos, params, de4, validate=True):
    """Reconstruct the electrolyte profile for given amounts (Qe_neg, Qe_pos)."""
    mat = interface_matrix(params, de4)
    rhs = np.array([
        0.0,
        0.0,
        qe_neg / (params.neg.A * params.neg.eps_e),
        qe_pos / (params.pos.A * params.pos.eps_e),
    ])
    ae_n, be_n, ae_p, be_p = np.linalg.solve(mat, rhs)

    de_n, de_s0, _, _ = de4
    ln, lp, ls = params.neg.L, params.pos.L, params.sep.L
    ae_s = 2.0 * (params.neg.A * de_n / (params.sep.A * de_s0)) * ae_n * ln
    be_s = ae_n * ln * ln + be_n

    xs_n = COLLOCATION * ln
    xs_p = COLLOCATION * lp
    prof = ElectrolyteProfile(
        ae_neg=ae_n, be_neg=be_n, ae_pos=ae_p, be_pos=be_p,
        ae_sep=ae_s, be_sep=be_s,
        ce_neg=ae_n * xs_n * xs_n + be_n,
        ce_pos=ae_p * (xs_p - lp) ** 2 + be_p,
        ce_sep=ae_s * np.array([0.0, 0.5 * ls, ls]) + be_s,
    )
    if validate:
        low = min(prof.ce_neg.min(), prof.ce_pos.min(), prof.ce_sep.min())
        if low <= 0.0:
            raise ProfileValidityError(
                f"non-positive electrolyte concentration {low:.3g} mol/m^3"
            )
    return prof


def amount_dynamics(qe0, current, params, de4):
    """Normal-form coefficients (tau_neg, k_neg, tau_pos, k_pos) of the Qe pair.

    Each electrode's amount follows tau*dQe/dt = -Qe + K with the partner
    amount eliminated through Qe_neg + Qe_pos = qe0.  current > 0 discharges;
    the negative electrode then gains electrolyte.
    """
    mat = interface_matrix(params, de4)
    cols = np.linalg.solve(mat, np.array([[0.0, 0.0], [0.0, 0.0],
                                          [1.0, 0.0], [0.0, 1.0]]))
    x00, x01 = cols[0]            # ae_neg sensitivities to (q_neg, q_pos)
    x20, x21 = cols[2]            # ae_pos sensitivities
    vn = params.neg.A * params.neg.eps_e
    vp = params.pos.A * params.pos.eps_e
    de_n, _, _, de_p = de4
    gn = 2.0 * params.neg.A * params.neg.L * de_n
    gp = 2.0 * params.pos.A * params.pos.L * de_p
    src = (1.0 - params.t_plus0) * current / params.F

    gamma_n = gn * (x00 / vn - x01 / vp)
    gamma_p = gp * (x21 / vp - x20 / vn)
    if gamma_n >= 0.0 or gamma_p >= 0.0:
        raise DegenerateModelError("electrolyte amount dynamics lost stability")
    tau_n = -1.0 / gamma_n
    tau_p = -1.0 / gamma_p
    k_n = tau_n * (gn * x01 * qe0 / vp + src)
    k_p = tau_p * (gp * x20 * qe0 / vn - src)
    return tau_n, k_n, tau_p, k_p
