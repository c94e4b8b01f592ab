"""Terminal voltage assembly and the lumped thermal model.

The cell voltage is the solid-phase potential difference between the two
collectors minus the contact-resistance drop.  It decomposes into the
interfacial potentials at the outer boundaries plus, per domain, a
polarization term (concentration-ratio log) and an ohmic term (integral of
the solution-phase current).  The breakdown is kept so callers can inspect
the individual contributions.

Heat generation couples the reaction distribution back into a single-node
temperature state with first-order relaxation toward ambient.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .parameters import FARADAY, GAS_CONSTANT

# Newton-Cotes weights for the 4-point collocation grid (3/8 rule)
QUAD_WEIGHTS = np.array([1.0, 3.0, 3.0, 1.0]) / 8.0


def boundary_potential(u_ocp, jn, i0, rf, temperature, f=FARADAY, r=GAS_CONSTANT):
    """Solid-electrolyte potential difference at a collector boundary.

    Exact inverse Butler-Volmer (no linearization here): the film drop
    plus the asinh overpotential on top of the equilibrium potential.
    """
    u = f * jn / (2.0 * i0)
    return u_ocp + f * rf * jn + (2.0 * r * temperature / f) * math.asinh(u)


def polarization_drop(group, ce_start, ce_end):
    """Concentration polarization across one domain, V.

    group holds the pointwise ratio of diffusional to ionic conductivity
    (units V); its arithmetic mean scales the boundary log-ratio.
    Oriented start -> end along global cell coordinates.
    """
    return -float(np.mean(group)) * math.log(ce_end / ce_start)


def separator_drop(current, length, area, kappa_eff):
    """Ohmic drop across the separator where ie is the full cell current."""
    return -length * current / (kappa_eff * area)


@dataclasses.dataclass(frozen=True)
class VoltageBreakdown:
    """Terminal voltage with its additive parts.

    polarization/ohmic are (neg, sep, pos) triples oriented from the
    negative collector toward the positive one.
    """

    phi_se_pos: float
    phi_se_neg: float
    polarization: np.ndarray
    ohmic: np.ndarray
    contact: float  # Rc*I
    v: float

    @property
    def electrolyte_drop(self):
        return float(np.sum(self.polarization) + np.sum(self.ohmic))


def assemble_voltage(phi_se_pos, phi_se_neg, polarization, ohmic, rc, current):
    polarization = np.asarray(polarization, dtype=float)
    ohmic = np.asarray(ohmic, dtype=float)
    contact = rc * current
    v = (
        phi_se_pos
        - phi_se_neg
        + float(np.sum(polarization))
        + float(np.sum(ohmic))
        - contact
    )
    return VoltageBreakdown(phi_se_pos, phi_se_neg, polarization, ohmic, contact, v)


def heat_rate(sol_neg, sol_pos, current, voltage, f=FARADAY):
    """Reaction heat generation, W.

    Integrates jn*U_OCP over both electrodes (3/8 rule on the collocation
    values, with the equilibrium potentials the flux solve saw) and adds
    the electrical terminal power.  Positive on both discharge and charge
    away from equilibrium.
    """
    total = 0.0
    for sol in (sol_neg, sol_pos):
        integral = sol.length * float(np.dot(QUAD_WEIGHTS, sol.jn4 * sol.ocp4))
        total += sol.area * sol.a_s * integral
    return -f * total - current * voltage


def thermal_coefficients(qh, params, t_amb):
    """Relaxation time and target of the single-node temperature state."""
    cooling = params.hc * params.As  # W/K
    tau_t = params.m * params.Cp / cooling
    k_t = qh / cooling + t_amb
    return tau_t, k_t
