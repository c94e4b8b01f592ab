"""Particle solid-phase lithium dynamics.

Each collocation point carries two states per electrode: the particle-average
concentration, driven directly by the local pore-wall flux, and a surface
offset that relaxes toward a flux-proportional steady value with the
particle diffusion time constant.  The surface concentration handed to the
kinetics is their sum.
"""

from __future__ import annotations

import numpy as np

from .electrolyte import exp_update

# keep surface concentrations this far (mol/m^3) inside (0, cs_max)
CSS_MARGIN = 1.0


def bulk_update(cs_bulk, jn, radius, dt):
    """Advance particle-average concentration one step.

    The average obeys d(cs)/dt = -3*jn/Rs (surface-to-volume ratio of a
    sphere); with jn held over the step this integrates exactly.
    """
    return cs_bulk - 3.0 * dt * np.asarray(jn) / radius


def offset_coefficients(jn, ds, radius, ks):
    """Time constant and asymptote of the surface-offset relaxation.

    Returns (tau_s, w_inf).  tau_s = ks*Rs^2/Ds; the offset settles at
    -Rs*jn/(5*Ds), the steady surface-minus-average gap of a sphere under
    constant flux.
    """
    ds = np.asarray(ds, dtype=float)
    tau_s = ks * radius * radius / ds
    w_inf = -radius * np.asarray(jn) / (5.0 * ds)
    return tau_s, w_inf


def offset_update(w, jn, ds, radius, ks, dt):
    """Relax the surface offsets toward their current asymptote."""
    tau_s, w_inf = offset_coefficients(jn, ds, radius, ks)
    return exp_update(w, tau_s, w_inf, dt)


def surface_concentration(cs_bulk, w, cs_max):
    """Surface concentration with a safety clamp.

    Returns (css, clamped) where clamped is True if any point had to be
    pulled back inside [CSS_MARGIN, cs_max - CSS_MARGIN].  The clamp keeps
    sqrt(css*(cs_max-css)) in the kinetics real; hitting it means the
    operating point left the valid window.
    """
    css = np.asarray(cs_bulk) + np.asarray(w)
    lo = CSS_MARGIN
    hi = cs_max - CSS_MARGIN
    clamped = bool(css.min() < lo or css.max() > hi)
    if clamped:
        css = np.clip(css, lo, hi)
    return css, clamped
