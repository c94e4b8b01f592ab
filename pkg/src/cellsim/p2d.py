"""Full-order porous-electrode reference solver.

Brute-force finite-volume discretization of the complete cell: electrolyte
diffusion along the thickness axis, radial diffusion inside a representative
particle at every electrode control volume, and the coupled algebraic system
(solid potential, electrolyte potential, interfacial flux) closed by the
exact inverse Butler-Volmer relation.  It exists to verify the reduced
engine, so it is written for transparency and conservation rather than for
speed: implicit transport solves, a banded Newton iteration for the
potentials, and conservative flux forms throughout.

Each step runs, in order: radial solid update and electrolyte update with
the interfacial flux held from the previous algebraic solve, a fresh
algebraic solve at the new concentrations, then the lumped thermal update.
Interface diffusivities use harmonic-mean conductances, which makes both
lithium pools conserve to round-off.

Internal states are exported at the reduced model's four collocation points
per electrode so trajectories from both solvers share one schema.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.linalg import solve_banded

from . import initialization as init
from .electrolyte import COLLOCATION, exp_update
from .errors import ConvergenceError, ScenarioError
from .ocp import default_curve
from .output import thermal_coefficients
from .parameters import (
    electrolyte_diffusivity,
    ionic_conductivity,
    kd_group,
    reaction_rate,
    solid_diffusivity,
)
from .scenario import profile_current
from .trajectory import StepRecord, Trajectory

NEWTON_TOL = 1e-9      # A, scaled by max(1, |I|)
NEWTON_MAX_ITER = 50
MAX_HALVINGS = 4
STEP_LIMIT = 0.3       # V, per-iteration potential update clip
CSS_EPS = 1.0          # mol/m^3 margin for the kinetic square root
CV_TOL = 1e-4          # V, voltage-hold secant tolerance
CV_MAX_ITER = 20


@dataclasses.dataclass(frozen=True)
class P2DMesh:
    n_neg: int = 51
    n_sep: int = 11
    n_pos: int = 51
    n_r: int = 18

    def __post_init__(self):
        for n in (self.n_neg, self.n_sep, self.n_pos, self.n_r):
            if n < 4:
                raise ValueError("every mesh count must be >= 4")


@dataclasses.dataclass
class P2DFields:
    """Complete field state of the full-order solver."""

    ce: np.ndarray          # (nx,) cell-average electrolyte concentration
    cs_neg: np.ndarray      # (n_neg, n_r) shell concentrations
    cs_pos: np.ndarray      # (n_pos, n_r)
    temperature: float
    jn_neg: np.ndarray | None = None   # held between steps, None before first solve
    jn_pos: np.ndarray | None = None
    u: np.ndarray | None = None        # warm start for the potential Newton

    def copy(self):
        return P2DFields(
            ce=self.ce.copy(),
            cs_neg=self.cs_neg.copy(),
            cs_pos=self.cs_pos.copy(),
            temperature=self.temperature,
            jn_neg=None if self.jn_neg is None else self.jn_neg.copy(),
            jn_pos=None if self.jn_pos is None else self.jn_pos.copy(),
            u=None if self.u is None else self.u.copy(),
        )


def _thomas(sub, diag, sup, rhs):
    """Batched tridiagonal solve; all arguments shaped (batch, n)."""
    n = diag.shape[1]
    cp = np.empty_like(diag)
    dp = np.empty_like(diag)
    cp[:, 0] = sup[:, 0] / diag[:, 0]
    dp[:, 0] = rhs[:, 0] / diag[:, 0]
    for j in range(1, n):
        m = diag[:, j] - sub[:, j] * cp[:, j - 1]
        cp[:, j] = sup[:, j] / m
        dp[:, j] = (rhs[:, j] - sub[:, j] * dp[:, j - 1]) / m
    x = np.empty_like(diag)
    x[:, -1] = dp[:, -1]
    for j in range(n - 2, -1, -1):
        x[:, j] = dp[:, j] - cp[:, j] * x[:, j + 1]
    return x


class P2DSolver:
    """Reference cell simulator on a fixed mesh."""

    def __init__(self, params, mesh=None, curves=None):
        self.params = params
        self.mesh = mesh or P2DMesh()
        if curves is None:
            curves = (default_curve(params.neg.ocp), default_curve(params.pos.ocp))
        self.curve_neg, self.curve_pos = curves
        self._geometry()

    def _geometry(self):
        p = self.params
        m = self.mesh
        nn, ns, npp = m.n_neg, m.n_sep, m.n_pos
        self.nn, self.ns, self.npp = nn, ns, npp
        self.nx = nn + ns + npp

        dx = np.concatenate([
            np.full(nn, p.neg.L / nn),
            np.full(ns, p.sep.L / ns),
            np.full(npp, p.pos.L / npp),
        ])
        area = np.concatenate([
            np.full(nn, p.neg.A), np.full(ns, p.sep.A), np.full(npp, p.pos.A)])
        eps_e = np.concatenate([
            np.full(nn, p.neg.eps_e), np.full(ns, p.sep.eps_e),
            np.full(npp, p.pos.eps_e)])
        self.dx, self.area, self.eps_e = dx, area, eps_e
        self.brug = eps_e ** p.p
        self.vol_e = area * dx * eps_e          # electrolyte pore volume per cell
        self.a_s = np.concatenate([
            np.full(nn, p.neg.a_s), np.zeros(ns), np.full(npp, p.pos.a_s)])
        self.rxn_vol = area * dx                # electrode volume for as*F*jn sources
        self.neg_slice = slice(0, nn)
        self.pos_slice = slice(nn + ns, self.nx)
        self.sep_slice = slice(nn, nn + ns)

        # cell centers in each electrode's local coordinate (for export)
        self.xc_neg = (np.arange(nn) + 0.5) * (p.neg.L / nn)
        self.xc_pos = (np.arange(npp) + 0.5) * (p.pos.L / npp)

        # radial shells (uniform)
        nr = m.n_r
        self.nr = nr
        self.dr = {"neg": p.neg.Rs / nr, "pos": p.pos.Rs / nr}
        self.r_faces = {
            s: np.arange(nr + 1) * self.dr[s] for s in ("neg", "pos")}
        self.shell_area = {s: 4.0 * math.pi * self.r_faces[s] ** 2
                           for s in ("neg", "pos")}
        self.shell_vol = {
            s: 4.0 / 3.0 * math.pi * np.diff(self.r_faces[s] ** 3)
            for s in ("neg", "pos")}

        # unknown layout for the potential system: electrodes interleave
        # (phi_s, phi_e) per cell, the separator carries phi_e only
        self.m_unknowns = 2 * nn + ns + 2 * npp
        self.idx_phis_neg = 2 * np.arange(nn)
        self.idx_phie = np.concatenate([
            2 * np.arange(nn) + 1,
            2 * nn + np.arange(ns),
            2 * nn + ns + 2 * np.arange(npp) + 1,
        ])
        self.idx_phis_pos = 2 * nn + ns + 2 * np.arange(npp)
        self.pin = int(self.idx_phie[nn + ns // 2])  # mid-separator gauge

        # solid conductances between adjacent electrode cells, S
        self.gs_neg = p.neg.sigma_eff * p.neg.A / (p.neg.L / nn)
        self.gs_pos = p.pos.sigma_eff * p.pos.A / (p.pos.L / npp)

    # ---------------- construction ----------------

    def initialize(self, window, soc0, t_amb=298.0):
        p = self.params
        y_neg = window.stoich_neg(soc0)
        y_pos = window.stoich_pos(soc0)
        return P2DFields(
            ce=np.full(self.nx, p.ce0),
            cs_neg=np.full((self.nn, self.nr), y_neg * p.neg.cs_max),
            cs_pos=np.full((self.npp, self.nr), y_pos * p.pos.cs_max),
            temperature=t_amb,
        )

    # ---------------- helpers ----------------

    def _face_conductance(self, coeff_cell):
        """Harmonic two-point conductance of area*coeff between cell centers."""
        half = self.dx / (2.0 * self.area * coeff_cell)
        return 1.0 / (half[:-1] + half[1:])

    def _shell_state(self, fields, side):
        """(outer-shell concentration, particle average, diffusivity) arrays."""
        el = getattr(self.params, side)
        cs = fields.cs_neg if side == "neg" else fields.cs_pos
        vol = self.shell_vol[side]
        cbar = cs @ vol / vol.sum()
        ds = solid_diffusivity(cbar / el.cs_max, fields.temperature, el.varying)
        return cs[:, -1].copy(), cbar, ds

    def _solve_jn(self, v, c_outer, ccoef, sq_ce, kr, el, curve, beta, f, jn0):
        """Per-node exact-BV flux with the surface value tied to the flux.

        Solves jn = (2 i0(css)/F) sinh(beta (v - U(css) - F Rf jn)) with the
        surface concentration css = c_outer + ccoef jn, by projected Newton:
        css is clipped away from 0 and cs_max and the concentration feedback
        is switched off on nodes where the clip binds.  Lagging css behind
        jn instead oscillates at steep open-circuit-potential segments.
        """
        cmax = el.cs_max
        rf = el.Rf
        jn = jn0.copy()

        def parts(jn):
            raw = c_outer + ccoef * jn
            css = np.clip(raw, CSS_EPS, cmax - CSS_EPS)
            live = (raw > CSS_EPS) & (raw < cmax - CSS_EPS)
            u = np.asarray(curve.potential(css / cmax))
            root = np.sqrt(css * (cmax - css))
            pref = 2.0 * kr * sq_ce * root / f
            arg = beta * (v - u - f * rf * jn)
            g = jn - pref * np.sinh(arg)
            dcss = np.where(live, ccoef, 0.0)
            du = np.asarray(curve.slope(css / cmax)) / cmax * dcss
            dpref = kr * sq_ce * (cmax - 2.0 * css) / root * dcss / f
            gp = (1.0 - dpref * np.sinh(arg)
                  + pref * np.cosh(arg) * beta * (du + f * rf))
            return css, u, pref, arg, g, gp

        for _ in range(80):
            css, u, pref, arg, g, gp = parts(jn)
            if np.max(np.abs(g)) < 1e-16 + 1e-11 * np.max(np.abs(jn)):
                break
            jn = jn - g / gp
        else:
            css, u, pref, arg, g, gp = parts(jn)
        djn_dv = pref * np.cosh(arg) * beta / gp
        return jn, djn_dv, css, u

    # ---------------- the algebraic potential solve ----------------

    def _algebraic(self, fields, current, shell_neg, shell_pos):
        """Newton solve of the potential/flux system at fixed concentrations.

        shell_neg/shell_pos are the (outer shell concentration, particle
        average, diffusivity) triples of the two electrodes.  Returns
        (jn_neg, jn_pos, phis_neg, phis_pos, phie, css_neg, css_pos).  The
        interfacial flux is eliminated per cell by an inner exact-BV solve,
        leaving banded charge-conservation equations in the potentials.
        """
        p = self.params
        f = p.F
        T = fields.temperature
        beta = f / (2.0 * p.R * T)
        nn, ns, npp, nx = self.nn, self.ns, self.npp, self.nx
        M = self.m_unknowns

        ce = fields.ce
        kap = ionic_conductivity(ce, T) * self.brug
        g_k = self._face_conductance(kap)
        kdg = kd_group(ce, T, p.t_plus0)
        g_kd = g_k * 0.5 * (kdg[:-1] + kdg[1:])
        dln = np.diff(np.log(ce))

        kr_n = reaction_rate(T, p.neg.varying)
        kr_p = reaction_rate(T, p.pos.varying)
        c_out_n, _, ds_n = shell_neg
        c_out_p, _, ds_p = shell_pos
        ccoef_n = -self.dr["neg"] / (2.0 * ds_n)
        ccoef_p = -self.dr["pos"] / (2.0 * ds_p)
        sq_ce_n = np.sqrt(ce[self.neg_slice])
        sq_ce_p = np.sqrt(ce[self.pos_slice])
        rxn_n = self.rxn_vol[self.neg_slice] * p.neg.a_s * f
        rxn_p = self.rxn_vol[self.pos_slice] * p.pos.a_s * f

        if fields.u is None:
            u = np.zeros(M)
            u[self.idx_phis_neg] = np.asarray(
                self.curve_neg.potential(c_out_n / p.neg.cs_max))
            u[self.idx_phis_pos] = np.asarray(
                self.curve_pos.potential(c_out_p / p.pos.cs_max))
        else:
            u = fields.u.copy()

        jn_n = (np.full(nn, current / (p.neg.a_s * f * p.neg.A * p.neg.L))
                if fields.jn_neg is None else fields.jn_neg.copy())
        jn_p = (np.full(npp, -current / (p.pos.a_s * f * p.pos.A * p.pos.L))
                if fields.jn_pos is None else fields.jn_pos.copy())

        tol = NEWTON_TOL * max(1.0, abs(current))
        ie_idx = self.idx_phie
        pin = self.pin

        for _ in range(NEWTON_MAX_ITER):
            phis_n = u[self.idx_phis_neg]
            phis_p = u[self.idx_phis_pos]
            phie = u[ie_idx]

            jn_n, dj_n, css_n, _ = self._solve_jn(
                phis_n - phie[:nn], c_out_n, ccoef_n, sq_ce_n,
                kr_n, p.neg, self.curve_neg, beta, f, jn_n)
            jn_p, dj_p, css_p, _ = self._solve_jn(
                phis_p - phie[nn + ns:], c_out_p, ccoef_p, sq_ce_p,
                kr_p, p.pos, self.curve_pos, beta, f, jn_p)

            # solid-phase currents at internal faces, + collector conditions
            is_n = -self.gs_neg * np.diff(phis_n)
            is_p = -self.gs_pos * np.diff(phis_p)
            res_sn = (np.concatenate([[current], is_n])
                      - np.concatenate([is_n, [0.0]]) - rxn_n * jn_n)
            res_sp = (np.concatenate([[0.0], is_p])
                      - np.concatenate([is_p, [0.0]]) - rxn_p * jn_p)
            res_sp[-1] -= current  # current leaves at the positive collector
            # electrolyte current at internal faces (zero at both collectors)
            ie = -g_k * np.diff(phie) - g_kd * dln
            rxn_jn = np.zeros(nx)
            rxn_jn[self.neg_slice] = rxn_n * jn_n
            rxn_jn[self.pos_slice] = rxn_p * jn_p
            res_e = (np.concatenate([[0.0], ie])
                     - np.concatenate([ie, [0.0]]) + rxn_jn)

            res = np.zeros(M)
            res[self.idx_phis_neg] = res_sn
            res[self.idx_phis_pos] = res_sp
            res[ie_idx] = res_e
            res[pin] = u[pin]

            if not np.all(np.isfinite(res)):
                raise ConvergenceError("potential solve produced non-finite values")
            if np.max(np.abs(np.delete(res, pin))) <= tol and abs(res[pin]) <= 1e-12:
                fields.u = u
                return jn_n, jn_p, phis_n, phis_p, phie, css_n, css_p

            ab = np.zeros((5, M))

            def put(eq, var, val):
                np.add.at(ab, (2 + eq - var, var), val)

            # solid equations
            for idx_s, gs, rxn, dj, sl in (
                (self.idx_phis_neg, self.gs_neg, rxn_n, dj_n, self.neg_slice),
                (self.idx_phis_pos, self.gs_pos, rxn_p, dj_p, self.pos_slice),
            ):
                put(idx_s[1:], idx_s[:-1], np.full(len(idx_s) - 1, gs))
                put(idx_s[:-1], idx_s[1:], np.full(len(idx_s) - 1, gs))
                diag = -rxn * dj
                diag[:-1] -= gs
                diag[1:] -= gs
                put(idx_s, idx_s, diag)
                put(idx_s, ie_idx[sl], rxn * dj)

            # electrolyte equations
            put(ie_idx[1:], ie_idx[:-1], g_k)
            put(ie_idx[:-1], ie_idx[1:], g_k)
            diag_e = np.zeros(nx)
            diag_e[:-1] -= g_k
            diag_e[1:] -= g_k
            diag_e[self.neg_slice] -= rxn_n * dj_n
            diag_e[self.pos_slice] -= rxn_p * dj_p
            put(ie_idx, ie_idx, diag_e)
            put(ie_idx[self.neg_slice], self.idx_phis_neg, rxn_n * dj_n)
            put(ie_idx[self.pos_slice], self.idx_phis_pos, rxn_p * dj_p)

            # gauge: the pin equation becomes u[pin] = 0
            cols = np.arange(max(0, pin - 2), min(M, pin + 3))
            ab[2 + pin - cols, cols] = 0.0
            ab[2, pin] = 1.0

            du = solve_banded((2, 2), ab, -res)
            u = u + np.clip(du, -STEP_LIMIT, STEP_LIMIT)

        raise ConvergenceError(
            f"potential system not converged in {NEWTON_MAX_ITER} iterations")

    # ---------------- transport ----------------

    def _solid_step(self, fields, side, dt):
        cs = fields.cs_neg if side == "neg" else fields.cs_pos
        jn = fields.jn_neg if side == "neg" else fields.jn_pos
        _, _, ds = self._shell_state(fields, side)
        nr, dr = self.nr, self.dr[side]
        af = self.shell_area[side]
        vol = self.shell_vol[side]
        npart = cs.shape[0]

        lam = dt * ds[:, None] / dr        # (npart, 1) broadcast helper
        sub = -lam * af[:-1][None, :]
        sup = -lam * af[1:][None, :]
        sup[:, -1] = 0.0
        diag = vol[None, :] - sub - (-lam * af[1:][None, :])
        diag[:, -1] = vol[-1] + lam[:, 0] * af[-2]
        rhs = cs * vol[None, :]
        rhs[:, -1] -= dt * af[-1] * jn
        return _thomas(sub, diag, sup, rhs)

    def _electrolyte_step(self, fields, dt):
        T = fields.temperature
        de = electrolyte_diffusivity(fields.ce, T) * self.brug
        g = self._face_conductance(de)
        src = np.zeros(self.nx)
        src[self.neg_slice] = (self.rxn_vol[self.neg_slice] * self.params.neg.a_s
                               * (1.0 - self.params.t_plus0) * fields.jn_neg)
        src[self.pos_slice] = (self.rxn_vol[self.pos_slice] * self.params.pos.a_s
                               * (1.0 - self.params.t_plus0) * fields.jn_pos)
        ab = np.zeros((3, self.nx))
        ab[0, 1:] = -dt * g
        ab[2, :-1] = -dt * g
        ab[1] = self.vol_e
        ab[1, :-1] += dt * g
        ab[1, 1:] += dt * g
        rhs = self.vol_e * fields.ce + dt * src
        return solve_banded((1, 1), ab, rhs)

    # ---------------- one step ----------------

    def step(self, fields, current, t_amb, dt, _depth=0):
        """Advance the full-order state one zero-order-hold interval."""
        p = self.params
        work = fields.copy()
        if work.jn_neg is None:
            work.jn_neg, work.jn_pos, *_ = self._algebraic(
                work, current,
                self._shell_state(work, "neg"), self._shell_state(work, "pos"))
        try:
            work.cs_neg = self._solid_step(work, "neg", dt)
            work.cs_pos = self._solid_step(work, "pos", dt)
            work.ce = self._electrolyte_step(work, dt)
            shell_n = self._shell_state(work, "neg")
            shell_p = self._shell_state(work, "pos")
            cbar_n, cbar_p = shell_n[1], shell_p[1]
            jn_n, jn_p, phis_n, phis_p, phie, css_n, css_p = self._algebraic(
                work, current, shell_n, shell_p)
        except ConvergenceError:
            if _depth >= MAX_HALVINGS:
                raise
            half = self.step(fields, current, t_amb, dt / 2.0, _depth + 1)[0]
            return self.step(half, current, t_amb, dt / 2.0, _depth + 1)

        work.jn_neg, work.jn_pos = jn_n, jn_p
        v = float(phis_p[-1] - phis_n[0]) - p.Rc * current

        qh = -p.F * (
            p.neg.A * p.neg.a_s * float(np.sum(jn_n * np.asarray(
                self.curve_neg.potential(css_n / p.neg.cs_max)))) * (p.neg.L / self.nn)
            + p.pos.A * p.pos.a_s * float(np.sum(jn_p * np.asarray(
                self.curve_pos.potential(css_p / p.pos.cs_max)))) * (p.pos.L / self.npp)
        ) - current * v
        tau_t, k_t = thermal_coefficients(qh, p, t_amb)
        work.temperature = exp_update(work.temperature, tau_t, k_t, dt)

        out = {
            "v": v, "qh": qh,
            "css_neg": css_n, "css_pos": css_p,
            "cbar_neg": cbar_n, "cbar_pos": cbar_p,
            "phie": phie, "phis_neg": phis_n, "phis_pos": phis_p,
        }
        return work, out

    # ---------------- diagnostics ----------------

    def charge_balance(self, fields, current):
        """Relative error of the per-electrode reaction-current totals."""
        p = self.params
        i_n = float(np.sum(self.rxn_vol[self.neg_slice] * p.neg.a_s
                           * p.F * fields.jn_neg))
        i_p = float(np.sum(self.rxn_vol[self.pos_slice] * p.pos.a_s
                           * p.F * fields.jn_pos))
        scale = max(1.0, abs(current))
        return max(abs(i_n - current), abs(i_p + current)) / scale

    def lithium_total(self, fields):
        """Total lithium amount (solid + electrolyte), mol.

        The active-material volume fraction is taken as a_s Rs / 3, the
        particle density implied by the interfacial-area parameter that
        drives every flux term.  Tabulated eps_s values differ from it by a
        few tenths of a percent, which would otherwise masquerade as drift.
        """
        p = self.params
        vol_n = self.shell_vol["neg"]
        vol_p = self.shell_vol["pos"]
        cbar_n = fields.cs_neg @ vol_n / vol_n.sum()
        cbar_p = fields.cs_pos @ vol_p / vol_p.sum()
        frac_n = p.neg.a_s * p.neg.Rs / 3.0
        frac_p = p.pos.a_s * p.pos.Rs / 3.0
        solid = (p.neg.A * (p.neg.L / self.nn) * frac_n * float(np.sum(cbar_n))
                 + p.pos.A * (p.pos.L / self.npp) * frac_p * float(np.sum(cbar_p)))
        return solid + float(np.sum(self.vol_e * fields.ce))

    # ---------------- voltage hold ----------------

    def cv_hold_current(self, fields, v_target, t_amb, dt, i_seed):
        """Current whose single step lands on v_target, by secant iteration."""

        def v_of(i):
            _, out = self.step(fields, i, t_amb, dt)
            return out["v"]

        i0 = i_seed if i_seed != 0.0 else -1e-3
        i1 = i0 * 0.95
        f0 = v_of(i0) - v_target
        if abs(f0) < CV_TOL:
            return i0
        f1 = v_of(i1) - v_target
        for _ in range(CV_MAX_ITER):
            if abs(f1) < CV_TOL:
                return i1
            if f1 == f0:
                break
            i0, i1, f0 = i1, i1 - f1 * (i1 - i0) / (f1 - f0), f1
            f1 = v_of(i1) - v_target
        raise ConvergenceError(
            f"voltage hold at {v_target} V did not converge (last {f1:+.2e} V)")

    # ---------------- scenario execution ----------------

    def _sample(self, local_x, values, side):
        xc = self.xc_neg if side == "neg" else self.xc_pos
        return np.interp(local_x, xc, values)

    def _record(self, fields, out, current, mode, window):
        p = self.params
        x4n = COLLOCATION * p.neg.L
        x4p = COLLOCATION * p.pos.L
        ce_n = self._sample(x4n, fields.ce[self.neg_slice], "neg")
        ce_p = self._sample(x4p, fields.ce[self.pos_slice], "pos")
        css_n = self._sample(x4n, out["css_neg"], "neg")
        css_p = self._sample(x4p, out["css_pos"], "pos")
        cs_n = self._sample(x4n, out["cbar_neg"], "neg")
        cs_p = self._sample(x4p, out["cbar_pos"], "pos")
        jn_n = self._sample(x4n, fields.jn_neg, "neg")
        jn_p = self._sample(x4p, fields.jn_pos, "pos")
        qe_n = float(np.sum(self.vol_e[self.neg_slice] * fields.ce[self.neg_slice]))
        qe_p = float(np.sum(self.vol_e[self.pos_slice] * fields.ce[self.pos_slice]))
        ybar_n = float(np.mean(out["cbar_neg"])) / p.neg.cs_max
        soc = (ybar_n - window.y0_neg) / (window.y1_neg - window.y0_neg)
        return StepRecord(
            t=0.0, mode=mode, current=current, v=out["v"],
            temperature=fields.temperature, soc=soc,
            ce_neg=ce_n, ce_pos=ce_p, css_neg=css_n, css_pos=css_p,
            cs_bulk_neg=cs_n, cs_bulk_pos=cs_p, jn_neg=jn_n, jn_pos=jn_p,
            qe_neg=qe_n, qe_pos=qe_p, qh=out["qh"],
            u_ocp_neg=float(self.curve_neg.potential(css_n[0] / p.neg.cs_max)),
            u_ocp_pos=float(self.curve_pos.potential(css_p[3] / p.pos.cs_max)),
        )

    def _resolve_voltage(self, value, tag, rating):
        if tag is not None:
            if rating is None:
                raise ScenarioError("voltage tags need a rating")
            return getattr(rating, tag)
        return float(value)

    def run(self, scenario, window, rating=None, fields=None):
        """Execute a scenario on the oracle; same record schema as the engine."""
        if fields is None:
            soc0 = scenario.soc0
            if soc0 is None:
                if scenario.ocv0 is None:
                    raise ScenarioError("scenario gives no initial state")
                table = init.soc_ocv_curve(window, self.curve_neg, self.curve_pos)
                soc0 = float(table.soc_at(scenario.ocv0))
            fields = self.initialize(window, soc0, scenario.t_amb)
        else:
            fields = fields.copy()
        dt = scenario.dt
        records = []
        reason = "completed"
        t = 0.0
        i_prev = 0.0
        stop_run = False

        for phase in scenario.phases:
            if stop_run:
                break
            v_until = None
            if phase.until_voltage is not None or phase.until_tag is not None:
                v_until = self._resolve_voltage(
                    phase.until_voltage, phase.until_tag, rating)
            v_hold = i_cut = None
            if phase.kind == "cv":
                v_hold = self._resolve_voltage(
                    phase.voltage, phase.voltage_tag, rating)
                i_cut = phase.i_cut
                if i_cut is None and phase.cut_c_rate is not None:
                    if rating is None:
                        raise ScenarioError("c_rate cut-offs need a rating")
                    i_cut = phase.cut_c_rate * rating.i_1c
            phase_t = 0.0
            while True:
                if phase.duration is not None and phase_t >= phase.duration - 1e-9:
                    break
                if phase.kind == "profile":
                    current = profile_current(phase, phase_t)
                elif phase.kind == "cv":
                    current = self.cv_hold_current(
                        fields, v_hold, scenario.t_amb, dt, i_prev)
                else:
                    current = phase.amps
                    if current is None:
                        if rating is None:
                            raise ScenarioError("c_rate phases need a rating")
                        current = phase.c_rate * rating.i_1c
                fields, out = self.step(fields, current, scenario.t_amb, dt)
                t += dt
                phase_t += dt
                i_prev = current
                rec = self._record(fields, out, current, phase.kind, window)
                rec.t = t
                records.append(rec)
                if v_until is not None:
                    if current > 0.0 and rec.v <= v_until:
                        break
                    if current < 0.0 and rec.v >= v_until:
                        break
                if phase.kind == "cv" and i_cut is not None and abs(current) < i_cut:
                    break
                if rating is not None and phase.kind == "cc":
                    if current > 0.0 and rec.v <= rating.v_min and (
                            v_until is None or v_until > rating.v_min):
                        reason = "v_min"
                        stop_run = True
                        break
                    if current < 0.0 and rec.v >= rating.v_max and (
                            v_until is None or v_until < rating.v_max):
                        reason = "v_max"
                        stop_run = True
                        break

        return Trajectory(records, name=scenario.name, reason=reason)
