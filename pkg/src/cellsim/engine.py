"""Discrete-time cell simulation engine.

Each step freezes the applied current and ambient temperature, refreshes
the concentration- and temperature-dependent coefficients at the previous
state, solves the reaction distribution, and advances every inertial state
with its exact zero-order-hold exponential update.  Outputs (terminal
voltage, breakdown, heat) are evaluated on the updated state; the heat
fed to the thermal state uses the previous step's voltage, closing the
loop one sample behind.

Scenario execution adds voltage holds (per-step root-find on the current),
phase sequencing with stop conditions, the oscillation stabilizer, and the
measurement-driven closed-loop corrector.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import corrector as corrector_mod
from . import initialization as init
from . import output as output_mod
from . import reaction
from . import solid
from .electrolyte import amount_dynamics, exp_update, solve_profile
from .errors import (
    CellSimError,
    ConvergenceError,
    CorrectionRangeError,
    DegenerateModelError,
    ProfileValidityError,
    ScenarioError,
)
from .ocp import default_curve
from .parameters import (
    RATINGS,
    diffusional_conductivity,
    ionic_conductivity,
    electrolyte_diffusivity,
    kd_group,
    reaction_rate,
    solid_diffusivity,
)
from .scenario import profile_current
from .sgfilter import SGFConfig, Stabilizer
from .state import CellState
from .trajectory import StepRecord, Trajectory

CE_FLOOR = 1.0  # mol/m^3, evaluation floor when a profile undershoots
CV_TOL = 1e-4  # V, voltage-hold convergence
CV_MAX_ITER = 20


@dataclasses.dataclass(frozen=True)
class StepInput:
    """Zero-order-hold inputs for one step."""

    current: float = 0.0  # A, positive discharges
    dt: float = 1.0  # s
    t_amb: float = 298.0  # K
    mode: str = "cc"

    def __post_init__(self):
        if not 0.0 < self.dt <= 10.0:
            raise ScenarioError(f"step length {self.dt} s outside (0, 10]")


class Engine:
    """Simulation engine bound to one parameter set and rating."""

    def __init__(self, params, rating, *, curves=None, sg_config=None,
                 corrector_config=None, strict=False):
        self.params = params
        self.rating = rating
        self.strict = strict
        if curves is None:
            curves = (default_curve(params.neg.ocp), default_curve(params.pos.ocp))
        self.curve_neg, self.curve_pos = curves
        self.window = init.solve_window(params, self.curve_neg, self.curve_pos, rating)
        self.table = init.soc_ocv_curve(self.window, self.curve_neg, self.curve_pos)
        self.sg_config = sg_config or SGFConfig()
        self.corrector = corrector_mod.Corrector(
            params, self.curve_neg, self.curve_pos, corrector_config
        )
        self._brug = {
            "neg": params.brug(params.neg.eps_e),
            "pos": params.brug(params.pos.eps_e),
            "sep": params.brug(params.sep.eps_e),
        }

    @classmethod
    def from_preset(cls, name, **kwargs):
        from .parameters import load_preset

        return cls(load_preset(name), RATINGS[name], **kwargs)

    # ---------------- state construction ----------------

    def initialize(self, soc0=None, ocv0=None, t_amb=298.0):
        return init.initialize_state(
            self.params, self.window, soc0=soc0, ocv0=ocv0,
            t_amb=t_amb, table=self.table,
        )

    def soc(self, state):
        return init.state_soc(state, self.window, self.params)

    # ---------------- internal helpers ----------------

    def _surface(self, state, side):
        el = getattr(self.params, side)
        return solid.surface_concentration(state.cs_bulk(side), state.w(side), el.cs_max)

    def _diffusivities(self, state, temperature):
        """Effective De per region, evaluated at region-average ce."""
        p = self.params
        ce_n = state.qe_neg / (p.neg.A * p.neg.L * p.neg.eps_e)
        ce_p = state.qe_pos / (p.pos.A * p.pos.L * p.pos.eps_e)
        ce_mid = 0.5 * (ce_n + ce_p)
        de_n = electrolyte_diffusivity(ce_n, temperature) * self._brug["neg"]
        de_s = electrolyte_diffusivity(ce_mid, temperature) * self._brug["sep"]
        de_p = electrolyte_diffusivity(ce_p, temperature) * self._brug["pos"]
        return de_n, de_s, de_s, de_p

    def _profile(self, qe_neg, qe_pos, de4, flags):
        try:
            prof = solve_profile(qe_neg, qe_pos, self.params, de4,
                                 validate=self.strict)
        except ProfileValidityError:
            raise
        floored = False
        for arr in (prof.ce_neg, prof.ce_pos, prof.ce_sep):
            if arr.min() < CE_FLOOR:
                np.clip(arr, CE_FLOOR, None, out=arr)
                floored = True
        if floored:
            flags.add("ce_floored")
        return prof

    def _solve_reaction(self, side, current, css4, profile, temperature, kr, flags):
        el = getattr(self.params, side)
        ce4 = profile.ce_neg if side == "neg" else profile.ce_pos
        kappa4 = ionic_conductivity(ce4, temperature) * self._brug[side]
        kappa_bar = float(kappa4.mean())
        if el.jn_mode == "uniform":
            u4 = self._ocp(side, css4)
            return reaction.uniform_profile(side, current, el, kappa_bar, u4)
        kd4 = diffusional_conductivity(ce4, temperature, kappa4, self.params.t_plus0)
        ae = profile.ae_neg if side == "neg" else profile.ae_pos
        be = profile.be_neg if side == "neg" else profile.be_pos
        try:
            return reaction.jn_profile(
                side, current, el,
                css4=css4, ce4=ce4, temperature=temperature, kr=kr,
                ae=ae, be=be, kappa_bar=kappa_bar, kd_bar=float(kd4.mean()),
                curve=self.curve_neg if side == "neg" else self.curve_pos,
            )
        except DegenerateModelError:
            if self.strict:
                raise
            flags.add("jn_fallback")
            u4 = self._ocp(side, css4)
            return reaction.uniform_profile(side, current, el, kappa_bar, u4)

    def _ocp(self, side, css4):
        el = getattr(self.params, side)
        curve = self.curve_neg if side == "neg" else self.curve_pos
        return curve.potential(np.asarray(css4) / el.cs_max)

    def _voltage(self, current, css_neg, css_pos, profile, temperature,
                 sol_neg, sol_pos, kr_neg, kr_pos):
        p = self.params
        u_neg = float(self.curve_neg.potential(css_neg[0] / p.neg.cs_max))
        u_pos = float(self.curve_pos.potential(css_pos[3] / p.pos.cs_max))
        i0_neg = float(reaction.exchange_current(
            kr_neg, profile.ce_neg[0], css_neg[0], p.neg.cs_max))
        i0_pos = float(reaction.exchange_current(
            kr_pos, profile.ce_pos[3], css_pos[3], p.pos.cs_max))
        phi_neg = output_mod.boundary_potential(
            u_neg, float(sol_neg.jn4[0]), i0_neg, p.neg.Rf, temperature)
        phi_pos = output_mod.boundary_potential(
            u_pos, float(sol_pos.jn4[3]), i0_pos, p.pos.Rf, temperature)

        group_n = kd_group(profile.ce_neg, temperature, p.t_plus0)
        group_s = kd_group(profile.ce_sep, temperature, p.t_plus0)
        group_p = kd_group(profile.ce_pos, temperature, p.t_plus0)
        polarization = (
            output_mod.polarization_drop(group_n, profile.ce_neg[0], profile.ce_neg[3]),
            output_mod.polarization_drop(group_s, profile.ce_sep[0], profile.ce_sep[2]),
            output_mod.polarization_drop(group_p, profile.ce_pos[0], profile.ce_pos[3]),
        )
        kappa_sep = float(ionic_conductivity(profile.ce_sep, temperature).mean())
        kappa_sep *= self._brug["sep"]
        ohmic = (
            sol_neg.ohmic_drop(),
            output_mod.separator_drop(current, p.sep.L, p.sep.A, kappa_sep),
            sol_pos.ohmic_drop(),
        )
        breakdown = output_mod.assemble_voltage(
            phi_pos, phi_neg, polarization, ohmic, p.Rc, current)
        return breakdown, u_neg, u_pos

    def rest_voltage(self, state):
        """Terminal voltage of the state at zero current (no state change)."""
        flags = set()
        t = state.temperature
        de4 = self._diffusivities(state, t)
        prof = self._profile(state.qe_neg, state.qe_pos, de4, flags)
        css_n, _ = self._surface(state, "neg")
        css_p, _ = self._surface(state, "pos")
        sols = []
        for side, css4 in (("neg", css_n), ("pos", css_p)):
            el = getattr(self.params, side)
            ce4 = prof.ce_neg if side == "neg" else prof.ce_pos
            kappa_bar = float(ionic_conductivity(ce4, t).mean()) * self._brug[side]
            sols.append(reaction.uniform_profile(
                side, 0.0, el, kappa_bar, self._ocp(side, css4)))
        kr_n = reaction_rate(t, self.params.neg.varying)
        kr_p = reaction_rate(t, self.params.pos.varying)
        breakdown, _, _ = self._voltage(
            0.0, css_n, css_p, prof, t, sols[0], sols[1], kr_n, kr_p)
        return breakdown.v

    # ---------------- the step ----------------

    def step(self, state, inp, v_prev=None):
        """Advance one zero-order-hold interval; returns (state', record)."""
        p = self.params
        current = inp.current
        dt = inp.dt
        t0 = state.temperature
        flags = set()

        # lagged surfaces and electrolyte profile
        css_n, cl_n = self._surface(state, "neg")
        css_p, cl_p = self._surface(state, "pos")
        if cl_n or cl_p:
            flags.add("css_clamped")
        de4 = self._diffusivities(state, t0)
        prof0 = self._profile(state.qe_neg, state.qe_pos, de4, flags)

        # coefficient refresh at the lagged state
        kr_n = reaction_rate(t0, p.neg.varying)
        kr_p = reaction_rate(t0, p.pos.varying)
        ds_n = solid_diffusivity(state.cs_bulk_neg / p.neg.cs_max, t0, p.neg.varying)
        ds_p = solid_diffusivity(state.cs_bulk_pos / p.pos.cs_max, t0, p.pos.varying)

        # reaction distribution for this interval
        sol_n = self._solve_reaction("neg", current, css_n, prof0, t0, kr_n, flags)
        sol_p = self._solve_reaction("pos", current, css_p, prof0, t0, kr_p, flags)

        # heat for the thermal update, with the previous voltage held
        if v_prev is None:
            v_prev = self.rest_voltage(state)
        qh = output_mod.heat_rate(sol_n, sol_p, current, v_prev)
        tau_t, k_t = output_mod.thermal_coefficients(qh, p, inp.t_amb)

        # inertial updates
        tau_n, k_n, tau_p, k_p = amount_dynamics(
            state.qe_neg + state.qe_pos, current, p, de4)
        qe_n = exp_update(state.qe_neg, tau_n, k_n, dt)
        qe_p = exp_update(state.qe_pos, tau_p, k_p, dt)
        cs_n = solid.bulk_update(state.cs_bulk_neg, sol_n.jn4, p.neg.Rs, dt)
        cs_p = solid.bulk_update(state.cs_bulk_pos, sol_p.jn4, p.pos.Rs, dt)
        w_n = solid.offset_update(state.w_neg, sol_n.jn4, ds_n, p.neg.Rs, p.neg.ks, dt)
        w_p = solid.offset_update(state.w_pos, sol_p.jn4, ds_p, p.pos.Rs, p.pos.ks, dt)
        t1 = exp_update(t0, tau_t, k_t, dt)

        new = CellState(
            cs_bulk_neg=cs_n, cs_bulk_pos=cs_p, w_neg=w_n, w_pos=w_p,
            qe_neg=qe_n, qe_pos=qe_p, temperature=t1,
            dcs_neg=state.dcs_neg, dcs_pos=state.dcs_pos,
        )

        # outputs on the updated state
        css_n1, cl_n1 = self._surface(new, "neg")
        css_p1, cl_p1 = self._surface(new, "pos")
        if cl_n1 or cl_p1:
            flags.add("css_clamped")
        prof1 = self._profile(qe_n, qe_p, de4, flags)
        breakdown, u_neg, u_pos = self._voltage(
            current, css_n1, css_p1, prof1, t1, sol_n, sol_p, kr_n, kr_p)

        record = StepRecord(
            t=0.0, mode=inp.mode, current=current, v=breakdown.v,
            temperature=t1, soc=self.soc(new),
            ce_neg=prof1.ce_neg.copy(), ce_pos=prof1.ce_pos.copy(),
            css_neg=css_n1, css_pos=css_p1,
            cs_bulk_neg=cs_n.copy(), cs_bulk_pos=cs_p.copy(),
            jn_neg=sol_n.jn4.copy(), jn_pos=sol_p.jn4.copy(),
            qe_neg=qe_n, qe_pos=qe_p, qh=qh,
            u_ocp_neg=u_neg, u_ocp_pos=u_pos,
            breakdown=breakdown, flags=flags,
        )
        return new, record

    # ---------------- voltage hold ----------------

    def cv_hold_current(self, state, v_target, dt, t_amb, i_seed, v_prev=None):
        """Current whose single step lands on v_target, by secant iteration."""

        def v_of(i):
            _, rec = self.step(state, StepInput(i, dt, t_amb, "cv"), v_prev)
            return rec.v

        i0 = i_seed
        i1 = i_seed * 0.95 if i_seed != 0.0 else -0.01 * self.rating.i_1c
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

    def _resolve_voltage(self, value, tag):
        if tag == "v_min":
            return self.rating.v_min
        if tag == "v_max":
            return self.rating.v_max
        return float(value)

    def _phase_current(self, phase):
        if phase.amps is not None:
            return phase.amps
        return phase.c_rate * self.rating.i_1c

    def run(self, scenario, state=None, measurements=None):
        """Execute a scenario; returns the Trajectory."""
        if state is None:
            if scenario.soc0 is None and scenario.ocv0 is None:
                raise ScenarioError("scenario gives no initial state")
            state = self.initialize(soc0=scenario.soc0, ocv0=scenario.ocv0,
                                    t_amb=scenario.t_amb)
        else:
            state = state.copy()

        dt = scenario.dt
        t_amb = scenario.t_amb
        stabilizer = Stabilizer(self.params, self.sg_config)
        records = []
        reason = "completed"
        t = 0.0
        v_prev = self.rest_voltage(state)
        i_prev = 0.0
        stop_run = False

        for phase in scenario.phases:
            if stop_run:
                break
            v_until = None
            if phase.until_voltage is not None or phase.until_tag is not None:
                v_until = self._resolve_voltage(phase.until_voltage, phase.until_tag)
            if phase.kind == "cv":
                v_hold = self._resolve_voltage(phase.voltage, phase.voltage_tag)
                i_cut = phase.i_cut
                if i_cut is None and phase.cut_c_rate is not None:
                    i_cut = phase.cut_c_rate * self.rating.i_1c
            phase_t = 0.0

            while True:
                if phase.duration is not None and phase_t >= phase.duration - 1e-9:
                    break
                if phase.kind == "cc" or phase.kind == "rest":
                    current = self._phase_current(phase)
                    mode = phase.kind
                elif phase.kind == "profile":
                    current = profile_current(phase, phase_t)
                    mode = "profile"
                else:
                    current = self.cv_hold_current(
                        state, v_hold, dt, t_amb, i_prev if i_prev != 0.0 else
                        -0.05 * self.rating.i_1c, v_prev)
                    mode = "cv"

                state, rec = self.step(
                    state, StepInput(current, dt, t_amb, mode), v_prev)
                t += dt
                phase_t += dt
                rec.t = t

                # stabilizer: raw surface histories, write back through w
                for side in ("neg", "pos"):
                    css = rec.css_neg if side == "neg" else rec.css_pos
                    smoothed, touched = stabilizer.push(side, css)
                    if touched:
                        el = getattr(self.params, side)
                        smoothed = np.clip(
                            smoothed, solid.CSS_MARGIN,
                            el.cs_max - solid.CSS_MARGIN)
                        w = smoothed - state.cs_bulk(side)
                        if side == "neg":
                            state.w_neg = w
                            rec.css_neg = smoothed
                        else:
                            state.w_pos = w
                            rec.css_pos = smoothed
                        rec.flags.add("smoothed")

                # closed-loop correction from measurements
                if measurements is not None and measurements.covers(t):
                    self._correct(state, rec, measurements, dt)

                records.append(rec)
                v_prev = rec.v
                i_prev = current

                if v_until is not None:
                    if current > 0.0 and rec.v <= v_until:
                        break
                    if current < 0.0 and rec.v >= v_until:
                        break
                if phase.kind == "cv" and i_cut is not None and abs(current) < i_cut:
                    break
                # rail guard: a runaway constant-current phase ends the run
                # (holds pin the voltage themselves, profiles may clip rails)
                if phase.kind == "cc":
                    if current > 0.0 and rec.v <= self.rating.v_min and (
                            v_until is None or v_until > self.rating.v_min):
                        reason = "v_min"
                        stop_run = True
                        break
                    if current < 0.0 and rec.v >= self.rating.v_max and (
                            v_until is None or v_until < self.rating.v_max):
                        reason = "v_max"
                        stop_run = True
                        break

        return Trajectory(records, name=scenario.name, reason=reason)

    def _correct(self, state, rec, measurements, dt):
        v_meas = measurements.voltage_at(rec.t)
        t_meas = measurements.temperature_at(rec.t)
        cfg = self.corrector.config
        # the relax targets are total shifts from the uncorrected trajectory;
        # the state already carries dcs, so a fresh solve (which sees the
        # shifted state and returns the remainder) stacks on top of it.
        # Below the threshold the applied shift is held, not unwound.
        target_n = state.dcs_neg
        target_p = state.dcs_pos
        if abs(v_meas - rec.v) > cfg.threshold:
            bd = rec.breakdown
            eta = (bd.phi_se_pos - rec.u_ocp_pos) - (bd.phi_se_neg - rec.u_ocp_neg)
            ocv_true = corrector_mod.back_out_ocv(
                v_meas, bd.electrolyte_drop, bd.contact, eta)
            try:
                more_n, more_p = self.corrector.shift_targets(
                    ocv_true, rec.css_neg[0], rec.css_pos[3])
                target_n += more_n
                target_p += more_p
            except CorrectionRangeError:
                rec.flags.add("correction_skipped")
        applied, clamped = self.corrector.relax(state, target_n, target_p, dt)
        if applied:
            rec.flags.add("corrected")
            self._reemit(state, rec)
        if clamped:
            rec.flags.add("correction_clamped")
        if t_meas is not None:
            state.temperature = t_meas
            rec.temperature = t_meas
            rec.flags.add("t_override")

    def _reemit(self, state, rec):
        """Refresh a record's voltage terms after a concentration shift.

        Only the surface-bound pieces change: equilibrium potentials,
        exchange currents, and the two boundary interfacial potentials.
        Electrolyte drops, fluxes, and heat came from the step's solve and
        stay as recorded.
        """
        p = self.params
        css_n, cl_n = self._surface(state, "neg")
        css_p, cl_p = self._surface(state, "pos")
        if cl_n or cl_p:
            rec.flags.add("css_clamped")
        tk = rec.temperature
        u_neg = float(self.curve_neg.potential(css_n[0] / p.neg.cs_max))
        u_pos = float(self.curve_pos.potential(css_p[3] / p.pos.cs_max))
        i0_neg = float(reaction.exchange_current(
            reaction_rate(tk, p.neg.varying), rec.ce_neg[0], css_n[0], p.neg.cs_max))
        i0_pos = float(reaction.exchange_current(
            reaction_rate(tk, p.pos.varying), rec.ce_pos[3], css_p[3], p.pos.cs_max))
        phi_neg = output_mod.boundary_potential(
            u_neg, float(rec.jn_neg[0]), i0_neg, p.neg.Rf, tk)
        phi_pos = output_mod.boundary_potential(
            u_pos, float(rec.jn_pos[3]), i0_pos, p.pos.Rf, tk)
        bd = rec.breakdown
        rec.breakdown = output_mod.assemble_voltage(
            phi_pos, phi_neg, bd.polarization, bd.ohmic, p.Rc, rec.current)
        rec.v = rec.breakdown.v
        rec.u_ocp_neg = u_neg
        rec.u_ocp_pos = u_pos
        rec.css_neg = css_n
        rec.css_pos = css_p
        rec.cs_bulk_neg = state.cs_bulk_neg.copy()
        rec.cs_bulk_pos = state.cs_bulk_pos.copy()
        rec.soc = self.soc(state)
