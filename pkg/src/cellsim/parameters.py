"""Cell parameters and concentration/temperature-dependent material laws.

Transport and kinetic coefficients vary with the local state: the solid-phase
diffusivity is affine in bulk stoichiometry with Arrhenius-corrected
coefficients, the electrolyte diffusivity and conductivity follow fitted
correlations in (ce, T), and the reaction-rate constant is Arrhenius in T.
Porous-medium corrections use a Bruggeman exponent for electrolyte-phase
properties and a linear porosity factor for the solid-phase conductivity.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from cellsim.errors import ParameterError, TemperatureRangeError

FARADAY = 96485.33        # C/mol
GAS_CONSTANT = 8.314      # J/(mol K)
T_REF = 298.0             # K, reference for Arrhenius corrections

DS_FLOOR = 1e-18          # m^2/s, lower clamp for the affine solid diffusivity
DE_DENOM_MIN = 5.0        # K, validity guard of the electrolyte-diffusivity fit

# d(ln f)/d(ln ce) parabolic fit, argument ce/1000
ACTIVITY_COEFFS = (0.55, 1.08, -0.44)


def arrhenius(ref, e_act, T, T_ref=T_REF, R=GAS_CONSTANT):
    """Scale `ref` from `T_ref` to `T` with activation energy `e_act` [J/mol]."""
    return ref * math.exp(-e_act / R * (1.0 / T - 1.0 / T_ref))


@dataclass(frozen=True)
class ElectrodeVarying:
    """Fitted coefficients of the state-dependent electrode laws."""

    ea_k_ds: float        # J/mol, activation energy of the slope coefficient
    ea_b_ds: float        # J/mol, activation energy of the offset coefficient
    k_ds_ref: float       # m^2/s, slope of Ds vs bulk stoichiometry at T_ref
    b_ds_ref: float       # m^2/s, offset of Ds at T_ref
    ea_kr: float          # J/mol, activation energy of the rate constant
    kr_ref: float         # reaction-rate constant at T_ref


def solid_diffusivity(stoich, T, varying, T_ref=T_REF, R=GAS_CONSTANT, clamp=True):
    """Solid-phase diffusivity [m^2/s], affine in bulk stoichiometry.

    Both affine coefficients carry their own Arrhenius correction.  The law
    can cross zero for extreme stoichiometry; by default the result is clamped
    at DS_FLOOR, with `clamp=False` raising instead.
    """
    k_ds = arrhenius(varying.k_ds_ref, varying.ea_k_ds, T, T_ref, R)
    b_ds = arrhenius(varying.b_ds_ref, varying.ea_b_ds, T, T_ref, R)
    ds = k_ds * np.asarray(stoich, dtype=float) + b_ds
    if np.any(ds < DS_FLOOR):
        if not clamp:
            raise DegenerateDiffusivity(
                f"solid diffusivity {ds.min():.3e} m^2/s at T {T:.1f} K"
            )
        ds = np.maximum(ds, DS_FLOOR)
    return float(ds) if np.ndim(stoich) == 0 else ds


class DegenerateDiffusivity(ParameterError):
    """Affine solid-diffusivity law produced a non-positive value."""


def electrolyte_diffusivity(ce, T):
    """Electrolyte diffusivity [m^2/s] from the fitted correlation in (ce, T).

    ce in mol/m^3, T in K.  Raises TemperatureRangeError when the fit's
    denominator T - 229 - 0.005 ce drops below DE_DENOM_MIN.
    """
    ce = np.asarray(ce, dtype=float)
    denom = T - 229.0 - 5e-3 * ce
    if np.any(denom < DE_DENOM_MIN):
        raise TemperatureRangeError(
            f"electrolyte-diffusivity fit out of range: T-229-0.005*ce = {denom.min():.2f} K"
        )
    out = 10.0 ** (-8.43 - 54.0 / denom - 2.2e-4 * ce)
    return float(out) if out.ndim == 0 else out


def ionic_conductivity(ce, T):
    """Electrolyte conductivity [S/m] from the trinomial-in-(ce, T) fit squared."""
    inner = (
        (0.494e-6 * ce * ce + 0.668e-3 * ce - 10.5)
        + (-8.86e-10 * ce * ce - 1.78e-5 * ce + 0.074) * T
        + (2.8e-8 * ce - 6.96e-5) * T * T
    )
    return ce * 1e-4 * inner * inner


def activity_term(ce, coeffs=ACTIVITY_COEFFS):
    """Electrolyte activity derivative d(ln f)/d(ln ce), parabolic in ce/1000."""
    u = ce * 1e-3
    a, b, c = coeffs
    return (a * u + b) * u + c


def kd_group(ce, T, t_plus0, coeffs=ACTIVITY_COEFFS, F=FARADAY, R=GAS_CONSTANT):
    """Diffusional-to-ohmic conductivity ratio kappa_D/kappa [V]."""
    return 2.0 * R * T / F * (t_plus0 - 1.0) * activity_term(ce, coeffs)


def diffusional_conductivity(ce, T, kappa, t_plus0, coeffs=ACTIVITY_COEFFS,
                             F=FARADAY, R=GAS_CONSTANT):
    """Diffusional conductivity kappa_D [S/m] for a given (effective) kappa."""
    return kappa * kd_group(ce, T, t_plus0, coeffs, F, R)


def reaction_rate(T, varying, T_ref=T_REF, R=GAS_CONSTANT):
    """Arrhenius-corrected reaction-rate constant."""
    return arrhenius(varying.kr_ref, varying.ea_kr, T, T_ref, R)


@dataclass(frozen=True)
class ElectrodeParams:
    """Geometry, transport, and material data of one porous electrode."""

    L: float              # m, thickness
    A: float              # m^2, cross-section area
    sigma_s: float        # S/m, intrinsic solid conductivity
    Rf: float             # ohm m^2, film resistance
    Rs: float             # m, particle radius
    a_s: float            # 1/m, specific interfacial area
    cs_max: float         # mol/m^3, maximum solid concentration
    eps_e: float          # electrolyte volume fraction
    eps_s: float          # active-material volume fraction
    ks: float             # surface-offset time-constant shape factor
    ocp: str              # equilibrium-potential table tag
    jn_mode: str          # 'analytic' or 'uniform' pore-wall flux model
    varying: ElectrodeVarying

    @property
    def sigma_eff(self):
        # linear porosity correction for the solid phase
        return self.sigma_s * self.eps_s


@dataclass(frozen=True)
class SeparatorParams:
    L: float              # m
    A: float              # m^2
    eps_e: float


@dataclass(frozen=True)
class CellParameters:
    """Complete description of one cell."""

    neg: ElectrodeParams
    pos: ElectrodeParams
    sep: SeparatorParams
    m: float              # kg, cell mass
    As: float             # m^2, cell surface area for convective cooling
    Rc: float             # ohm, contact resistance
    t_plus0: float        # cation transference number
    ce0: float            # mol/m^3, initial electrolyte concentration
    Cp: float             # J/(kg K)
    hc: float             # W/(m^2 K)
    p: float              # Bruggeman exponent
    F: float = FARADAY
    R: float = GAS_CONSTANT
    T_ref: float = T_REF
    alpha_a: float = 0.5
    alpha_c: float = 0.5
    activity: tuple = ACTIVITY_COEFFS

    def brug(self, eps_e):
        """Bruggeman porosity factor for electrolyte-phase properties."""
        return eps_e ** self.p

    def electrode(self, side):
        return self.neg if side == "neg" else self.pos


def _validate(params):
    chk = []
    for side in ("neg", "pos"):
        el = params.electrode(side)
        chk += [
            (f"{side}.L", el.L), (f"{side}.A", el.A), (f"{side}.sigma_s", el.sigma_s),
            (f"{side}.Rs", el.Rs), (f"{side}.a_s", el.a_s), (f"{side}.cs_max", el.cs_max),
            (f"{side}.ks", el.ks),
        ]
        if not 0.0 < el.eps_e < 1.0 or not 0.0 < el.eps_s < 1.0:
            raise ParameterError(f"{side}: volume fractions must lie in (0, 1)")
        if el.eps_e + el.eps_s > 1.0:
            raise ParameterError(f"{side}: eps_e + eps_s exceeds 1")
        if el.Rf < 0.0:
            raise ParameterError(f"{side}: film resistance must be >= 0")
        if el.jn_mode not in ("analytic", "uniform"):
            raise ParameterError(f"{side}: jn_mode must be 'analytic' or 'uniform'")
        # interfacial area should agree with spherical-particle geometry
        a_geo = 3.0 * el.eps_s / el.Rs
        if abs(el.a_s - a_geo) > 0.02 * a_geo:
            raise ParameterError(
                f"{side}: a_s {el.a_s:.4g} inconsistent with 3*eps_s/Rs = {a_geo:.4g}"
            )
    chk += [("sep.L", params.sep.L), ("sep.A", params.sep.A), ("m", params.m),
            ("As", params.As), ("ce0", params.ce0), ("Cp", params.Cp),
            ("hc", params.hc), ("p", params.p)]
    for name, value in chk:
        if not value > 0.0:
            raise ParameterError(f"{name} must be positive, got {value!r}")
    if not 0.0 < params.sep.eps_e < 1.0:
        raise ParameterError("sep: eps_e must lie in (0, 1)")
    if not 0.0 < params.t_plus0 < 1.0:
        raise ParameterError("t_plus0 must lie in (0, 1)")
    if params.Rc < 0.0:
        raise ParameterError("Rc must be >= 0")
    if params.alpha_a != 0.5 or params.alpha_c != 0.5:
        raise ParameterError("charge-transfer coefficients are fixed at 0.5")
    return params


# parameter-file schema: section -> ordered keys
_SCHEMA = {
    "geometry": ["m", "L_neg", "L_pos", "L_sep", "A_neg", "A_pos", "A_sep", "As"],
    "transport": ["sigma_s_neg", "sigma_s_pos", "t_plus0", "Rc", "Rf_neg", "Rf_pos"],
    "material": ["Rs_neg", "Rs_pos", "as_neg", "as_pos", "cs_max_neg", "cs_max_pos",
                 "eps_e_neg", "eps_e_pos", "eps_e_sep", "eps_s_neg", "eps_s_pos",
                 "ce0", "ocp_neg", "ocp_pos", "jn_mode_neg", "jn_mode_pos"],
    "thermal": ["Cp", "hc"],
    "varying": ["EA_kDs_neg", "EA_bDs_neg", "kDs_ref_neg", "bDs_ref_neg",
                "EA_kr_neg", "kr_ref_neg",
                "EA_kDs_pos", "EA_bDs_pos", "kDs_ref_pos", "bDs_ref_pos",
                "EA_kr_pos", "kr_ref_pos",
                "T_ref", "act_a", "act_b", "act_c"],
    "constants": ["F", "R", "p", "ks_neg", "ks_pos", "alpha_a", "alpha_c"],
}
_STRING_KEYS = {"ocp_neg", "ocp_pos", "jn_mode_neg", "jn_mode_pos"}


def _parse_ini(text, origin):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ParameterError(f"{origin}: {exc}") from exc
    seen = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ParameterError(f"{origin}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ParameterError(f"{origin}: unknown key '{key}' in [{section}]")
            if key in _STRING_KEYS:
                seen[key] = raw.strip()
            else:
                try:
                    seen[key] = float(raw)
                except ValueError as exc:
                    raise ParameterError(f"{origin}: key '{key}' is not numeric: {raw!r}") from exc
    missing = [k for sec in _SCHEMA.values() for k in sec if k not in seen]
    if missing:
        raise ParameterError(f"{origin}: missing keys: {', '.join(missing)}")
    return seen


def _build(vals):
    def varying(side):
        return ElectrodeVarying(
            ea_k_ds=vals[f"EA_kDs_{side}"], ea_b_ds=vals[f"EA_bDs_{side}"],
            k_ds_ref=vals[f"kDs_ref_{side}"], b_ds_ref=vals[f"bDs_ref_{side}"],
            ea_kr=vals[f"EA_kr_{side}"], kr_ref=vals[f"kr_ref_{side}"],
        )

    def electrode(side):
        return ElectrodeParams(
            L=vals[f"L_{side}"], A=vals[f"A_{side}"], sigma_s=vals[f"sigma_s_{side}"],
            Rf=vals[f"Rf_{side}"], Rs=vals[f"Rs_{side}"], a_s=vals[f"as_{side}"],
            cs_max=vals[f"cs_max_{side}"], eps_e=vals[f"eps_e_{side}"],
            eps_s=vals[f"eps_s_{side}"], ks=vals[f"ks_{side}"],
            ocp=vals[f"ocp_{side}"], jn_mode=vals[f"jn_mode_{side}"],
            varying=varying(side),
        )

    params = CellParameters(
        neg=electrode("neg"), pos=electrode("pos"),
        sep=SeparatorParams(L=vals["L_sep"], A=vals["A_sep"], eps_e=vals["eps_e_sep"]),
        m=vals["m"], As=vals["As"], Rc=vals["Rc"], t_plus0=vals["t_plus0"],
        ce0=vals["ce0"], Cp=vals["Cp"], hc=vals["hc"], p=vals["p"],
        F=vals["F"], R=vals["R"], T_ref=vals["T_ref"],
        alpha_a=vals["alpha_a"], alpha_c=vals["alpha_c"],
        activity=(vals["act_a"], vals["act_b"], vals["act_c"]),
    )
    return _validate(params)


def load_parameters(path):
    """Load a CellParameters from an INI-style parameter file."""
    with open(path, "r", encoding="utf-8") as fh:
        return _build(_parse_ini(fh.read(), str(path)))


PRESETS = ("lfpo", "ncm523", "ncm811")


def load_preset(name):
    """Load one of the built-in cell descriptions (lfpo, ncm523, ncm811)."""
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; choose from {PRESETS}")
    text = (resources.files("cellsim") / "data" / "params" / f"{name}.ini").read_text()
    return _build(_parse_ini(text, f"preset:{name}"))


@dataclass(frozen=True)
class CellRating:
    """Nominal operating region used for stoichiometry-window solving."""

    qc_mah: float         # rated capacity
    v_min: float          # V, lower cut-off
    v_max: float          # V, upper cut-off

    @property
    def i_1c(self):
        # 1C current in amps
        return self.qc_mah * 1e-3


RATINGS = {
    "lfpo": CellRating(qc_mah=1050.0, v_min=2.5, v_max=3.65),
    "ncm523": CellRating(qc_mah=1500.0, v_min=3.0, v_max=4.2),
    "ncm811": CellRating(qc_mah=1500.0, v_min=3.0, v_max=4.3),
}
