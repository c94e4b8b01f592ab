"""Operating-scenario description and file formats.

A scenario is an ordered list of phases, each galvanostatic (cc), a
voltage hold (cv), a rest, or a sampled current profile.  Currents are
given in amps or as C-rates (resolved against the cell rating at run
time); voltage targets may reference the rating cut-offs by name.
Positive current discharges the cell.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from importlib import resources

import numpy as np

from .errors import ScenarioError

PHASE_KINDS = ("cc", "cv", "rest", "profile")


@dataclasses.dataclass(frozen=True)
class Phase:
    kind: str
    amps: float | None = None  # cc current, A
    c_rate: float | None = None  # cc current as multiple of 1C
    voltage: float | None = None  # cv target, V
    voltage_tag: str | None = None  # 'v_min' / 'v_max' alternative
    duration: float | None = None  # s
    until_voltage: float | None = None  # cc stop threshold, V
    until_tag: str | None = None
    i_cut: float | None = None  # cv stop magnitude, A
    cut_c_rate: float | None = None
    times: np.ndarray | None = None  # profile support, s from phase start
    currents: np.ndarray | None = None


@dataclasses.dataclass(frozen=True)
class Scenario:
    name: str
    phases: tuple
    dt: float = 1.0
    t_amb: float = 298.0
    soc0: float | None = None
    ocv0: float | None = None


def _phase_from_dict(d, base_dir):
    kind = d.get("type")
    if kind not in PHASE_KINDS:
        raise ScenarioError(f"unknown phase type {kind!r}")
    known = {
        "type", "i_a", "c_rate", "voltage", "duration", "until_voltage",
        "i_cut", "cut_c_rate", "csv", "times", "currents",
    }
    extra = set(d) - known
    if extra:
        raise ScenarioError(f"unknown phase keys {sorted(extra)}")

    def volt(value):
        # a cut-off may be spelled 'v_min'/'v_max' or given in volts
        if isinstance(value, str):
            if value not in ("v_min", "v_max"):
                raise ScenarioError(f"bad voltage reference {value!r}")
            return None, value
        return float(value), None

    amps = float(d["i_a"]) if "i_a" in d else None
    c_rate = float(d["c_rate"]) if "c_rate" in d else None
    duration = float(d["duration"]) if "duration" in d else None
    until_v = until_tag = None
    if "until_voltage" in d:
        until_v, until_tag = volt(d["until_voltage"])

    if kind == "cc":
        if (amps is None) == (c_rate is None):
            raise ScenarioError("cc phase needs exactly one of i_a / c_rate")
        if duration is None and until_v is None and until_tag is None:
            raise ScenarioError("cc phase needs a duration or an until_voltage")
        return Phase(kind, amps=amps, c_rate=c_rate, duration=duration,
                     until_voltage=until_v, until_tag=until_tag)

    if kind == "rest":
        if duration is None:
            raise ScenarioError("rest phase needs a duration")
        return Phase(kind, amps=0.0, duration=duration)

    if kind == "cv":
        if "voltage" not in d:
            raise ScenarioError("cv phase needs a voltage")
        v, tag = volt(d["voltage"])
        i_cut = float(d["i_cut"]) if "i_cut" in d else None
        cut_c = float(d["cut_c_rate"]) if "cut_c_rate" in d else None
        if duration is None and i_cut is None and cut_c is None:
            raise ScenarioError("cv phase needs a duration or a current cut")
        return Phase(kind, voltage=v, voltage_tag=tag, duration=duration,
                     i_cut=i_cut, cut_c_rate=cut_c)

    # profile
    if "csv" in d:
        path = os.path.join(base_dir, d["csv"])
        times, currents = load_current_profile(path)
    elif "times" in d and "currents" in d:
        times = np.asarray(d["times"], dtype=float)
        currents = np.asarray(d["currents"], dtype=float)
    else:
        raise ScenarioError("profile phase needs csv or times+currents")
    if times.ndim != 1 or times.shape != currents.shape or times.size == 0:
        raise ScenarioError("profile support malformed")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0.0):
        raise ScenarioError("profile times must start at 0 and increase")
    return Phase(kind, duration=duration if duration is not None else float(times[-1]),
                 times=times, currents=currents)


def parse_scenario(d, base_dir="."):
    known = {"name", "dt", "t_amb", "soc0", "ocv0", "phases"}
    extra = set(d) - known
    if extra:
        raise ScenarioError(f"unknown scenario keys {sorted(extra)}")
    phases = d.get("phases")
    if not phases:
        raise ScenarioError("scenario has no phases")
    dt = float(d.get("dt", 1.0))
    if not 0.0 < dt <= 10.0:
        raise ScenarioError(f"dt {dt} outside (0, 10] s")
    return Scenario(
        name=str(d.get("name", "scenario")),
        phases=tuple(_phase_from_dict(p, base_dir) for p in phases),
        dt=dt,
        t_amb=float(d.get("t_amb", 298.0)),
        soc0=float(d["soc0"]) if "soc0" in d else None,
        ocv0=float(d["ocv0"]) if "ocv0" in d else None,
    )


def load_scenario(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return parse_scenario(d, base_dir=os.path.dirname(os.path.abspath(path)))


BUILTIN_SCENARIOS = (
    "discharge_1c", "discharge_2c", "discharge_4c", "cccv_charge",
    "acc_cycles", "random_current", "discharge_1c_cold", "discharge_1c_hot",
)


def builtin_scenario(name):
    """Load one of the packaged operating scenarios by name."""
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError(
            f"unknown scenario {name!r}; choose from {BUILTIN_SCENARIOS}")
    root = resources.files("cellsim") / "data" / "scenarios"
    d = json.loads((root / f"{name}.json").read_text())
    return parse_scenario(d, base_dir=os.fspath(root))


def load_current_profile(path):
    """Current-vs-time samples from a CSV with columns t_s, I_A."""
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise ScenarioError(f"cannot read profile {path}") from exc
    names = data.dtype.names
    if names is None or "t_s" not in names or "I_A" not in names:
        raise ScenarioError(f"{path}: profile needs t_s and I_A columns")
    t = np.atleast_1d(data["t_s"]).astype(float)
    i = np.atleast_1d(data["I_A"]).astype(float)
    return t, i


def profile_current(phase, t_local):
    """Zero-order-hold lookup of a profile phase's current."""
    idx = int(np.searchsorted(phase.times, t_local + 1e-12, side="right")) - 1
    idx = max(0, min(idx, phase.currents.size - 1))
    return float(phase.currents[idx])


@dataclasses.dataclass(frozen=True)
class Measurements:
    """Measured terminal voltage (and optionally temperature) vs time."""

    t: np.ndarray
    v: np.ndarray
    temperature: np.ndarray | None = None

    def covers(self, t):
        return self.t[0] - 1e-9 <= t <= self.t[-1] + 1e-9

    def voltage_at(self, t):
        return float(np.interp(t, self.t, self.v))

    def temperature_at(self, t):
        if self.temperature is None:
            return None
        return float(np.interp(t, self.t, self.temperature))


def load_measurements(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names or ()
    if "t_s" not in names or "V_measured" not in names:
        raise ScenarioError(f"{path}: needs t_s and V_measured columns")
    t = np.atleast_1d(data["t_s"]).astype(float)
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise ScenarioError(f"{path}: t_s must be increasing with >= 2 rows")
    temp = None
    if "T_measured" in names:
        temp = np.atleast_1d(data["T_measured"]).astype(float)
    return Measurements(t=t, v=np.atleast_1d(data["V_measured"]).astype(float),
                        temperature=temp)


def write_current_profile(path, t, i):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "I_A"])
        for row in zip(t, i):
            writer.writerow([f"{row[0]:.6f}", f"{row[1]:.9g}"])


def random_profile(seed, duration=217.0, i_peak=1.5, block_s=(5, 25)):
    """Seeded piecewise-constant random current, discharge-first.

    Block lengths and levels come from a PRNG, but the cumulative charge
    throughput is kept non-negative at every block boundary so a cell
    started full is never driven past full.  Returns (times, currents)
    with a terminal repeat row at t=duration marking the profile end.
    """
    rng = np.random.default_rng(seed)
    times, currents = [], []
    t = 0.0
    thru = 0.0  # A*s removed from the cell so far
    while t < duration - 1e-9:
        dur = min(float(rng.integers(block_s[0], block_s[1] + 1)), duration - t)
        i = float(rng.uniform(-i_peak, i_peak))
        if not times or thru + i * dur < 0.0:
            i = abs(i)
        times.append(t)
        currents.append(i)
        thru += i * dur
        t += dur
    times.append(duration)
    currents.append(currents[-1])
    return np.asarray(times), np.asarray(currents)


def write_random_profile(path, seed, duration=217.0, i_peak=1.5, block_s=(5, 25)):
    """Generate and save a seeded random profile; the seed goes in a header
    comment so the artifact can be reproduced."""
    t, i = random_profile(seed, duration, i_peak, block_s)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "I_A"])
        fh.write(f"# seed={seed} duration_s={duration} i_peak_a={i_peak}\n")
        for row in zip(t, i):
            writer.writerow([f"{row[0]:.6f}", f"{row[1]:.9g}"])
    return t, i
