"""Step records, trajectories, and their CSV round-trip.

Both the reduced engine and the reference solver emit the same record
schema so the comparison tools can consume either side blind.
"""

from __future__ import annotations

import csv
import dataclasses

import numpy as np

from .errors import ScenarioError

# 8-point block layout shared by the per-step arrays
_SIDES = ("n", "p")
_BLOCKS = ("ce", "css", "cs", "jn")


@dataclasses.dataclass
class StepRecord:
    """Everything observable about one completed step."""

    t: float
    mode: str
    current: float
    v: float
    temperature: float
    soc: float
    ce_neg: np.ndarray
    ce_pos: np.ndarray
    css_neg: np.ndarray
    css_pos: np.ndarray
    cs_bulk_neg: np.ndarray
    cs_bulk_pos: np.ndarray
    jn_neg: np.ndarray
    jn_pos: np.ndarray
    qe_neg: float
    qe_pos: float
    qh: float
    u_ocp_neg: float
    u_ocp_pos: float
    breakdown: object = None
    flags: set = dataclasses.field(default_factory=set)


class Trajectory:
    """Column view over a finished run."""

    def __init__(self, records, name="run", reason="completed"):
        self.name = name
        self.reason = reason
        self.records = list(records)
        n = len(self.records)
        self.t = np.array([r.t for r in self.records])
        self.current = np.array([r.current for r in self.records])
        self.v = np.array([r.v for r in self.records])
        self.temperature = np.array([r.temperature for r in self.records])
        self.soc = np.array([r.soc for r in self.records])
        self.qe_neg = np.array([r.qe_neg for r in self.records])
        self.qe_pos = np.array([r.qe_pos for r in self.records])
        self.qh = np.array([r.qh for r in self.records])
        self.ce = np.zeros((n, 8))
        self.css = np.zeros((n, 8))
        self.cs_bulk = np.zeros((n, 8))
        self.jn = np.zeros((n, 8))
        for i, r in enumerate(self.records):
            self.ce[i] = np.concatenate([r.ce_neg, r.ce_pos])
            self.css[i] = np.concatenate([r.css_neg, r.css_pos])
            self.cs_bulk[i] = np.concatenate([r.cs_bulk_neg, r.cs_bulk_pos])
            self.jn[i] = np.concatenate([r.jn_neg, r.jn_pos])
        self.flags = [frozenset(r.flags) for r in self.records]

    def __len__(self):
        return len(self.records)

    def to_csv(self, path):
        header = ["t_s", "I_A", "V_V", "T_K", "SOC"]
        for block in _BLOCKS:
            for side in _SIDES:
                header += [f"{block}_{side}{i}" for i in range(1, 5)]
        header += ["Qe_neg_mol", "Qe_pos_mol", "Qh_W", "flags"]
        blocks = (self.ce, self.css, self.cs_bulk, self.jn)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(len(self.records)):
                row = [self.t[i], self.current[i], self.v[i],
                       self.temperature[i], self.soc[i]]
                for block in blocks:
                    row.extend(block[i])
                row += [self.qe_neg[i], self.qe_pos[i], self.qh[i]]
                writer.writerow([f"{x:.10g}" for x in row]
                                + ["|".join(sorted(self.flags[i]))])


def read_trajectory_csv(path):
    """Load a trajectory table written by Trajectory.to_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ScenarioError(f"{path}: empty trajectory file") from None
        rows = list(reader)
    if not rows:
        raise ScenarioError(f"{path}: trajectory has no data rows")
    expected = 5 + 32 + 3 + 1
    if len(header) != expected:
        raise ScenarioError(
            f"{path}: expected {expected} trajectory columns, got {len(header)}"
        )
    records = []
    for row in rows:
        vals = [float(x) for x in row[:-1]]
        flags = set(row[-1].split("|")) - {""}
        blocks = {}
        for bi, block in enumerate(_BLOCKS):
            base = 5 + bi * 8
            blocks[block + "_n"] = np.array(vals[base:base + 4])
            blocks[block + "_p"] = np.array(vals[base + 4:base + 8])
        records.append(StepRecord(
            t=vals[0], mode="cc", current=vals[1], v=vals[2],
            temperature=vals[3], soc=vals[4],
            ce_neg=blocks["ce_n"], ce_pos=blocks["ce_p"],
            css_neg=blocks["css_n"], css_pos=blocks["css_p"],
            cs_bulk_neg=blocks["cs_n"], cs_bulk_pos=blocks["cs_p"],
            jn_neg=blocks["jn_n"], jn_pos=blocks["jn_p"],
            qe_neg=vals[37], qe_pos=vals[38], qh=vals[39],
            u_ocp_neg=0.0, u_ocp_pos=0.0, flags=flags,
        ))
    return Trajectory(records, name=path)
