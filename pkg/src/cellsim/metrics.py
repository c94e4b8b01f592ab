"""Accuracy metrics and trajectory comparison.

r2 / rmse / mae score one series against a reference.  compare_trajectories
lines two runs up on a common time axis and scores every exported field at
every collocation position, which is how the reduced engine is graded
against the full-order solver.
"""

import csv

import numpy as np

from .errors import CellSimError


class MetricError(CellSimError):
    """Metric inputs are unusable (length mismatch, constant reference)."""


def _pair(y, y_hat):
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise MetricError(f"series shapes differ: {y.shape} vs {y_hat.shape}")
    if y.size < 2:
        raise MetricError("metrics need at least 2 samples")
    return y, y_hat


def rmse(y, y_hat):
    y, y_hat = _pair(y, y_hat)
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def mae(y, y_hat):
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def r2(y, y_hat):
    """Coefficient of determination of y_hat against reference y."""
    y, y_hat = _pair(y, y_hat)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise MetricError("R^2 is undefined for a constant reference")
    return 1.0 - float(np.sum((y - y_hat) ** 2)) / ss_tot


# fields scored by compare_trajectories: scalars and 8-position blocks
_SCALARS = ("v", "temperature", "soc")
_BLOCKS = ("ce", "css", "cs_bulk", "jn")
_POSITIONS = tuple(
    f"{side}{i}" for side in ("n", "p") for i in range(1, 5))


def compare_trajectories(a, b, fields=None):
    """Score trajectory b against reference a on a's timestamps.

    b's columns are linearly resampled onto the overlapping part of a's
    time axis.  Returns a list of dicts with keys (field, position, R2,
    RMSE, MAE); scalar fields carry position "-".  Raises MetricError when
    the time ranges do not overlap in at least 2 of a's samples.
    """
    if fields is None:
        fields = _SCALARS + _BLOCKS
    t_lo = max(a.t[0], b.t[0])
    t_hi = min(a.t[-1], b.t[-1])
    mask = (a.t >= t_lo) & (a.t <= t_hi)
    if np.count_nonzero(mask) < 2:
        raise MetricError("trajectories do not overlap in time")
    ta = a.t[mask]

    rows = []

    def score(field, position, ya, yb_src_t, yb_src):
        yb = np.interp(ta, yb_src_t, yb_src)
        try:
            r2_val = r2(ya, yb)
        except MetricError:
            r2_val = float("nan")  # constant reference column
        rows.append({
            "field": field, "position": position,
            "R2": r2_val, "RMSE": rmse(ya, yb), "MAE": mae(ya, yb),
        })

    for field in fields:
        if field in _SCALARS:
            score(field, "-", getattr(a, field)[mask], b.t, getattr(b, field))
        elif field in _BLOCKS:
            blk_a = getattr(a, field)
            blk_b = getattr(b, field)
            for j, pos in enumerate(_POSITIONS):
                score(field, pos, blk_a[mask, j], b.t, blk_b[:, j])
        else:
            raise MetricError(f"unknown trajectory field {field!r}")
    return rows


def write_report(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["field", "position", "R2", "RMSE", "MAE"])
        for row in rows:
            writer.writerow([row["field"], row["position"],
                             f"{row['R2']:.6g}", f"{row['RMSE']:.6g}",
                             f"{row['MAE']:.6g}"])


def format_report(rows):
    lines = [f"{'field':<12} {'pos':<4} {'R2':>12} {'RMSE':>12} {'MAE':>12}"]
    for row in rows:
        lines.append(
            f"{row['field']:<12} {row['position']:<4} "
            f"{row['R2']:>12.6g} {row['RMSE']:>12.6g} {row['MAE']:>12.6g}")
    return "\n".join(lines)
