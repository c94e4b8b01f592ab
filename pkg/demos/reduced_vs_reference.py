#!/usr/bin/env python3
"""Reduced engine against the full-order finite-volume reference.

Same cell, same 1C discharge, both solvers; prints the per-field error
table and (with matplotlib) overlays the voltage traces.  The reference
run takes a few seconds; the reduced run a few tens of milliseconds.
"""

import time

from cellsim.engine import Engine
from cellsim.initialization import solve_window
from cellsim.metrics import compare_trajectories, format_report
from cellsim.ocp import default_curve
from cellsim.p2d import P2DSolver
from cellsim.parameters import RATINGS, load_preset
from cellsim.scenario import builtin_scenario

PRESET = "ncm523"


def main():
    params = load_preset(PRESET)
    rating = RATINGS[PRESET]
    scenario = builtin_scenario("discharge_1c")

    t0 = time.perf_counter()
    reduced = Engine(params, rating).run(scenario)
    t1 = time.perf_counter()
    curves = (default_curve(params.neg.ocp), default_curve(params.pos.ocp))
    window = solve_window(params, curves[0], curves[1], rating)
    reference = P2DSolver(params, curves=curves).run(scenario, window, rating)
    t2 = time.perf_counter()
    print(f"reduced:   {len(reduced)} steps in {t1 - t0:6.2f} s")
    print(f"reference: {len(reference)} steps in {t2 - t1:6.2f} s")

    print(format_report(compare_trajectories(reference, reduced)))

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    _, ax = plt.subplots()
    ax.plot(reference.t, reference.v, label="full-order reference")
    ax.plot(reduced.t, reduced.v, "--", label="reduced engine")
    ax.set_xlabel("Time [s]")
    ax.set_ylabel("Terminal voltage [V]")
    ax.set_title(f"{PRESET} 1C discharge")
    ax.legend()
    plt.savefig(__file__.replace(".py", ".png"), dpi=120)
    print("plot saved")


if __name__ == "__main__":
    main()
