#!/usr/bin/env python3
"""Constant-current discharges at 1C/2C/4C and the voltage knee.

Runs the reduced engine on one preset at three rates and reports the
capacity delivered to the lower cut-off at each.  Saves an overlay plot
next to this script if matplotlib is importable.
"""

import numpy as np

from cellsim.engine import Engine
from cellsim.parameters import RATINGS, load_preset
from cellsim.scenario import builtin_scenario

PRESET = "ncm523"


def main():
    engine = Engine(load_preset(PRESET), RATINGS[PRESET])
    curves = []
    for name in ("discharge_1c", "discharge_2c", "discharge_4c"):
        traj = engine.run(builtin_scenario(name))
        # discharged charge in mAh, cumulative
        q = np.cumsum(traj.current) * traj.t[0] / 3.6
        curves.append((name, q, traj.v))
        print(f"{name:>14}: {len(traj):5d} steps, {q[-1]:7.1f} mAh to "
              f"{traj.v[-1]:.3f} V (stop: {traj.reason})")

    rated = RATINGS[PRESET].qc_mah
    print(f"rated capacity {rated:.0f} mAh; "
          f"1C delivers {100 * curves[0][1][-1] / rated:.1f}%")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    _, ax = plt.subplots()
    for name, q, v in curves:
        ax.plot(q, v, label=name.replace("discharge_", ""))
    ax.set_xlabel("Discharged capacity [mAh]")
    ax.set_ylabel("Terminal voltage [V]")
    ax.set_title(f"{PRESET} rate capability")
    ax.legend()
    plt.savefig(__file__.replace(".py", ".png"), dpi=120)
    print("plot saved")


if __name__ == "__main__":
    main()
