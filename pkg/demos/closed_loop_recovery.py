#!/usr/bin/env python3
"""State-of-charge recovery from a wrong initial guess.

The full-order solver plays the role of the real cell: it runs an
alternating charge/discharge profile from SOC 0.7 and its voltage trace
becomes the "measurement".  The reduced engine is then started from a
deliberately wrong SOC of 0.2, once open loop and once with the
measurement correction enabled.  The corrected run converges onto the
true trajectory within a few samples.
"""

import numpy as np

from cellsim.corrector import CorrectorConfig
from cellsim.engine import Engine
from cellsim.initialization import solve_window
from cellsim.metrics import r2
from cellsim.ocp import default_curve
from cellsim.p2d import P2DSolver
from cellsim.parameters import RATINGS, load_preset
from cellsim.scenario import Measurements, builtin_scenario

PRESET = "ncm523"
SOC_TRUE = 0.7
SOC_WRONG = 0.2


def main():
    import dataclasses

    params = load_preset(PRESET)
    rating = RATINGS[PRESET]
    scenario = dataclasses.replace(builtin_scenario("acc_cycles"), soc0=SOC_TRUE)

    curves = (default_curve(params.neg.ocp), default_curve(params.pos.ocp))
    window = solve_window(params, curves[0], curves[1], rating)
    truth = P2DSolver(params, curves=curves).run(scenario, window, rating)
    meas = Measurements(t=truth.t, v=truth.v)

    wrong = dataclasses.replace(scenario, soc0=SOC_WRONG)
    open_loop = Engine(params, rating).run(wrong)
    closed = Engine(params, rating,
                    corrector_config=CorrectorConfig(threshold=0.002, tau=0.3)
                    ).run(wrong, measurements=meas)

    n = min(len(truth), len(closed))
    print(f"started from SOC {SOC_WRONG} (true {SOC_TRUE})")
    print(f"open loop:   V R^2 {r2(truth.v[:n], open_loop.v[:n]):9.4f}, "
          f"final SOC {open_loop.soc[-1]:.4f}")
    print(f"closed loop: V R^2 {r2(truth.v[:n], closed.v[:n]):9.4f}, "
          f"final SOC {closed.soc[-1]:.4f} (true {truth.soc[-1]:.4f})")
    err = closed.v[:n] - truth.v[:n]
    print("voltage error first 6 samples [mV]:",
          np.round(1e3 * err[:6], 1))

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    _, ax = plt.subplots()
    ax.plot(truth.t, truth.v, label="reference cell (SOC 0.7)")
    ax.plot(open_loop.t, open_loop.v, ":", label="open loop from 0.2")
    ax.plot(closed.t, closed.v, "--", label="closed loop from 0.2")
    ax.set_xlabel("Time [s]")
    ax.set_ylabel("Terminal voltage [V]")
    ax.legend()
    plt.savefig(__file__.replace(".py", ".png"), dpi=120)
    print("plot saved")


if __name__ == "__main__":
    main()
