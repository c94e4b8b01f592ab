"""Command-line front end.

Four subcommands: `simulate` runs the reduced engine on a scenario, `p2d`
runs the same scenario on the full-order reference solver, `compare` scores
two trajectory CSVs against each other, and `socv` exports the equilibrium
voltage table.  Exit codes: 0 normal completion (cut-offs included), 1 a
model error during simulation, 2 unusable files or flags.
"""

import argparse
import dataclasses
import sys

from .corrector import CorrectorConfig
from .engine import Engine
from .errors import CellSimError, ParameterError, ScenarioError
from .initialization import soc_ocv_curve, solve_window
from .metrics import MetricError, compare_trajectories, format_report, write_report
from .ocp import default_curve
from .p2d import P2DMesh, P2DSolver
from .parameters import PRESETS, RATINGS, CellRating, load_parameters, load_preset
from .scenario import load_measurements, load_scenario
from .trajectory import read_trajectory_csv


class UsageError(Exception):
    pass


def _load_cell(args):
    """(params, rating) from --params (preset name or INI path) and --rating."""
    if args.params in PRESETS:
        params = load_preset(args.params)
        rating = RATINGS[args.params]
    else:
        try:
            params = load_parameters(args.params)
        except OSError as exc:
            raise UsageError(f"cannot read parameter file: {exc}") from exc
        rating = None
    if getattr(args, "rating", None):
        try:
            qc, v_lo, v_hi = (float(x) for x in args.rating.split(":"))
        except ValueError as exc:
            raise UsageError(
                f"--rating wants qc_mah:v_min:v_max, got {args.rating!r}") from exc
        rating = CellRating(qc_mah=qc, v_min=v_lo, v_max=v_hi)
    if rating is None:
        raise UsageError("--rating is required with a parameter file")
    return params, rating


def _force_jn_mode(params, mode):
    return dataclasses.replace(
        params,
        neg=dataclasses.replace(params.neg, jn_mode=mode),
        pos=dataclasses.replace(params.pos, jn_mode=mode),
    )


def _load_scenario(args):
    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        raise UsageError(f"cannot read scenario: {exc}") from exc
    override = {}
    if args.soc0 is not None:
        override = {"soc0": args.soc0, "ocv0": None}
    elif args.ocv0 is not None:
        override = {"soc0": None, "ocv0": args.ocv0}
    return dataclasses.replace(scenario, **override) if override else scenario


def _add_run_flags(sp):
    sp.add_argument("--params", required=True,
                    help=f"preset ({', '.join(PRESETS)}) or INI file")
    sp.add_argument("--rating", help="qc_mah:v_min:v_max (required with a file)")
    sp.add_argument("--scenario", required=True, help="scenario JSON")
    sp.add_argument("--soc0", type=float, help="override initial state of charge")
    sp.add_argument("--ocv0", type=float, help="override initial rest voltage")
    sp.add_argument("--out", required=True, help="trajectory CSV path")


def cmd_simulate(args):
    params, rating = _load_cell(args)
    if args.jn_mode:
        params = _force_jn_mode(params, args.jn_mode)
    scenario = _load_scenario(args)
    measurements = None
    if args.closed_loop:
        if not args.measurements:
            raise UsageError("--closed-loop needs --measurements")
        try:
            measurements = load_measurements(args.measurements)
        except OSError as exc:
            raise UsageError(f"cannot read measurements: {exc}") from exc
    corr = None
    if args.correction_threshold is not None or args.correction_tau is not None:
        corr = CorrectorConfig(
            threshold=args.correction_threshold or CorrectorConfig.threshold,
            tau=args.correction_tau or CorrectorConfig.tau,
        )
    engine = Engine(params, rating, corrector_config=corr, strict=args.strict)
    traj = engine.run(scenario, measurements=measurements)
    traj.to_csv(args.out)
    print(f"{traj.name}: {len(traj)} steps, stop reason {traj.reason}, "
          f"V {traj.v[-1]:.4f}, SOC {traj.soc[-1]:.4f} -> {args.out}")
    return 0


def cmd_p2d(args):
    params, rating = _load_cell(args)
    scenario = _load_scenario(args)
    mesh = None
    if args.mesh:
        try:
            counts = tuple(int(x) for x in args.mesh.split(","))
            if len(counts) != 4:
                raise ValueError("need four counts")
            mesh = P2DMesh(*counts)
        except ValueError as exc:
            raise UsageError(
                f"--mesh wants n_neg,n_sep,n_pos,n_r, got {args.mesh!r}") from exc
    curves = (default_curve(params.neg.ocp), default_curve(params.pos.ocp))
    window = solve_window(params, curves[0], curves[1], rating)
    solver = P2DSolver(params, mesh=mesh, curves=curves)
    traj = solver.run(scenario, window, rating)
    traj.to_csv(args.out)
    print(f"{traj.name} [p2d]: {len(traj)} steps, stop reason {traj.reason}, "
          f"V {traj.v[-1]:.4f} -> {args.out}")
    return 0


def cmd_compare(args):
    try:
        ref = read_trajectory_csv(args.a)
        test = read_trajectory_csv(args.b)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read trajectory: {exc}") from exc
    rows = compare_trajectories(ref, test)
    print(format_report(rows))
    if args.out:
        write_report(rows, args.out)
    return 0


def cmd_socv(args):
    params, rating = _load_cell(args)
    curves = (default_curve(params.neg.ocp), default_curve(params.pos.ocp))
    window = solve_window(params, curves[0], curves[1], rating)
    table = soc_ocv_curve(window, curves[0], curves[1], n_points=args.points)
    with open(args.out, "w") as fh:
        fh.write("soc,ocv_V\n")
        for s, v in zip(table.soc, table.ocv):
            fh.write(f"{s:.6f},{v:.6f}\n")
    print(f"SOC-OCV table ({args.points} points, "
          f"{table.ocv[0]:.4f} V .. {table.ocv[-1]:.4f} V) -> {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cellsim", description="Reduced-order lithium-ion cell simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run the reduced engine")
    _add_run_flags(sp)
    sp.add_argument("--closed-loop", action="store_true",
                    help="apply measurement correction while running")
    sp.add_argument("--measurements",
                    help="measurement CSV (t_s,V_measured[,T_measured])")
    sp.add_argument("--jn-mode", choices=("uniform", "analytic"),
                    help="force the reaction distribution mode on both electrodes")
    sp.add_argument("--correction-threshold", type=float,
                    help="closed-loop voltage-error threshold, V")
    sp.add_argument("--correction-tau", type=float,
                    help="closed-loop relaxation time constant, s")
    sp.add_argument("--strict", action="store_true",
                    help="raise on degenerate model states instead of recovering")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("p2d", help="run the full-order reference solver")
    _add_run_flags(sp)
    sp.add_argument("--mesh", help="n_neg,n_sep,n_pos,n_r (default 51,11,51,18)")
    sp.set_defaults(func=cmd_p2d)

    sp = sub.add_parser("compare", help="score one trajectory CSV against another")
    sp.add_argument("--a", required=True, help="reference trajectory CSV")
    sp.add_argument("--b", required=True, help="trajectory CSV under test")
    sp.add_argument("--out", help="write the report CSV here")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("socv", help="export the equilibrium voltage table")
    sp.add_argument("--params", required=True,
                    help=f"preset ({', '.join(PRESETS)}) or INI file")
    sp.add_argument("--rating", help="qc_mah:v_min:v_max (required with a file)")
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--out", required=True, help="CSV path")
    sp.set_defaults(func=cmd_socv)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, ScenarioError, MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CellSimError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
