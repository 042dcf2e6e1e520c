"""Command-line interface.

    lagwave <profile|simulate|verify|convergence|bounds> --config PATH [--out DIR]
            [--override-dielectric-bound]

Outputs land in ``--out`` (default ``out/<scenario name>``): ``snapshots/*.csv``,
``profiles/*.csv``, ``ledger.json`` and ``figures/*.png``. The exit status is
0 only when every requested check passes. ``LAGWAVE_THREADS`` caps the
worker threads of the numerical libraries.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

log = logging.getLogger("lagwave")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2


def _cap_threads() -> None:
    n = os.environ.get("LAGWAVE_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lagwave", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "profile": "sample and export the background profiles",
        "simulate": "run the scenario and write snapshots and the energy ledger",
        "verify": "run the acceptance checks for the scenario kind",
        "convergence": "manufactured-solution refinement study",
        "bounds": "print the dielectric bound and stability limits",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path, help="scenario JSON file")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--override-dielectric-bound", action="store_true",
                       help="allow epsilon >= C-bar (recorded in the report)")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load(args):
    from .scenario import scenario_from_dict

    if not args.config.exists():
        raise FileNotFoundError(f"config file not found: {args.config}")
    data = json.loads(args.config.read_text())
    if args.override_dielectric_bound:
        data = {**data, "override_dielectric_bound": True}
    return scenario_from_dict(data)


def _out_dir(args, sc) -> Path:
    out = args.out or Path("out") / sc.name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report_checks(checks) -> bool:
    for c in checks:
        print(c.line())
    return all(c.passed for c in checks)


def cmd_bounds(sc, args) -> int:
    from .solver import Grid1D, NSMSolver, init
    from .workflows import build_background

    bound = sc.dielectric_bound()
    print(f"dielectric bound C-bar ({sc.bound_mode}) = {_bound_text(bound)}")
    print(f"epsilon = {sc.params.epsilon:g} ({'within' if sc.params.epsilon < bound else 'VIOLATES'} bound)")
    grid = Grid1D(sc.grid.x_min, sc.grid.x_max, sc.grid.n)
    s0 = init(grid, build_background(sc), sc.perturbation)
    dt = NSMSolver(grid, sc.params, sc.solver).stable_dt(s0)
    print(f"grid h = {grid.h:.6g}, initial stable dt = {dt:.6g}, steps to t_end ~ {math.ceil(sc.solver.t_end / dt)}")
    return EXIT_OK


def _bound_text(b: float) -> str:
    if math.isinf(b):
        return "unbounded (any positive epsilon)"
    from fractions import Fraction

    frac = Fraction(b).limit_denominator(10000)
    exact = abs(float(frac) - b) <= 1e-15 * b
    return f"{b:.12g}" + (f" = {frac}" if exact and frac.denominator > 1 else "")


def cmd_profile(sc, args) -> int:
    from .solver import Grid1D
    from .workflows import build_background, build_report, write_profiles, write_report

    out = _out_dir(args, sc)
    times = sorted({0.0, *sc.checkpoints, sc.solver.t_end})
    paths = write_profiles(sc, out, times)
    if not args.no_figures:
        from .plotting import plot_profile

        figs = out / "figures"
        figs.mkdir(exist_ok=True)
        bg = build_background(sc)
        x = Grid1D(sc.grid.x_min, sc.grid.x_max, sc.grid.n).x
        for t in (0.0, sc.solver.t_end):
            plot_profile(x, bg.sample(x, t), t, figs / f"profile_t{t:g}.png")
    write_report(build_report(sc, extra={"profiles": [str(p.relative_to(out)) for p in paths]}), out)
    print(f"wrote {len(paths)} profile files to {out / 'profiles'}")
    return EXIT_OK


def _simulate(sc, args, extra_times=()):
    from .workflows import simulate

    if extra_times:
        sc = replace(sc, checkpoints=tuple(sorted(set(sc.checkpoints) | set(extra_times))))

    def progress(st):
        log.info("t = %.6g", st.t)

    return sc, simulate(sc, progress=progress)


def _write_run(res, out: Path, args, checks, fits=None) -> None:
    from .workflows import build_report, write_report, write_snapshots

    write_snapshots(res, out)
    write_report(build_report(res.scenario, res.ledger, checks, fits=fits), out)
    if not args.no_figures:
        from .plotting import plot_ledger, plot_snapshot

        figs = out / "figures"
        figs.mkdir(exist_ok=True)
        plot_ledger(res.ledger, figs / "ledger.png")
        st = res.final
        plot_snapshot(res.grid.x, st, res.background.sample(res.grid.x, st.t), figs / "final_state.png")


def cmd_simulate(sc, args) -> int:
    from .workflows import mass_identity_check

    if sc.kind == "convergence":
        return cmd_convergence(sc, args)
    out = _out_dir(args, sc)
    sc, res = _simulate(sc, args)
    checks = [mass_identity_check([res.ledger], sc.name)]
    _write_run(res, out, args, checks)
    ok = _report_checks(checks)
    print(f"wrote snapshots and ledger to {out}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_convergence(sc, args) -> int:
    from .manufactured import refinement_study
    from .workflows import CheckResult, build_report, write_report

    out = _out_dir(args, sc)
    study = refinement_study(sc.refinement, sc.params, sc.solver.t_end, sc.grid.x_min, sc.grid.x_max, sc.solver)
    worst = min(min(o) for o in study["orders"])
    checks = [CheckResult("6", "manufactured-solution spatial order", worst >= 1.9,
                          {"min order": worst}, ">= 1.9 on all five fields")]
    write_report(build_report(sc, checks=checks, extra={"refinement": study}), out)
    if not args.no_figures:
        from .plotting import plot_convergence

        (out / "figures").mkdir(exist_ok=True)
        plot_convergence(study, out / "figures" / "convergence.png")
    for n, err in zip(study["n"], study["errors"]):
        print(f"n = {n:5d}  errors (v,u,theta,E,b) = " + ", ".join(f"{e:.3e}" for e in err))
    return EXIT_OK if _report_checks(checks) else EXIT_CHECK_FAILED


def cmd_verify(sc, args) -> int:
    from . import acceptance
    from .workflows import CheckResult, mass_identity_check

    if sc.kind == "convergence":
        return cmd_convergence(sc, args)
    out = _out_dir(args, sc)
    bound = sc.dielectric_bound()
    checks = [CheckResult("11", "scenario respects eps < C-bar", sc.params.epsilon < bound,
                          {"epsilon": sc.params.epsilon, "C-bar": bound}, "eps < C-bar")]
    t_end = sc.solver.t_end
    if sc.kind == "maxwell-only":
        coarse, fine = acceptance.maxwell_runs(sc)
        checks += acceptance.criterion_7((coarse, fine))
        checks.append(mass_identity_check([coarse.ledger, fine.ledger], sc.name))
        res = coarse
    else:
        if sc.kind == "contact":
            setup = acceptance.contact_setup_for(sc)
            checks += acceptance.criterion_1(setup)[:2] + acceptance.criterion_2(setup)
        sc, res = _simulate(sc, args, extra_times=(0.1 * t_end, 0.5 * t_end))
        checks.append(mass_identity_check([res.ledger], sc.name))
        if sc.kind == "contact":
            from .workflows import compound_growth_check, sup_ratio_check

            checks += [sup_ratio_check(res.ledger, t_end), compound_growth_check(res.ledger, 0.5 * t_end, t_end)]
        else:
            from .workflows import fan_decrease_check

            checks.append(fan_decrease_check(res.ledger, 0.1 * t_end, t_end))
    _write_run(res, out, args, checks)
    ok = _report_checks(checks)
    print(f"{'all checks passed' if ok else 'some checks FAILED'}; report in {out / 'ledger.json'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {"profile": cmd_profile, "simulate": cmd_simulate, "verify": cmd_verify,
            "convergence": cmd_convergence, "bounds": cmd_bounds}


def main(argv=None) -> int:
    _cap_threads()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    from .scenario import ConfigError

    try:
        sc = _load(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[args.command](sc, args)


if __name__ == "__main__":
    sys.exit(main())
