"""Command-line surface: reproducible CSV/JSON artifacts for every solver.

Subcommands
    table1       reference-grid spread reproduction with per-cell deviations
    fig1         mass sweep of optimal spreads per model / nonlocal scale
    groundstate  full radial solve, profile CSV plus report JSON
    evolve       time evolution, trajectory CSV plus run report
    kernel-check spectral inversion oracle vs the erf closed form

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence.
Physics inputs are SI-facing (kg, eV, inverse meters); grid and step
controls are in internal dimensionless units.  Flags win over the
optional KEY=VALUE config file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import report
from .errors import DomainError, NumericsError, SelfGravError
from .evolution import C_STAB, EvolutionConfig, evolve, free_width_law, gaussian_state
from .groundstate import (GridConfig, SelfPotential, gaussian_functional_gap,
                          solve_ground_state)
from .kernels import GravityKernel, kernel_eval, kernel_for, kernel_from_form_factor
from .units import PhysicalParams, natural_scales
from .variational import minimize_spread, sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICS = 3


def load_reference_spreads() -> dict:
    path = resources.files("selfgrav").joinpath("data/reference_spreads.json")
    return json.loads(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# parser plumbing

def _add_physics_args(sp, require_mass=True):
    sp.add_argument("--mass", type=float, required=require_mass, help="mass in kg")
    sp.add_argument("--model", choices=("newtonian", "idg", "yukawa"), default="newtonian")
    sp.add_argument("--ms-ev", type=float, default=None, help="nonlocal scale in eV (idg)")
    sp.add_argument("--mu-inv-m", type=float, default=None, help="Yukawa range in 1/m")


def _add_common(sp, default_output):
    sp.add_argument("--config", type=str, default=None,
                    help="KEY=VALUE file providing defaults; explicit flags win")
    sp.add_argument("-o", "--output", type=str, default=default_output)
    sp.add_argument("--plot", action="store_true",
                    help="render a figure next to the CSV output")


def build_parser():
    parser = argparse.ArgumentParser(prog="selfgrav", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    sp = sub.add_parser("table1", help="reproduce the reference spread grid")
    _add_common(sp, "table1.csv")
    subparsers["table1"] = sp

    sp = sub.add_parser("fig1", help="mass sweep of optimal spreads")
    _add_common(sp, "fig1.csv")
    sp.add_argument("--mass-min", type=float, default=1e-18)
    sp.add_argument("--mass-max", type=float, default=1e-8)
    sp.add_argument("--points", type=int, default=61)
    sp.add_argument("--ms", type=float, action="append", default=None,
                    help="nonlocal scale in eV; repeatable; omit for Newtonian only")
    subparsers["fig1"] = sp

    sp = sub.add_parser("groundstate", help="full radial ground-state solve")
    _add_common(sp, "groundstate_profile.csv")
    _add_physics_args(sp)
    sp.add_argument("--n", type=int, default=2000, help="interior grid points")
    sp.add_argument("--r-max", type=float, default=None,
                    help="domain size in internal units (default: auto)")
    sp.add_argument("--tol", type=float, default=1e-9, help="residual tolerance")
    sp.add_argument("--max-iter", type=int, default=60000)
    sp.add_argument("--compare-variational", action="store_true",
                    help="include the Gaussian functional gap in the report")
    subparsers["groundstate"] = sp

    sp = sub.add_parser("evolve", help="time evolution of a packet")
    _add_common(sp, "trajectory.csv")
    _add_physics_args(sp)
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--r-max", type=float, default=None,
                    help="domain size in internal units (default: auto)")
    sp.add_argument("--sigma0", type=float, default=None,
                    help="initial Gaussian width, internal units (default: variational)")
    sp.add_argument("--from-groundstate", action="store_true",
                    help="start from a converged ground state instead of a Gaussian")
    sp.add_argument("--dt", type=float, default=None,
                    help="time step (default: 0.5 * C_STAB * dr^2)")
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--stride", type=int, default=10, help="observable sampling stride")
    sp.add_argument("--gravity-off", action="store_true",
                    help="switch the self-interaction off (free control run)")
    subparsers["evolve"] = sp

    sp = sub.add_parser("kernel-check", help="spectral oracle vs erf closed form")
    _add_common(sp, None)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--radii", type=int, default=50)
    sp.add_argument("--r-min-over-range", type=float, default=1e-3,
                    help="smallest radius in units of 1/beta")
    sp.add_argument("--r-max-over-range", type=float, default=1e2,
                    help="largest radius in units of 1/beta")
    sp.add_argument("--tolerance", type=float, default=1e-6)
    subparsers["kernel-check"] = sp

    return parser, subparsers


def _config_entries(subparser, path) -> dict:
    """Parse a KEY=VALUE file into typed values for one subcommand."""
    entries = {}
    actions = {a.dest: a for a in subparser._actions}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
        key, _, value = line.partition("=")
        dest = key.strip().replace("-", "_")
        value = value.strip()
        if dest not in actions:
            raise DomainError(f"{path}:{lineno}: unknown option {key.strip()!r}")
        action = actions[dest]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            entries[dest] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                entries[dest] = action.type(value)
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: bad value for {key.strip()!r}: {exc}")
        else:
            entries[dest] = value
    return entries


def _apply_config(args, subparser, argv, path):
    """Config fills in options the command line left untouched; flags win."""
    entries = _config_entries(subparser, path)
    explicit = set()
    for action in subparser._actions:
        for opt in action.option_strings:
            if any(tok == opt or tok.startswith(opt + "=") for tok in argv):
                explicit.add(action.dest)
    for dest, value in entries.items():
        if dest not in explicit:
            setattr(args, dest, value)


def _params_from_args(args) -> PhysicalParams:
    return PhysicalParams(mass_kg=args.mass, model=args.model,
                          ms_ev=args.ms_ev, yukawa_mu_inv_m=args.mu_inv_m)


def _manifest_params(args) -> dict:
    skip = {"config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ---------------------------------------------------------------------------
# subcommands

def cmd_table1(args) -> int:
    ref = load_reference_spreads()
    masses = ref["masses_kg"]
    templates = [PhysicalParams(mass_kg=masses[0], model="newtonian")]
    templates += [PhysicalParams(mass_kg=masses[0], model="idg", ms_ev=ms)
                  for ms in ref["ms_ev"]]
    rows = sweep(masses, templates)

    csv_rows = []
    failures = 0
    max_dev = 0.0
    for row in rows:
        i = masses.index(row.mass_kg)
        if row.model == "newtonian":
            target = ref["sigma_newton_m"][i]
        else:
            target = ref["sigma_idg_m"][i][ref["ms_ev"].index(row.ms_ev)]
        if row.result is None:
            failures += 1
            csv_rows.append([row.mass_kg, row.model, row.ms_ev, None, target, None,
                             "failed", row.error])
            continue
        dev = abs(row.result.sigma_m - target) / target
        max_dev = max(max_dev, dev)
        csv_rows.append([row.mass_kg, row.model, row.ms_ev, row.result.sigma_m,
                         target, dev, row.result.regime, None])

    out = Path(args.output)
    report.write_csv(out, "selfgrav.table1.v1",
                     ["mass_kg", "model", "ms_ev", "sigma_m", "sigma_ref_m",
                      "rel_dev", "regime", "error"], csv_rows)
    report.write_manifest(report.manifest_path_for(out), "table1", _manifest_params(args),
                          extra={"reference": {"tolerance_rel": ref["tolerance_rel"],
                                               "provenance": ref["provenance"]}})
    if args.plot:
        fig_rows = [{"m_kg": r[0], "model": r[1], "Ms_eV": r[2], "sigma_m": r[3]}
                    for r in csv_rows if r[3] is not None]
        report.save_spread_figure(fig_rows, out.with_suffix(".png"))
    print(f"table1: {len(csv_rows)} cells, {failures} failures, "
          f"max relative deviation from reference = {max_dev:.4f}")
    return EXIT_NUMERICS if failures else EXIT_OK


def cmd_fig1(args) -> int:
    if args.points < 2 or not (0 < args.mass_min < args.mass_max):
        raise DomainError("need mass_max > mass_min > 0 and points >= 2")
    masses = np.geomspace(args.mass_min, args.mass_max, args.points).tolist()
    templates = [PhysicalParams(mass_kg=masses[0], model="newtonian")]
    templates += [PhysicalParams(mass_kg=masses[0], model="idg", ms_ev=ms)
                  for ms in (args.ms or [])]
    rows = sweep(masses, templates)

    csv_rows = []
    failures = 0
    for row in rows:
        if row.result is None:
            failures += 1
            print(f"fig1: solve failed at m={row.mass_kg:g} kg ({row.model}): {row.error}",
                  file=sys.stderr)
            csv_rows.append([row.mass_kg, row.model, row.ms_ev, None, "failed"])
        else:
            csv_rows.append([row.mass_kg, row.model, row.ms_ev,
                             row.result.sigma_m, row.result.regime])

    out = Path(args.output)
    report.write_csv(out, "selfgrav.fig1.v1",
                     ["m_kg", "model", "Ms_eV", "sigma_m", "regime"], csv_rows)
    report.write_manifest(report.manifest_path_for(out), "fig1", _manifest_params(args))
    if args.plot:
        fig_rows = [{"m_kg": r[0], "model": r[1], "Ms_eV": r[2], "sigma_m": r[3]}
                    for r in csv_rows if r[3] is not None]
        report.save_spread_figure(fig_rows, out.with_suffix(".png"))
    print(f"fig1: {len(csv_rows)} rows ({failures} failures) -> {out}")
    return EXIT_NUMERICS if failures else EXIT_OK


def cmd_groundstate(args) -> int:
    p = _params_from_args(args)
    cfg = GridConfig(n=args.n, r_max=args.r_max, residual_tol=args.tol,
                     max_iter=args.max_iter)
    state, solver_report = solve_ground_state(p, cfg)
    scales = natural_scales(p)
    phi = SelfPotential(state.grid(), kernel_for(p, scales)).from_u_squared(state.u**2)

    meta = {
        "schema": "selfgrav.profile.v1",
        "params": _manifest_params(args),
        "l0_m": scales.l0_m,
        "norm": state.norm,
        "chemical_potential": state.chemical_potential,
        "width": solver_report.width,
        "converged": solver_report.converged,
    }
    out = Path(args.output)
    report.write_profile_csv(out, state, phi, meta)

    rep = solver_report.summary_dict()
    rep["params"] = _manifest_params(args)
    rep["l0_m"] = scales.l0_m
    rep["width_m"] = solver_report.width * scales.l0_m
    if args.compare_variational:
        var = minimize_spread(p)
        gap = gaussian_functional_gap(p, cfg, solved=(state, solver_report))
        rep["variational"] = {
            "sigma_natural": var.sigma_natural,
            "sigma_m": var.sigma_m,
            "width_ratio_solver_over_variational": solver_report.width / var.sigma_natural,
            "gaussian_functional_gap": gap.gap,
            "gap_sigma_f": gap.sigma_f,
            "gap_f_gaussian": gap.f_gaussian,
            "gap_f_solver": gap.f_solver,
        }
    report.write_json(out.with_suffix(".report.json"), rep)
    report.write_manifest(report.manifest_path_for(out), "groundstate", _manifest_params(args))
    if args.plot:
        report.save_profile_figure(state, phi, out.with_suffix(".png"))
    print(f"groundstate: converged={solver_report.converged} "
          f"residual={solver_report.residual:.3e} width={solver_report.width:.6g} "
          f"iterations={solver_report.iterations}")
    return EXIT_OK if solver_report.converged else EXIT_NUMERICS


def cmd_evolve(args) -> int:
    p = _params_from_args(args)
    stationarity_reference = None

    if args.from_groundstate:
        cfg_gs = GridConfig(n=args.n, r_max=args.r_max)
        state, gs_report = solve_ground_state(p, cfg_gs)
        if not gs_report.converged:
            raise NumericsError("ground-state solve did not converge",
                                diagnostics={"residual": gs_report.residual})
        stationarity_reference = gs_report.width
    else:
        sigma0 = args.sigma0 if args.sigma0 is not None else minimize_spread(p).sigma_natural
        if args.r_max is not None:
            r_max = args.r_max
        else:
            # hold the whole free-spreading cone plus margin
            dr_guess = 24.0 * sigma0 / (args.n + 1)
            dt_guess = args.dt if args.dt is not None else 0.5 * C_STAB * dr_guess**2
            horizon = free_width_law(sigma0, dt_guess * args.steps)
            r_max = max(24.0 * sigma0, 6.0 * horizon)
        state = gaussian_state(args.n, r_max, sigma0)

    dr = state.dr
    dt = args.dt if args.dt is not None else 0.5 * C_STAB * dr * dr
    cfg = EvolutionConfig(dt=dt, steps=args.steps, observables_stride=args.stride,
                          gravity_on=not args.gravity_off)
    traj = evolve(state, p, cfg)

    out = Path(args.output)
    report.write_trajectory_csv(out, traj)
    rep = {
        "model": p.model,
        "gravity_on": cfg.gravity_on,
        "dt": dt,
        "steps": args.steps,
        "max_norm_drift": traj.max_norm_drift(),
        "max_energy_drift": traj.max_energy_drift(),
        "width_initial": float(traj.widths[0]),
        "width_final": float(traj.widths[-1]),
    }
    reference = None
    if args.gravity_off:
        reference = free_width_law(traj.widths[0], traj.times)
        rep["free_law_max_rel_dev"] = float(np.max(np.abs(traj.widths - reference) / reference))
    if stationarity_reference is not None:
        rep["stationarity_max_rel_dev"] = float(
            np.max(np.abs(traj.widths - traj.widths[0])) / traj.widths[0])
    report.write_json(out.with_suffix(".report.json"), rep)
    report.write_manifest(report.manifest_path_for(out), "evolve", _manifest_params(args),
                          extra={"resolved": {"dt": dt, "dr": dr, "c_stab": C_STAB}})
    if args.plot:
        report.save_trajectory_figure(traj, out.with_suffix(".png"), reference=reference)
    print(f"evolve: steps={args.steps} dt={dt:.4g} norm_drift={rep['max_norm_drift']:.2e} "
          f"F_drift={rep['max_energy_drift']:.2e}")
    return EXIT_OK


def cmd_kernel_check(args) -> int:
    if args.beta <= 0 or args.radii < 2:
        raise DomainError("kernel-check needs beta > 0 and at least 2 radii")
    k = GravityKernel(model="idg", beta=args.beta)
    radii = np.geomspace(args.r_min_over_range / args.beta,
                         args.r_max_over_range / args.beta, args.radii)
    rows = []
    max_dev = 0.0
    for r in radii:
        closed = kernel_eval(k, float(r))
        spectral = kernel_from_form_factor(args.beta, float(r))
        dev = abs(spectral - closed) / abs(closed)
        max_dev = max(max_dev, dev)
        rows.append([float(r), closed, spectral, dev])
    print(f"kernel-check: beta={args.beta:g}, {args.radii} radii, "
          f"max relative deviation = {max_dev:.3e} (tolerance {args.tolerance:g})")
    if args.output:
        out = Path(args.output)
        report.write_csv(out, "selfgrav.kernelcheck.v1",
                         ["r", "closed_form", "spectral", "rel_dev"], rows)
        report.write_manifest(report.manifest_path_for(out), "kernel-check",
                              _manifest_params(args), extra={"max_rel_dev": max_dev})
    return EXIT_OK if max_dev <= args.tolerance else EXIT_NUMERICS


_DISPATCH = {
    "table1": cmd_table1,
    "fig1": cmd_fig1,
    "groundstate": cmd_groundstate,
    "evolve": cmd_evolve,
    "kernel-check": cmd_kernel_check,
}


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(args, subparsers[args.command], argv, args.config)
        return _DISPATCH[args.command](args)
    except NumericsError as exc:
        print(f"error (numerical): {exc}", file=sys.stderr)
        if exc.diagnostics:
            keys = ", ".join(sorted(exc.diagnostics))
            print(f"  diagnostics available: {keys}", file=sys.stderr)
        return EXIT_NUMERICS
    except DomainError as exc:
        print(f"error (validation): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SelfGravError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
