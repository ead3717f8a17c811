"""Deterministic command-line surface over the solver modules.

Every command resolves its full parameter set up front, runs with fixed
seeds and iteration orders, writes its artifacts under --out, and stamps a
manifest recording exactly what was run.  Replaying a manifest reproduces
every artifact byte for byte; the only field that may differ is the
manifest's own wall_time_s, which comparisons mask.  Floating-point output
goes through repr, which Python guarantees to be shortest round-trip.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np
import scipy

from . import __version__
from .errors import (CQNLSError, IllConditioned, InsufficientData,
                     InvalidArgument, InvalidField, NoConvergence,
                     NoDecomposition, OutOfRange, PreconditionViolated,
                     SingularShift, SpectralFailure)
from .grid import (RadialGrid, complex_field, load_field, make_grid,
                   real_field, save_field)
from .functionals import VirialWeight, functionals, virial_weight
from .shooting import (SolitonProfile, pohozaev_report, rescaled_soliton,
                       solve_ground_state, suggested_r_max, sweep_family)
from .phasediagram import boundary_curves, energy_lower_bound_check, \
    optimal_constant
from .spectral import (QuadraticFormContext, assemble, coercivity_estimate,
                       identity_suite, internal_mode, spectral_default_grid)
from .series import build_series, initial_data, residual_decay
from .evolution import (EvolutionConfig, evolve, load_config,
                        modulation_fit, resample_field,
                        scattering_indicator, scheme_stationary_profile,
                        virial_identity_check)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOCONV = 3
EXIT_IO = 4

_INVALID_KINDS = (InvalidArgument, InvalidField, OutOfRange,
                  PreconditionViolated, InsufficientData)
_NOCONV_KINDS = (NoConvergence, SpectralFailure, SingularShift,
                 IllConditioned, NoDecomposition)


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _manifest(out_dir, command: str, params: dict, inputs: list,
              outputs: list, started: float) -> str:
    payload = {
        "command": command,
        "parameters": params,
        "inputs": sorted(str(p) for p in inputs),
        "outputs": sorted(str(p) for p in outputs),
        "versions": {"artifact": __version__,
                     "numpy": np.__version__,
                     "scipy": scipy.__version__,
                     "python": "%d.%d.%d" % sys.version_info[:3]},
        "wall_time_s": time.time() - started,
    }
    path = os.path.join(out_dir, "manifest.json")
    _write_json(path, payload)
    return path


def _profile_for(omega: float, r_max: float | None, n: int | None):
    if (r_max is None) != (n is None):
        raise InvalidArgument("--r-max and --n must be given together")
    grid = None if r_max is None else make_grid(r_max, n)
    return solve_ground_state(omega, grid)


# ---------------------------------------------------------------- commands

def cmd_groundstate(args) -> int:
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    profile = _profile_for(args.omega, args.r_max, args.n)
    ppath = os.path.join(args.out, "profile.txt")
    save_field(profile.field, ppath)
    rep = profile.report
    payload = {
        "omega": profile.omega,
        "beta": profile.beta,
        "p0": profile.p0,
        "grid": {"r_max": profile.grid.r_max, "n": profile.grid.n},
        "mass": rep.mass,
        "energy": rep.energy,
        "virial": rep.virial,
        "grad_sq": rep.h1dot ** 2,
        "pohozaev": pohozaev_report(profile),
    }
    jpath = os.path.join(args.out, "pohozaev.json")
    _write_json(jpath, payload)
    _manifest(args.out, "groundstate",
              {"omega": args.omega, "r_max": args.r_max, "n": args.n},
              [], [ppath, jpath], started)
    worst = max(payload["pohozaev"].values())
    print(f"omega={args.omega!r} beta={profile.beta!r} "
          f"worst_identity={worst!r}")
    return EXIT_OK


def _family_rows(omega):
    """One cold-start sweep row; top-level so worker pools can pickle it."""
    prof = solve_ground_state(omega)
    rep = prof.report
    res = functionals(rescaled_soliton(prof))
    return (omega, rep.mass, rep.energy, prof.beta, rep.h1dot ** 2,
            prof.p0, res.mass, res.energy)


def cmd_phasediagram(args) -> int:
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    if args.count < 3:
        raise InsufficientData(
            f"need at least 3 frequencies to trace the boundary curves, "
            f"got {args.count}")
    omegas = np.linspace(args.omega_min, args.omega_max, args.count)
    if args.workers > 1:
        from multiprocessing import Pool
        from .shooting import FamilyTable
        with Pool(args.workers) as pool:
            rows = pool.map(_family_rows, omegas.tolist())
        cols = [np.array(c) for c in zip(*rows)]
        family = FamilyTable(omegas=cols[0], mass_P=cols[1], energy_P=cols[2],
                             beta=cols[3], h1dot_P=cols[4], p0=cols[5],
                             mass_R=cols[6], energy_R=cols[7])
    else:
        family = sweep_family(omegas)
    curves = boundary_curves(family)
    fpath = os.path.join(args.out, "family.csv")
    cpath = os.path.join(args.out, "curves.csv")
    jpath = os.path.join(args.out, "phasediagram.json")
    family.to_csv(fpath)
    curves.to_csv(cpath)
    payload = {"m0": curves.m0, "m1": curves.m1, "m2": curves.m2,
               "omega_star": curves.omega_star,
               "beta_one_omegas": list(curves.beta_one_omegas),
               "count": args.count,
               "omega_min": args.omega_min, "omega_max": args.omega_max}
    _write_json(jpath, payload)
    _manifest(args.out, "phasediagram",
              {"omega_min": args.omega_min, "omega_max": args.omega_max,
               "count": args.count, "workers": args.workers},
              [], [fpath, cpath, jpath], started)
    print(f"m0={curves.m0!r} m1={curves.m1!r} m2={curves.m2!r}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    grid = spectral_default_grid(args.omega)
    profile = solve_ground_state(args.omega, grid)
    ops = assemble(profile)
    spectral = internal_mode(ops)
    spectral.save(args.out)
    suite = identity_suite(ops, spectral, profile)
    payload = {"omega": args.omega, "lambda1": spectral.lambda1,
               "beta": profile.beta, "identity_suite": suite}
    if args.coercivity:
        ctx = QuadraticFormContext(ops=ops)
        payload["coercivity"] = {
            "Y-perp": coercivity_estimate(ctx, spectral, "Y-perp"),
            "modulation": coercivity_estimate(ctx, spectral, "modulation"),
        }
    if args.unconstrained:
        ctx = QuadraticFormContext(ops=ops)
        payload["unconstrained_min"] = coercivity_estimate(
            ctx, spectral, "unconstrained")
    jpath = os.path.join(args.out, "spectrum.json")
    _write_json(jpath, payload)
    _manifest(args.out, "spectrum",
              {"omega": args.omega, "coercivity": args.coercivity,
               "unconstrained": args.unconstrained},
              [], [jpath] + [os.path.join(args.out, p) for p in
                             ("e1.txt", "e2.txt", "z_mode.txt",
                              "spectral.json")], started)
    print(f"lambda1={spectral.lambda1!r} max_pair_residual="
          f"{max(suite['pair_system_plus'], suite['pair_system_minus'])!r}")
    return EXIT_OK


def cmd_construct(args) -> int:
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    grid = spectral_default_grid(args.omega)
    profile = solve_ground_state(args.omega, grid)
    ops = assemble(profile)
    spectral = internal_mode(ops)
    series = build_series(args.a, args.k, spectral, ops, profile)
    sdir = os.path.join(args.out, "series")
    series.save(sdir)
    t0 = args.t0 if args.t0 is not None else series.t0_recommended
    u0 = initial_data(series, profile, t0)
    upath = os.path.join(args.out, "initial.txt")
    save_field(u0, upath)
    payload = {"omega": args.omega, "a": args.a, "k": args.k, "t0": t0,
               "lambda1": spectral.lambda1}
    if args.a == 0.0:
        payload["residual_fit"] = None
        payload["note"] = "zero amplitude: series vanishes, no decay to fit"
    else:
        lam1 = spectral.lambda1
        t_grid = np.linspace(4.0 / lam1, 12.0 / lam1, 25)
        fit = residual_decay(series, profile, ops, t_grid)
        payload["residual_fit"] = {
            "fitted_slope": fit.fitted_slope,
            "expected_slope": -(args.k + 1) * lam1,
            "window": [float(fit.t_grid[0]), float(fit.t_grid[-1])],
        }
    jpath = os.path.join(args.out, "construct.json")
    _write_json(jpath, payload)
    _manifest(args.out, "construct",
              {"omega": args.omega, "a": args.a, "k": args.k, "t0": t0},
              [], [upath, jpath, os.path.join(sdir, "series.json")], started)
    if payload["residual_fit"] is None:
        print("zero series written")
    else:
        print(f"residual_slope={fit.fitted_slope!r} "
              f"expected={-(args.k + 1) * spectral.lambda1!r}")
    return EXIT_OK


def cmd_evolve(args) -> int:
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = EvolutionConfig(dt=1e-3, t_span=(0.0, 2.0),
                              grid=make_grid(30.0, 1501))
    overrides = {}
    if args.dt is not None:
        overrides["dt"] = args.dt
    span = list(cfg.t_span)
    if args.t_start is not None:
        span[0] = args.t_start
    if args.t_end is not None:
        span[1] = args.t_end
    overrides["t_span"] = tuple(span)
    grid = cfg.grid
    if args.r_max is not None or args.n is not None:
        r_max = args.r_max if args.r_max is not None else grid.r_max
        n = args.n if args.n is not None else grid.n
        grid = make_grid(r_max, n)
    overrides["grid"] = grid
    if args.layer_width is not None:
        overrides["layer_width"] = args.layer_width
    if args.layer_strength is not None:
        overrides["layer_strength"] = args.layer_strength
    if args.record_every is not None:
        overrides["record_every"] = args.record_every
    cfg = EvolutionConfig(dt=overrides.get("dt", cfg.dt),
                          t_span=overrides["t_span"],
                          grid=overrides["grid"],
                          layer_width=overrides.get("layer_width",
                                                    cfg.layer_width),
                          layer_strength=overrides.get("layer_strength",
                                                       cfg.layer_strength),
                          record_every=overrides.get("record_every",
                                                     cfg.record_every))

    profile = solve_ground_state(args.omega)
    inputs = []
    if args.data == "soliton":
        u0 = scheme_stationary_profile(profile, cfg.grid)
        u0 = complex_field(cfg.grid, np.asarray(u0.values, dtype=complex))
    else:
        inputs.append(args.data)
        u0 = load_field(args.data)
        u0 = resample_field(u0, cfg.grid)
        if not np.iscomplexobj(u0.values):
            u0 = complex_field(cfg.grid, np.asarray(u0.values, dtype=complex))
    if args.backward:
        u0 = complex_field(cfg.grid, np.conj(u0.values))

    weight = None
    if args.virial_radius is not None:
        weight = virial_weight(args.virial_radius, cfg.grid)
    traj = evolve(u0, cfg, profile, weight=weight)
    if args.backward:
        conj = tuple(complex_field(cfg.grid, np.conj(s.values))
                     for s in traj.snapshots)
        object.__setattr__(traj, "snapshots", conj)

    tpath = os.path.join(args.out, "trajectory.csv")
    traj.to_csv(tpath)
    sdir = os.path.join(args.out, "snapshots")
    traj.save_snapshots(sdir)
    cfgpath = os.path.join(args.out, "config.txt")
    cfg.save(cfgpath)
    verdict = scattering_indicator(traj)
    verdict["direction"] = "backward" if args.backward else "forward"
    vpath = os.path.join(args.out, "verdict.json")
    _write_json(vpath, verdict)
    _manifest(args.out, "evolve",
              {"data": args.data, "omega": args.omega,
               "config": args.config, "dt": cfg.dt,
               "t_start": cfg.t_span[0], "t_end": cfg.t_span[1],
               "r_max": cfg.grid.r_max, "n": cfg.grid.n,
               "layer_width": cfg.layer_width,
               "layer_strength": cfg.layer_strength,
               "record_every": cfg.record_every,
               "backward": args.backward,
               "virial_radius": args.virial_radius},
              inputs, [tpath, cfgpath, vpath], started)
    print(f"verdict={verdict['verdict']} l4_drop={verdict['l4_drop']!r}")
    return EXIT_OK


# ------------------------------------------------------------------ check

def _check_rows():
    """Condensed identity battery (the full dynamics assay lives in tests)."""
    rows = []

    def add(name, value, bound, ok):
        rows.append({"name": name, "value": float(value),
                     "bound": float(bound), "pass": bool(ok)})

    # soliton identities across the family
    for om in (0.02, 0.06, 0.10, 0.14, 0.18):
        prof = solve_ground_state(om)
        worst = max(pohozaev_report(prof).values())
        add(f"pohozaev_omega_{om}", worst, 1e-6, worst <= 1e-6)
        g2 = prof.report.h1dot ** 2
        vp = abs(prof.report.virial) / g2
        add(f"virial_P_omega_{om}", vp, 1e-6, vp <= 1e-6)
        vr = abs(functionals(rescaled_soliton(prof)).virial) / g2
        add(f"virial_R_omega_{om}", vr, 1e-6, vr <= 1e-6)

    # sharp interpolation constant against the zero-energy endpoint
    family = sweep_family(np.linspace(0.03, 0.10, 8))
    gn = optimal_constant(1.0, family)
    prof_star = solve_ground_state(gn.optimizer_omega)
    q1_from_profile = math.sqrt(prof_star.report.mass)
    rel = abs(gn.q1_l2 - q1_from_profile) / q1_from_profile
    add("gn_endpoint_norm", rel, 1e-4, rel <= 1e-4)
    rng = np.random.default_rng(20260825)
    m2 = gn.m2
    grid30 = make_grid(30.0, 1501)
    worst_bh = math.inf
    for _ in range(20):
        amp = rng.uniform(0.05, 0.4)
        width = rng.uniform(1.0, 4.0)
        f = amp * np.exp(-(grid30.nodes / width) ** 2 / 2.0)
        fld = real_field(grid30, f)
        if functionals(fld).mass >= m2:
            continue
        worst_bh = min(worst_bh, energy_lower_bound_check(fld, m2))
    add("bound_h_residual", worst_bh, -1e-10, worst_bh >= -1e-10)

    # linearization identities at the working frequency
    om = 0.02
    prof = solve_ground_state(om, spectral_default_grid(om))
    ops = assemble(prof)
    spectral = internal_mode(ops)
    suite = identity_suite(ops, spectral, prof)
    sie = max(suite["pair_system_plus"], suite["pair_system_minus"])
    add("sie_residual", sie, 1e-6, sie <= 1e-6)
    add("scaling_mode_pairing", suite["scaling_mode_pairing"], 1e-5,
        suite["scaling_mode_pairing"] <= 1e-5)
    add("profile_pairing", suite["profile_pairing"], 1e-5,
        suite["profile_pairing"] <= 1e-5)
    add("laplacian_e1_pairing", suite["laplacian_e1_pairing"], 1e-4,
        suite["laplacian_e1_pairing"] >= 1e-4)

    # series residual decays one order past the truncation
    series = build_series(1.0, 2, spectral, ops, prof)
    lam1 = spectral.lambda1
    fit = residual_decay(series, prof, ops,
                         np.linspace(4.0 / lam1, 12.0 / lam1, 25))
    relslope = abs(fit.fitted_slope + 3.0 * lam1) / (3.0 * lam1)
    add("series_residual_slope_k2", relslope, 0.05, relslope <= 0.05)

    # integrator: mass conservation and one-step identity on a short run
    run_grid = make_grid(60.0, 3001)
    pd = scheme_stationary_profile(prof, run_grid)
    u0 = complex_field(run_grid, np.asarray(pd.values, dtype=complex))
    cfg = EvolutionConfig(dt=2e-3, t_span=(0.0, 2.0), grid=run_grid,
                          record_every=100)
    traj = evolve(u0, cfg, prof)
    m0 = traj.reports[0].mass
    drift = max(abs(rep.mass - m0) for rep in traj.reports) / m0 / 2.0
    add("mass_drift_per_unit", drift, 1e-10, drift <= 1e-10)
    dev = max(abs(rep.l4 - traj.reports[0].l4) for rep in traj.reports)
    add("l4_lock_2_units", dev, 1e-6, dev <= 1e-6)
    return rows


def cmd_check(args) -> int:
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    rows = _check_rows()
    all_pass = all(r["pass"] for r in rows)
    payload = {"rows": rows, "all_pass": all_pass}
    blob = json.dumps(payload, sort_keys=True, indent=1).encode("ascii")
    digest = hashlib.sha256(blob).hexdigest()
    rpath = os.path.join(args.out, "check_report.json")
    with open(rpath, "wb") as fh:
        fh.write(blob)
        fh.write(b"\n")
    hpath = os.path.join(args.out, "check_report.sha256")
    with open(hpath, "w", encoding="ascii") as fh:
        fh.write(digest + "\n")
    _manifest(args.out, "check", {}, [], [rpath, hpath], started)
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['name']}: "
              f"{r['value']:.3e} (bound {r['bound']:.1e})")
    print(f"check {'passed' if all_pass else 'FAILED'}; sha256 {digest}")
    return EXIT_OK if all_pass else EXIT_NOCONV


# ------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqnls",
        description="cubic-quintic NLS laboratory: solitons, spectra, "
                    "threshold dynamics")
    parser.add_argument("--from-manifest", metavar="FILE",
                        help="re-run the command recorded in FILE")
    sub = parser.add_subparsers(dest="command")

    def outflag(p):
        p.add_argument("--out", default=os.environ.get("CQNLS_OUT", "."),
                       help="output directory (env fallback CQNLS_OUT)")

    p = sub.add_parser("groundstate", help="solve one soliton profile")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    outflag(p)
    p.set_defaults(func=cmd_groundstate)

    p = sub.add_parser("phasediagram", help="sweep the family, trace the "
                                            "boundary curves")
    p.add_argument("--omega-min", type=float, default=0.02)
    p.add_argument("--omega-max", type=float, default=0.18)
    p.add_argument("--count", type=int, default=28)
    p.add_argument("--workers", type=int, default=1,
                   help="row-parallel cold-start sweep when > 1")
    outflag(p)
    p.set_defaults(func=cmd_phasediagram)

    p = sub.add_parser("spectrum", help="internal mode and identity suite")
    p.add_argument("--omega", type=float, default=0.02)
    p.add_argument("--coercivity", action="store_true",
                   help="also compute the constrained coercivity constants")
    p.add_argument("--unconstrained", action="store_true",
                   help="also report the unconstrained minimum (negative "
                        "direction)")
    outflag(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("construct", help="escape-trajectory series and "
                                         "initial data")
    p.add_argument("--omega", type=float, default=0.02)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--t0", type=float, default=None,
                   help="launch time (default: the series recommendation)")
    outflag(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("evolve", help="split-step run with diagnostics")
    p.add_argument("--data", default="soliton",
                   help="'soliton' or a field file path")
    p.add_argument("--omega", type=float, default=0.02)
    p.add_argument("--config", default=None, help="flat key-value file")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-start", type=float, default=None)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--layer-width", type=float, default=None)
    p.add_argument("--layer-strength", type=float, default=None)
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--backward", action="store_true",
                   help="integrate the conjugated data (reaches t < t_start)")
    p.add_argument("--virial-radius", type=float, default=None,
                   help="record the localized virial pair at this radius")
    outflag(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("check", help="condensed identity battery")
    outflag(p)
    p.set_defaults(func=cmd_check)
    return parser


def _replay(manifest_path: str, out_override: str | None) -> int:
    try:
        with open(manifest_path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: manifest is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_INVALID
    command = payload.get("command")
    params = payload.get("parameters", {})
    argv = [command]
    for key, val in sorted(params.items()):
        if val is None or val is False:
            continue
        flag = "--" + key.replace("_", "-")
        if val is True:
            argv.append(flag)
        else:
            argv.extend([flag, repr(val) if isinstance(val, float) else
                         str(val)])
    if out_override:
        argv.extend(["--out", out_override])
    return main(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.from_manifest:
        out = getattr(args, "out", None) if args.command else None
        return _replay(args.from_manifest, out)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except _INVALID_KINDS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _NOCONV_KINDS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
