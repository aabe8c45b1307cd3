"""Command line front end.

    jinxin <profile|contact|riemann|simulate|check|schema> [--config FILE] [--set key=value ...]

Every run writes config.json, manifest.json, report.json and CSV tables into
its output directory.  Exit codes: 0 success, 1 failed check, 2 usage or
configuration error, 3 numerical blow-up.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, load_config, schema
from .diagnostics.decay import contact_decay, profile_properties
from .diagnostics.energy import energy_report
from .diagnostics.heat import heat_identities
from .diagnostics.weights import Weights
from .diagnostics.zones import zone_decay_check, zone_partition
from .errors import JinXinError, UsageError
from .experiment import make_fan, prepare_simulation, require_subcharacteristic
from .flux import check_subcharacteristic
from .solver import run
from .waves.ansatz import build_ansatz, check_envelope, fit_envelope
from .waves.contact import contact_wave
from .waves.fan import SHOCK
from .waves.profile import shock_profile

log = logging.getLogger("jinxin")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------
def _outdir(config: ExperimentConfig) -> Path:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _start(command: str, config: ExperimentConfig, tolerances: dict) -> Path:
    out = _outdir(config)
    (out / "error.json").unlink(missing_ok=True)
    io.write_json(out / "config.json", config.model_dump(mode="json"))
    io.write_json(out / "manifest.json", io.manifest(command, config, tolerances))
    return out


def _profile_grid(profile, points: int = 1000, reach: float = 40.0):
    """Uniform xi grid with xi = 0 exactly, spanning reach / (slowest tail rate)."""
    L = reach / min(*profile.tail_rates, *profile.linear_rates)
    return np.arange(-points, points + 1) * (L / points)


def _shock_fields(config, fan):
    if config.field is not None:
        if config.field > fan.n or fan.types[config.field - 1] != SHOCK:
            raise UsageError(f"field {config.field} is not a shock of this fan")
        return [config.field]
    return list(fan.shocks)


def _sample_span(ansatz) -> float:
    rates = [r for p in ansatz.profiles.values() for r in p.linear_rates]
    widths = [8.0 / r for r in rates] + [8.0 * c.width(0.0) for c in ansatz.contacts.values()]
    return max(widths + [10.0])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_riemann(config: ExperimentConfig):
    tol = {"rankine_hugoniot": 1e-10}
    out = _start("riemann", config, tol)
    model = config.flux_model()
    fan = make_fan(config, model)
    rh = fan.rh_residuals(model)
    shocks = [k - 1 for k in fan.shocks]
    lax = fan.lax_margins(model)
    sub = check_subcharacteristic(model, fan.states, config.a)
    ok = bool(np.all(rh[shocks] < tol["rankine_hugoniot"]) and np.all(lax[shocks] > 0))
    report = {"fan": fan.to_dict(), "rh_residuals": rh, "lax_margins": lax,
              "subcharacteristic": sub.to_dict(), "passed": ok}
    io.write_json(out / "fan.json", fan.to_dict())
    return (0 if ok else 1), report


def cmd_profile(config: ExperimentConfig):
    tol = {"residual": config.check.profile_tol, "endpoint": config.check.profile_tol}
    out = _start("profile", config, tol)
    model = config.flux_model()
    fan = make_fan(config, model)
    # the profile ODE only needs a > |s|; a = |lambda| at an end state is allowed
    sub = require_subcharacteristic(model, fan.states, config.a, strict=False)
    report = {"fan": fan.to_dict(), "subcharacteristic": sub.to_dict(), "profiles": {}}
    ok = True
    for i in _shock_fields(config, fan):
        prof = shock_profile(model, config.a, fan, i, eps=config.eps)
        xi = _profile_grid(prof)
        phi, d1, d2 = prof.derivatives(xi)
        n = model.n
        header = (["xi"] + [f"phi_{k + 1}" for k in range(n)] + [f"dphi_{k + 1}" for k in range(n)]
                  + [f"d2phi_{k + 1}" for k in range(n)])
        io.write_csv(out / f"profile_{i}.csv", header, np.column_stack([xi, phi, d1, d2]))
        props = profile_properties(prof)
        scale = prof.strength
        passed = (props["residual"] < tol["residual"] * scale
                  and max(props["endpoint_errors"]) < tol["endpoint"]
                  and props["monotone"])
        props.update(method=prof.method, speed=prof.speed, nodes=len(prof.xi),
                     subcharacteristic_margin=prof.subcharacteristic_margin, passed=bool(passed))
        report["profiles"][str(i)] = props
        ok = ok and passed
    report["passed"] = ok
    return (0 if ok else 1), report


def cmd_contact(config: ExperimentConfig):
    tol = {"pde_residual": 1e-6, "exponent": config.check.exponent_tol}
    out = _start("contact", config, tol)
    model = config.flux_model()
    fan = make_fan(config, model)
    if fan.p is None:
        raise UsageError("the fan has no single contact field")
    wave = contact_wave(model, config.a, fan, eps=config.eps)
    times = [0.0, 1.0, 10.0, 100.0]
    xs = np.linspace(-50.0, 50.0, 2001)
    residuals = [float(np.max(np.abs(wave.pde_residual(xs, t)))) for t in times]
    io.write_csv(out / "contact.csv", ["x", "t", "rho"] + [f"u_{k + 1}" for k in range(model.n)],
                 wave.to_table(xs, times))
    decay = contact_decay(wave, tol=tol["exponent"])
    ok = max(residuals) < tol["pde_residual"] and decay["passed"]
    report = {"field": wave.field, "speed": wave.speed, "rho_minus": wave.rho_minus,
              "rho_plus": wave.rho_plus, "structural_deviation": wave.structural_deviation,
              "structural_flag": wave.flagged, "pde_residual": dict(zip(map(str, times), residuals)),
              "decay": decay, "passed": bool(ok)}
    return (0 if ok else 1), report


def cmd_simulate(config: ExperimentConfig):
    chk = config.check
    tol = {"factor": chk.factor, "mass_rtol": chk.mass_rtol, "trend_rtol": chk.trend_rtol,
           "domain_widths": chk.domain_widths}
    out = _start("simulate", config, tol)
    model, fan, ansatz, scfg, state0 = prepare_simulation(config)
    traj = run(scfg, state0, ansatz)
    rep = energy_report(traj, ansatz, factor=chk.factor, mass_rtol=chk.mass_rtol,
                        trend_rtol=chk.trend_rtol)
    n = model.n
    header = ["x"] + [f"u_{k + 1}" for k in range(n)] + [f"v_{k + 1}" for k in range(n)]
    for k, snap in enumerate(traj.snapshots):
        io.write_csv(out / f"snapshot_{k:04d}.csv", header, snap.to_table())
    head, rows = rep.table()
    io.write_csv(out / "series.csv", head, rows)
    io.write_json(out / "trajectory.json", traj.metadata())
    report = {"ansatz": ansatz.to_dict(), "diagnostics": rep.to_dict()}
    v = rep.verdict
    print(f"verdict: {'PASS' if rep.passed else 'FAIL'} reduction {v['reduction']:.3g} "
          f"(need {v['factor']:g}), monotone after t0: {v['monotone_after_t0']}")
    return (0 if rep.passed else 1), report


def cmd_check(config: ExperimentConfig):
    chk = config.check
    tol = {"rankine_hugoniot": 1e-10, "profile": chk.profile_tol, "contact_residual": 1e-6,
           "exponent": chk.exponent_tol, "heat_norm": 1e-8, "heat_pde": 1e-6, "lo9": 1e-6,
           "envelope_slack": chk.envelope_slack}
    _start("check", config, tol)
    model = config.flux_model()
    fan = make_fan(config, model)
    require_subcharacteristic(model, fan.states, config.a)
    ansatz = build_ansatz(model, config.a, fan, eps=config.eps)
    results = {}

    shocks = [k - 1 for k in fan.shocks]
    rh, lax = fan.rh_residuals(model), fan.lax_margins(model)
    results["fan"] = {"rh_residuals": rh, "lax_margins": lax,
                      "same_order_constant": fan.same_order_constant,
                      "passed": bool(np.all(rh[shocks] < 1e-10) and np.all(lax[shocks] > 0))}

    for i, prof in ansatz.profiles.items():
        props = profile_properties(prof)
        props["passed"] = bool(props["monotone"] and props["residual"] < chk.profile_tol * prof.strength
                               and max(props["endpoint_errors"]) < chk.profile_tol)
        results[f"profile_{i}"] = props

    c = ansatz.contact
    if c is not None:
        xs = np.linspace(-50.0, 50.0, 2001)
        res = max(float(np.max(np.abs(c.pde_residual(xs, t)))) for t in (0.0, 1.0, 10.0, 100.0))
        decay = contact_decay(c, tol=chk.exponent_tol)
        results["contact"] = {"pde_residual": res, "structural_deviation": c.structural_deviation,
                              "fits": decay["fits"], "passed": bool(res < 1e-6 and decay["passed"])}

    rng = np.random.default_rng(config.seed)
    gammas = [0.25, 1.0 / (4.0 * config.a**2)] + list(np.exp(rng.uniform(np.log(0.01), np.log(10.0),
                                                                         chk.heat_samples)))
    heat = [heat_identities(float(g)) for g in gammas]
    results["heat"] = {"samples": heat, "passed": bool(all(
        max(h["norm_error"]) < 1e-8 and max(h["pde_residual"]) < 1e-6 for h in heat))}

    w = Weights(ansatz)
    lo9 = w.lo9()
    span = _sample_span(ansatz)
    xs = np.linspace(-span, span, 2001)
    C = max(w(xs, t).bound_constant(fan.delta) for t in (0.0, 10.0, 100.0))
    ws = w(xs, 0.0)
    exact = bool((ansatz.p is None or np.all(ws.alpha_c[:, ansatz.p - 1] == 1.0))
                 and all(np.all(w.beta(i, i, xs, 0.0) == 1.0) for i in ansatz.profiles))
    results["weights"] = {"lo9": lo9, "bound_constant": C, "exact_unit_entries": exact,
                          "passed": bool(exact and all(r["relative"] < 1e-6 for r in lo9))}

    if fan.n > 1:
        calib_x = np.linspace(-span, span, 401)
        valid_x = np.linspace(-0.997 * span, 0.997 * span, 382)
        env = fit_envelope(ansatz, calib_x, [0.0, 0.5, 2.0, 8.0, 32.0, 128.0])
        worst = check_envelope(ansatz, env, valid_x, [0.25, 1.0, 4.0, 16.0, 64.0, 256.0],
                               slack=chk.envelope_slack)
        results["envelope"] = {"envelope": env.to_dict(), "worst_ratio": worst,
                               "passed": bool(worst <= 1.0)}
        zones = zone_decay_check(ansatz, np.linspace(-4 * span, 4 * span, 4001),
                                 np.linspace(1.0, 4 * span, 40))
        results["zones"] = {"t0": zone_partition(fan, ansatz.shifts).t0, "waves": zones,
                            "passed": bool(all(z["bounded"] for z in zones.values()))}

    ok = all(r["passed"] for r in results.values())
    results["passed"] = ok
    return (0 if ok else 1), results


COMMANDS = {
    "profile": cmd_profile,
    "contact": cmd_contact,
    "riemann": cmd_riemann,
    "simulate": cmd_simulate,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jinxin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment config (default: built-in Euler fan)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key, dotted path, JSON value")
        p.add_argument("--output", help="output directory (same as --set output=...)")
        p.add_argument("-v", "--verbose", action="store_true")
    s = sub.add_parser("schema", help="print the config JSON schema")
    s.add_argument("--output", help="write the schema to this file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with exit status 2
        return int(exc.code or 0)
    if args.command == "schema":
        text = io.dumps(schema())
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = list(args.overrides)
    if args.output:
        overrides.append(("output", args.output))
    out = None
    try:
        config = load_config(args.config, overrides)
        out = Path(config.output)
        code, report = COMMANDS[args.command](config)
    except JinXinError as exc:
        payload = dict(exc.to_dict(), stage=args.command, exit_code=exc.exit_code)
        sys.stderr.write(io.dumps(payload))
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            io.write_json(out / "error.json", payload)
        return exc.exit_code
    io.write_json(out / "report.json", report)
    print(f"{args.command}: {'ok' if code == 0 else 'FAILED'} ({out})")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
