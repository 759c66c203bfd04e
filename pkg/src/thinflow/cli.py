"""Command-line front end: config parsing, orchestration, file emission.

Subcommands
    map check       conformal-geometry invariant suite, JSON verdict
    field sample    velocity samples of one assembled field, CSV
    field verify    field-level invariant suite, JSON verdict
    simulate        one solver run, checkpoint + summary
    study           the full criterion study, report + CSV tables
    report          reload an emitted report and restate its verdicts

Exit codes: 0 all verdicts pass, 1 verdict failure, 2 usage or config
error, 3 numerical abort.  Outputs carry no timestamps and embed the
configuration hash, so identical configs give identical bytes.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from ._backend import active_backend
from .conformal import (
    ExteriorMap,
    ObstacleFamily,
    check_shrinking_family,
    invariant_report,
    segment_distance,
)
from .errors import (
    BlowupError,
    BranchCutError,
    CflError,
    ConfigError,
    DomainError,
    EndpointError,
    QuadratureError,
    SupportError,
)
from .fields import (
    BumpVorticity,
    CutoffProfile,
    FlowData,
    VorticityBump,
    circle_contour,
    circulation,
    curl_probe,
    divergence_probe,
    exceedance_statistic,
    harmonic_field,
    induced_velocity,
    jump_density,
    limit_velocity,
    obstacle_contour,
    velocity_sampler,
)
from .solver import SolverConfig, envelope_margin, run_simulation, save_checkpoint
from .studies import (
    ConvergenceReport,
    CRITERIA,
    ProbePatch,
    StudyConfig,
    TOLERANCES,
    config_digest,
    config_echo,
    decay_fit,
    jump_oracle_check,
    l2_growth_diagnostic,
    lp_uniform_bound,
    report_emit,
    report_load,
    run_full_study,
)

log = logging.getLogger("thinflow")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

DEFAULT_CONFIG = {
    "curve": {"kind": "segment"},
    "omega0": [
        {"center": [-0.6, 1.0], "radius": 0.35, "amplitude": 5.0},
        {"center": [0.6, 1.0], "radius": 0.35, "amplitude": -5.0},
    ],
    "gamma": 1.0,
    "nu": 0.01,
    "lambda": 4.0,
    "eps": 0.1,
    "eps_list": [0.2, 0.1, 0.05, 0.025],
    "grid": {"n_sigma": 128, "n_theta": 256, "R_max": 100.0},
    "time": {"dt": 0.0, "t_end": 0.5, "snapshot_dt": 0.01},
    "patch": {"bounds": [-2.0, 2.0, -2.0, 2.0], "delta": 0.2, "n": 48},
    "far_patch": {"bounds": [4.0, 6.0, -1.0, 1.0], "delta": 0.2, "n": 24},
    "ladder": [[64, 128], [128, 256], [256, 512]],
}


def _merge(base, override, path=""):
    out = dict(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError("unknown field", field=f"{path}{key}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError("expected an object", field=f"{path}{key}")
            out[key] = _merge(base[key], val, path=f"{path}{key}.")
        else:
            out[key] = val
    return out


def _patch_from(cfgpart, name):
    b = cfgpart["bounds"]
    if not (isinstance(b, (list, tuple)) and len(b) == 4):
        raise ConfigError("bounds must be [x_lo, x_hi, y_lo, y_hi]",
                          field=f"{name}.bounds")
    try:
        return ProbePatch(
            float(b[0]), float(b[1]), float(b[2]), float(b[3]),
            margin=float(cfgpart["delta"]), n=int(cfgpart["n"]),
        )
    except ConfigError as e:
        raise ConfigError(str(e).split(": ", 1)[-1], field=name) from None


def parse_config(text):
    """Validate a JSON config, fill defaults, and build the domain objects.

    Returns a dict with the effective raw config under "echo" and the
    constructed objects under "flow", "profile", "study", plus scalar
    pieces.  Every rejection names the offending field; geometric
    rejections quote the measured distance.
    """
    try:
        user = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}", field="<document>") from None
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object", field="<document>")
    raw = _merge(DEFAULT_CONFIG, user)

    if raw["curve"].get("kind") != "segment":
        raise ConfigError(
            f"unsupported curve kind {raw['curve'].get('kind')!r}; "
            "only 'segment' is available", field="curve.kind")

    eps_list = [float(e) for e in raw["eps_list"]]
    if len(eps_list) < 3 or any(
            b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("must be >= 3 strictly decreasing scales",
                          field="eps_list")
    if min(eps_list) <= 0.0:
        raise ConfigError("scales must be positive", field="eps_list")

    bumps = []
    for k, entry in enumerate(raw["omega0"]):
        try:
            c = entry["center"]
            bump = VorticityBump(
                center=complex(float(c[0]), float(c[1])),
                radius=float(entry["radius"]),
                amplitude=float(entry["amplitude"]),
            )
        except (KeyError, TypeError, ValueError, IndexError):
            raise ConfigError(
                "bump needs center [x, y], radius, amplitude",
                field=f"omega0[{k}]") from None
        bumps.append(bump)
    try:
        vorticity = BumpVorticity(bumps=tuple(bumps), eps_max=max(eps_list))
    except SupportError as e:
        raise ConfigError(str(e), field="omega0") from None

    try:
        profile = CutoffProfile(float(raw["lambda"]))
    except DomainError as e:
        raise ConfigError(str(e), field="lambda") from None

    try:
        flow = FlowData(
            vorticity=vorticity,
            curve_circulation=float(raw["gamma"]),
            viscosity=float(raw["nu"]),
        )
    except DomainError as e:
        raise ConfigError(str(e), field="nu") from None

    grid = raw["grid"]
    n_sigma, n_theta = int(grid["n_sigma"]), int(grid["n_theta"])
    r_max = float(grid["R_max"])
    if n_sigma < 8 or n_theta < 8 or n_theta % 2:
        raise ConfigError("need n_sigma >= 8 and even n_theta >= 8",
                          field="grid")
    if r_max <= 4.0:
        raise ConfigError("outer mapped radius must exceed 4", field="grid.R_max")

    tm = raw["time"]
    if float(tm["t_end"]) <= 0.0 or float(tm["snapshot_dt"]) <= 0.0:
        raise ConfigError("t_end and snapshot_dt must be positive",
                          field="time")
    if float(tm["dt"]) < 0.0:
        raise ConfigError("dt must be >= 0 (0 = automatic)", field="time.dt")

    eps = float(raw["eps"])
    if eps <= 0.0:
        raise ConfigError("must be positive", field="eps")

    ladder = tuple(
        (int(r[0]), int(r[1])) for r in raw["ladder"]
    )
    patch = _patch_from(raw["patch"], "patch")
    far_patch = _patch_from(raw["far_patch"], "far_patch")
    study = StudyConfig(
        flow=flow,
        eps_list=tuple(eps_list),
        ladder=ladder,
        eps_solver=eps,
        t_study=float(tm["t_end"]),
        cutoff_width=float(raw["lambda"]),
        patch=patch,
        far_patch=far_patch,
    )
    return {
        "echo": raw,
        "flow": flow,
        "profile": profile,
        "study": study,
        "eps": eps,
        "grid": (n_sigma, n_theta, r_max),
        "time": (float(tm["dt"]), float(tm["t_end"]), float(tm["snapshot_dt"])),
    }


def _load_config(args):
    if getattr(args, "config", None):
        with open(args.config) as fh:
            text = fh.read()
    else:
        text = "{}"
    cfg = parse_config(text)
    if getattr(args, "eps", None) is not None:
        if args.eps <= 0.0:
            raise ConfigError("must be positive", field="--eps")
        cfg["eps"] = args.eps
        cfg["study"] = _study_with_eps(cfg["study"], args.eps)
    return cfg


def _study_with_eps(study, eps):
    from dataclasses import replace
    return replace(study, eps_solver=eps)


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
        with open(out_path, "w") as fh:
            fh.write(text)
        log.info("wrote %s", out_path)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_map_check(args):
    cfg = _load_config(args)
    inv = invariant_report()
    fam = check_shrinking_family(list(cfg["study"].eps_list))
    fam_dict = fam.to_dict()
    checks = {
        "round_trip": inv["round_trip_rel"] <= 1e-12,
        "boundary_modulus": inv["boundary_modulus_dev"] <= 1e-12,
        "trace_conjugacy": inv["trace_conjugacy_dev"] <= 1e-12,
        "derivative_fd": inv["derivative_vs_fd_rel"] <= 1e-6,
        "holomorphy": inv["holomorphy_residual_rel"] <= 1e-6,
        # the per-point ratios carry the O(1/r^2) approach to the limit;
        # the angle-averaged estimate is what pins the coefficient itself
        "farfield_coefficient": abs(inv["farfield_beta_hat"] - 2.0) <= 1e-8
        and inv["farfield_beta_dev"] <= 1e-3,
        "endpoint_exponent": abs(inv["endpoint_exponent"] + 0.5) <= 0.01,
        "family_scale_gap": all(
            abs(r["sup_rel_map_dev"] - r["epsilon"] / (1.0 + r["epsilon"]))
            <= 1e-12 for r in fam_dict["rows"]
        ),
        "family_monotone": fam_dict["monotone_rel_map"]
        and fam_dict["monotone_l3"],
    }
    verdict = "pass" if all(checks.values()) else "fail"
    _emit({"invariants": inv, "family": fam_dict, "checks": checks,
           "verdict": verdict}, args.out)
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


def _grid_points(text):
    try:
        x0, x1, y0, y1, n = text.split(":")
        x0, x1, y0, y1, n = float(x0), float(x1), float(y0), float(y1), int(n)
    except ValueError:
        raise ConfigError(
            "expected x0:x1:y0:y1:n", field="--points") from None
    if n < 2 or x1 <= x0 or y1 <= y0:
        raise ConfigError("degenerate sample grid", field="--points")
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return (X + 1j * Y).ravel()


def cmd_field_sample(args):
    cfg = _load_config(args)
    flow, profile = cfg["flow"], cfg["profile"]
    pts = _grid_points(args.points)
    eps = 0.0 if args.field == "limit" else cfg["eps"]
    fam = ObstacleFamily(ExteriorMap.segment(), eps)
    vals = np.full(pts.shape, complex(np.nan, np.nan))
    on_slit = segment_distance(pts) == 0.0
    inside = np.zeros(pts.shape, dtype=bool)
    if eps > 0.0:
        with np.errstate(invalid="ignore", divide="ignore"):
            inside = np.abs(fam.map(pts, check=False)) <= 1.0
        inside |= on_slit            # the closed slit sits inside every
        vals[inside] = 0.0           # thick obstacle: zero-extension
    good = ~on_slit & ~inside
    if args.field == "limit":
        vals[good] = limit_velocity(flow, pts[good])
    else:
        sampler = velocity_sampler(flow, fam, kind=args.field,
                                   profile=profile)
        vals[good] = sampler(pts[good])
    lines = ["x1,x2,u1,u2"]
    for z, u in zip(pts, vals):
        lines.append(f"{float(z.real)!r},{float(z.imag)!r},"
                     f"{float(u.real)!r},{float(u.imag)!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def cmd_field_verify(args):
    cfg = _load_config(args)
    flow = cfg["flow"]
    study = cfg["study"]
    alpha = flow.total_circulation
    base = ExteriorMap.segment()
    out = {"config_hash": config_digest(study)}
    checks = {}

    rows = []
    for eps in study.eps_list[:3]:
        fam = ObstacleFamily(base, eps)
        val = circulation(lambda z, f=fam: harmonic_field(f, z),
                          obstacle_contour(fam))
        rows.append({"eps": eps, "circulation": val, "error": abs(val - 1.0)})
    out["carrier_circulation"] = rows
    checks["carrier_circulation"] = all(
        r["error"] <= TOLERANCES["carrier_circulation"] for r in rows)

    fam = ObstacleFamily(base, cfg["eps"])
    samp = velocity_sampler(flow, fam, kind="initial")
    near = circulation(samp, obstacle_contour(fam))
    farv = circulation(samp, circle_contour(0.0, 50.0))
    out["initial_circulation"] = {
        "eps": cfg["eps"], "boundary": near, "far": farv,
        "boundary_error": abs(near - flow.curve_circulation),
        "far_error": abs(farv - alpha),
    }
    checks["initial_circulation"] = (
        abs(near - flow.curve_circulation) <= TOLERANCES["initial_circulation"]
        and abs(farv - alpha) <= TOLERANCES["initial_circulation"])

    pure = FlowData(BumpVorticity(), curve_circulation=1.0,
                    viscosity=flow.viscosity)
    oracle = jump_oracle_check(pure)
    out["jump_oracle"] = oracle
    checks["jump_oracle"] = oracle["verified"]
    jump_rows = []
    for x in (0.0, 0.5, -0.5):
        got = float(jump_density(pure, (x + 1.0) / 2.0))
        ref = pure.total_circulation / (np.pi * np.sqrt(1.0 - x * x))
        jump_rows.append({"x": x, "value": got, "oracle": ref,
                          "rel_error": abs(got - ref) / abs(ref)})
    out["jump_values"] = jump_rows
    checks["jump_values"] = all(
        r["rel_error"] <= TOLERANCES["jump_rel"] for r in jump_rows)

    fam0 = ObstacleFamily(base, 0.0)
    radii = np.geomspace(50.0, 800.0, 5)
    fit_h, _ = decay_fit(lambda z: harmonic_field(fam0, z), radii)
    fit_k, _ = decay_fit(
        lambda z: induced_velocity(flow, fam0, z, tol=1e-10), radii)
    out["decay"] = {"carrier": fit_h.to_dict(), "induced": fit_k.to_dict()}
    checks["decay"] = (
        abs(fit_h.slope + 1.0) <= TOLERANCES["decay_slope_carrier"]
        and abs(fit_k.slope + 2.0) <= TOLERANCES["decay_slope_induced"])

    probes = []
    init_samp = velocity_sampler(flow, fam, kind="initial")
    bg_samp = velocity_sampler(flow, fam, kind="background",
                               profile=cfg["profile"])
    test_pts = [1.5 + 0.5j, -0.3 - 1.2j, 2.5 - 0.1j, 0.0 + 2.2j]
    for z in test_pts:
        probes.append({
            "point": [z.real, z.imag],
            "initial_divergence": divergence_probe(init_samp, z, h=1e-3),
            "background_divergence": divergence_probe(bg_samp, z, h=1e-3),
        })
    curls = []
    for b in flow.vorticity.bumps:
        got = curl_probe(init_samp, b.center, h=1e-3)
        want = float(flow.vorticity(np.array([b.center]))[0])
        curls.append({"point": [b.center.real, b.center.imag],
                      "curl": got, "vorticity": want,
                      "abs_error": abs(got - want)})
    out["divergence_probes"] = probes
    out["curl_probes"] = curls
    checks["divergence"] = all(
        abs(p["initial_divergence"]) <= 1e-3
        and abs(p["background_divergence"]) <= 1e-3 for p in probes)
    checks["curl"] = all(c["abs_error"] <= 1e-2 * max(1.0, abs(c["vorticity"]))
                         for c in curls)

    lp = lp_uniform_bound(flow, list(study.eps_list[:3]))
    out["lp_uniform"] = lp
    checks["lp_uniform"] = lp["uniformly_bounded"]
    out["l2_growth"] = l2_growth_diagnostic(flow, cfg["eps"])

    sampler0 = lambda z: limit_velocity(pure, z)
    out["tip_exceedance"] = [
        {"threshold": thr, "statistic": exceedance_statistic(sampler0, thr)}
        for thr in (10.0, 20.0, 40.0)
    ]

    verdict = "pass" if all(checks.values()) else "fail"
    out["checks"] = checks
    out["verdict"] = verdict
    _emit(out, args.out)
    if verdict != "pass":
        sys.stderr.write(json.dumps(
            {"failed": [k for k, v in checks.items() if not v]}) + "\n")
        return EXIT_FAIL
    return EXIT_PASS


def cmd_simulate(args):
    cfg = _load_config(args)
    flow = cfg["flow"]
    n_sigma, n_theta, r_max = cfg["grid"]
    dt, t_end, snap = cfg["time"]
    if args.t_end is not None:
        t_end = args.t_end
    scfg = SolverConfig(
        eps=cfg["eps"], n_s=n_sigma, n_t=n_theta, r_max=r_max,
        dt=dt, wall_closure=args.closure,
        cutoff_width=cfg["study"].cutoff_width,
        monitor_every=snap,
    )
    pts = cfg["study"].patch.nodes()
    log.info("simulate eps=%g grid=%dx%d backend=%s",
             cfg["eps"], n_sigma, n_theta, active_backend())
    rec = run_simulation(flow, scfg, t_end, sample_points=pts)
    far_err = float(np.abs(rec.far_circ - rec.flow_alpha).max())
    margin = envelope_margin(rec, flow.viscosity,
                             rate=scfg.envelope_rate,
                             slack=TOLERANCES["envelope_slack"])
    summary = {
        "config_hash": config_digest(cfg["study"]),
        "config": config_echo(cfg["study"]),
        "eps": cfg["eps"],
        "grid": [n_sigma, n_theta],
        "dt": rec.dt,
        "steps": rec.steps,
        "final_time": rec.final_time,
        "beta_start": float(rec.beta[0]),
        "beta_end": float(rec.beta[-1]),
        "beta_defect_max": rec.beta_defect_max,
        "far_circulation_error": far_err,
        "envelope_margin": margin,
        "peak_vorticity": float(rec.peak_vorticity.max()),
        "checks": {
            "beta_defect": rec.beta_defect_max <= TOLERANCES["beta_defect"],
            "far_circulation": far_err <= TOLERANCES["far_circulation"],
            "envelope": margin <= 1.0,
        },
    }
    out_dir = args.out or "simulate_out"
    os.makedirs(out_dir, exist_ok=True)
    save_checkpoint(os.path.join(out_dir, "checkpoint.npz"), rec)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    ok = all(summary["checks"].values())
    sys.stdout.write(json.dumps(
        {"summary": os.path.join(out_dir, "summary.json"),
         "checks": summary["checks"]}, sort_keys=True) + "\n")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_study(args):
    cfg = _load_config(args)
    study = cfg["study"]
    if args.threads:
        from dataclasses import replace
        study = replace(study, threads=args.threads)
    report = ConvergenceReport(
        config_hash=config_digest(study), config=config_echo(study),
        tolerances=dict(TOLERANCES), tables={}, verdicts={},
        labels=dict(CRITERIA), guards={},
    )
    out_dir = args.out or "study_out"
    try:
        run_full_study(study, progress=lambda m: log.info("%s", m),
                       report=report)
    except KeyboardInterrupt:
        report.guards["incomplete"] = True
        for cid in CRITERIA:
            report.verdicts.setdefault(cid, "unreliable")
        path = report_emit(report, out_dir)
        sys.stderr.write(f"interrupted; partial report at {path}\n")
        return 130
    path = report_emit(report, out_dir)
    for cid in sorted(report.verdicts):
        sys.stdout.write(
            f"{cid} {report.labels.get(cid, '?')}: {report.verdicts[cid]}\n")
    failed = [c for c, v in report.verdicts.items() if v != "pass"]
    sys.stdout.write(json.dumps(
        {"report": path, "failed": failed}, sort_keys=True) + "\n")
    return EXIT_PASS if not failed else EXIT_FAIL


def cmd_report(args):
    path = args.path
    if os.path.isdir(path):
        path = os.path.join(path, "report.json")
    report = report_load(path)
    for cid in sorted(report.verdicts):
        sys.stdout.write(
            f"{cid} {report.labels.get(cid, '?')}: {report.verdicts[cid]}\n")
    sys.stdout.write(f"config_hash {report.config_hash}\n")
    if report.guards:
        sys.stdout.write(json.dumps({"guards": report.guards},
                                    sort_keys=True) + "\n")
    return EXIT_PASS if report.all_pass() else EXIT_FAIL


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="thinflow",
        description="viscous flow outside a vanishing obstacle: "
                    "field evaluation, simulation, convergence studies",
    )
    p.add_argument("--verbosity", choices=("quiet", "info", "debug"),
                   default="info")
    p.add_argument("--threads", type=int, default=0,
                   help="study fan-out width (or THINFLOW_THREADS)")
    sub = p.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("map", help="conformal map diagnostics")
    pmsub = pm.add_subparsers(dest="subcommand", required=True)
    pmc = pmsub.add_parser("check", help="run the invariant suite")
    pmc.add_argument("--config")
    pmc.add_argument("--out")
    pmc.set_defaults(handler=cmd_map_check)

    pf = sub.add_parser("field", help="closed-form and quadrature fields")
    pfsub = pf.add_subparsers(dest="subcommand", required=True)
    pfs = pfsub.add_parser("sample", help="CSV velocity samples on a grid")
    pfs.add_argument("--config")
    pfs.add_argument("--eps", type=float)
    pfs.add_argument("--field", default="initial",
                     choices=("initial", "limit", "harmonic", "induced",
                              "background", "shifted"))
    pfs.add_argument("--points", default="-2:2:-2:2:41",
                     help="sample grid x0:x1:y0:y1:n")
    pfs.add_argument("--out")
    pfs.set_defaults(handler=cmd_field_sample)
    pfv = pfsub.add_parser("verify", help="field invariant suite")
    pfv.add_argument("--config")
    pfv.add_argument("--eps", type=float)
    pfv.add_argument("--out")
    pfv.set_defaults(handler=cmd_field_verify)

    ps = sub.add_parser("simulate", help="one solver run")
    ps.add_argument("--config")
    ps.add_argument("--eps", type=float)
    ps.add_argument("--t-end", type=float, dest="t_end")
    ps.add_argument("--closure", default="thom", choices=("thom", "jensen"))
    ps.add_argument("--out")
    ps.set_defaults(handler=cmd_simulate)

    pst = sub.add_parser("study", help="full criterion study")
    pst.add_argument("--config")
    pst.add_argument("--out")
    pst.set_defaults(handler=cmd_study)

    pr = sub.add_parser("report", help="restate an emitted report")
    pr.add_argument("path")
    pr.set_defaults(handler=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = {"quiet": logging.WARNING, "info": logging.INFO,
             "debug": logging.DEBUG}[args.verbosity]
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(message)s")
    if not args.threads:
        env = os.environ.get("THINFLOW_THREADS", "")
        args.threads = int(env) if env.isdigit() else 0
    try:
        return args.handler(args)
    except ConfigError as e:
        sys.stderr.write(json.dumps(
            {"error": str(e), "kind": "config"}) + "\n")
        return EXIT_USAGE
    except (SupportError, DomainError, EndpointError, BranchCutError) as e:
        sys.stderr.write(json.dumps(
            {"error": str(e), "kind": "domain"}) + "\n")
        return EXIT_USAGE
    except (CflError, BlowupError, QuadratureError) as e:
        sys.stderr.write(json.dumps(
            {"error": str(e), "kind": "numerical"}) + "\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
