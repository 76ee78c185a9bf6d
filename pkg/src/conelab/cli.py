"""Scenario runner binding the library into reproducible experiments.

Each subcommand builds one experiment from a JSON config (plus command
line overrides), runs it, and writes machine-readable artifacts into the
output directory: CSV series, a JSON summary, and for the integration run
a plain-text verdict table. Outputs are bit-identical for identical
(config, seed) pairs: no timestamps, sorted JSON keys, and every file
embeds the tool version together with a hash of the effective config.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConelabError
from .examples import (
    ConeSpec,
    make_capped_cone,
    make_cone,
    make_cone_ball_gluing,
    make_glued_schwarzschild,
    make_positive_mass_cone,
    make_zero_area_singularity,
    fit_cone_angle,
    fit_area_exponent,
)
from .geometry import (
    ConformalMetric,
    WarpedMetric,
    scalar_curvature_conformal,
    scalar_curvature_warped,
    sobolev_norms,
    volume,
)
from .grid import RadialGrid, RadialProfile, Region
from .hflow import FlowConfig, monitor_estimates, run_hflow
from .mass import adm_mass, mass_drift, monitor_scalar_decay
from .mollify import MollifierSpec, mollify_conepoint, mollify_variable
from .tensors import Background
from .verify import run_claims
from .yamabe import PeriodicProfile, TorusMetric, lq_bound_check, solve_yamabe

__all__ = ["main", "run_scenario"]


# ---------------------------------------------------------------------------
# artifact plumbing
# ---------------------------------------------------------------------------

def _config_hash(effective: dict) -> str:
    canon = json.dumps(effective, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _write_json(path: Path, payload: dict, stamp: dict) -> None:
    body = dict(payload)
    body["tool_version"] = stamp["tool_version"]
    body["config_sha256"] = stamp["config_sha256"]
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list, rows: list, stamp: dict) -> None:
    """RFC-4180 rows; the stamp travels as two trailing columns."""
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(list(header) + ["tool_version", "config_sha256"])
        extra = [stamp["tool_version"], stamp["config_sha256"]]
        for row in rows:
            writer.writerow([_cell(v) for v in row] + extra)


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


# ---------------------------------------------------------------------------
# metric construction shared by curvature / mass scenarios
# ---------------------------------------------------------------------------

def _build_metric(params: dict):
    kind = params["metric"]
    if kind == "cone":
        return make_cone(ConeSpec(
            amplitude=params["alpha"], exponent=params.get("beta", 1.0),
            num=params["num"],
        ))
    if kind == "capped-cone":
        return make_capped_cone(
            params["alpha"], params["eps"],
            r_max=params.get("r_max", 2.0), num=params["num"],
        )
    if kind == "conepoint":
        return make_positive_mass_cone(params["eps"])
    if kind == "vanishing-sphere":
        return make_zero_area_singularity(params.get("m", 1.0))
    if kind == "glued-flat":
        return make_glued_schwarzschild(params.get("m", 1.0))
    if kind == "flat":
        grid = RadialGrid.uniform(
            params.get("r_min", 1.0), params.get("r_max", 10.0), params["num"]
        )
        return WarpedMetric(grid, np.ones(grid.num), grid.r**2,
                            params.get("dim", 3))
    raise ConelabError(f"unknown metric kind {kind!r}")


def _scalar_profile(g):
    if isinstance(g, ConformalMetric):
        return scalar_curvature_conformal(g).values
    return scalar_curvature_warped(g).values


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def _run_curvature(params: dict, out: Path, stamp: dict, seed: int) -> int:
    g = _build_metric(params)
    S = _scalar_profile(g)
    w = g.to_warped() if isinstance(g, ConformalMetric) else g
    bg = Background(w.grid, w.A, w.B, w.dim, tip=w.tip_regular)
    rows = list(zip(w.grid.r, w.A, w.B, S, bg.K_rad, bg.K_fib))
    _write_csv(out / "curvature_profile.csv",
               ["r", "A", "B", "S", "K_rad", "K_fib"], rows, stamp)
    summary = {
        "dim": w.dim,
        "num": w.grid.num,
        "scalar_min": float(S.min()),
        "scalar_max": float(S.max()),
        "scalar_min_radius": float(w.grid.r[int(np.argmin(S))]),
        "volume": float(volume(w)),
    }
    _write_json(out / "curvature_summary.json", summary, stamp)
    return 0


def _run_example(params: dict, out: Path, stamp: dict, seed: int) -> int:
    name = params["name"]
    report: dict = {"name": name}
    if name == "corner-gluing":
        cm = make_cone_ball_gluing(
            params.get("dim", 3), params["alpha"], params.get("rbar", 1.0),
            num=params.get("num", 512),
            allow_mean_curvature_violation=params["alpha"] > 1.0,
        )
        rows = []
        for piece, g in (("inner", cm.inner), ("outer", cm.outer)):
            S = scalar_curvature_warped(g).values
            rows += [(piece, r, a, b, s)
                     for r, a, b, s in zip(g.grid.r, g.A, g.B, S)]
        _write_csv(out / "example_profile.csv",
                   ["piece", "r", "A", "B", "S"], rows, stamp)
        report.update({
            "corner_radius": float(cm.corner_radius),
            "mean_curvature_inner": float(cm.mean_curvature("inner")),
            "mean_curvature_outer": float(cm.mean_curvature("outer")),
        })
        _write_json(out / "example_report.json", report, stamp)
        return 0

    g = _build_metric({**params, "metric": name,
                       "num": params.get("num", 1024)})
    S = _scalar_profile(g)
    w = g.to_warped() if isinstance(g, ConformalMetric) else g
    rows = list(zip(w.grid.r, w.A, w.B, S))
    _write_csv(out / "example_profile.csv", ["r", "A", "B", "S"], rows, stamp)
    report.update({
        "scalar_min": float(S.min()),
        "scalar_max": float(S.max()),
        "num": w.grid.num,
    })
    if name == "conepoint":
        rep = adm_mass(g)
        report["mass"] = float(rep.extrapolated_mass)
        report["angle_ratio_fit"] = float(fit_cone_angle(g))
        report["angle_ratio_expected"] = 1.0 - 2.0 * params["eps"]
    elif name == "vanishing-sphere":
        rep = adm_mass(g)
        report["mass"] = float(rep.extrapolated_mass)
        report["area_exponent_fit"] = float(
            fit_area_exponent(make_zero_area_singularity(
                params.get("m", 1.0),
                grid=RadialGrid(2.0 * params.get("m", 1.0)
                                + np.geomspace(1e-6, 1e-4, 400)),
            ))
        )
    elif name == "glued-flat":
        report["mass"] = float(adm_mass(g).extrapolated_mass)
    _write_json(out / "example_report.json", report, stamp)
    return 0


def _run_mollify(params: dict, out: Path, stamp: dict, seed: int) -> int:
    grid = RadialGrid.tip_uniform(params.get("r_max", 2.0),
                                  params.get("num", 1024))
    kink = params.get("kink", 0.05)
    f = RadialProfile(grid, 1.0 + np.abs(grid.r - kink))
    flat = WarpedMetric(grid, np.ones(grid.num), grid.r**2, 3,
                        tip_regular=True)
    p = params.get("p", 6.0)
    singular = Region(0.0, params.get("singular_radius", 0.1))
    rows = []
    sweep = []
    for eps in params["eps"]:
        spec = MollifierSpec(eps=eps, singular_region=singular)
        v = mollify_variable(f, spec)
        outside = grid.r >= singular.r_b + 2.0 * eps
        sup_far = float(np.abs(v.values - f.values)[outside].max())
        sup_all = float(np.abs(v.values - f.values).max())
        lp_v, grad_v = sobolev_norms(v, flat, p)
        lp_f, grad_f = sobolev_norms(f, flat, p)
        ratio = (lp_v + grad_v) / (lp_f + grad_f)
        sweep.append({
            "eps": eps,
            "sup_identity_region": sup_far,
            "sup_distance": sup_all,
            "sobolev_ratio": float(ratio),
        })
        rows += [(eps, r, fv, vv)
                 for r, fv, vv in zip(grid.r, f.values, v.values)]
    _write_csv(out / "mollify_profiles.csv",
               ["eps", "r", "f", "mollified"], rows, stamp)
    sups = [s["sup_distance"] for s in sweep]
    _write_json(out / "mollify_summary.json", {
        "p": p,
        "sweep": sweep,
        "sup_distance_decreasing": bool(
            all(a > b for a, b in zip(sups, sups[1:]))),
    }, stamp)
    return 0


def _run_flow(params: dict, out: Path, stamp: dict, seed: int) -> int:
    datum = params.get("datum", "mollified-conepoint")
    if datum == "mollified-conepoint":
        g0 = mollify_conepoint(params.get("eps", 0.2),
                               params.get("moll_eps", 0.1),
                               r_max=params.get("r_max", 2.0),
                               num=params.get("num", 160))
        af = False
    elif datum == "capped-cone":
        g0 = make_capped_cone(params.get("alpha", 0.85),
                              params.get("eps", 0.1),
                              r_max=params.get("r_max", 1.9),
                              num=params.get("num", 160))
        af = False
    elif datum == "conepoint":
        grid = RadialGrid.uniform(params.get("r_min", 0.5),
                                  params.get("r_max", 30.0),
                                  params.get("num", 360))
        g0 = make_positive_mass_cone(params.get("eps", 0.2), grid=grid)
        g0 = g0.to_warped()
        af = True
    else:
        raise ConelabError(f"unknown flow datum {datum!r}")
    cfg = FlowConfig(
        final_time=params.get("final_time", 1e-3),
        cfl=params.get("cfl", 0.1),
        closeness=params.get("closeness", 0.6),
        samples=params.get("samples", 8),
        step_tol=params.get("step_tol", 1e-6),
    )
    trace = run_hflow(g0, g0, cfg)
    rep = monitor_estimates(trace, cfg)
    masses = [""] * len(trace.times)
    drift = None
    if af:
        series = mass_drift(trace)
        masses = [float(m) for m in series.masses]
        drift = float(series.max_relative_drift)
    q = params.get("decay_exponent", 2.0)
    decay = monitor_scalar_decay(trace, q) if af else None
    sup_dq = (list(decay.sup_series) if decay is not None
              else [""] * len(trace.times))
    rows = list(zip(trace.times, trace.j_series, trace.min_scalar,
                    rep.grad_scaled, rep.hess_scaled,
                    trace.closeness_series, masses, sup_dq))
    _write_csv(out / "flow_series.csv",
               ["t", "J", "min_S", "sup_grad_scaled", "sup_hess_scaled",
                "closeness", "mass", "sup_dq_S"], rows, stamp)
    vol0 = float(volume(g0))
    summary = {
        "datum": datum,
        "final_time": cfg.final_time,
        "samples": int(cfg.samples),
        "truncated": trace.truncated,
        "volume_initial": vol0,
        "j_max": float(trace.j_series.max()),
        "j_below_threshold": bool(trace.j_series.max() <= 1e-3 * vol0),
        "min_scalar": float(trace.min_scalar.min()),
        "grad_monitor_sup": float(rep.grad_scaled_sup),
        "hess_monitor_sup": float(rep.hess_scaled_sup),
        "closeness_max": float(rep.closeness_max),
        "gauge_constant": float(rep.gauge_constant),
    }
    if drift is not None:
        summary["mass_drift"] = drift
        summary["mass_drift_below_percent"] = bool(drift < 0.01)
    if decay is not None:
        summary["scalar_decay_bounded"] = bool(decay.bounded)
        summary["scalar_decay_exponent"] = float(q)
    _write_json(out / "flow_summary.json", summary, stamp)
    return 0


def _run_mass(params: dict, out: Path, stamp: dict, seed: int) -> int:
    g = _build_metric(params)
    rep = adm_mass(g, span=params.get("span", 10.0))
    rows = list(zip(rep.radii, rep.integrand))
    _write_csv(out / "mass_integrand.csv", ["r", "windowed_mass"],
               rows, stamp)
    _write_json(out / "mass_report.json", {
        "metric": params["metric"],
        "extrapolated_mass": float(rep.extrapolated_mass),
        "convergence_order": float(rep.convergence_order),
        "fit_quality": float(rep.fit_quality),
        "tau_fit": float(rep.tau_fit),
        "radii_table": [
            {"r": float(r), "windowed_mass": float(m)}
            for r, m in zip(rep.radii[::max(1, len(rep.radii) // 8)],
                            rep.integrand[::max(1, len(rep.radii) // 8)])
        ],
    }, stamp)
    return 0


def _run_yamabe(params: dict, out: Path, stamp: dict, seed: int) -> int:
    num = params.get("num", 256)
    period = params.get("period", 2.0)
    x = np.arange(num) * (period / num)
    amp_a = params.get("amplitude_a", 0.3)
    amp_b = params.get("amplitude_b", 0.2)
    A = PeriodicProfile(period, 1.0 + amp_a * np.sin(2.0 * np.pi * x / period))
    B = PeriodicProfile(period, 1.0 + amp_b * np.cos(np.pi * x / period) ** 2)
    g = TorusMetric(A, B, params.get("dim", 3))
    sol = solve_yamabe(g, tol=params.get("tol", 1e-8))
    rows = [(k, v) for k, v in enumerate(sol.functional_history)]
    _write_csv(out / "yamabe_history.csv", ["iteration", "functional"],
               rows, stamp)
    q = params.get("q", 2.0 * g.critical_exponent())
    _write_json(out / "yamabe_summary.json", {
        "dim": g.dim,
        "num": num,
        "lambda": float(sol.lam),
        "u_spread": float(sol.u.values.max() - sol.u.values.min()),
        "normalization_residual": float(sol.normalization_residual),
        "el_residual": float(sol.el_residual),
        "lq_bound": float(lq_bound_check(sol, g, q)),
        "lq_exponent": float(q),
    }, stamp)
    return 0


def _run_verify_all(params: dict, out: Path, stamp: dict, seed: int,
                    threads: int = 1) -> int:
    if threads > 1:
        # Claims are pure functions of the seed; execution order cannot
        # change results, so the summary stays bit-identical.
        from .verify import CLAIMS

        with ThreadPoolExecutor(max_workers=threads) as pool:
            verdicts = list(pool.map(lambda fn: fn(seed), CLAIMS))
    else:
        verdicts = run_claims(seed)
    counts = {"pass": 0, "fail": 0, "measured": 0}
    for v in verdicts:
        counts[v.status] += 1
    _write_json(out / "verify_summary.json", {
        "seed": seed,
        "counts": counts,
        "claims": [
            {"name": v.name, "status": v.status,
             "measured": v.measured, "detail": v.detail}
            for v in verdicts
        ],
    }, stamp)
    width = max(len(v.name) for v in verdicts)
    lines = [f"{v.name:<{width}}  {v.status:<8}  {v.measured}"
             for v in verdicts]
    table = "\n".join(lines) + "\n"
    (out / "verify_verdicts.txt").write_text(table)
    sys.stdout.write(table)
    sys.stdout.write(
        f"{counts['pass']} pass, {counts['fail']} fail, "
        f"{counts['measured']} measured\n"
    )
    return 0 if counts["fail"] == 0 else 1


_SCENARIOS = {
    "curvature": _run_curvature,
    "example": _run_example,
    "mollify": _run_mollify,
    "flow": _run_flow,
    "mass": _run_mass,
    "yamabe": _run_yamabe,
    "verify-all": _run_verify_all,
}

_DEFAULTS: dict = {
    "curvature": {"metric": "cone", "alpha": 0.5, "num": 512},
    "example": {"name": "conepoint", "eps": 0.2, "alpha": 0.5},
    "mollify": {"eps": [0.1, 0.05, 0.025], "p": 6.0},
    "flow": {"datum": "mollified-conepoint", "eps": 0.2, "moll_eps": 0.1,
             "num": 160},
    "mass": {"metric": "conepoint", "eps": 0.2},
    "yamabe": {"num": 256},
    "verify-all": {},
}


def run_scenario(name: str, params: dict, out: Path, seed: int,
                 threads: int = 1) -> int:
    """Run one scenario and write its artifacts; returns the exit status."""
    out.mkdir(parents=True, exist_ok=True)
    effective = {"scenario": name, "params": params, "seed": seed}
    stamp = {"tool_version": __version__,
             "config_sha256": _config_hash(effective)}
    runner = _SCENARIOS[name]
    if name == "verify-all":
        return runner(params, out, stamp, seed, threads=threads)
    return runner(params, out, stamp, seed)


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _parse_override(text: str):
    key, _, raw = text.partition("=")
    if not _ or not key:
        raise argparse.ArgumentTypeError(
            f"override must look like key=value, got {text!r}")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conelab",
        description="Radial curvature laboratory: reproducible scenario "
                    "runs with CSV/JSON artifacts.",
    )
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in _SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", type=Path, default=None,
                       help="JSON file with scenario parameters")
        p.add_argument("--out", type=Path, default=Path("conelab-out"),
                       help="output directory for artifacts")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized suites")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent sweep points")
        p.add_argument("--set", dest="overrides", metavar="KEY=VALUE",
                       type=_parse_override, action="append", default=[],
                       help="override one scenario parameter "
                            "(value parsed as JSON when possible)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = dict(_DEFAULTS[args.scenario])
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.exit(2, f"conelab: cannot read config: {exc}\n")
        if not isinstance(loaded, dict):
            parser.exit(2, "conelab: config must be a JSON object\n")
        params.update(loaded)
    for key, value in args.overrides:
        params[key] = value
    try:
        return run_scenario(args.scenario, params, args.out, args.seed,
                            threads=args.threads)
    except ConelabError as exc:
        sys.stderr.write(f"conelab: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
