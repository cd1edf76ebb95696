"""Command-line front end: ``warpgeo <command> [--config PATH] [--out DIR] [--seed N] [--tol X]``.

Commands: curvature, report, shortcut, expansion, pairing, verify.  The
config is a JSON (or YAML) file with keys ``metric`` (``{family, params}``),
``task``, ``quadrature``, ``out`` and ``seed``; every key is optional.
"""
import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _io
from .errors import WarpGeoError

__all__ = ["ExperimentConfig", "load_config", "main", "COMMANDS"]


@dataclass
class ExperimentConfig:
    metric: dict = field(default_factory=lambda: {"family": "round", "params": {}})
    task: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=dict)
    out: str = "out"
    seed: int = 0

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in ("metric", "task", "quadrature", "out", "seed") if k in d}
        return cls(**known)

    def to_dict(self):
        return asdict(self)


def load_config(path):
    if path is None:
        return ExperimentConfig()
    with open(path) as fh:
        text = fh.read()
    if path.endswith((".yaml", ".yml")):
        import yaml
        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    return ExperimentConfig.from_dict(data)


def _metric(cfg):
    from .metric_core import metric_from_dict
    return metric_from_dict(cfg.metric)


def _spec(cfg):
    from .quadrature_geometry import QuadratureSpec
    return QuadratureSpec(**cfg.quadrature)


def _out(cfg, name):
    return os.path.join(cfg.out, name)


# ---------------------------------------------------------------- commands

def cmd_curvature(cfg, tol):
    """CSV grid of Scalar and Ric_{r theta}; singular points are NaN with mask = 1."""
    from .metric_core import pole_guard, ricci_mixed_rtheta, scalar_curvature

    m = _metric(cfg)
    t = cfg.task
    n_r, n_th = int(t.get("n_r", 64)), int(t.get("n_theta", 64))
    win = t.get("window")
    if win:
        r = np.linspace(win[0], win[1], n_r)
        th = np.linspace(win[2], win[3], n_th)
    elif t.get("r_grid") == "log":
        r = np.geomspace(10.0 * pole_guard(m), m.a * (1.0 - 1e-6), n_r)
        th = -np.pi + 2.0 * np.pi * np.arange(n_th) / n_th
    else:
        r = m.a * (np.arange(n_r) + 0.5) / n_r
        th = -np.pi + 2.0 * np.pi * np.arange(n_th) / n_th
    R, T = np.meshgrid(r, th, indexing="ij")
    R, T = R.ravel(), T.ravel()
    box = m.phi.support_box()
    if box is not None and not win:
        # the global grid is far too coarse for a small warp box; add a window
        h0, h1 = 0.5 * (box[1] - box[0]), 0.5 * (box[3] - box[2])
        c0, c1 = 0.5 * (box[1] + box[0]), 0.5 * (box[3] + box[2])
        n_w = int(t.get("n_window", 400))
        wr, wt = np.meshgrid(np.linspace(c0 - 1.5 * h0, c0 + 1.5 * h0, n_w),
                             np.linspace(c1 - 1.5 * h1, c1 + 1.5 * h1, n_w), indexing="ij")
        R, T = np.concatenate([R, wr.ravel()]), np.concatenate([T, wt.ravel()])
    ok = np.asarray(m.smooth_mask(R, T), dtype=bool)
    S = np.full(R.shape, np.nan)
    Ric = np.full(R.shape, np.nan)
    S[ok] = scalar_curvature(m, (R[ok], T[ok]))
    Ric[ok] = ricci_mixed_rtheta(m, (R[ok], T[ok]))
    rows = [{"r": a, "theta": b, "scalar": c, "ric_rtheta": d, "mask": int(not e)}
            for a, b, c, d, e in zip(R, T, S, Ric, ok)]
    path = _io.write_csv(rows, _out(cfg, "curvature.csv"))
    floor = {"c1alpha": 0.625, "drawstring": 0.0}.get(cfg.metric.get("family"))
    smin = float(np.min(S[ok])) if ok.any() else float("nan")
    summary = {"metric": m.to_dict(), "n_points": int(R.size), "n_masked": int((~ok).sum()),
               "min_scalar": smin, "max_scalar": float(np.max(S[ok])) if ok.any() else None,
               "csv": path}
    status = 0
    if floor is not None:
        summary["scalar_floor"] = floor
        summary["floor_margin"] = smin - floor
        status = 0 if smin - floor >= -tol else 1
    print(_io.write_json(summary, _out(cfg, "curvature_summary.json")), end="")
    return status


def cmd_report(cfg, tol):
    """JSON bundle: volume, base area, base diameter, MinA candidate, cap volumes."""
    from .distance import diameter_upper_bound
    from .quadrature_geometry import (base_area, base_diameter, cap_volume,
                                      min_torus_area_candidates, total_volume)

    m = _metric(cfg)
    spec = _spec(cfg)
    cands = min_torus_area_candidates(m, spec)
    tori = [c for c in cands if c["kind"] == "torus"]
    caps = cfg.task.get("cap_eps", [0.05, 0.1, 0.25])
    out = {
        "metric": m.to_dict(),
        "volume": total_volume(m, spec).value,
        "area": base_area(m, spec).value,
        "diameter": base_diameter(m),
        "diameter_upper_bound": diameter_upper_bound(m),
        "minA_candidate": min(c["area"] for c in tori),
        "xi_slice_area": next(c["area"] for c in cands if c["kind"] == "xi_slice"),
        "area_candidates": cands,
        "cap_volumes": [{"eps": e, "volume": cap_volume(m, e, spec).value} for e in caps],
    }
    print(_io.write_json(out, _out(cfg, "report.json")), end="")
    return 0


def cmd_shortcut(cfg, tol):
    """CSV table of the shortcut pair distances across A."""
    from .distance import shortcut_experiment

    t = cfg.task
    rows = shortcut_experiment(t.get("A_list", [2, 3, 4, 5]), t.get("r_star", 0.02))
    table = [{"A": r["A"], "d_upper": r["d_upper"], "pi": r["d_limit"], "gap": r["gap"],
              "radial_cost": r["radial_cost"], "radial_excess": r["radial_excess"]} for r in rows]
    path = _io.write_csv(table, _out(cfg, "shortcut.csv"))
    d = np.array([r["d_upper"] for r in rows])
    ex = np.array([r["radial_excess"] for r in rows])
    checks = {"below_limit": bool(np.all(d < np.pi)),
              "d_upper_steps_decreasing": bool(np.all(np.diff(np.abs(np.diff(d))) < 0)),
              "radial_excess_decreasing": bool(np.all(np.diff(ex) < 0))}
    print(_io.write_json({"rows": table, "checks": checks, "csv": path},
                         _out(cfg, "shortcut.json")), end="")
    return 0 if checks["below_limit"] else 1


def cmd_expansion(cfg, tol):
    """Wedge (default) or geodesic-ball t^5 coefficient."""
    from .geodesics import ball_expansion, wedge_expansion

    t = dict(cfg.task)
    if t.pop("kind", "wedge") == "ball":
        m = _metric(cfg)
        q = tuple(t.pop("q", (0.5 * np.pi, 0.0, 0.0)))
        out = ball_expansion(m, q, **t)
    else:
        out = wedge_expansion(t.get("alpha", 0.5), t.get("k", 2.0), t.get("rho0"),
                              tuple(t.get("ts", (1.0, 0.5, 0.25))),
                              int(t.get("n_samples", 2**18)), cfg.seed, int(t.get("n_rep", 8)))
    print(_io.write_json(out, _out(cfg, "expansion.json")), end="")
    return 0


def _test_function(d):
    from .distributional import ConstantTest, RadialBump, SeparableBump
    d = dict(d or {"kind": "constant"})
    kind = d.pop("kind", "constant")
    return {"constant": ConstantTest, "radial_bump": RadialBump,
            "separable_bump": SeparableBump}[kind](**d)


def cmd_pairing(cfg, tol):
    """Pairing records per eps, plus a CSV of (eps, interior, boundary)."""
    from .distributional import boundary_decay

    m = _metric(cfg)
    v = _test_function(cfg.task.get("test"))
    eps = cfg.task.get("eps", [0.08, 0.04, 0.02, 0.01])
    rows = boundary_decay(m, v, eps)
    path = _io.write_csv(rows, _out(cfg, "pairing.csv"))
    print(_io.write_json({"metric": m.to_dict(), "test": v.to_dict(), "rows": rows, "csv": path},
                         _out(cfg, "pairing.json")), end="")
    return 0


def cmd_verify(cfg, tol):
    """Oracle suite; exit status 1 if any margin is below -tol, 2 on a rejected pair."""
    from .inequality_oracles import (oscillation_bound, precheck, run_suite,
                                     _pair_checks, merge_reports)
    from .profiles import AdmissiblePair, sample_admissible_pair

    t = cfg.task
    if "pair" in t:
        spec = t["pair"]
        pair = sample_admissible_pair(spec.get("seed", cfg.seed), spec.get("roughness", 0.5))
        scale = float(spec.get("f_scale", 1.0))
        if scale != 1.0:
            pair = AdmissiblePair(pair.w, pair.f.scaled(scale), True, dict(pair.meta))
        precheck(pair)
        reports = merge_reports(_pair_checks(pair, cfg.seed))
    else:
        reports, _ = run_suite(cfg.seed, int(t.get("n_pairs", 200)))
    ok = all(r.worst_margin >= -tol for r in reports)
    out = {"seed": cfg.seed, "tol": tol, "passed": ok,
           "oscillation_bound_eps_half": oscillation_bound(0.5),
           "reports": [r.to_dict() for r in reports]}
    print(_io.write_json(out, _out(cfg, "verify.json")), end="")
    return 0 if ok else 1


COMMANDS = {"curvature": cmd_curvature, "report": cmd_report, "shortcut": cmd_shortcut,
            "expansion": cmd_expansion, "pairing": cmd_pairing, "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="warpgeo", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON or YAML experiment config")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="random seed (overrides the config)")
    p.add_argument("--tol", type=float, default=1e-9, help="margin tolerance")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg.out = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        return COMMANDS[args.command](cfg, args.tol)
    except (WarpGeoError, ValueError, KeyError, OSError) as exc:
        print(f"warpgeo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
