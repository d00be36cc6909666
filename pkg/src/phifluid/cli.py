"""Command-line interface: scene loading, check dispatch, JSON reports.

Commands: curvature, check-system, integrability, identities, energy,
newton, kazdan-warner, oscillate, examples. Reports are deterministic for
a fixed (scene, seed, config) apart from the wall-time field. Exit codes:
0 all selected checks pass, 1 input error, 2 at least one check failed.
"""

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__, catalog, sceneio
from .curvature import schur_residual, trace_identities
from .errors import PhifluidError, SchemaMismatch
from .lorentz import energy_conditions
from .newton import codazzi_and_divergence, kazdan_warner, schouten_field
from .oscillation import (RadialProfile, nonexistence_verdict,
                          profile_from_scene, solve_cauchy, zero_criteria)
from .system import (IDENTITY_IDS, HypothesisUnmet, divergence_identity,
                     integrability_residuals, system_residual)

SCHEMA_VERSION = 1
TOL_TIERS = {"alg": 1e-10, "d1": 1e-7, "d3": 1e-5}


# ---- report plumbing --------------------------------------------------------------


def _digest(obj):
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _check(check_id, residual, tolerance, points=0, extra=None):
    out = {"id": check_id, "points": int(points),
           "residual": float(residual), "tolerance": float(tolerance),
           "passed": bool(float(residual) <= float(tolerance))}
    if extra:
        out.update(extra)
    return out


def make_report(command, scene_digest, seed, checks, started, notes=None):
    return {"schema": SCHEMA_VERSION, "version": __version__,
            "command": command, "scene": scene_digest, "seed": seed,
            "checks": checks,
            "passed": all(c.get("passed", True) for c in checks),
            "notes": notes or [],
            "wall_time": round(time.time() - started, 3)}


def report_diff(report_a, report_b):
    """Field-level diff of two reports; wall time is ignored."""
    if report_a.get("schema") != report_b.get("schema"):
        raise SchemaMismatch(
            f"schema {report_a.get('schema')!r} vs {report_b.get('schema')!r}")
    diff = {"fields": {}, "checks": {}}
    keys = (set(report_a) | set(report_b)) - {"checks", "wall_time"}
    for key in sorted(keys):
        if report_a.get(key) != report_b.get(key):
            diff["fields"][key] = [report_a.get(key), report_b.get(key)]
    ca = {c["id"]: c for c in report_a.get("checks", [])}
    cb = {c["id"]: c for c in report_b.get("checks", [])}
    for cid in sorted(set(ca) | set(cb)):
        a, b = ca.get(cid), cb.get(cid)
        if a == b:
            continue
        entry = {}
        for key in sorted(set(a or {}) | set(b or {})):
            va = a.get(key) if a else None
            vb = b.get(key) if b else None
            if va != vb:
                entry[key] = [va, vb]
        diff["checks"][cid] = entry
    return diff


def _emit(report, args):
    indent = getattr(args, "json_indent", None)
    text = json.dumps(report, sort_keys=True,
                      indent=indent if indent else None)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _sup(arr):
    return float(np.max(np.abs(np.asarray(arr, dtype=float))))


def _load_scene(spec, params=None):
    """Resolve a catalog name or a JSON scene file into (scene, digest)."""
    if spec in catalog.CATALOG:
        scene = catalog.build(spec, **(params or {}))
        return scene, _digest({"catalog": spec, "params": params or {}})
    source = spec
    scene = sceneio.load_scene(source)
    with open(source) as fh:
        return scene, _digest(json.load(fh))


def _points(scene, args):
    rng = np.random.default_rng(args.seed)
    return scene.sample_points(args.points, rng)


def _tol(args, tier):
    if args.tol_tier:
        return TOL_TIERS[args.tol_tier]
    return TOL_TIERS[tier]


# ---- commands ---------------------------------------------------------------------


def cmd_curvature(args):
    scene, digest = _load_scene(args.scene)
    pts = _points(scene, args)
    checks = [_check("schur", _sup(schur_residual(scene, pts)),
                     _tol(args, "d3"), args.points)]
    for cid, res in trace_identities(scene, pts).items():
        checks.append(_check(cid, _sup(res), _tol(args, "d3"), args.points))
    return make_report("curvature", digest, args.seed, checks, args.started)


def cmd_check_system(args):
    scene, digest = _load_scene(args.scene)
    pts = _points(scene, args)
    res = system_residual(scene, pts, which=args.which)
    checks = [_check(f"{args.which}:{key}", norm, _tol(args, "d1"),
                     args.points)
              for key, norm in sorted(res.norms.items())]
    return make_report("check-system", digest, args.seed, checks,
                       args.started)


def cmd_integrability(args):
    scene, digest = _load_scene(args.scene)
    pts = _points(scene, args)
    res = integrability_residuals(scene, pts)
    checks = [_check(key, _sup(val), _tol(args, "d3"), args.points)
              for key, val in sorted(res.items())]
    return make_report("integrability", digest, args.seed, checks,
                       args.started)


def cmd_identities(args):
    scene, digest = _load_scene(args.scene)
    pts = _points(scene, args)
    ids = args.id if args.id else IDENTITY_IDS
    checks, notes = [], []
    for cid in ids:
        try:
            out = divergence_identity(cid, scene, pts)
        except (HypothesisUnmet, PhifluidError) as exc:
            notes.append(f"{cid}: skipped ({type(exc).__name__}: {exc})")
            continue
        checks.append(_check(cid, _sup(out["defect"]), _tol(args, "d3"),
                             args.points))
    return make_report("identities", digest, args.seed, checks,
                       args.started, notes)


def cmd_energy(args):
    scene, digest = _load_scene(args.scene)
    pts = _points(scene, args)
    checks, notes = [], []
    for i, pt in enumerate(pts):
        verdict = energy_conditions(scene, pt, samples=args.samples,
                                    seed=args.seed)
        for cond, rep in verdict.conditions.items():
            if rep.sufficient_holds:
                checks.append(_check(
                    f"{cond}@{i}", -rep.sampled_min, 1e-9, args.samples,
                    {"sufficient": True}))
            elif rep.necessary_violated:
                notes.append(f"{cond}@{i}: necessary condition violated "
                             f"(sampled min {rep.sampled_min:.3e})")
    return make_report("energy", digest, args.seed, checks, args.started,
                       notes)


def cmd_newton(args):
    scene, digest = _load_scene(args.scene)
    pts = _points(scene, args)
    out = codazzi_and_divergence(scene, schouten_field(), args.k, pts)
    checks = [
        _check(f"newton-divergence-k{args.k}", _sup(out["identity_defect"]),
               1e-6, args.points,
               {"codazzi_sup": _sup(out["codazzi"])}),
    ]
    return make_report("newton", digest, args.seed, checks, args.started)


def cmd_kazdan_warner(args):
    scene, digest = _load_scene(args.scene)
    from .newton import codazzi_w_field
    field = codazzi_w_field() if args.mode == "conformal" else None
    out = kazdan_warner(scene, k=args.k, level=args.refine, A_field=field,
                        mode=args.mode, eps=args.eps)
    tol = 1e-6 if args.mode == "kw" else 1e-4
    checks = [_check(f"kazdan-warner-{args.mode}-k{args.k}",
                     abs(out["defect"]), tol,
                     extra={"lhs": out["lhs"], "rhs": out["rhs"],
                            "level": out["level"],
                            "hypotheses": {k: (bool(v) if isinstance(v, bool)
                                               else float(v))
                                           for k, v in
                                           out["hypotheses"].items()}})]
    return make_report("kazdan-warner", digest, args.seed, checks,
                       args.started)


def cmd_oscillate(args):
    if args.scene:
        scene, digest = _load_scene(args.scene)
        report = nonexistence_verdict(scene=scene)
        profile_name = scene.name
    else:
        digest = _digest({"family": args.family, "theta": args.theta,
                          "D": args.D, "C": args.C, "a": args.a,
                          "gamma": args.gamma, "beta": args.beta,
                          "T": args.T})
        if args.family == "power":
            theta, D = args.theta, args.D
            profile = RadialProfile(
                v=lambda t: args.C * t ** theta,
                A=lambda t: D * D / (t * t), T=args.T, name="power")
            hspec = {"family": "power", "C": args.C, "theta": theta}
        elif args.family == "expgamma":
            profile = RadialProfile(
                v=lambda t: args.C * np.exp(args.a * t ** args.gamma
                                            * np.log(t) ** args.beta),
                A=lambda t: args.D, T=args.T, name="expgamma")
            hspec = {"family": "expgamma", "Lam": args.C, "a": args.a,
                     "gamma": args.gamma, "beta": args.beta}
        else:
            raise PhifluidError(f"unsupported family {args.family!r}")
        zr = solve_cauchy(profile)
        report = {"profile": profile.name, "first_zero": zr.first_zero,
                  "fires": zr.first_zero is not None, "kappa": zr.kappa,
                  "criteria": zero_criteria(profile, hspec)}
        profile_name = profile.name
    checks = [{"id": f"oscillate:{profile_name}", "points": 0,
               "first_zero": report["first_zero"],
               "fires": report["fires"],
               "criteria": {k: v["satisfied"]
                            for k, v in report["criteria"].items()},
               "passed": True}]
    return make_report("oscillate", _digest(profile_name) if args.scene
                       else digest, args.seed, checks, args.started)


def cmd_examples(args):
    if not args.name:
        checks = [{"id": "catalog", "entries": catalog.examples_catalog(),
                   "passed": len(catalog.examples_catalog()) >= 7}]
        return make_report("examples", _digest("catalog"), args.seed,
                           checks, args.started)
    params = {}
    for key in ("n", "q", "m"):
        if getattr(args, key, None) is not None:
            params[key] = getattr(args, key)
    if args.rho is not None:
        params["rho"] = args.rho
    name = {"costa": "costa-product",
            "hemisphere": "hemisphere-SPFST"}.get(args.name, args.name)
    scene = catalog.build(name, **params)
    digest = _digest({"catalog": name, "params": params})
    pts = _points(scene, args)
    checks = []
    if name == "costa-product":
        from .curvature import Geometry
        from .tensors import values
        geo = Geometry(scene, pts, 2)
        s_phi = values(geo.s_phi)
        expect = scene.params["s_phi"]
        checks.append(_check("s_phi", _sup(s_phi - expect), 1e-9,
                             args.points, {"value": expect}))
    if scene.mu is not None and scene.u is not None:
        res = system_residual(scene, pts, which="gianny")
        checks.extend(_check(f"gianny:{key}", norm, _tol(args, "d1"),
                             args.points)
                      for key, norm in sorted(res.norms.items()))
    return make_report("examples", digest, args.seed, checks, args.started)


# ---- argument parsing -------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phifluid",
        description="Numerical checks for static fluid space-times "
                    "coupled to a map.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scene=True):
        if scene:
            p.add_argument("scene", help="catalog name or scene JSON file")
        p.add_argument("--points", type=int, default=16)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol-tier", choices=sorted(TOL_TIERS), default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--json-indent", type=int, default=None)

    common(sub.add_parser("curvature"))
    p = sub.add_parser("check-system")
    common(p)
    p.add_argument("--which", choices=("gianny", "eta_system"),
                   default="gianny")
    common(sub.add_parser("integrability"))
    p = sub.add_parser("identities")
    common(p)
    p.add_argument("--id", action="append", default=None,
                   choices=IDENTITY_IDS)
    p = sub.add_parser("energy")
    common(p)
    p.add_argument("--samples", type=int, default=500)
    p = sub.add_parser("newton")
    common(p)
    p.add_argument("--k", type=int, default=1)
    p = sub.add_parser("kazdan-warner")
    common(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--refine", type=int, default=2)
    p.add_argument("--mode", choices=("kw", "conformal"), default="kw")
    p.add_argument("--eps", type=float, default=1e-3)
    p = sub.add_parser("oscillate")
    p.add_argument("--scene", default=None)
    p.add_argument("--family", choices=("power", "expgamma"), default=None)
    p.add_argument("--theta", type=float, default=2.0)
    p.add_argument("--D", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--T", type=float, default=100.0)
    common_osc = ("--points", "--seed")
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--json-indent", type=int, default=None)
    del common_osc
    p = sub.add_parser("examples")
    p.add_argument("action", nargs="?", choices=("list", "run"),
                   default="list")
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-tier", choices=sorted(TOL_TIERS), default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--json-indent", type=int, default=None)
    return parser


COMMANDS = {
    "curvature": cmd_curvature,
    "check-system": cmd_check_system,
    "integrability": cmd_integrability,
    "identities": cmd_identities,
    "energy": cmd_energy,
    "newton": cmd_newton,
    "kazdan-warner": cmd_kazdan_warner,
    "oscillate": cmd_oscillate,
    "examples": cmd_examples,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    args.started = time.time()
    if getattr(args, "tol_tier", None) is None:
        args.tol_tier = None
    try:
        report = COMMANDS[args.command](args)
    except (PhifluidError, OSError, KeyError, ValueError,
            json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
        return 1
    _emit(report, args)
    return 0 if report["passed"] else 2


if __name__ == "__main__":
    sys.exit(main())
