"""Command line front end: ``pencon {solve,curve,coercivity,verify} --config FILE``.

Exit codes: 0 ok, 2 configuration error, 3 a solve did not converge,
4 a verified property failed.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import correspondence as corr
from . import solvers
from .builtins import builtin_phi
from .coercivity import DecomposedFn, coercivity_probe, composite_coercive, is_normcoercive, sum_coercivity
from .errors import DualUnbounded, Infeasible, NonPositiveC, NotConverged, PenconError, RouteDisagreement
from .functions import Caps, ConvexFn
from .structured import StructuredPhi
from .subspaces import Subspace

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_PROPERTY = 0, 2, 3, 4

_SUBSPACE = {
    "oneOf": [
        {"type": "array", "items": {"type": "integer", "minimum": 0}},
        {"type": "object", "properties": {"basis": {"type": "array", "items": {"type": "array",
                                                                                  "items": {"type": "number"}}}},
         "required": ["basis"], "additionalProperties": False},
    ]
}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": {"type": "number"}}}
_POS = {"type": "number", "exclusiveMinimum": 0}
_FN = {
    "type": "object",
    "properties": {"name": {"type": "string"}, "params": {}, "caps": {"type": "object"}},
    "required": ["name"],
}
_DECOMPOSED = {
    "type": "object",
    "properties": {"part1": _FN, "S1": _SUBSPACE, "part2": _FN, "S2": _SUBSPACE, "dim": {"type": "integer"}},
    "required": ["part1", "S1", "part2", "S2", "dim"],
}

SCHEMA = {
    "type": "object",
    "properties": {
        "instance": {
            "type": "object",
            "properties": {
                "phi": {
                    "type": "object",
                    "properties": {"name": {"type": "string"}, "params": {}, "X1": _SUBSPACE, "X2": _SUBSPACE,
                                   "X3": _SUBSPACE},
                    "required": ["name", "X1"],
                },
                "L": _MATRIX,
                "norm": {"enum": ["L1", "L2", "Linf"]},
            },
            "required": ["phi", "L", "norm"],
        },
        "solve": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"tau": {"type": "number", "minimum": 0}, "lambda": {"type": "number", "minimum": 0},
                               "problem": {"enum": ["P1", "P2", "D1", "D2"]}, "random_start": {"type": "boolean"}},
                "oneOf": [{"required": ["tau"], "not": {"required": ["lambda"]}},
                          {"required": ["lambda"], "not": {"required": ["tau"]}}],
            },
        },
        "curve": {
            "type": "object",
            "properties": {"samples": {"type": "integer"}, "taus": {"type": "array", "items": _POS}},
        },
        "coercivity": {
            "type": "object",
            "properties": {
                "F": _DECOMPOSED, "G": _DECOMPOSED,
                "H": _MATRIX, "K": _MATRIX, "phi": _FN, "psi": _FN,
                "probe": {"type": "object", "properties": {"radii": {"type": "array", "items": _POS},
                                                           "samples_per_shell": {"type": "integer", "minimum": 1}}},
            },
        },
        "verify": {
            "type": "object",
            "properties": {
                "pairs": {"type": "array", "items": {
                    "type": "object",
                    "properties": {"tau": _POS, "lambda": _POS, "expect": {"enum": ["equal", "disjoint"]}},
                    "required": ["tau", "lambda"]}},
                "grid_step": _POS,
                "box": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                                   "items": {"type": "number"}}},
                "round_trip_samples": {"type": "integer", "minimum": 2},
                "expect_dual_unbounded_at_zero": {"type": "boolean"},
            },
        },
        "tolerances": {
            "type": "object",
            "properties": {"cert_tol": _POS, "round_trip": _POS, "monotone_noise": _POS, "oracle_grid_step": _POS},
            "additionalProperties": False,
        },
        "seed": {"type": "integer"},
    },
}


class ConfigError(Exception):
    pass


# -- config -> objects -----------------------------------------------------

def _subspace(spec, n: int) -> Subspace:
    if isinstance(spec, dict):
        B = np.asarray(spec["basis"], dtype=float)
        return Subspace.span(B, n) if B.size else Subspace.trivial(n)
    if any(i >= n for i in spec):
        raise ConfigError(f"coordinate index out of range for dimension {n}")
    return Subspace.coordinate(spec, n)


def build_instance(inst: dict) -> solvers.ProblemInstance:
    L = np.asarray(inst["L"], dtype=float)
    if len({len(r) for r in inst["L"]}) != 1:
        raise ConfigError("L rows have different lengths")
    n = L.shape[1]
    ph = inst["phi"]
    X1 = _subspace(ph["X1"], n)
    X2 = _subspace(ph.get("X2", []), n)
    X3 = _subspace(ph["X3"], n) if "X3" in ph else None
    phi = builtin_phi(ph["name"], ph.get("params"))
    return solvers.ProblemInstance(StructuredPhi(X1, X2, phi, X3), L, inst["norm"])


def _singular_quartic(params):
    return ConvexFn(1, lambda t: 0.0 if t[0] == 0 else t[0] ** 2 - t[0] ** -4,
                    caps=Caps(convex=False, coercive=True), name="singular_quartic")


def _square(params):
    scale = float((params or {}).get("scale", 1.0)) if isinstance(params, dict) else float((params or [1.0])[0])
    dim = int(params.get("dim", 1)) if isinstance(params, dict) else 1
    return ConvexFn(dim, lambda t: scale * float(t @ t), name=f"{scale:g}|.|^2",
                    caps=Caps(coercive=scale > 0, locally_bounded_below=True, bounded_below=True))


def _zero(params):
    dim = int(params.get("dim", 1)) if isinstance(params, dict) else 1
    return ConvexFn(dim, lambda t: 0.0, caps=Caps(locally_bounded_below=True, bounded_below=True), name="zero")


_EXTRA_FNS = {"square": _square, "zero": _zero, "singular_quartic": _singular_quartic}


def build_fn(spec: dict) -> ConvexFn:
    name = spec["name"]
    f = _EXTRA_FNS[name](spec.get("params")) if name in _EXTRA_FNS else builtin_phi(name, spec.get("params"))
    if "caps" in spec:
        unknown = set(spec["caps"]) - set(Caps.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown capability flags {sorted(unknown)}")
        f = f.with_caps(**{k: bool(v) for k, v in spec["caps"].items()})
    return f


def _decomposed(spec: dict) -> DecomposedFn:
    n = int(spec["dim"])
    return DecomposedFn(build_fn(spec["part1"]), _subspace(spec["S1"], n), build_fn(spec["part2"]),
                        _subspace(spec["S2"], n))


# -- output helpers --------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n")


def _meta(cfg: dict, tolerances: dict, seed: int) -> dict:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return {"config_sha256": hashlib.sha256(canon.encode()).hexdigest(), "version": __version__,
            "tolerances": tolerances, "seed": seed}


def _tolerances(cfg: dict, tol_override) -> dict:
    t = {"cert_tol": solvers.CERT_TOL, "round_trip": 1e-4, "monotone_noise": 1e-5, "oracle_grid_step": 1e-3}
    t.update(cfg.get("tolerances", {}))
    if tol_override is not None:
        if not tol_override > 0:
            raise ConfigError("--tol must be positive")
        t["cert_tol"] = float(tol_override)
    return t


def _thresholds_or_none(pi, cert_tol):
    try:
        return corr.thresholds(pi, cert_tol)
    except (NonPositiveC, RouteDisagreement, NotConverged):
        return None


# -- commands --------------------------------------------------------------

def cmd_solve(cfg, tol, seed, out: Path, workers) -> int:
    pi = build_instance(cfg["instance"])
    th = _thresholds_or_none(pi, tol["cert_tol"])
    records, status = [], EXIT_OK
    for k, entry in enumerate(cfg["solve"]):
        is_tau = "tau" in entry
        val = float(entry["tau"] if is_tau else entry["lambda"])
        prob = entry.get("problem", "P1" if is_tau else "P2")
        if (prob in ("P1", "D1")) != is_tau:
            raise ConfigError(f"problem {prob} takes {'tau' if prob in ('P1', 'D1') else 'lambda'}")
        fn = {"P1": solvers.solve_constrained, "P2": solvers.solve_penalized,
              "D1": solvers.solve_dual_penalized, "D2": solvers.solve_dual_constrained}[prob]
        kw = {"cert_tol": tol["cert_tol"], "raise_on_fail": False}
        if entry.get("random_start"):
            kw["seed"] = seed + k
        rec = {"problem": prob, "tau" if is_tau else "lambda": val}
        try:
            r = fn(pi, val, **kw)
        except (Infeasible, DualUnbounded) as e:
            rec.update({"error": type(e).__name__, "message": str(e), "converged": False})
            records.append(rec)
            continue
        x, p = r.x, r.p
        rec.update({
            "minimizer": r.minimizer, "objective": r.objective, "dual_witness": r.dual_witness,
            "norm_Lx": pi.norm.primal(pi.L @ x), "lambda_of_dual": pi.norm.dual(p),
            "residuals": r.residuals, "iterations": r.iterations, "converged": r.converged,
        })
        if th is not None:
            lab = corr.classify_regime(pi, c=th.c, d=th.d, **({"tau": val} if is_tau else {"lam": val}))
            rec["regime"] = {"label": lab.label, "containment": lab.containment}
        if pi.n == 1:
            box = corr.default_box(pi, th.c if th else None)
            obj = solvers.constrained_objective(pi, val, 1e-9) if is_tau else solvers.penalized_objective(pi, val)
            s = solvers.brute_force_argmin(obj, box, tol["oracle_grid_step"], 1e-9)
            rec["argmin_oracle"] = {"kind": s.kind, "lo": float(s.points[:, 0].min()), "hi": float(s.points[:, 0].max())}
            rec["non_unique_argmin"] = s.kind == "interval_1d" and s.hi - s.lo > 2 * s.grid_step
        if not r.converged:
            status = EXIT_CONVERGENCE
        records.append(rec)
    _write_json(out / "solve.json", {"meta": _meta(cfg, tol, seed), "records": records})
    return status


def _curve_worker(args):
    inst, tau, cert_tol = args
    pi = build_instance(inst)
    return corr.curve_sample(pi, tau, cert_tol)


def cmd_curve(cfg, tol, seed, out: Path, workers) -> int:
    pi = build_instance(cfg["instance"])
    spec = cfg.get("curve", {})
    try:
        th = corr.thresholds(pi, tol["cert_tol"])
    except NonPositiveC as e:
        raise ConfigError(str(e)) from None
    if "taus" in spec:
        taus = sorted(float(t) for t in spec["taus"])
        if any(not t < th.c for t in taus):
            raise ConfigError(f"curve taus must lie in (0, c) = (0, {th.c:.17g})")
    else:
        taus = [th.c * k / (spec.get("samples", 9) + 1) for k in range(1, spec.get("samples", 9) + 1)]
    if len(taus) < 3:
        raise ConfigError("a curve needs at least 3 samples")
    jobs = [(cfg["instance"], t, tol["cert_tol"]) for t in taus]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            samples = list(ex.map(_curve_worker, jobs))
    else:
        samples = [_curve_worker(j) for j in jobs]
    curve = corr.CorrespondenceCurve(tuple(samples), th)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "curve.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "lambda", "primal_obj", "dual_obj", "max_residual"])
        for s in samples:
            w.writerow([format(v, ".17g") for v in (s.tau, s.lam, s.primal_obj, s.dual_obj, s.max_residual)])
    summary = {
        "meta": _meta(cfg, tol, seed), "c": th.c, "d": th.d, "d_routes": th.d_routes,
        "monotone_decreasing": curve.is_monotone(tol["monotone_noise"]),
        "endpoint_limits": corr.endpoint_limits(curve),
        "all_converged": all(s.converged for s in samples), "samples": len(samples),
    }
    _write_json(out / "curve_summary.json", summary)
    return EXIT_OK if summary["all_converged"] else EXIT_CONVERGENCE


def cmd_coercivity(cfg, tol, seed, out: Path, workers) -> int:
    spec = cfg.get("coercivity")
    if not spec:
        raise ConfigError("config has no 'coercivity' section")
    probe = spec.get("probe", {"radii": [1, 2, 4, 8]})
    radii = probe["radii"]
    if len(radii) < 3:
        raise ConfigError("probe needs at least 3 radii")
    spp = probe.get("samples_per_shell", 200)
    rec = {"meta": _meta(cfg, tol, seed)}
    if "F" in spec or "G" in spec:
        if not ("F" in spec and "G" in spec):
            raise ConfigError("give both F and G")
        F, G = _decomposed(spec["F"]), _decomposed(spec["G"])
        v = sum_coercivity(F, G, probe={"radii": radii, "samples_per_shell": spp, "seed": seed})
        total = ConvexFn(F.ambient_dim, lambda x: F(x) + G(x), name="F+G")
        on = v.subspace if v.certified else v.valid_complement
        sub_probe = None
        if on is not None and not on.is_trivial:
            sub_probe = coercivity_probe(total, radii, spp, subspace=on, seed=seed)
        rec["sum"] = {
            "status": v.status, "reason": v.reason, "flags": {"orth1": v.orth1, "orth2": v.orth2},
            "missing": list(v.missing), "detail": v.detail,
            "certified_basis": v.subspace.basis.T if v.certified else None,
            "valid_complement_basis": v.valid_complement.basis.T if v.valid_complement else None,
            "probe_whole_space": _probe_dict(v.probe) if v.probe else None,
            "probe_on_complement": _probe_dict(sub_probe) if sub_probe else None,
        }
    if "H" in spec or "K" in spec:
        try:
            H, K = np.asarray(spec["H"], dtype=float), np.asarray(spec["K"], dtype=float)
            phi, psi = build_fn(spec["phi"]), build_fn(spec["psi"])
        except KeyError as e:
            raise ConfigError(f"composite check needs H, K, phi, psi (missing {e})") from None
        rec["composite"] = {"coercive": composite_coercive(H, K, phi, psi),
                            "stacked_normcoercive": is_normcoercive(np.vstack([H, K]))}
    if len(rec) == 1:
        raise ConfigError("coercivity section needs F/G or H/K/phi/psi")
    _write_json(out / "coercivity.json", rec)
    return EXIT_OK


def _probe_dict(p):
    return {"radii": p.radii, "shell_minima": p.shell_minima, "verdict": p.verdict,
            "witness_direction": p.witness}


def cmd_verify(cfg, tol, seed, out: Path, workers) -> int:
    pi = build_instance(cfg["instance"])
    if pi.n > 2:
        raise ConfigError("verify needs a 1-D or 2-D instance")
    spec = cfg.get("verify", {})
    ct = tol["cert_tol"]
    step = spec.get("grid_step", 1e-3 if pi.n == 1 else 1e-2)
    props, ok_all = {}, True
    try:
        th = corr.thresholds(pi, ct)
    except NonPositiveC as e:
        raise ConfigError(str(e)) from None
    box = spec.get("box") or corr.default_box(pi, th.c)
    k = spec.get("round_trip_samples", 5)
    taus = [th.c * (i + 1) / (k + 1) for i in range(k)]
    if math.isfinite(th.d):
        lams = [th.d * (i + 1) / (k + 1) for i in range(k)]
    else:
        lams = list(np.geomspace(0.1, 10.0, k))

    def record(name, passed, **info):
        nonlocal ok_all
        ok_all &= bool(passed)
        props[name] = {"pass": bool(passed), **info}

    try:
        gs = [corr.g_of_tau(pi, t, c=th.c, cert_tol=ct) for t in taus]
        fg = [corr.f_of_lambda(pi, g, cert_tol=ct) for g in gs]
        fs = [corr.f_of_lambda(pi, lam, cert_tol=ct) for lam in lams]
        gf = [corr.g_of_tau(pi, f, c=th.c, cert_tol=ct) for f in fs]
    except NotConverged as e:
        record("convergence", False, message=str(e))
        _write_json(out / "verify.json", {"meta": _meta(cfg, tol, seed), "properties": props})
        return EXIT_CONVERGENCE
    e1 = max(abs(a - b) for a, b in zip(fg, taus))
    e2 = max(abs(a - b) for a, b in zip(gf, lams))
    record("round_trip_f_of_g", e1 <= tol["round_trip"], max_error=e1)
    record("round_trip_g_of_f", e2 <= tol["round_trip"], max_error=e2)
    record("monotone_decreasing", corr.monotone_decreasing(gs, tol["monotone_noise"]), taus=taus, g=gs)

    pairs = spec.get("pairs") or [{"tau": t, "lambda": g} for t, g in zip(taus, gs)]
    results = []
    for pr in pairs:
        cmp_ = corr.verify_sol_equality(pi, pr["tau"], pr["lambda"], step, box)
        want = pr.get("expect", "equal")
        good = cmp_.equal if want == "equal" else cmp_.disjoint
        results.append({"tau": pr["tau"], "lambda": pr["lambda"], "expect": want, "pass": good,
                        "hausdorff": cmp_.hausdorff, "gap": cmp_.gap})
    record("sol_equality", all(r["pass"] for r in results), pairs=results)

    margins = []
    NL = corr.nullspace(pi.L)
    P_argmin = np.eye(pi.n) - pi.phi.X2.projector
    for t in taus:
        s = solvers.brute_force_argmin(solvers.constrained_objective(pi, t, 1e-9), box, step, 1e-9)
        to_null = min(float(np.linalg.norm(x - NL.projector @ x)) for x in s.points)
        to_argmin = min(float(np.linalg.norm(P_argmin @ (x - pi.phi.minimizer))) for x in s.points)
        margins.append(min(to_null, to_argmin))
    record("localization_disjoint", min(margins) >= step, margins=margins)

    try:
        solvers.solve_dual_penalized(pi, 0.0, cert_tol=ct)
        at_zero = "solved"
    except DualUnbounded:
        at_zero = "DualUnbounded"
    except NotConverged:
        at_zero = "NotConverged"
    if "expect_dual_unbounded_at_zero" in spec:
        record("dual_at_zero", (at_zero == "DualUnbounded") == spec["expect_dual_unbounded_at_zero"],
               outcome=at_zero)
    else:
        props["dual_at_zero"] = {"pass": True, "outcome": at_zero}

    _write_json(out / "verify.json", {"meta": _meta(cfg, tol, seed), "c": th.c, "d": th.d, "properties": props,
                                      "setting_ok": pi.phi.setting_ok, "missing_caps": list(pi.phi.missing_caps)})
    return EXIT_OK if ok_all else EXIT_PROPERTY


COMMANDS = {"solve": cmd_solve, "curve": cmd_curve, "coercivity": cmd_coercivity, "verify": cmd_verify}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pencon", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pencon {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=Path("."))
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--tol", type=float, default=None, help="overrides cert_tol")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = json.loads(args.config.read_text())
        jsonschema.validate(cfg, SCHEMA)
        if args.command != "coercivity" and "instance" not in cfg:
            raise ConfigError("config has no 'instance'")
        if args.command == "solve" and "solve" not in cfg:
            raise ConfigError("config has no 'solve' entries")
        tol = _tolerances(cfg, args.tol)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if args.command != "coercivity":
            build_instance(cfg["instance"])  # fail before any output exists
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError, ConfigError, PenconError, ValueError,
            KeyError) as e:
        msg = e.message if isinstance(e, jsonschema.ValidationError) else str(e)
        print(f"pencon: config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code = COMMANDS[args.command](cfg, tol, seed, args.out, args.workers)
    except (ConfigError, PenconError, ValueError, KeyError) as e:
        if isinstance(e, NotConverged):
            print(f"pencon: {e}", file=sys.stderr)
            return EXIT_CONVERGENCE
        print(f"pencon: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
