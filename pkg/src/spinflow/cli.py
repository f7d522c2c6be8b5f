"""Command-line front end: ``spinflow {verify,scan,bieberbach,deform,catalog}``.

Exit codes: 0 consistent, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bieberbach as bb
from . import zoo
from .clifford import build_rep, omega_eigenprojectors
from .curvature_identities import (
    dim3_identities,
    dim3_minimal_identities,
    sasaki_identities,
    thm_main_residuals,
)
from .deform import d_homothety, sasaki_killing_bridge, transport_tks
from .flow_frame import FlowViolation, levi_civita, sasaki_check
from .spin_conn import TksParams
from .tks import default_grid, solve_constant_frame, tks_residual

HOMOGENEOUS_TOL = 1e-9
CHART_TOL = 1e-5
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _g6(x: float) -> str:
    return f"{x:.6g}"


def _g12(x: float) -> float:
    return float(f"{x:.12g}")


def _floats(text: str, count: int | None = None, name: str = "value") -> list[float]:
    try:
        out = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(out) != count:
        raise UsageError(f"{name}: expected {count} numbers, got {len(out)}")
    return out


def _parse_param(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        if key in ("delta", "samples"):
            try:
                out[key] = int(raw)
            except ValueError:
                raise UsageError(f"--param {key} must be an integer") from None
        elif key == "xi":
            out[key] = _floats(raw, 3, "xi")
        else:
            out[key] = _floats(raw, 1, key)[0]
    return out


def resolve_manifold(source: str, params: dict) -> zoo.ZooEntry:
    """Catalog name or path to a descriptor file."""
    path = Path(source)
    if source.endswith(".json") or path.is_file():
        if params:
            raise UsageError("--param does not apply to descriptor files")
        try:
            text = path.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc.strerror}") from None
        try:
            return zoo.load_descriptor(text)
        except zoo.DescriptorError as exc:
            raise UsageError(f"{source}: {exc}") from None
    try:
        return zoo.build(source, **params)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _default_tol(entry: zoo.ZooEntry, tol: float | None) -> float:
    if tol is not None:
        return tol
    return HOMOGENEOUS_TOL if entry.manifold.kind == "homogeneous" else CHART_TOL


def _expected_dim(entry: zoo.ZooEntry, p: TksParams):
    for f in entry.expected:
        if abs(f.alpha - p.alpha) <= 1e-12 and abs(f.beta - p.beta) <= 1e-12:
            return f.dim
    return None


def _solutions(entry: zoo.ZooEntry, geo, rep, p: TksParams):
    if entry.manifold.kind == "homogeneous":
        kernel = solve_constant_frame(geo, rep, p)
        return kernel.dim, list(kernel.fields)
    fields = entry.spinors(p) if entry.spinors else []
    return len(fields), fields


def identity_report(geo, rep, psi, p: TksParams) -> dict:
    """Every applicable residual for one solution, flattened to name -> value."""
    out = {}
    r_xi, r_q = tks_residual(geo, rep, psi, p)
    out["tks_xi"], out["tks_Q"] = r_xi, r_q
    thm = thm_main_residuals(geo, rep, psi, p)
    out["thm_ric_xi"] = thm["ric_xi"]
    out["thm_ric_Z"] = max(thm["ric_Z"])
    out["thm_scal"] = thm["scal"]
    if geo.ambient_dim == 3 and p.is_real:
        for key, value in dim3_identities(geo, rep, psi, p).items():
            out[f"dim3_{key}"] = value
        if np.max(np.abs(geo.kappa), initial=0.0) <= HOMOGENEOUS_TOL:
            for key, value in dim3_minimal_identities(geo, rep, psi, p).items():
                out[f"dim3_{key}"] = value
    if geo.n % 2 == 0 and sasaki_check(geo).is_sasakian:
        sas = sasaki_identities(geo, rep, psi, p, geo.n // 2)
        for key in ("ric_Z", "ric_xi", "scal", "ric_perp_h", "ric_sigma0", "ric_sigma_m"):
            if key in sas:
                out[f"sasaki_{key}"] = sas[key]
        out["sasaki_scal_components"] = max(sas["scal_components"])
    return out


def cmd_verify(args) -> int:
    entry = resolve_manifold(args.manifold, _parse_param(args.param))
    tol = _default_tol(entry, args.tol)
    p = TksParams(args.alpha, args.beta)
    geo = levi_civita(entry.manifold)
    rep = build_rep(entry.manifold.ambient_dim)
    dim, fields = _solutions(entry, geo, rep, p)
    expected = args.expect_dim if args.expect_dim is not None else _expected_dim(entry, p)
    rows = {}
    for psi in fields:
        for key, value in identity_report(geo, rep, psi, p).items():
            rows[key] = max(rows.get(key, 0.0), value)
    ok = all(v <= tol for v in rows.values())
    dim_ok = expected is None or expected == dim
    if args.json:
        report = {"manifold": entry.manifold.name, "alpha": p.alpha, "beta": p.beta, "kernel_dim": dim,
                  "expected_dim": expected, "tolerance": tol,
                  "residuals": {k: _g12(v) for k, v in rows.items()}, "passed": ok and dim_ok}
        print(json.dumps(report, indent=2))
    else:
        print(f"manifold   {entry.manifold.name}")
        print(f"params     alpha={_g6(p.alpha)} beta={_g6(p.beta)}")
        print(f"kernel_dim {dim}" + ("" if expected is None else f" (expected {expected})"))
        if dim == 0:
            print("no solutions")
        width = max((len(k) for k in rows), default=8)
        for key, value in rows.items():
            flag = "ok" if value <= tol else "FAIL"
            print(f"  {key:<{width}}  {_g6(value):>12}  {flag}")
        print(f"tolerance  {_g6(tol)}")
    return EXIT_OK if ok and dim_ok else EXIT_FAIL


def _grid(text: str | None, name: str) -> np.ndarray:
    if text is None:
        return default_grid()
    lo, hi, step = _floats(text, 3, name)
    if step <= 0 or hi < lo:
        raise UsageError(f"{name}: need lo <= hi and step > 0")
    return default_grid(lo, hi, step)


def cmd_scan(args) -> int:
    entry = resolve_manifold(args.manifold, _parse_param(args.param))
    if entry.manifold.kind != "homogeneous":
        raise UsageError("scan needs a homogeneous manifold")
    alphas = _grid(args.alpha_grid, "--alpha-grid")
    betas = _grid(args.beta_grid, "--beta-grid")
    geo = levi_civita(entry.manifold)
    rep = build_rep(entry.manifold.ambient_dim)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["alpha", "beta", "kernel_dim"])
        for a in alphas:
            for b in betas:
                dim = solve_constant_frame(geo, rep, TksParams(float(a), float(b))).dim
                writer.writerow([_g6(a), _g6(b), dim])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _oriented(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v if v[k] > 0 else -v


def cmd_bieberbach(args) -> int:
    try:
        group = bb.build_group(args.group, H=args.H, L=args.L, S=args.S, T=args.T)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = {"group": group.name, "parameters": {k: v for k, v in group.parameters.items()}}
    fixed = bb.invariant_xi(group)
    if fixed.shape[0] == 0:
        report.update({"flow_direction": None, "admissible": [], "note": "no invariant flow direction"})
        print(json.dumps(report, indent=2))
        return EXIT_OK
    if args.xi is not None:
        xi = np.asarray(_floats(args.xi, 3, "--xi"))
        if not np.linalg.norm(xi) > 0:
            raise UsageError("--xi must be nonzero")
        xi = xi / np.linalg.norm(xi)
    else:
        xi = _oriented(fixed[-1]) if fixed.shape[0] == 1 else np.array([0.0, 0.0, 1.0])
    delta = [int(v) for v in _floats(args.delta, None, "--delta")] if args.delta else [0, 0, 0]
    lo, hi = _floats(args.window, 2, "--window")
    try:
        lift = bb.lift_generators(group, delta)
        found = bb.admissible_alphas(group, lift, xi, (lo * math.pi, hi * math.pi))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rng = np.random.default_rng(args.seed)
    samples = rng.uniform(-3.0, 3.0, (50, 3))
    rows, worst = [], 0.0
    for a in found:
        plus, minus = bb.solution_spinors(a, xi)
        res = bb.equivariance_residual(group, lift, xi, a.alpha, plus, minus, samples)
        worst = max(worst, res)
        rows.append({"alpha": _g12(a.alpha),
                     "alpha_over_pi": str(a.multiple_of_pi) if a.multiple_of_pi is not None else _g12(a.alpha / math.pi),
                     "dim": a.dim, "equivariance_residual": _g12(res)})
    report.update({"delta": list(lift.delta_bits), "flow_direction": [_g12(v) for v in xi],
                   "window_over_pi": [lo, hi], "admissible": rows})
    print(json.dumps(report, indent=2))
    tol = args.tol if args.tol is not None else HOMOGENEOUS_TOL
    return EXIT_OK if worst <= tol else EXIT_FAIL


def cmd_deform(args) -> int:
    entry = resolve_manifold(args.manifold, _parse_param(args.param))
    if not args.t > 0:
        raise UsageError("--t must be positive")
    tol = _default_tol(entry, args.tol)
    p = TksParams(args.alpha, args.beta)
    geo = levi_civita(entry.manifold)
    rep = build_rep(entry.manifold.ambient_dim)
    dim, fields = _solutions(entry, geo, rep, p)
    deformed = levi_civita(d_homothety(geo, args.t))
    new_p = TksParams(p.alpha / args.t, p.beta / math.sqrt(args.t))
    worst = 0.0
    for psi in fields:
        moved, new_p = transport_tks(rep, psi, p, args.t, geo, tol)
        worst = max(worst, *tks_residual(deformed, rep, moved, new_p))
    print(f"manifold    {entry.manifold.name}")
    print(f"t           {_g6(args.t)}")
    print(f"source      alpha={_g6(p.alpha)} beta={_g6(p.beta)} kernel_dim={dim}")
    print(f"transported alpha={_g6(new_p.alpha)} beta={_g6(new_p.beta)}")
    if dim == 0:
        print("no solutions to transport")
    else:
        print(f"residual    {_g6(worst)}  {'verified' if worst <= tol else 'FAIL'}")
    ok = worst <= tol
    if entry.manifold.kind == "homogeneous":
        new_dim = solve_constant_frame(deformed, rep, new_p).dim
        print(f"kernel_dim  {new_dim} on the deformed manifold")
        ok = ok and new_dim == dim
    if args.bridge and dim and geo.n % 2 == 0 and sasaki_check(geo).is_sasakian and p.beta == 0:
        m = geo.n // 2
        for r, which in ((0, "sigma0"), (m, "sigma_m")):
            proj = omega_eigenprojectors(rep, geo.omega[0], m)[r]
            psi = max((f.map_pointwise(proj) for f in fields), key=lambda f: float(np.max(f.norms())))
            try:
                t, res = sasaki_killing_bridge(geo, rep, psi, float(np.real(p.alpha)), which, m, tol)
            except ValueError as exc:
                print(f"bridge {which:<8} skipped: {exc}")
                continue
            print(f"bridge {which:<8} t={_g6(t)} killing_residual={_g6(res)}")
            ok = ok and res <= tol
    return EXIT_OK if ok else EXIT_FAIL


def cmd_catalog(args) -> int:
    if args.dump:
        entry = resolve_manifold(args.dump, _parse_param(args.param))
        print(zoo.dump_descriptor(entry))
        return EXIT_OK
    for name, schema in zoo.list_catalog().items():
        print(name)
        for key, desc in schema.items():
            print(f"  {key}: {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinflow", description="Transversal Killing spinors on Riemannian flows.")
    sub = parser.add_subparsers(dest="command", required=True)

    def manifold_args(p):
        p.add_argument("manifold", help="catalog name or descriptor JSON file")
        p.add_argument("--param", "-p", action="append", metavar="KEY=VALUE", help="catalog parameter (repeatable)")
        p.add_argument("--tol", type=float, default=None, help="residual tolerance (default 1e-9, charts 1e-5)")

    v = sub.add_parser("verify", help="solve and check all identities at one (alpha, beta)")
    manifold_args(v)
    v.add_argument("--alpha", type=float, required=True)
    v.add_argument("--beta", type=float, required=True)
    v.add_argument("--expect-dim", type=int, default=None, help="override the catalog's expected kernel dimension")
    v.add_argument("--json", action="store_true", help="machine-readable report")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", help="kernel dimensions over a parameter grid (CSV)")
    manifold_args(s)
    s.add_argument("--alpha-grid", metavar="LO,HI,STEP", help="default -2,2,0.25")
    s.add_argument("--beta-grid", metavar="LO,HI,STEP", help="default -2,2,0.25")
    s.add_argument("--out", help="write CSV here instead of stdout")
    s.set_defaults(func=cmd_scan)

    b = sub.add_parser("bieberbach", help="admissible alpha on a flat quotient (JSON)")
    b.add_argument("group", choices=bb.GROUP_NAMES)
    for name, default in (("H", 1.0), ("L", 1.0), ("S", 1.0), ("T", 0.0)):
        b.add_argument(f"--{name}", type=float, default=default)
    b.add_argument("--delta", help="spin structure bits, e.g. 0,0,1")
    b.add_argument("--window", default="-15,15", help="alpha window in units of pi (default -15,15)")
    b.add_argument("--xi", help="flow direction x,y,z (default: the invariant axis)")
    b.add_argument("--seed", type=int, default=0, help="seed for the equivariance sample points")
    b.add_argument("--tol", type=float, default=None)
    b.set_defaults(func=cmd_bieberbach)

    d = sub.add_parser("deform", help="transport solutions through a D-homothetic deformation")
    manifold_args(d)
    d.add_argument("--t", type=float, required=True)
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--beta", type=float, required=True)
    d.add_argument("--bridge", action="store_true", help="also run the Killing-spinor bridge on Sasakian flows")
    d.set_defaults(func=cmd_deform)

    c = sub.add_parser("catalog", help="list catalog entries or dump a descriptor")
    c.add_argument("--dump", metavar="NAME", help="print the descriptor JSON of an entry")
    c.add_argument("--param", "-p", action="append", metavar="KEY=VALUE")
    c.set_defaults(func=cmd_catalog)
    return parser


LIST_OPTIONS = ("--window", "--alpha-grid", "--beta-grid", "--xi", "--delta")


def _join_list_options(argv: list[str]) -> list[str]:
    # argparse treats "-15,15" as an option; glue such values to their flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] in LIST_OPTIONS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_list_options(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FlowViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
