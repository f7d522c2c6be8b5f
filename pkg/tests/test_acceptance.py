"""End-to-end acceptance criteria; each test prints one PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` for just the summary.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

from spinflow import bieberbach as bb
from spinflow import zoo
from spinflow.clifford import build_rep, clifford_defect, omega_eigenprojectors
from spinflow.curvature_identities import dim3_identities, dim3_minimal_identities, thm_main_residuals
from spinflow.deform import d_homothety, deformation_defect, sasaki_killing_bridge, transport_tks, transported_params
from spinflow.flow_frame import curvature, levi_civita, sasaki_check
from spinflow.spin_conn import TksParams
from spinflow.tks import default_grid, scan_params, solve_constant_frame, tks_residual

sys.path.insert(0, str(Path(__file__).parent))
import test_properties  # noqa: E402

pytestmark = pytest.mark.acceptance

CLIFFORD_TOL = 1e-12
HOMOGENEOUS_TOL = 1e-9
CHART_TOL = 1e-5
GROUP_TOL = 1e-12
BIEBERBACH_WINDOW = (-15 * math.pi, 15 * math.pi)


def _worst(report):
    vals = []
    for v in report.values():
        vals.extend(v if isinstance(v, list) else [v])
    return max(float(v) for v in vals)


def criterion_1():
    worst = 0.0
    for d in range(2, 6):
        rep = build_rep(d)
        worst = max(worst, clifford_defect(rep))
        plus, minus = rep.xi_projectors()
        eye = rep.identity
        for err in (plus @ plus - plus, minus @ minus - minus, plus @ minus, plus + minus - eye):
            worst = max(worst, float(np.max(np.abs(err))))
        if d % 2:
            worst = max(worst, float(np.max(np.abs(rep.volume_element() - eye))))
            m = (d - 1) // 2
            kaehler = np.zeros((d, d))
            for a in range(m):
                kaehler[2 * a + 1, 2 * a + 2], kaehler[2 * a + 2, 2 * a + 1] = 1.0, -1.0
            projs = omega_eigenprojectors(rep, kaehler, m)
            worst = max(worst, float(np.max(np.abs(sum(projs) - eye))))
            for i, p in enumerate(projs):
                for j, q in enumerate(projs):
                    target = p if i == j else 0 * p
                    worst = max(worst, float(np.max(np.abs(p @ q - target))))
    return worst <= CLIFFORD_TOL, f"max defect {worst:.2e} over dims 2-5 (tol {CLIFFORD_TOL:g})"


def _scan_hits(geo, rep):
    grid = default_grid()
    return {(a, b): d for a, b, d in scan_params(geo, rep, grid, grid) if d}


def criterion_2():
    rep = build_rep(3)
    hits = _scan_hits(levi_civita(zoo.round_s3().manifold), rep)
    want = {(0.0, 1.0): 2, (0.0, -1.0): 2, (-1.0, 0.0): 2}
    return hits == want, f"nonzero kernels {sorted(hits.items())} on the default grid"


def criterion_3():
    rep = build_rep(3)
    geo = levi_civita(zoo.heisenberg().manifold)
    hits = _scan_hits(geo, rep)
    ric = curvature(geo).ricci[0]
    target = -2 * np.eye(3)
    target[0, 0] += 4
    err = float(np.max(np.abs(ric - target)))
    ok = hits == {(0.0, 0.0): 2} and err <= HOMOGENEOUS_TOL
    return ok, f"nonzero kernels {sorted(hits.items())}; Ricci error {err:.2e} (tol {HOMOGENEOUS_TOL:g})"


def _verified_solutions(entry, rep):
    geo = levi_civita(entry.manifold)
    for f in entry.expected:
        if not f.dim:
            continue
        p = TksParams(f.alpha, f.beta)
        if entry.manifold.kind == "homogeneous":
            fields = solve_constant_frame(geo, rep, p).fields
        else:
            fields = entry.spinors(p)
        for psi in fields:
            yield geo, p, psi


def criterion_4():
    rep = build_rep(3)
    ok, lines, count = True, [], 0
    for name in zoo.list_catalog():
        entry = zoo.build(name)
        tol = HOMOGENEOUS_TOL if entry.manifold.kind == "homogeneous" else CHART_TOL
        worst = 0.0
        for geo, p, psi in _verified_solutions(entry, rep):
            if max(tks_residual(geo, rep, psi, p)) > tol:
                ok = False
            worst = max(worst, _worst(thm_main_residuals(geo, rep, psi, p)))
            count += 1
        ok = ok and worst <= tol
        lines.append(f"{name}={worst:.1e}")
    return ok and count > 0, f"{count} solutions; worst per entry: {', '.join(lines)}"


def criterion_5():
    rep = build_rep(3)
    entries = [zoo.round_s3(), zoo.heisenberg(), zoo.flat_r3(), zoo.berger_s3(0.5), zoo.berger_s3(2.0)]
    worst, count = 0.0, 0
    for entry in entries:
        for geo, p, psi in _verified_solutions(entry, rep):
            worst = max(worst, _worst(dim3_identities(geo, rep, psi, p)),
                        _worst(dim3_minimal_identities(geo, rep, psi, p)))
            count += 1
    return worst <= HOMOGENEOUS_TOL and count > 0, f"{count} solutions, max residual {worst:.2e}"


BIEBERBACH_CASES = [  # (group, delta, offset, period) in units of pi
    ("G1", (0, 0, 0), 0, 2), ("G1", (0, 0, 1), 1, 2),
    ("G2", (0, 0, 0), 1, 4), ("G2", (1, 0, 0), 3, 4),
    ("G3", (0,), 1, 6), ("G3", (1,), 4, 6),
    ("G4", (0, 0), 1, 8), ("G4", (1, 0), 5, 8),
    ("G5", (0,), 1, 12), ("G5", (1,), 7, 12),
]


def criterion_6():
    xi = [0.0, 0.0, 1.0]
    pts = np.random.default_rng(2).uniform(-5, 5, (50, 3))
    ok, worst = True, 0.0
    for name, delta, offset, period in BIEBERBACH_CASES:
        group = bb.build_group(name)
        lift = bb.lift_generators(group, delta)
        found = bb.admissible_alphas(group, lift, xi, BIEBERBACH_WINDOW)
        want = [q for q in range(-15, 16) if (q - offset) % period == 0]
        ok = ok and [a.multiple_of_pi for a in found] == want and all(a.dim == 2 for a in found)
        for a in found:
            plus, minus = bb.solution_spinors(a, xi)
            worst = max(worst, bb.equivariance_residual(group, lift, xi, a.alpha, plus, minus, pts))
    no_flow = bb.invariant_xi(bb.build_group("G6")).shape[0] == 0
    ok = ok and no_flow and worst <= HOMOGENEOUS_TOL
    return ok, f"{len(BIEBERBACH_CASES)} closed forms; equivariance {worst:.2e}; G6 without flow: {no_flow}"


def criterion_7():
    rep = build_rep(3)
    transport, group, ok = 0.0, 0.0, True
    for entry, params in ((zoo.round_s3(), [(0.0, 1.0), (0.0, -1.0), (-1.0, 0.0)]), (zoo.heisenberg(), [(0.0, 0.0)])):
        geo = levi_civita(entry.manifold)
        for t in (0.5, 2.0, 3.0):
            deformed = levi_civita(d_homothety(geo, t))
            ok = ok and deformation_defect(geo, deformed, t) <= HOMOGENEOUS_TOL
            ok = ok and sasaki_check(deformed).is_sasakian == sasaki_check(geo).is_sasakian
            for a, b in params:
                p = TksParams(a, b)
                q = transported_params(p, t)
                transport = max(transport, abs(q.alpha - a / t), abs(q.beta - b / math.sqrt(t)))
                for psi in solve_constant_frame(geo, rep, p).fields:
                    moved, q = transport_tks(rep, psi, p, t, geo)
                    transport = max(transport, *tks_residual(deformed, rep, moved, q))
            c0 = entry.manifold.structure_constants
            both = d_homothety(d_homothety(entry.manifold, t), 1.5).structure_constants
            group = max(group, float(np.max(np.abs(both - d_homothety(entry.manifold, 1.5 * t).structure_constants))))
            back = d_homothety(d_homothety(entry.manifold, t), 1 / t).structure_constants
            group = max(group, float(np.max(np.abs(back - c0))))
            p = transported_params(transported_params(TksParams(-1.0, 0.7), t), 1 / t)
            group = max(group, abs(p.alpha + 1.0), abs(p.beta - 0.7))
    ok = ok and transport <= HOMOGENEOUS_TOL and group <= GROUP_TOL
    return ok, f"transport {transport:.2e} (tol {HOMOGENEOUS_TOL:g}); group laws {group:.2e} (tol {GROUP_TOL:g})"


def criterion_8():
    rep = build_rep(3)
    geo = levi_civita(zoo.round_s3().manifold)
    p = TksParams(-1.0, 0.0)
    fields = solve_constant_frame(geo, rep, p).fields
    results = {}
    for r, which in ((0, "sigma0"), (1, "sigma_m")):
        proj = omega_eigenprojectors(rep, geo.omega[0], 1)[r]
        psi = max((f.map_pointwise(proj) for f in fields), key=lambda f: float(np.max(f.norms())))
        results[which] = sasaki_killing_bridge(geo, rep, psi, -1.0, which, 1)
    ok = all(res <= HOMOGENEOUS_TOL and abs(t - 1.0) <= 1e-12 for t, res in results.values())
    text = "; ".join(f"{k}: t={t:g} residual={res:.2e}" for k, (t, res) in results.items())
    return ok, text


def criterion_9():
    names = [n for n in dir(test_properties) if n.startswith("test_")]
    failed = []
    for n in names:
        try:
            getattr(test_properties, n)()
        except Exception as exc:  # report, do not stop the summary
            failed.append(f"{n}: {type(exc).__name__}")
    runs = test_properties.PROPERTY.max_examples
    return not failed, f"{len(names)} properties x {runs} derandomized examples" + (f"; failed {failed}" if failed else "")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def _line(index, ok, detail):
    return f"criterion {index}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("index", range(1, 10))
def test_criterion(index, capsys):
    ok, detail = CRITERIA[index - 1]()
    with capsys.disabled():
        print("\n" + _line(index, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [fn() for fn in CRITERIA]
    for i, (ok, detail) in enumerate(results, 1):
        print(_line(i, ok, detail))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
