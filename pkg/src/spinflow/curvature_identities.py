"""Integrability identities for transversal Killing spinors.

Each checker evaluates both sides of an identity from flow data and the
curvature of the frame, and reports the largest spinor-norm (or tensor)
difference.  The checkers never solve anything: they are meant to be fed
spinors produced by :mod:`spinflow.tks` and verified there.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .clifford import CliffordRep, omega_eigenprojectors
from .flow_frame import (
    FLOW_TOL,
    FlowGeometry,
    ambient_derivative_kappa,
    curvature,
    divergence_kappa,
    frame_derivative_b,
    levi_civita,
    sasaki_check,
    tensor_derivative_h,
)
from .spin_conn import SpinorField, TksParams, cliff, full_vector, omega_matrices


def _act(ops: np.ndarray, values: np.ndarray) -> np.ndarray:
    return (ops @ values[..., None])[..., 0]


def _norm(x: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(x, axis=-1), initial=0.0))


def _tensor_terms(geo: FlowGeometry):
    dh = tensor_derivative_h(geo)
    # dh_vec[s, x, k] = (nabla_{e_x} h)(e_k) as a full frame vector
    dh_vec = np.zeros(dh.shape[:2] + (geo.n, geo.ambient_dim))
    dh_vec[..., 1:] = np.swapaxes(dh, -1, -2)
    return dh_vec, ambient_derivative_kappa(geo)


def thm_main_residuals(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, p: TksParams) -> dict:
    """Residuals of the Ricci(xi), Ricci(Z) and scalar curvature identities.

    Returns ``{"ric_xi": float, "ric_Z": [float per normal direction],
    "scal": float}``.
    """
    if geo.ambient_dim != rep.ambient_dim:
        raise ValueError("geometry and representation dimensions differ")
    n = geo.n
    al, be = p.alpha, p.beta
    g = rep.generators
    xi = g[0]
    eye = rep.identity
    curv = curvature(geo)
    dh_vec, dk = _tensor_terms(geo)
    h_sq = np.sum(geo.hmat**2, axis=(1, 2))[:, None, None]
    k_sq = np.sum(geo.kappa**2, axis=1)[:, None, None]
    kap = cliff(rep, full_vector(geo.kappa))
    hkap = cliff(rep, full_vector(np.einsum("sba,sa->sb", geo.hmat, geo.kappa)))
    om = omega_matrices(geo, rep)
    e = [g[a] for a in range(1, n + 1)]
    cl_dh = cliff(rep, dh_vec)  # (S, d, n, N, N)
    cl_dk = cliff(rep, dk)  # (S, d, N, N)
    vals = psi.values

    ric_xi = cliff(rep, curv.ricci[:, 0])
    rhs = ((h_sq - k_sq) * xi + 4 * n * al * be * eye + 2 * al * xi @ kap + kap @ om + 4 * hkap)
    for j in range(n):
        rhs = rhs - xi @ e[j] @ cl_dk[:, j + 1]
        rhs = rhs + xi @ e[j] @ cl_dh[:, 0, j]
        for k in range(n):
            rhs = rhs + 0.5 * e[j] @ e[k] @ cl_dh[:, j + 1, k]
    res_xi = _norm(_act(ric_xi - rhs, vals))

    res_z = []
    for a in range(n):
        z_vec = np.zeros(geo.ambient_dim)
        z_vec[a + 1] = 1.0
        z = g[a + 1]
        hz_full = full_vector(geo.hmat[:, :, a])
        hz = cliff(rep, hz_full)
        h2z = cliff(rep, full_vector(np.einsum("sbc,sc->sb", geo.hmat, geo.hmat[:, :, a])))
        lhs = cliff(rep, curv.ricci[:, a + 1])
        rhs = (-4 * al * (hz + be * z) @ xi + 2 * h2z + 4 * (n - 1) * be**2 * z
               - cl_dh[:, 0, a]
               + geo.kappa[:, a, None, None] * (-2 * al * eye + xi @ om - kap)
               + cl_dk[:, a + 1] - hz @ xi @ kap)
        for j in range(n):
            rhs = rhs + 0.5 * xi @ e[j] @ cl_dh[:, a + 1, j] - xi @ e[j] @ cl_dh[:, j + 1, a]
        res_z.append(_norm(_act(lhs - rhs, vals)))

    lhs = curv.scal[:, None, None] * eye
    rhs = ((4 * n * (n - 1) * be**2 - h_sq - 2 * k_sq) * eye - 8 * n * al * be * xi + 8 * al * xi @ om
           + 4 * al * kap + 2 * xi @ kap @ om)
    for j in range(n):
        rhs = rhs + 2 * e[j] @ cl_dh[:, 0, j] - 2 * e[j] @ cl_dk[:, j + 1]
        for k in range(n):
            rhs = rhs - xi @ e[j] @ e[k] @ cl_dh[:, k + 1, j]
    res_scal = _norm(_act(lhs - rhs, vals))
    return {"ric_xi": res_xi, "ric_Z": res_z, "scal": res_scal}


def local_product_residual(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, p: TksParams) -> float:
    """Scalar identity specialised to ``h = 0`` and ``kappa = 0``."""
    if np.max(np.abs(geo.hmat), initial=0.0) > FLOW_TOL or np.max(np.abs(geo.kappa), initial=0.0) > FLOW_TOL:
        raise ValueError("not a local product")
    n = geo.n
    scal = curvature(geo).scal[:, None, None]
    op = scal * rep.identity - 4 * n * (n - 1) * p.beta**2 * rep.identity + 8 * n * p.alpha * p.beta * rep.generators[0]
    return _norm(_act(op, psi.values))


# three-dimensional flows ---------------------------------------------------

def _require_real_3d(geo: FlowGeometry, p: TksParams) -> None:
    if geo.ambient_dim != 3:
        raise ValueError("three-dimensional flow expected")
    if not p.is_real:
        raise ValueError("real (alpha, beta) expected")


def _db_q_field(geo: FlowGeometry, x: np.ndarray) -> np.ndarray:
    """Normal gradient of ``b`` at one chart point (via a one-point geometry)."""
    mf = geo.manifold
    one = dataclasses.replace(mf, chart=dataclasses.replace(mf.chart, samples=np.asarray(x, dtype=float)[None]))
    return frame_derivative_b(levi_civita(one))[0, 1:]


def _db_q_derivatives(geo: FlowGeometry, step: float = 1e-3) -> np.ndarray:
    """``e_x(db|_Q)`` components, shape ``(S, 3, 2)``; zero on homogeneous frames."""
    if geo.is_homogeneous:
        return np.zeros((1, 3, 2))
    out = np.empty((geo.n_samples, 3, 2))
    for s, x in enumerate(geo.points):
        frame = np.asarray(geo.manifold.chart.frame(x), dtype=float)
        partial = np.empty((3, 2))
        for mu in range(3):
            dx = np.zeros(3)
            dx[mu] = step
            partial[mu] = (_db_q_field(geo, x + dx) - _db_q_field(geo, x - dx)) / (2 * step)
        out[s] = frame @ partial
    return out


def dim3_identities(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, p: TksParams) -> dict:
    """Residuals of the three-dimensional curvature formulas.

    Keys: ``alpha_kappa`` (``|alpha| max|kappa|``), ``dkappa`` (the
    two-form identity), ``scal``, ``ric_xi`` and ``ric_Z``.  ``psi`` is not
    used beyond signalling that a solution exists; pass the verified field.
    """
    _require_real_3d(geo, p)
    al, be = float(np.real(p.alpha)), float(np.real(p.beta))
    curv = curvature(geo)
    b = geo.b
    db = frame_derivative_b(geo)
    xi_b, db_q = db[:, 0], db[:, 1:]
    dk = ambient_derivative_kappa(geo)
    div_k = divergence_kappa(geo)
    J = geo.J
    kap = geo.kappa

    dkappa_12 = dk[:, 1, 2] - dk[:, 2, 1]
    res = {
        "alpha_kappa": abs(al) * float(np.max(np.abs(kap), initial=0.0)),
        "dkappa": float(np.max(np.abs(dkappa_12 - 2 * (xi_b - 4 * al * be)))),
        "scal": float(np.max(np.abs(curv.scal - 2 * (4 * be**2 - b**2 - 4 * al * b - div_k)))),
    }
    v = np.einsum("ab,sb->sa", J, 2 * b[:, None] * kap - db_q)
    ric_xi = np.zeros((geo.n_samples, 3))
    ric_xi[:, 0] = 2 * b**2 - div_k
    ric_xi[:, 1:] = v
    res["ric_xi"] = float(np.max(np.abs(curv.ricci[:, 0] - ric_xi)))
    worst = 0.0
    for a in range(2):
        z = np.eye(2)[a]
        rhs = np.zeros((geo.n_samples, 3))
        rhs[:, 1:] = (2 * (2 * be**2 - b**2 - 2 * al * b))[:, None] * z + (4 * al * be - xi_b)[:, None] * (J @ z)
        rhs[:, 0] = v[:, a]
        # transversal derivative of kappa is the normal part of the ambient one
        rhs[:, 1:] += dk[:, a + 1, 1:] - kap[:, a, None] * kap
        worst = max(worst, float(np.max(np.abs(curv.ricci[:, a + 1] - rhs))))
    res["ric_Z"] = worst
    return res


def dim3_minimal_identities(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, p: TksParams) -> dict:
    """Residuals of ``nabla_xi db|_Q = 0`` and ``div J(db|_Q) = -8 alpha beta (3b + 2 alpha)``."""
    _require_real_3d(geo, p)
    if np.max(np.abs(geo.kappa), initial=0.0) > FLOW_TOL:
        raise ValueError("minimal flow (kappa = 0) expected")
    al, be = float(np.real(p.alpha)), float(np.real(p.beta))
    b = geo.b
    db_q = frame_derivative_b(geo)[:, 1:]
    d_dbq = _db_q_derivatives(geo)
    theta = geo.transversal_coefficients()  # (S, x, a, b)
    conn = np.einsum("sa,sxab->sxb", db_q, theta)
    nabla_dbq = d_dbq + conn  # (S, x, 2): nabla_{e_x} db|_Q
    res_xi = float(np.max(np.abs(nabla_dbq[:, 0]), initial=0.0))
    J = geo.J
    # div of a normal field V: sum_a g(nabla_{e_a} V, e_a) plus g(nabla^M_xi V, xi) = -g(V, kappa) = 0
    nabla_jdb = np.einsum("ab,sxb->sxa", J, nabla_dbq)
    div = nabla_jdb[:, 1, 0] + nabla_jdb[:, 2, 1]
    res_div = float(np.max(np.abs(div + 8 * al * be * (3 * b + 2 * al))))
    return {"nabla_xi_db": res_xi, "div_J_db": res_div}


@dataclasses.dataclass(frozen=True)
class EtaEinstein:
    is_eta_einstein: bool
    lam: float | None
    mu: float | None


def eta_einstein(geo: FlowGeometry, tol: float = 1e-9) -> EtaEinstein:
    """Fit ``Ric = lam Id + mu xi⊗xi`` with constants, if possible."""
    ric = curvature(geo).ricci
    d = geo.ambient_dim
    lam = float(np.mean(ric[:, 1, 1]))
    mu = float(np.mean(ric[:, 0, 0])) - lam
    model = lam * np.eye(d)
    model[0, 0] += mu
    ok = bool(np.max(np.abs(ric - model)) <= tol * max(1.0, abs(lam), abs(mu)))
    return EtaEinstein(ok, lam if ok else None, mu if ok else None)


def sasaki_identities(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, p: TksParams, m: int) -> dict:
    """Residuals of the Sasakian specialisations, per eigencomponent.

    Also reports the eta-Einstein constants and, when ``alpha != 0``, the
    orthogonality ``g(Ric(Z), h(Z)) = 0`` and the Ricci eigenvalues forced by
    a nonzero component in the extreme eigenbundles.
    """
    report = sasaki_check(geo)
    if not report.is_sasakian:
        raise ValueError(f"not Sasakian: {report}")
    if geo.n != 2 * m:
        raise ValueError(f"normal rank {geo.n} does not match m={m}")
    al, be = p.alpha, p.beta
    g = rep.generators
    xi = g[0]
    eye = rep.identity
    curv = curvature(geo)
    om = omega_matrices(geo, rep)
    vals = psi.values
    out = {}
    worst = 0.0
    for a in range(2 * m):
        hz = cliff(rep, full_vector(geo.hmat[:, :, a]))
        z = g[a + 1]
        rhs = -4 * al * (hz + be * z) @ xi + (4 * (2 * m - 1) * be**2 - 2) * z
        worst = max(worst, _norm(_act(cliff(rep, curv.ricci[:, a + 1]) - rhs, vals)))
    out["ric_Z"] = worst
    out["ric_xi"] = _norm(_act(cliff(rep, curv.ricci[:, 0]) - 2 * m * xi, vals))
    scal_rhs = 2 * m * (4 * (2 * m - 1) * be**2 - 1) * eye + 8 * al * xi @ om
    out["scal"] = _norm(_act(curv.scal[:, None, None] * eye - scal_rhs, vals))

    projectors = omega_eigenprojectors(rep, geo.omega[0], m)
    per_r = []
    for r, proj in enumerate(projectors):
        comp = vals @ proj.T
        coeff = 2 * m * (4 * (2 * m - 1) * be**2 - 1) + (-1) ** r * 8 * al * (2 * r - m)
        per_r.append(_norm(curv.scal[:, None] * comp - coeff * comp))
    out["scal_components"] = per_r
    ee = eta_einstein(geo)
    out["eta_einstein"] = ee.is_eta_einstein
    out["lambda"], out["mu"] = ee.lam, ee.mu
    if al != 0:
        ric_q = curv.ricci[:, 1:, 1:]
        worst = 0.0
        for a in range(2 * m):
            worst = max(worst, float(np.max(np.abs(np.einsum("sb,sb->s", ric_q[:, a], geo.hmat[:, :, a])))))
        out["ric_perp_h"] = worst
        for r, label, value in ((0, "ric_sigma0", -2 - 4 * al), (m, "ric_sigma_m", -2 + 4 * (-1) ** m * al)):
            comp = vals @ projectors[r].T
            if _norm(comp) > 1e-6:
                out[label] = float(np.max(np.abs(ric_q - value * np.eye(2 * m))))
    return out


def eta_einstein_equiv_3d(geo: FlowGeometry, tol: float = 1e-9) -> tuple[bool, bool, bool]:
    """Evaluate the three equivalent statements for a 3D minimal flow.

    ``(eta-Einstein, b constant, local product or Sasakian up to a
    D-homothetic deformation)``.
    """
    if geo.ambient_dim != 3:
        raise ValueError("three-dimensional flow expected")
    if np.max(np.abs(geo.kappa), initial=0.0) > tol:
        raise ValueError("minimal flow expected")
    eta = eta_einstein(geo, tol).is_eta_einstein
    b = geo.b
    b_const = bool(np.ptp(b) <= tol and np.max(np.abs(frame_derivative_b(geo)), initial=0.0) <= 1e3 * tol)
    product = bool(np.max(np.abs(b)) <= tol)
    # b constant and nonzero: h parallel, and h^2 = -b^2 Id becomes -Id after
    # the deformation with t = b^2 followed by the homothety 1/b^2.
    sasaki_like = bool(b_const and np.min(np.abs(b)) > tol
                       and np.max(np.abs(tensor_derivative_h(geo)), initial=0.0) <= 1e3 * tol)
    return eta, b_const, product or sasaki_like
