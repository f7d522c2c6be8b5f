"""D-homothetic deformations and the bridge to classical Killing spinors.

Deforming by ``t > 0`` rescales the metric by ``t^2`` along the flow and by
``t`` on the normal bundle.  The new orthonormal frame is
``(xi / t, e_a / sqrt(t))``; spinors keep their components in that frame,
so every rescaling is carried by the frame.
"""

from __future__ import annotations

import math

import numpy as np

from .clifford import CliffordRep, omega_eigenprojectors
from .flow_frame import Chart, FlowGeometry, FrameManifold, Sector, levi_civita, sasaki_check
from .spin_conn import SpinorField, TksParams, ambient_spinor_derivative
from .tks import tks_residual

DEFORMATION_TOL = 1e-9


def _check_t(t: float) -> None:
    if not t > 0:
        raise ValueError(f"deformation parameter must be positive, got {t!r}")


def frame_scales(ambient_dim: int, t: float) -> np.ndarray:
    """Factors multiplying each frame vector: ``1/t`` on the flow, ``1/sqrt(t)`` on the normal part."""
    _check_t(t)
    s = np.full(ambient_dim, 1.0 / math.sqrt(t))
    s[0] = 1.0 / t
    return s


def _scale_brackets(c: np.ndarray, s: np.ndarray) -> np.ndarray:
    # [s_i e_i, s_j e_j] = s_i s_j c_ijk e_k = (s_i s_j / s_k) c_ijk (s_k e_k)
    return c * s[:, None, None] * s[None, :, None] / s[None, None, :]


def _deformed_name(name: str, t: float) -> str:
    return f"{name}@t={t:.12g}"


def d_homothety(mf: FrameManifold | FlowGeometry, t: float, check: bool = True) -> FrameManifold:
    """Frame manifold of the deformed metric.

    With ``check`` the deformed tensors are compared with the original:
    same O'Neill endomorphism, mean curvature divided by ``t`` (so its
    frame components shrink by ``sqrt(t)``) and transversal connection
    coefficients scaling with the frame.
    """
    geo = mf if isinstance(mf, FlowGeometry) else None
    mf = mf.manifold if geo is not None else mf
    s = frame_scales(mf.ambient_dim, t)
    params = dict(mf.parameters)
    params["deformation"] = params.get("deformation", 1.0) * t
    if mf.kind == "homogeneous":
        sectors = tuple(Sector(sec.label, tuple(si * g for si, g in zip(s, sec.generators)), sec.multiplicity)
                        for sec in mf.sectors)
        out = FrameManifold(_deformed_name(mf.name, t), mf.ambient_dim, "homogeneous",
                            _scale_brackets(mf.structure_constants, s), sectors=sectors,
                            plane_waves=mf.plane_waves, parameters=params)
    else:
        ch = mf.chart
        frame = (lambda x, f=ch.frame: s[:, None] * np.asarray(f(x), dtype=float))
        brackets = None
        if ch.brackets is not None:
            brackets = (lambda x, b=ch.brackets: _scale_brackets(np.asarray(b(x), dtype=float), s))
        chart = Chart(ch.family, frame, ch.samples, brackets, dict(ch.parameters))
        out = FrameManifold(_deformed_name(mf.name, t), mf.ambient_dim, "chart", chart=chart, parameters=params)
    if check:
        before = geo if geo is not None else levi_civita(mf)
        defect = deformation_defect(before, levi_civita(out), t)
        if defect > DEFORMATION_TOL:
            raise ArithmeticError(f"deformed tensors violate the deformation rules (defect {defect:.3e})")
    return out


def deformation_defect(geo: FlowGeometry, deformed: FlowGeometry, t: float) -> float:
    """Largest deviation from ``h' = h``, ``kappa' = kappa/t`` and ``nabla' = nabla`` on the normal bundle."""
    s = frame_scales(geo.ambient_dim, t)
    worst = float(np.max(np.abs(deformed.hmat - geo.hmat), initial=0.0))
    worst = max(worst, float(np.max(np.abs(deformed.kappa - geo.kappa / math.sqrt(t)), initial=0.0)))
    theta = geo.transversal_coefficients() * s[None, :, None, None]
    worst = max(worst, float(np.max(np.abs(deformed.transversal_coefficients() - theta), initial=0.0)))
    return worst


def transported_params(p: TksParams, t: float) -> TksParams:
    _check_t(t)
    return TksParams(p.alpha / t, p.beta / math.sqrt(t))


def transport_tks(rep: CliffordRep, psi: SpinorField, p: TksParams, t: float,
                  geo: FlowGeometry | None = None, tol: float = 1e-9) -> tuple[SpinorField, TksParams]:
    """Carry a TKS to the deformed metric.

    Components stay the same; frame derivatives pick up the frame scales.
    When ``geo`` is given the input is first checked to be a TKS for ``p``.
    """
    s = frame_scales(rep.ambient_dim, t)
    if geo is not None:
        r_xi, r_q = tks_residual(geo, rep, psi, p)
        if max(r_xi, r_q) > tol:
            raise ValueError(f"input is not a TKS for {p} (residual {max(r_xi, r_q):.3e})")
    sector = psi.sector
    if sector is not None:
        sector = Sector(sector.label, tuple(si * g for si, g in zip(s, sector.generators)), sector.multiplicity)
    derivs = psi.derivatives * s[:, None, None]
    out = SpinorField(rep, psi.values.copy(), derivs, sector, psi.weight, psi.function)
    return out, transported_params(p, t)


def killing_residual(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, killing_number: float) -> float:
    """``max |nabla^M_X psi - lambda X·psi|`` over frame directions and rows."""
    worst = 0.0
    for x in range(rep.ambient_dim):
        r = ambient_spinor_derivative(geo, rep, psi, x) - killing_number * psi.values @ rep.generators[x].T
        worst = max(worst, float(np.max(np.linalg.norm(r, axis=-1))))
    return worst


def sasaki_killing_bridge(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, alpha: float,
                          which: str, m: int, tol: float = 1e-9) -> tuple[float, float]:
    """Deform so that an ``(alpha, 0)``-TKS in an extreme eigenbundle becomes a Killing spinor.

    ``which`` is ``"sigma0"`` (needs ``alpha < 0``, Killing number ``-1/2``)
    or ``"sigma_m"`` (needs ``(-1)^m alpha > 0``, Killing number
    ``(-1)^m / 2``).  Returns the deformation parameter and the classical
    Killing residual on the deformed manifold.
    """
    if which not in ("sigma0", "sigma_m"):
        raise ValueError("which must be 'sigma0' or 'sigma_m'")
    if not sasaki_check(geo).is_sasakian:
        raise ValueError("the bridge needs a Sasakian flow")
    alpha = float(np.real(alpha))
    sign = 1 if which == "sigma0" else (-1) ** m
    if which == "sigma0" and not alpha < 0:
        raise ValueError("sigma0 needs alpha < 0")
    if which == "sigma_m" and not sign * alpha > 0:
        raise ValueError("sigma_m needs (-1)^m alpha > 0")
    r_index = 0 if which == "sigma0" else m
    proj = omega_eigenprojectors(rep, geo.omega[0], m)[r_index]
    values = psi.values
    if not np.max(psi.norms()) > tol:
        raise ValueError("zero spinor")
    if np.max(np.linalg.norm(values - values @ proj.T, axis=-1)) > tol * max(1.0, float(np.max(psi.norms()))):
        raise ValueError(f"spinor is not in the r={r_index} eigenbundle of the Kähler form")
    t = (-2 * alpha / (m + 1)) if which == "sigma0" else (2 * alpha * (-1) ** m / (m + 1))
    deformed = levi_civita(d_homothety(geo, t))
    moved, _ = transport_tks(rep, psi, TksParams(alpha, 0.0), t, geo, tol)
    number = -0.5 if which == "sigma0" else 0.5 * (-1) ** m
    return t, killing_residual(deformed, rep, moved, number)
