"""Riemannian flows described in an orthonormal frame.

Frame index 0 is the unit vector field spanning the flow; indices ``1..n``
span the normal bundle.  Connection coefficients are stored as
``gamma[..., i, j, k] = g(nabla_{e_i} e_j, e_k)`` and structure constants as
``c[..., i, j, k]`` with ``[e_i, e_j] = c[i, j, k] e_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FLOW_TOL = 1e-9
FD_STEP = 1e-4
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


class FlowViolation(ValueError):
    """The frame data does not describe a Riemannian flow."""


@dataclass(frozen=True)
class Sector:
    """A finite-dimensional representation of the frame Lie algebra.

    On a Lie group with a left-invariant frame, the matrix coefficients
    ``g -> <u, pi(g) v>`` of a unitary representation span a space of
    functions on which each frame field acts through ``generators[i]``.
    Spinor fields with components in such a space turn the spinor
    equations into finite linear algebra.  ``multiplicity`` counts the
    independent choices of ``u`` (the dimension for an irreducible
    representation of a compact group).
    """

    label: str
    generators: tuple
    multiplicity: int = 1

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]


def trivial_sector(ambient_dim: int) -> Sector:
    zero = np.zeros((1, 1), dtype=complex)
    return Sector("constant", tuple(zero for _ in range(ambient_dim)), 1)


def character_sector(wave: np.ndarray) -> Sector:
    """One-dimensional sector ``exp(i <wave, x>)`` of an abelian frame."""
    wave = np.asarray(wave, dtype=float)
    gens = tuple(np.array([[1j * w]]) for w in wave)
    return Sector("wave(" + ",".join(f"{w:.6g}" for w in wave) + ")", gens, 1)


def sector_defect(sector: Sector, c: np.ndarray) -> float:
    """How far the sector is from a representation of the bracket ``c``."""
    gens = np.asarray(sector.generators)
    worst = 0.0
    d = len(gens)
    for i in range(d):
        for j in range(d):
            lhs = gens[i] @ gens[j] - gens[j] @ gens[i]
            rhs = np.tensordot(c[i, j], gens, axes=1)
            worst = max(worst, float(np.max(np.abs(lhs - rhs), initial=0.0)))
    return worst


@dataclass(frozen=True)
class Chart:
    """Frame fields on a coordinate chart.

    ``frame(x)`` returns the ``(d, d)`` matrix whose i-th row holds the
    coordinate components of ``e_i`` at ``x``.  ``brackets(x)`` returns the
    structure functions; when omitted they are obtained by central
    differences of the frame.
    """

    family: str
    frame: Callable[[np.ndarray], np.ndarray]
    samples: np.ndarray
    brackets: Callable[[np.ndarray], np.ndarray] | None = None
    parameters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FrameManifold:
    """A Riemannian flow given by an orthonormal frame ``(xi, e_1, ..., e_n)``."""

    name: str
    ambient_dim: int
    kind: str
    structure_constants: np.ndarray | None = None
    chart: Chart | None = None
    sectors: tuple = ()
    plane_waves: bool = False
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("homogeneous", "chart"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "homogeneous":
            c = np.asarray(self.structure_constants, dtype=float)
            d = self.ambient_dim
            if c.shape != (d, d, d):
                raise ValueError(f"structure constants must have shape {(d, d, d)}, got {c.shape}")
            if not np.allclose(c, -c.transpose(1, 0, 2), atol=1e-12, rtol=0):
                raise ValueError("structure constants are not antisymmetric in the lower indices")
            object.__setattr__(self, "structure_constants", c)
            if not self.sectors:
                object.__setattr__(self, "sectors", (trivial_sector(d),))
        elif self.chart is None:
            raise ValueError("chart kind needs chart data")

    @property
    def n(self) -> int:
        return self.ambient_dim - 1

    @property
    def is_abelian(self) -> bool:
        return self.kind == "homogeneous" and not np.any(self.structure_constants)

    def sample_points(self) -> np.ndarray:
        if self.kind == "homogeneous":
            return np.zeros((1, self.ambient_dim))
        return np.asarray(self.chart.samples, dtype=float)


def jacobi_defect(c: np.ndarray) -> float:
    """Largest violation of the Jacobi identity for constant brackets."""
    # [[e_i,e_j],e_k] + cyclic, expressed in the frame
    t = np.einsum("ijl,lkm->ijkm", c, c)
    cyc = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(cyc), initial=0.0))


def koszul(c: np.ndarray) -> np.ndarray:
    """Levi-Civita coefficients of an orthonormal frame from its brackets."""
    c = np.asarray(c)
    # gamma_ijk = 1/2 (c_ijk - c_jki + c_kij), valid pointwise on leading axes
    return 0.5 * (c - np.moveaxis(c, -1, -3) + np.moveaxis(c, -3, -1))


def chart_brackets(chart: Chart, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Structure functions at ``x``, analytic when available."""
    if chart.brackets is not None:
        return np.asarray(chart.brackets(x), dtype=float)
    return fd_brackets(chart.frame, x, step)


def fd_brackets(frame: Callable, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    e = np.asarray(frame(x), dtype=float)
    d = len(x)
    # de[mu, i, nu] = d_mu of the nu-component of e_i
    de = np.empty((d, d, d))
    for mu in range(d):
        dx = np.zeros(d)
        dx[mu] = step
        de[mu] = (np.asarray(frame(x + dx)) - np.asarray(frame(x - dx))) / (2 * step)
    # [e_i, e_j]^nu = e_i^mu d_mu e_j^nu - e_j^mu d_mu e_i^nu
    directional = np.einsum("im,mjn->ijn", e, de)
    bracket = directional - directional.transpose(1, 0, 2)
    return bracket @ np.linalg.inv(e)


@dataclass(frozen=True)
class FlowGeometry:
    """Flow tensors at each sample point (leading axis).

    ``hmat[s]`` is the O'Neill tensor as an endomorphism of the normal
    bundle acting on component columns, ``kappa[s]`` the mean curvature,
    ``omega[s]`` the associated two-form extended by zero on the flow
    direction, and ``dgamma[s, x]`` the derivative of the connection
    coefficients along ``e_x`` (identically zero for homogeneous frames).
    """

    manifold: FrameManifold
    points: np.ndarray
    c: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    hmat: np.ndarray
    kappa: np.ndarray
    omega: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.manifold.ambient_dim

    @property
    def n(self) -> int:
        return self.manifold.ambient_dim - 1

    @property
    def n_samples(self) -> int:
        return self.gamma.shape[0]

    @property
    def is_homogeneous(self) -> bool:
        return self.manifold.kind == "homogeneous"

    @property
    def b(self) -> np.ndarray:
        """The function ``b`` with ``h = b J`` (ambient dimension 3 only)."""
        if self.ambient_dim != 3:
            raise ValueError("b is only defined for three-dimensional flows")
        return self.hmat[:, 1, 0]

    @property
    def J(self) -> np.ndarray:
        if self.ambient_dim != 3:
            raise ValueError("J is only defined for three-dimensional flows")
        return J2.copy()

    def dhmat(self) -> np.ndarray:
        """Frame derivatives ``e_x(hmat)`` with shape ``(S, d, n, n)``."""
        # hmat[b, a] = gamma[a, 0, b] on normal indices
        return np.swapaxes(self.dgamma[:, :, 1:, 0, 1:], -1, -2)

    def dkappa(self) -> np.ndarray:
        """Frame derivatives ``e_x(kappa)`` with shape ``(S, d, n)``."""
        return self.dgamma[:, :, 0, 0, 1:]

    def transversal_coefficients(self) -> np.ndarray:
        """``theta[s, x, a, b] = g(nabla_{e_x} e_a, e_b)`` for the transversal connection."""
        theta = self.gamma[:, :, 1:, 1:].copy()
        theta[:, 0] -= np.swapaxes(self.hmat, -1, -2)
        return theta


def _gamma_at(mf: FrameManifold, x: np.ndarray) -> np.ndarray:
    return koszul(chart_brackets(mf.chart, x))


def levi_civita(mf: FrameManifold) -> FlowGeometry:
    """Connection and flow tensors; raises ``FlowViolation`` if ``h`` is not skew."""
    d = mf.ambient_dim
    points = mf.sample_points()
    if mf.kind == "homogeneous":
        c = mf.structure_constants[None]
        gamma = koszul(c)
        dgamma = np.zeros((1, d) + (d, d, d))
    else:
        c = np.array([chart_brackets(mf.chart, x) for x in points])
        gamma = koszul(c)
        dgamma = np.empty((len(points), d, d, d, d))
        for s, x in enumerate(points):
            e = np.asarray(mf.chart.frame(x), dtype=float)
            dcoord = np.empty((d, d, d, d))
            for mu in range(d):
                dx = np.zeros(d)
                dx[mu] = FD_STEP
                dcoord[mu] = (_gamma_at(mf, x + dx) - _gamma_at(mf, x - dx)) / (2 * FD_STEP)
            dgamma[s] = np.einsum("im,mjkl->ijkl", e, dcoord)
    hmat = np.swapaxes(gamma[:, 1:, 0, 1:], -1, -2)
    kappa = gamma[:, 0, 0, 1:].copy()
    skew = np.max(np.abs(hmat + np.swapaxes(hmat, -1, -2)), initial=0.0)
    if skew > FLOW_TOL * max(1.0, np.max(np.abs(hmat), initial=0.0)):
        raise FlowViolation(f"O'Neill tensor is not skew-symmetric (defect {skew:.3e}); not a Riemannian flow")
    omega = np.zeros((len(points), d, d))
    omega[:, 1:, 1:] = np.swapaxes(hmat, -1, -2)
    return FlowGeometry(mf, points, c, gamma, dgamma, hmat, kappa, omega)


def oneill_tensor(geo: FlowGeometry) -> np.ndarray:
    """``h[s, a, b] = g(nabla^M_{e_a} xi, e_b)`` on normal indices."""
    return np.swapaxes(geo.hmat, -1, -2).copy()


def mean_curvature(geo: FlowGeometry) -> np.ndarray:
    return geo.kappa.copy()


@dataclass(frozen=True)
class Curvature:
    """``riemann[s, i, j, k, l] = g(R(e_i, e_j) e_k, e_l)`` with ``R = [nabla, nabla] - nabla_[,]``."""

    riemann: np.ndarray
    ricci: np.ndarray
    scal: np.ndarray

    def bianchi_defect(self) -> float:
        r = self.riemann
        cyc = r + np.transpose(r, (0, 2, 3, 1, 4)) + np.transpose(r, (0, 3, 1, 2, 4))
        return float(np.max(np.abs(cyc)))


def curvature(geo: FlowGeometry) -> Curvature:
    g, dg, c = geo.gamma, geo.dgamma, geo.c
    riem = (
        dg
        - np.swapaxes(dg, 1, 2)
        + np.einsum("sjkl,silm->sijkm", g, g)
        - np.einsum("sikl,sjlm->sijkm", g, g)
        - np.einsum("sijl,slkm->sijkm", c, g)
    )
    ric = np.einsum("sijki->sjk", riem)
    ric = 0.5 * (ric + np.swapaxes(ric, 1, 2))
    return Curvature(riem, ric, np.trace(ric, axis1=1, axis2=2))


def transversal_derivative(geo: FlowGeometry, x_index: int, z, dz=None) -> np.ndarray:
    """Transversal covariant derivative of a normal vector field along ``e_x``.

    ``z`` holds normal components per sample point (shape ``(S, n)`` or
    ``(n,)`` for a field with constant components) and ``dz`` the plain
    derivatives ``e_x(z)``.  The result has shape ``(S, n)``.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != geo.n:
        if z.shape[-1] == geo.ambient_dim:
            if np.any(np.abs(z[..., 0]) > FLOW_TOL):
                raise ValueError("field is not orthogonal to the flow")
            z = z[..., 1:]
        else:
            raise ValueError(f"normal field with {geo.n} components expected")
    z = np.broadcast_to(z, (geo.n_samples, geo.n))
    theta = geo.transversal_coefficients()[:, x_index]
    out = np.einsum("sa,sab->sb", z, theta)
    if dz is not None:
        out = out + np.asarray(dz)
    return out


def tensor_derivative_h(geo: FlowGeometry) -> np.ndarray:
    """``(nabla_{e_x} h)`` as endomorphism matrices, shape ``(S, d, n, n)``."""
    theta = geo.transversal_coefficients()
    conn = np.swapaxes(theta, -1, -2)
    h = geo.hmat[:, None]
    return geo.dhmat() + conn @ h - h @ conn


def ambient_derivative_kappa(geo: FlowGeometry) -> np.ndarray:
    """``nabla^M_{e_x} kappa`` as full frame vectors, shape ``(S, d, d)``."""
    dk = np.zeros((geo.n_samples, geo.ambient_dim, geo.ambient_dim))
    dk[:, :, 1:] = geo.dkappa()
    return dk + np.einsum("sa,sxak->sxk", geo.kappa, geo.gamma[:, :, 1:, :])


def divergence_kappa(geo: FlowGeometry) -> np.ndarray:
    return np.trace(ambient_derivative_kappa(geo), axis1=1, axis2=2)


@dataclass(frozen=True)
class SasakiReport:
    is_minimal: bool
    is_almost_hermitian: bool
    is_h_parallel: bool

    @property
    def is_sasakian(self) -> bool:
        return self.is_minimal and self.is_almost_hermitian and self.is_h_parallel


def sasaki_check(geo: FlowGeometry, tol: float = FLOW_TOL) -> SasakiReport:
    eye = np.eye(geo.n)
    minimal = bool(np.max(np.abs(geo.kappa), initial=0.0) <= tol)
    hermitian = bool(np.max(np.abs(geo.hmat @ geo.hmat + eye), initial=0.0) <= tol)
    parallel = bool(np.max(np.abs(tensor_derivative_h(geo)), initial=0.0) <= tol)
    return SasakiReport(minimal, hermitian, parallel)


def frame_derivative_b(geo: FlowGeometry) -> np.ndarray:
    """``e_x(b)`` for three-dimensional flows, shape ``(S, 3)``."""
    return geo.dhmat()[:, :, 1, 0]


def dual_gradient_b(geo: FlowGeometry) -> np.ndarray:
    """Normal part of the gradient of ``b``, shape ``(S, 2)``."""
    return frame_derivative_b(geo)[:, 1:]
