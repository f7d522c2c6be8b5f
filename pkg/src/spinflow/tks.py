"""Transversal Killing spinors: residuals, kernels, scans and flat solutions.

A transversal Killing spinor with constants ``(alpha, beta)`` satisfies
``nabla_xi psi = alpha xi·psi`` and ``nabla_Z psi = beta xi·Z·psi`` for
every normal ``Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordRep, intertwiner
from .flow_frame import FlowGeometry, Sector, character_sector
from .spin_conn import (
    SpinorField,
    TksParams,
    all_derivatives,
    chart_field,
    modified_operators,
    sector_field,
    transversal_operators,
)

KERNEL_RTOL = 1e-8


def tks_residual(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, p: TksParams) -> tuple[float, float]:
    """Largest spinor-norm defect of the two equations over rows and directions."""
    ops = transversal_operators(geo, rep)
    der = all_derivatives(ops, psi)
    g = rep.generators
    r_xi = der[0] - p.alpha * psi.values @ g[0].T
    r_q = [der[a] - p.beta * psi.values @ (g[0] @ g[a]).T for a in range(1, rep.ambient_dim)]
    worst_q = max((float(np.max(np.linalg.norm(r, axis=-1))) for r in r_q), default=0.0)
    return float(np.max(np.linalg.norm(r_xi, axis=-1))), worst_q


def modified_residual(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, p: TksParams) -> float:
    """Largest norm of the modified-connection derivative over all directions."""
    der = all_derivatives(modified_operators(geo, rep, p), psi)
    return float(np.max(np.linalg.norm(der, axis=-1)))


def xi_flip(rep: CliffordRep, psi: SpinorField) -> SpinorField:
    """``xi·psi``, a TKS for ``(alpha, -beta)`` whenever ``psi`` is one for ``(alpha, beta)``."""
    return psi.map_pointwise(rep.generators[0])


@dataclass(frozen=True)
class Kernel:
    """Solution space found by :func:`solve_constant_frame`.

    ``fields`` holds one orthonormal coefficient vector per kernel direction
    of each sector; ``dim`` also counts the multiplicity of each sector, so
    it is the dimension of the space of spinor fields.
    """

    params: TksParams
    dim: int
    fields: tuple
    by_sector: dict = field(default_factory=dict)


def _null_space(matrix: np.ndarray, rtol: float = KERNEL_RTOL) -> np.ndarray:
    _, s, vh = np.linalg.svd(matrix)
    # floor of 1 so round-off in an all-but-zero system is not counted as rank
    scale = max(s[0], 1.0) if s.size else 1.0
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].conj().T


def sector_system(ops: np.ndarray, sector: Sector) -> np.ndarray:
    """Stacked linear conditions ``(rho_x ⊗ 1 + 1 ⊗ B_x) Psi = 0``."""
    n = ops.shape[-1]
    eye_n = np.eye(n)
    eye_v = np.eye(sector.dim)
    return np.vstack([np.kron(rho, eye_n) + np.kron(eye_v, ops[x]) for x, rho in enumerate(sector.generators)])


def plane_wave_sectors(ops: np.ndarray, tol: float = 1e-9) -> list[Sector]:
    """Characters ``exp(i <k, x>)`` with real ``k`` carrying solutions on an abelian frame.

    A constant vector ``v`` times the character solves the system iff
    ``B_x v = -i k_x v`` for every direction, i.e. ``v`` is a joint
    eigenvector of the commuting-on-solutions operators ``B_x`` with purely
    imaginary eigenvalues.
    """
    d, n = ops.shape[0], ops.shape[-1]
    rng = np.random.default_rng(12345)
    weights = rng.normal(size=d)
    mix = np.tensordot(weights, ops, axes=1)
    evals, _ = np.linalg.eig(mix)
    found: list[np.ndarray] = []
    for mu in evals:
        basis = _null_space(mix - mu * np.eye(n))
        if basis.shape[1] == 0:
            continue
        restricted = [basis.conj().T @ ops[x] @ basis for x in range(d)]
        lam = np.array([np.trace(r) / basis.shape[1] for r in restricted])
        if np.max(np.abs(lam.real)) > tol * max(1.0, np.max(np.abs(lam))):
            continue
        wave = -lam.imag
        if not any(np.allclose(wave, w, atol=tol) for w in found):
            found.append(wave)
    found.sort(key=lambda w: tuple(np.round(w, 9)))
    return [character_sector(w) for w in found]


def solve_constant_frame(geo: FlowGeometry, rep: CliffordRep, p: TksParams, sectors=None) -> Kernel:
    """Solve the TKS equations exactly on a homogeneous manifold.

    The unknowns are spinor fields whose components lie in the sectors of
    the manifold (constants always included); abelian frames flagged with
    ``plane_waves`` also search all real characters.
    """
    if not geo.is_homogeneous:
        raise ValueError("solve_constant_frame needs a homogeneous manifold")
    ops = modified_operators(geo, rep, p)[0]
    mf = geo.manifold
    if sectors is None:
        sectors = list(mf.sectors)
        if mf.plane_waves:
            sectors = [s for s in sectors if s.label != "constant"] + plane_wave_sectors(ops)
    fields, by_sector, dim = [], {}, 0
    for sector in sectors:
        null = _null_space(sector_system(ops, sector))
        if null.shape[1]:
            by_sector[sector.label] = (null.shape[1], sector.multiplicity)
            dim += null.shape[1] * sector.multiplicity
            fields.extend(sector_field(rep, sector, col) for col in null.T)
    return Kernel(p, dim, tuple(fields), by_sector)


def scan_params(geo: FlowGeometry, rep: CliffordRep, alphas, betas) -> list[tuple[float, float, int]]:
    """Kernel dimension at every grid point, alpha-major."""
    if not geo.is_homogeneous:
        raise ValueError("scan_params needs a homogeneous manifold")
    return [(float(a), float(b), solve_constant_frame(geo, rep, TksParams(a, b)).dim) for a in alphas for b in betas]


def default_grid(lo: float = -2.0, hi: float = 2.0, step: float = 0.25) -> np.ndarray:
    count = int(round((hi - lo) / step))
    return lo + step * np.arange(count + 1)


# flat solutions -----------------------------------------------------------

def standard_clifford(rep: CliffordRep, v) -> np.ndarray:
    """Clifford action of a vector of R^3 in the standard module.

    The standard basis ``(E1, E2, E3)`` acts through the generators
    ``(e_1, e_2, e_0)``, so ``E3`` plays the flow direction of the oriented
    frame ``(E3, E1, E2)``.
    """
    g = rep.generators
    v = np.asarray(v, dtype=float)
    return v[0] * g[1] + v[1] * g[2] + v[2] * g[0]


def complete_frame(xi_bar) -> np.ndarray:
    """Oriented orthonormal frame ``(xi, q1, q2)`` of R^3 with first vector ``xi``."""
    xi = np.asarray(xi_bar, dtype=float)
    xi = xi / np.linalg.norm(xi)
    helper = np.eye(3)[int(np.argmin(np.abs(xi)))]
    q1 = helper - xi * (helper @ xi)
    q1 /= np.linalg.norm(q1)
    q2 = np.cross(xi, q1)
    return np.array([xi, q1, q2])


@dataclass(frozen=True)
class FlatSolution:
    """``x -> exp(-i a <x, xi>) psi_plus + exp(i a <x, xi>) psi_minus`` in the standard module."""

    rep: CliffordRep
    alpha: complex
    xi_bar: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray

    def __call__(self, x) -> np.ndarray:
        phase = np.asarray(x, dtype=float) @ self.xi_bar
        return (np.exp(-1j * self.alpha * phase)[..., None] * self.psi_plus
                + np.exp(1j * self.alpha * phase)[..., None] * self.psi_minus)

    def frame_components(self) -> np.ndarray:
        """Matrix turning standard-module spinors into components for :func:`complete_frame`."""
        frame = complete_frame(self.xi_bar)
        u = intertwiner(self.rep, [standard_clifford(self.rep, f) for f in frame])
        return u.conj().T

    def derivative(self, x) -> np.ndarray:
        """Cartesian partial derivatives, shape ``(..., 3, N)``."""
        phase = np.asarray(x, dtype=float) @ self.xi_bar
        rate = (-1j * self.alpha * np.exp(-1j * self.alpha * phase)[..., None] * self.psi_plus
                + 1j * self.alpha * np.exp(1j * self.alpha * phase)[..., None] * self.psi_minus)
        return self.xi_bar[:, None] * rate[..., None, :]

    def field(self, mf, exact: bool = True) -> SpinorField:
        """Sampled field on a flat chart built for the same ``xi_bar``.

        With ``exact`` the frame derivatives are evaluated in closed form,
        otherwise by central differences.
        """
        conv = self.frame_components()
        fn = lambda x: conv @ self(x)  # noqa: E731
        if not exact:
            return chart_field(self.rep, mf, fn)
        points = mf.sample_points()
        values = np.array([fn(x) for x in points])
        derivs = np.array([np.asarray(mf.chart.frame(x)) @ self.derivative(x) @ conv.T for x in points])
        return SpinorField(self.rep, values, np.moveaxis(derivs, 1, 0), function=fn)


def flat_solution(rep: CliffordRep, alpha: complex, xi_bar, psi_plus, psi_minus) -> FlatSolution:
    """Explicit ``(alpha, 0)`` solution on flat R^3 for the flow along ``xi_bar``.

    The inputs are projected onto the ``±1`` eigenspaces of ``i xi_bar·``.
    """
    if rep.ambient_dim != 3:
        raise ValueError("flat solutions are built on R^3")
    xi = np.asarray(xi_bar, dtype=float)
    xi = xi / np.linalg.norm(xi)
    ixi = 1j * standard_clifford(rep, xi)
    eye = rep.identity
    plus = 0.5 * (eye + ixi) @ np.asarray(psi_plus, dtype=complex)
    minus = 0.5 * (eye - ixi) @ np.asarray(psi_minus, dtype=complex)
    return FlatSolution(rep, alpha, xi, plus, minus)


def circle_alpha_set(length: float, delta: int, window) -> list[float]:
    """Admissible ``alpha = (pi delta + 2 pi k) / L`` strictly inside ``window``."""
    if length <= 0:
        raise ValueError("circle length must be positive")
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    lo, hi = window
    if lo >= hi:
        return []
    # alpha = pi (delta + 2k) / L with lo < alpha < hi
    k_min = math.floor((lo * length / math.pi - delta) / 2) + 1
    k_max = math.ceil((hi * length / math.pi - delta) / 2) - 1
    out = [math.pi * (delta + 2 * k) / length for k in range(k_min - 1, k_max + 2)]
    return [a for a in out if lo < a < hi and not math.isclose(a, lo) and not math.isclose(a, hi)]
