"""Spinor covariant derivatives on a flow.

A spinor field is stored by its values and its plain frame derivatives
``e_x(psi)`` at a list of rows.  On chart manifolds the rows are sample
points.  On homogeneous manifolds they are the coefficient rows of a sector
(see :class:`spinflow.flow_frame.Sector`); all pointwise operators have
constant coefficients there, so they act on each row independently.

Every derivative below has the form ``e_x(psi) + A_x psi`` for a matrix
field ``A_x``; the ``*_operators`` functions return those matrices with
shape ``(S, d, N, N)`` where ``S`` is 1 for homogeneous frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .clifford import CliffordRep
from .flow_frame import FD_STEP, FlowGeometry, FrameManifold, Sector, trivial_sector


@dataclass(frozen=True)
class TksParams:
    alpha: complex = 0.0
    beta: complex = 0.0

    @property
    def is_real(self) -> bool:
        return abs(np.imag(self.alpha)) == 0 and abs(np.imag(self.beta)) == 0


@dataclass(frozen=True)
class SpinorField:
    """Spinor values ``(S, N)`` with frame derivatives ``(d, S, N)``.

    ``sector`` and ``weight`` are set for sector fields: the field itself is
    ``g -> weight^T pi(g) values``.  ``function`` is set for chart fields.
    """

    rep: CliffordRep
    values: np.ndarray
    derivatives: np.ndarray
    sector: Sector | None = None
    weight: np.ndarray | None = None
    function: Callable | None = None

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=-1)

    def map_pointwise(self, op: np.ndarray) -> "SpinorField":
        """Apply a constant matrix to the spinor index (values and derivatives)."""
        fn = None
        if self.function is not None:
            f = self.function
            fn = lambda x: f(x) @ op.T  # noqa: E731
        return SpinorField(self.rep, self.values @ op.T, self.derivatives @ op.T, self.sector, self.weight, fn)

    def __add__(self, other: "SpinorField") -> "SpinorField":
        return SpinorField(self.rep, self.values + other.values, self.derivatives + other.derivatives,
                           self.sector, self.weight, _sum_fn(self.function, other.function))

    def scaled(self, a: complex) -> "SpinorField":
        fn = None if self.function is None else (lambda x, f=self.function: a * f(x))
        return SpinorField(self.rep, a * self.values, a * self.derivatives, self.sector, self.weight, fn)

    def evaluate_sector(self, exponent_coords) -> np.ndarray:
        """Value at ``exp(sum_i x_i e_i)`` for a sector field."""
        if self.sector is None:
            raise ValueError("not a sector field")
        x = np.asarray(exponent_coords, dtype=float)
        gens = np.asarray(self.sector.generators)
        weight = self.weight if self.weight is not None else np.eye(self.sector.dim)[0]
        return weight @ expm(np.tensordot(x, gens, axes=1)) @ self.values


def _sum_fn(f, g):
    if f is None or g is None:
        return None
    return lambda x: f(x) + g(x)


def constant_field(rep: CliffordRep, value) -> SpinorField:
    return sector_field(rep, trivial_sector(rep.ambient_dim), np.asarray(value, dtype=complex)[None, :])


def sector_field(rep: CliffordRep, sector: Sector, coeffs, weight=None) -> SpinorField:
    coeffs = np.asarray(coeffs, dtype=complex).reshape(sector.dim, rep.spinor_dim)
    derivs = np.array([g @ coeffs for g in sector.generators])
    return SpinorField(rep, coeffs, derivs, sector, None if weight is None else np.asarray(weight))


def chart_field(rep: CliffordRep, mf: FrameManifold, fn: Callable, step: float = FD_STEP) -> SpinorField:
    """Sample ``fn`` on the chart and differentiate along the frame by central differences."""
    if mf.kind != "chart":
        raise ValueError("chart_field needs a chart manifold")
    points = mf.sample_points()
    values = np.array([fn(x) for x in points], dtype=complex)
    d = mf.ambient_dim
    derivs = np.empty((d,) + values.shape, dtype=complex)
    for s, x in enumerate(points):
        e = np.asarray(mf.chart.frame(x), dtype=float)
        partial = np.empty((d, rep.spinor_dim), dtype=complex)
        for mu in range(d):
            dx = np.zeros(d)
            dx[mu] = step
            partial[mu] = (np.asarray(fn(x + dx)) - np.asarray(fn(x - dx))) / (2 * step)
        derivs[:, s] = e @ partial
    return SpinorField(rep, values, derivs, function=fn)


def _apply(ops: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Apply per-row matrices ``(S|1, N, N)`` to values ``(S, N)``."""
    return (ops @ values[..., None])[..., 0]


def _bivector_matrices(rep: CliffordRep) -> np.ndarray:
    g = np.asarray(rep.generators)
    return np.einsum("jab,kbc->jkac", g, g)


def ambient_operators(geo: FlowGeometry, rep: CliffordRep) -> np.ndarray:
    """``A_x = 1/4 sum_{j,k} g(nabla^M_{e_x} e_j, e_k) e_j e_k``."""
    _check_dims(geo, rep)
    return 0.25 * np.einsum("sxjk,jkab->sxab", geo.gamma, _bivector_matrices(rep))


def _check_dims(geo: FlowGeometry, rep: CliffordRep) -> None:
    if geo.ambient_dim != rep.ambient_dim:
        raise ValueError(f"geometry has dimension {geo.ambient_dim}, representation {rep.ambient_dim}")


def omega_matrices(geo: FlowGeometry, rep: CliffordRep) -> np.ndarray:
    return np.einsum("sjk,jkab->sab", np.triu(geo.omega), _bivector_matrices(rep))


def h_vectors(geo: FlowGeometry) -> np.ndarray:
    """``h(e_a)`` as full frame vectors, shape ``(S, n, d)``."""
    out = np.zeros((geo.n_samples, geo.n, geo.ambient_dim))
    out[:, :, 1:] = np.swapaxes(geo.hmat, -1, -2)
    return out


def full_vector(q_components: np.ndarray) -> np.ndarray:
    q = np.asarray(q_components)
    return np.concatenate([np.zeros(q.shape[:-1] + (1,), dtype=q.dtype), q], axis=-1)


def cliff(rep: CliffordRep, vectors: np.ndarray) -> np.ndarray:
    """Clifford matrices of frame vectors with arbitrary leading axes."""
    return np.tensordot(np.asarray(vectors), np.asarray(rep.generators), axes=1)


def transversal_operators(geo: FlowGeometry, rep: CliffordRep) -> np.ndarray:
    """Matrices of the transversal spinor derivative.

    ``nabla_xi = nabla^M_xi - 1/2 Omega - 1/2 xi kappa`` and
    ``nabla_Z = nabla^M_Z - 1/2 xi h(Z)``.
    """
    ops = ambient_operators(geo, rep).copy()
    xi = rep.generators[0]
    kappa = cliff(rep, full_vector(geo.kappa))
    ops[:, 0] -= 0.5 * omega_matrices(geo, rep) + 0.5 * xi @ kappa
    ops[:, 1:] -= 0.5 * xi @ cliff(rep, h_vectors(geo))
    return ops


def modified_operators(geo: FlowGeometry, rep: CliffordRep, p: TksParams) -> np.ndarray:
    """Matrices of the connection whose parallel sections are the TKS for ``p``."""
    ops = transversal_operators(geo, rep).copy()
    g = rep.generators
    # xi direction: -alpha xi - beta xi xi - beta = -alpha xi
    ops[:, 0] -= p.alpha * g[0]
    for a in range(1, rep.ambient_dim):
        ops[:, a] -= p.beta * g[0] @ g[a]
    return ops


def _derivative(ops: np.ndarray, psi: SpinorField, x_index: int) -> np.ndarray:
    return psi.derivatives[x_index] + _apply(ops[:, x_index], psi.values)


def ambient_spinor_derivative(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, x_index: int) -> np.ndarray:
    return _derivative(ambient_operators(geo, rep), psi, x_index)


def transversal_spinor_derivative(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, x_index: int) -> np.ndarray:
    return _derivative(transversal_operators(geo, rep), psi, x_index)


def modified_connection(geo: FlowGeometry, rep: CliffordRep, psi: SpinorField, x_index: int, p: TksParams) -> np.ndarray:
    return _derivative(modified_operators(geo, rep, p), psi, x_index)


def all_derivatives(ops: np.ndarray, psi: SpinorField) -> np.ndarray:
    """Stacked derivatives along every frame direction, shape ``(d, S, N)``."""
    return np.array([_derivative(ops, psi, x) for x in range(ops.shape[1])])
