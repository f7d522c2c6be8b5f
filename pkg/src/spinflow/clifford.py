"""Complex matrix representations of Clifford algebras.

Generators square to minus the identity, so a unit vector ``v`` satisfies
``v·v = -1``.  Frame index 0 is always the flow direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SPECTRAL_TOL = 1e-9

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


def _kron_all(factors):
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


@dataclass(frozen=True)
class CliffordRep:
    """Irreducible complex representation of the Clifford algebra of R^d.

    ``generators[j]`` is the matrix of Clifford multiplication by the j-th
    frame vector.  For odd ``ambient_dim`` the sign of the last generator is
    fixed so that the complex volume element acts as ``+1``; ``volume_sign``
    records that value.
    """

    ambient_dim: int
    spinor_dim: int
    generators: tuple
    volume_sign: int

    def gamma(self, j: int) -> np.ndarray:
        return self.generators[j]

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.spinor_dim, dtype=complex)

    def volume_element(self) -> np.ndarray:
        """Complex volume element ``i^floor((d+1)/2) e_0 ... e_{d-1}``."""
        out = self.identity
        for g in self.generators:
            out = out @ g
        return (1j) ** ((self.ambient_dim + 1) // 2) * out

    def vector(self, v) -> np.ndarray:
        """Matrix of Clifford multiplication by the frame vector ``v``."""
        v = np.asarray(v)
        if v.shape != (self.ambient_dim,):
            raise ValueError(f"vector of length {self.ambient_dim} expected, got shape {v.shape}")
        return np.tensordot(v, np.asarray(self.generators), axes=1)

    def two_form(self, w) -> np.ndarray:
        """Matrix of ``sum_{j<k} w_jk e_j e_k`` for an antisymmetric ``w``."""
        w = np.asarray(w)
        d = self.ambient_dim
        if w.shape != (d, d):
            raise ValueError(f"two-form must be {d}x{d}, got shape {w.shape}")
        if not np.allclose(w, -w.T, atol=1e-12, rtol=0):
            raise ValueError("two-form is not antisymmetric")
        out = np.zeros((self.spinor_dim, self.spinor_dim), dtype=complex)
        for j in range(d):
            for k in range(j + 1, d):
                if w[j, k] != 0:
                    out = out + w[j, k] * (self.generators[j] @ self.generators[k])
        return out

    def xi_projectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthogonal projectors onto the ``±1`` eigenspaces of ``i e_0``."""
        ixi = 1j * self.generators[0]
        return 0.5 * (self.identity + ixi), 0.5 * (self.identity - ixi)


@lru_cache(maxsize=None)
def build_rep(ambient_dim: int) -> CliffordRep:
    """Tensor-product gamma matrices for ``2 <= ambient_dim <= 7``."""
    if not isinstance(ambient_dim, (int, np.integer)) or not 2 <= ambient_dim <= 7:
        raise ValueError(f"ambient_dim must be an integer in [2, 7], got {ambient_dim!r}")
    d = int(ambient_dim)
    k = d // 2
    hermitian = []
    for level in range(k):
        for pauli in (_PAULI_X, _PAULI_Y):
            hermitian.append(_kron_all([_PAULI_Z] * level + [pauli] + [_ID2] * (k - level - 1)))
    if d % 2:
        hermitian.append(_kron_all([_PAULI_Z] * k))
    gens = [1j * e for e in hermitian]
    rep = CliffordRep(d, 2**k, tuple(gens), 0)
    sign = 0
    if d % 2:
        vol = rep.volume_element()
        if np.allclose(vol, -rep.identity):
            gens[-1] = -gens[-1]
        sign = 1
    for g in gens:
        g.setflags(write=False)
    return CliffordRep(d, 2**k, tuple(gens), sign)


def _as_spinor(rep: CliffordRep, s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.shape[-1] != rep.spinor_dim:
        raise ValueError(f"spinor of length {rep.spinor_dim} expected, got shape {s.shape}")
    return s


def vector_action(rep: CliffordRep, v, s) -> np.ndarray:
    """Clifford product ``v·s``; ``s`` may carry leading batch axes."""
    return _as_spinor(rep, s) @ rep.vector(v).T


def two_form_action(rep: CliffordRep, w, s) -> np.ndarray:
    """Clifford action ``w·s`` of an antisymmetric frame two-form."""
    return _as_spinor(rep, s) @ rep.two_form(w).T


def xi_split(rep: CliffordRep, s) -> tuple[np.ndarray, np.ndarray]:
    """Split ``s`` into parts with ``i e_0 s± = ±s±``."""
    s = _as_spinor(rep, s)
    plus, minus = rep.xi_projectors()
    return s @ plus.T, s @ minus.T


def omega_eigenprojectors(rep: CliffordRep, kaehler, m: int, tol: float = SPECTRAL_TOL) -> list[np.ndarray]:
    """Spectral projectors of a transversal Kähler form.

    Returns ``m + 1`` projectors, the r-th onto the eigenvalue ``i(2r - m)``.
    Raises ``ValueError`` if the spectrum is not of that form or if ``i e_0``
    fails to act as ``(-1)^r`` on the r-th eigenspace (orientation mismatch).
    """
    w = np.asarray(kaehler)
    if np.any(np.abs(w[0, :]) > tol):
        raise ValueError("Kähler form must vanish on the flow direction")
    action = rep.two_form(w)
    if not np.allclose(action, -action.conj().T, atol=tol):
        raise ValueError("two-form action is not skew-Hermitian")
    evals, evecs = np.linalg.eigh(-1j * action)
    targets = np.arange(m + 1) * 2.0 - m
    scale = max(1.0, float(np.max(np.abs(evals))))
    nearest = np.argmin(np.abs(evals[:, None] - targets[None, :]), axis=1)
    if np.max(np.abs(evals - targets[nearest])) > tol * scale:
        raise ValueError(f"spectrum {np.round(evals, 6)} is not {{i(2r-m)}} for m={m}")
    projectors = []
    ixi = 1j * rep.generators[0]
    for r in range(m + 1):
        cols = evecs[:, nearest == r]
        proj = cols @ cols.conj().T
        if cols.shape[1] and not np.allclose(ixi @ proj, (-1) ** r * proj, atol=1e3 * tol):
            raise ValueError("i·xi does not act as (-1)^r on the eigenspaces; check the orientation of the Kähler form")
        projectors.append(proj)
    return projectors


def clifford_defect(rep: CliffordRep) -> float:
    """Largest entry of ``e_j e_k + e_k e_j + 2 δ_jk`` over all pairs."""
    worst = 0.0
    for j, gj in enumerate(rep.generators):
        for k, gk in enumerate(rep.generators):
            anti = gj @ gk + gk @ gj + 2.0 * (j == k) * rep.identity
            worst = max(worst, float(np.max(np.abs(anti))))
    return worst


def intertwiner(rep: CliffordRep, targets) -> np.ndarray:
    """Unitary ``U`` with ``U e_j U^-1 = targets[j]`` for all generators.

    ``targets`` must satisfy the Clifford relations and, in odd dimension,
    have the same volume element as ``rep`` (same orientation).
    """
    targets = [np.asarray(t, dtype=complex) for t in targets]
    gens = rep.generators
    d = rep.ambient_dim
    monomials = []
    for mask in range(2**d):
        src = rep.identity
        dst = rep.identity
        for j in range(d):
            if mask >> j & 1:
                src = src @ gens[j]
                dst = dst @ targets[j]
        monomials.append((src, dst))
    for k in range(rep.spinor_dim**2):
        seed = np.zeros(rep.spinor_dim**2, dtype=complex)
        seed[k] = 1.0
        seed = seed.reshape(rep.spinor_dim, rep.spinor_dim)
        m = sum(dst @ seed @ np.linalg.inv(src) for src, dst in monomials)
        norm2 = np.real((m @ m.conj().T)[0, 0])
        if norm2 > 1e-12:
            u = m / np.sqrt(norm2)
            if not all(np.allclose(u @ g @ u.conj().T, t, atol=1e-10) for g, t in zip(gens, targets)):
                raise ValueError("targets are not an equivalent Clifford module (orientation mismatch?)")
            return u
    raise ValueError("no intertwiner found")
