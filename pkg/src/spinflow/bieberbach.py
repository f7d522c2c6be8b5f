"""Flat three-dimensional quotients: flow directions, spin lifts and admissible constants.

Spinors on R^3 live in the standard module of :func:`spinflow.tks.standard_clifford`.
A spin lift assigns to each generator ``x -> r x + t`` a unitary 2x2 matrix
``eps`` with ``eps v· eps^-1 = (r v)·``.  An explicit flat solution built
from ``psi_±`` descends to the quotient iff
``psi_± = exp(±i alpha <t, xi>) eps psi_±`` for every generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

from .clifford import CliffordRep, build_rep
from .tks import flat_solution, standard_clifford

ROT_TOL = 1e-12
CONGRUENCE_TOL = 1e-9
GROUP_NAMES = ("G1", "G2", "G3", "G4", "G5", "G6")
# number of delta bits used by each group's lift
DELTA_BITS = {"G1": 3, "G2": 3, "G3": 1, "G4": 2, "G5": 1}


def rotation_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _half_turn(axis: int) -> np.ndarray:
    r = -np.eye(3)
    r[axis, axis] = 1.0
    return r


@dataclass(frozen=True)
class AffineIsometry:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        if np.max(np.abs(r @ r.T - np.eye(3))) > ROT_TOL or abs(np.linalg.det(r) - 1) > ROT_TOL:
            raise ValueError("rotation part must be special orthogonal")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.rotation.T + self.translation

    def inverse_apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.translation) @ self.rotation


@dataclass(frozen=True)
class BieberbachGroup:
    name: str
    parameters: dict
    generators: tuple  # (label, AffineIsometry) pairs


@dataclass(frozen=True)
class SpinLift:
    elements: dict  # label -> 2x2 unitary in the standard module
    delta_bits: tuple


def build_group(name: str, H: float = 1.0, L: float = 1.0, S: float = 1.0, T: float = 0.0,
                basis=None) -> BieberbachGroup:
    """Generators of the six orientable Bieberbach groups.

    ``basis`` gives the three lattice vectors of G1 (rows); the other groups
    use the parameters ``H, L, S, T`` where they apply.
    """
    if name not in GROUP_NAMES:
        raise ValueError(f"unknown group {name!r}; expected one of {', '.join(GROUP_NAMES)}")
    eye = np.eye(3)
    if name == "G1":
        a = np.eye(3) if basis is None else np.asarray(basis, dtype=float)
        if a.shape != (3, 3) or abs(np.linalg.det(a)) < 1e-12:
            raise ValueError("G1 needs three linearly independent lattice vectors")
        gens = tuple((f"a{j + 1}", AffineIsometry(eye, a[j])) for j in range(3))
        return BieberbachGroup(name, {"basis": a.tolist()}, gens)
    needs = {"G2": ("H", "L", "S"), "G6": ("H", "L", "S")}.get(name, ("H", "L"))
    values = {"H": H, "L": L, "S": S}
    for key in needs:
        if not values[key] > 0:
            raise ValueError(f"{name} needs {key} > 0")
    a1 = np.array([0.0, 0.0, H])
    a2 = np.array([L, 0.0, 0.0])
    if name == "G2":
        a3, turn, rot = np.array([T, S, 0.0]), 2, rotation_z(math.pi)
    elif name == "G3":
        a3, turn, rot = np.array([-L / 2, L * math.sqrt(3) / 2, 0.0]), 3, rotation_z(2 * math.pi / 3)
    elif name == "G4":
        a3, turn, rot = np.array([0.0, L, 0.0]), 4, rotation_z(math.pi / 2)
    elif name == "G5":
        a3, turn, rot = np.array([L / 2, L * math.sqrt(3) / 2, 0.0]), 6, rotation_z(math.pi / 3)
    else:
        a3 = np.array([0.0, S, 0.0])
        gens = (
            ("a1", AffineIsometry(eye, a1)), ("a2", AffineIsometry(eye, a2)), ("a3", AffineIsometry(eye, a3)),
            ("A", AffineIsometry(_half_turn(2), a1 / 2)),
            ("B", AffineIsometry(_half_turn(0), (a2 + a3) / 2)),
            ("C", AffineIsometry(_half_turn(1), (a1 + a2 + a3) / 2)),
        )
        return BieberbachGroup(name, {"H": H, "L": L, "S": S}, gens)
    params = {"H": H, "L": L} | ({"S": S, "T": T} if name == "G2" else {})
    gens = (("a1", AffineIsometry(eye, a1)), ("a2", AffineIsometry(eye, a2)), ("a3", AffineIsometry(eye, a3)),
            ("A", AffineIsometry(rot, a1 / turn)))
    return BieberbachGroup(name, params, gens)


def invariant_xi(group: BieberbachGroup) -> np.ndarray:
    """Orthonormal basis (rows) of the common fixed space of the rotation parts."""
    stack = np.vstack([g.rotation - np.eye(3) for _, g in group.generators])
    return null_space(stack, rcond=1e-10).T


def _parse_delta(group: BieberbachGroup, delta) -> tuple:
    bits = tuple(int(b) for b in delta)
    if any(b not in (0, 1) for b in bits):
        raise ValueError("delta bits must be 0 or 1")
    need = DELTA_BITS.get(group.name)
    if need is None:
        raise ValueError(f"{group.name} carries no Riemannian flow; no lift is needed")
    if len(bits) < need:
        raise ValueError(f"{group.name} needs {need} delta bits, got {len(bits)}")
    return bits[:need] + (0,) * (3 - need)


def lift_generators(group: BieberbachGroup, delta, rep: CliffordRep | None = None) -> SpinLift:
    """The explicit lifts of the generators, checked against the rotation parts."""
    rep = rep or build_rep(3)
    d1, d2, d3 = _parse_delta(group, delta)
    one = rep.identity
    e12 = standard_clifford(rep, [1, 0, 0]) @ standard_clifford(rep, [0, 1, 0])
    ph = lambda bit: np.exp(1j * math.pi * bit)  # noqa: E731
    if group.name == "G1":
        elements = {"a1": ph(d1) * one, "a2": ph(d2) * one, "a3": ph(d3) * one}
    elif group.name == "G2":
        elements = {"a1": -one, "a2": ph(d2) * one, "a3": ph(d3) * one, "A": ph(d1) * e12}
    elif group.name == "G3":
        elements = {"a1": -ph(d1) * one, "a2": one, "a3": one,
                    "A": ph(d1) * (0.5 * one + math.sqrt(3) / 2 * e12)}
    elif group.name == "G4":
        elements = {"a1": -one, "a2": ph(d2) * one, "a3": ph(d2) * one,
                    "A": ph(d1) * (one + e12) / math.sqrt(2)}
    else:
        elements = {"a1": -one, "a2": one, "a3": one, "A": ph(d1) * (math.sqrt(3) / 2 * one + 0.5 * e12)}
    lift = SpinLift(elements, (d1, d2, d3)[: DELTA_BITS[group.name]])
    defect = ad_defect(group, lift, rep)
    if defect > 1e-9:
        raise ValueError(f"lift does not cover the rotation parts (defect {defect:.3e})")
    return lift


def ad_defect(group: BieberbachGroup, lift: SpinLift, rep: CliffordRep | None = None) -> float:
    """Largest ``|eps v eps^-1 - (r v)|`` over generators and basis vectors."""
    rep = rep or build_rep(3)
    worst = 0.0
    for label, g in group.generators:
        eps = lift.elements[label]
        inv = np.linalg.inv(eps)
        for v in np.eye(3):
            lhs = eps @ standard_clifford(rep, v) @ inv
            worst = max(worst, float(np.max(np.abs(lhs - standard_clifford(rep, g.rotation @ v)))))
    return worst


@dataclass(frozen=True)
class Admissible:
    alpha: float
    dim: int
    multiple_of_pi: Fraction | None = None
    signs: tuple = field(default=())


def _as_fraction(x: float, max_den: int = 10**4) -> Fraction | None:
    frac = Fraction(x).limit_denominator(max_den)
    return frac if abs(float(frac) - x) <= 1e-13 * max(1.0, abs(x)) else None


def _phase_conditions(group, lift, xi_bar, rep):
    """Per sign: list of (tau, phase/pi) with condition ``sign*q*tau + phase/pi`` even."""
    xi_cl = standard_clifford(rep, xi_bar)
    eye = rep.identity
    conds = {}
    for sign in (1, -1):
        proj = 0.5 * (eye + sign * 1j * xi_cl)
        cols = null_space(eye - proj)
        items = []
        for label, g in group.generators:
            eps = lift.elements[label]
            if np.max(np.abs(eps @ xi_cl - xi_cl @ eps)) > 1e-9:
                items = None
                break
            restricted = cols.conj().T @ eps @ cols
            scalar = restricted[0, 0]
            if np.max(np.abs(restricted - scalar * np.eye(len(restricted)))) > 1e-9:
                items = None
                break
            tau = float(np.dot(g.translation, xi_bar))
            items.append((sign * tau, float(np.angle(scalar)) / math.pi))
        conds[sign] = (items, cols.shape[1])
    return conds


def _is_even(x, exact: bool) -> bool:
    if exact:
        return x.denominator == 1 and x.numerator % 2 == 0
    return abs(x / 2 - round(x / 2)) <= CONGRUENCE_TOL


def admissible_alphas(group: BieberbachGroup, lift: SpinLift, xi_bar, window, rep: CliffordRep | None = None) -> list[Admissible]:
    """Real constants ``alpha`` in ``window`` with nonzero solution space, sorted.

    Each generator contributes the condition
    ``±alpha <t, xi> + arg(eps|_{Sigma±}) ∈ 2 pi Z``; the admissible set is
    enumerated from the progression of one generator with ``<t, xi> != 0``
    and tested against the others exactly (rational multiples of pi) when
    the data is rational.
    """
    rep = rep or build_rep(3)
    xi_bar = np.asarray(xi_bar, dtype=float)
    xi_bar = xi_bar / np.linalg.norm(xi_bar)
    for _, g in group.generators:
        if np.max(np.abs(g.rotation @ xi_bar - xi_bar)) > 1e-9:
            raise ValueError("xi_bar is not invariant under the rotation parts")
    lo, hi = (float(w) for w in window)
    conds = _phase_conditions(group, lift, xi_bar, rep)
    found: dict = {}
    for sign, (items, rank) in conds.items():
        if not items:
            continue
        exact_items = [(_as_fraction(t), _as_fraction(p, 720)) for t, p in items]
        exact = all(t is not None and p is not None for t, p in exact_items)
        use = exact_items if exact else items
        pivot = next(((t, p) for t, p in use if t != 0), None)
        if pivot is None:
            raise ValueError("no generator translates along xi_bar; admissible set is not discrete")
        tau, phase = pivot
        # q = (2k - phase) / tau with alpha = pi q
        q_lo, q_hi = lo / math.pi, hi / math.pi
        ks = sorted(((q_lo * float(tau) + float(phase)) / 2, (q_hi * float(tau) + float(phase)) / 2))
        for k in range(math.floor(ks[0]) - 1, math.ceil(ks[1]) + 2):
            q = (2 * k - phase) / tau
            if not q_lo - 1e-12 <= float(q) <= q_hi + 1e-12:
                continue
            if all(_is_even(t * q + p, exact) for t, p in use):
                key = q if exact else round(float(q), 9)
                entry = found.setdefault(key, [q if exact else None, 0, []])
                entry[1] += rank
                entry[2].append(sign)
    out = [Admissible(math.pi * float(key), dim, frac, tuple(signs)) for key, (frac, dim, signs) in found.items()]
    return sorted(out, key=lambda a: a.alpha)


def solution_spinors(admissible: Admissible, xi_bar, rep: CliffordRep | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Unit ``psi_±`` in the admissible eigenspaces (zero for excluded signs)."""
    rep = rep or build_rep(3)
    xi_cl = standard_clifford(rep, np.asarray(xi_bar, dtype=float))
    out = []
    for sign in (1, -1):
        if sign in admissible.signs:
            out.append(null_space(rep.identity - 0.5 * (rep.identity + sign * 1j * xi_cl))[:, 0])
        else:
            out.append(np.zeros(rep.spinor_dim, dtype=complex))
    return out[0], out[1]


def equivariance_residual(group: BieberbachGroup, lift: SpinLift, xi_bar, alpha, psi_plus, psi_minus,
                          samples, rep: CliffordRep | None = None) -> float:
    """``max |psi(x) - eps(g) psi(g^-1 x)|`` over generators and sample points."""
    rep = rep or build_rep(3)
    sol = flat_solution(rep, alpha, xi_bar, psi_plus, psi_minus)
    x = np.asarray(samples, dtype=float)
    here = sol(x)
    worst = 0.0
    for label, g in group.generators:
        moved = sol(g.inverse_apply(x)) @ lift.elements[label].T
        worst = max(worst, float(np.max(np.linalg.norm(here - moved, axis=-1))))
    return worst
