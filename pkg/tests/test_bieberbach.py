import math
from fractions import Fraction

import numpy as np
import pytest

from spinflow import bieberbach as bb
from spinflow.clifford import build_rep
from spinflow.tks import standard_clifford

WINDOW = (-15 * math.pi, 15 * math.pi)
E3 = [0.0, 0.0, 1.0]


def closed_form(offset, period, lo=-15, hi=15):
    """Multiples of pi in ``offset + period Z`` inside ``[lo, hi]`` (oracle written from the stated conditions)."""
    return [q for q in range(lo, hi + 1) if (q - offset) % period == 0]


def _multiples(found):
    assert all(a.multiple_of_pi is not None and a.multiple_of_pi.denominator == 1 for a in found)
    return [int(a.multiple_of_pi) for a in found]


CASES = [
    ("G2", (0, 0, 0), closed_form(1, 4)),
    ("G2", (1, 0, 0), closed_form(3, 4)),
    ("G2", (0, 1, 0), []),
    ("G2", (0, 0, 1), []),
    ("G3", (0,), closed_form(1, 6)),
    ("G3", (1,), closed_form(4, 6)),
    ("G4", (0, 0), closed_form(1, 8)),
    ("G4", (1, 0), closed_form(5, 8)),
    ("G4", (0, 1), []),
    ("G4", (1, 1), []),
    ("G5", (0,), closed_form(1, 12)),
    ("G5", (1,), closed_form(7, 12)),
]


@pytest.mark.parametrize("name,delta,expected", CASES)
def test_closed_forms_unit_parameters(name, delta, expected):
    g = bb.build_group(name)
    found = bb.admissible_alphas(g, bb.lift_generators(g, delta), E3, WINDOW)
    assert _multiples(found) == expected
    assert all(a.dim == 2 and set(a.signs) == {1, -1} for a in found)


def test_closed_form_lists():
    assert closed_form(1, 4) == [-15, -11, -7, -3, 1, 5, 9, 13]
    assert closed_form(4, 6) == [-14, -8, -2, 4, 10]
    assert closed_form(7, 12) == [-5, 7]


@pytest.mark.parametrize("H", [0.5, 2.0, 3.0])
def test_height_scaling(H):
    g = bb.build_group("G3", H=H, L=1.7)
    found = bb.admissible_alphas(g, bb.lift_generators(g, (0,)), E3, WINDOW)
    want = [q for q in range(-60, 61) if (q - 1) % 6 == 0 and abs(q / H) <= 15]
    assert np.allclose([a.alpha for a in found], [math.pi * q / H for q in want])


@pytest.mark.parametrize("delta", [(0, 0, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1)])
def test_torus_standard_lattice(delta):
    g = bb.build_group("G1")
    found = bb.admissible_alphas(g, bb.lift_generators(g, delta), E3, WINDOW)
    if delta[:2] != (0, 0):
        assert found == []
    else:
        assert _multiples(found) == closed_form(delta[2], 2)
        assert all(a.dim == 2 for a in found)


def test_torus_irrational_direction():
    g = bb.build_group("G1")
    xi = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    found = bb.admissible_alphas(g, bb.lift_generators(g, (0, 0, 0)), xi, (-20.0, 20.0))
    # alpha <xi, a_j> in 2 pi Z for a_1, a_2 means alpha in 2 sqrt(2) pi Z
    step = 2 * math.sqrt(2) * math.pi
    assert np.allclose([a.alpha for a in found], [k * step for k in (-2, -1, 0, 1, 2)])
    assert all(a.multiple_of_pi is None for a in found)


def test_invariant_directions():
    assert bb.invariant_xi(bb.build_group("G1")).shape == (3, 3)
    for name in ("G2", "G3", "G4", "G5"):
        rows = bb.invariant_xi(bb.build_group(name))
        assert rows.shape == (1, 3) and np.allclose(np.abs(rows[0]), [0, 0, 1])
    assert bb.invariant_xi(bb.build_group("G6")).shape[0] == 0


def test_g6_has_no_flow():
    g = bb.build_group("G6")
    with pytest.raises(ValueError, match="no Riemannian flow"):
        bb.lift_generators(g, (0, 0, 0))


def test_lift_formulas():
    rep = build_rep(3)
    one = rep.identity
    e12 = standard_clifford(rep, [1, 0, 0]) @ standard_clifford(rep, [0, 1, 0])
    lift = bb.lift_generators(bb.build_group("G4"), (1, 1), rep)
    assert np.allclose(lift.elements["a1"], -one)
    assert np.allclose(lift.elements["a2"], -one)
    assert np.allclose(lift.elements["A"], -(one + e12) / math.sqrt(2))
    lift = bb.lift_generators(bb.build_group("G3"), (1,), rep)
    assert np.allclose(lift.elements["a1"], one)
    assert np.allclose(lift.elements["A"], -(0.5 * one + math.sqrt(3) / 2 * e12))


@pytest.mark.parametrize("name", ["G1", "G2", "G3", "G4", "G5"])
def test_lifts_cover_rotations(name):
    g = bb.build_group(name)
    for bits in np.ndindex(*(2,) * bb.DELTA_BITS[name]):
        lift = bb.lift_generators(g, bits)
        assert bb.ad_defect(g, lift) <= 1e-12
        for eps in lift.elements.values():
            assert np.allclose(eps @ eps.conj().T, np.eye(2))


@pytest.mark.parametrize("name,delta", [("G1", (0, 0, 1)), ("G2", (0, 0, 0)), ("G3", (1,)),
                                        ("G4", (0, 0)), ("G5", (1,))])
def test_equivariance_of_constructed_solutions(name, delta):
    g = bb.build_group(name)
    lift = bb.lift_generators(g, delta)
    pts = np.random.default_rng(5).uniform(-3, 3, (50, 3))
    found = bb.admissible_alphas(g, lift, E3, WINDOW)
    assert found
    for a in found:
        plus, minus = bb.solution_spinors(a, E3)
        assert bb.equivariance_residual(g, lift, E3, a.alpha, plus, minus, pts) <= 1e-9
        assert bb.equivariance_residual(g, lift, E3, a.alpha + 0.1, plus, minus, pts) > 1e-2


@pytest.mark.parametrize("name,delta", [("G2", (0, 0, 0)), ("G4", (1, 0)), ("G5", (0,))])
def test_brute_force_grid(name, delta):
    # every alpha on a fine grid: equivariance holds exactly at the enumerated values
    rep = build_rep(3)
    g = bb.build_group(name)
    lift = bb.lift_generators(g, delta)
    listed = {round(a.alpha / math.pi * 12) for a in bb.admissible_alphas(g, lift, E3, WINDOW)}
    pts = np.random.default_rng(1).uniform(-2, 2, (10, 3))
    cols = [np.linalg.svd(np.eye(2) - 0.5 * (np.eye(2) + s * 1j * standard_clifford(rep, E3)))[2][-1].conj()
            for s in (1, -1)]
    for k in range(-180, 181):
        ok = bb.equivariance_residual(g, lift, E3, math.pi * k / 12, cols[0], cols[1], pts) <= 1e-9
        assert ok == (k in listed)


def test_exact_fractions():
    g = bb.build_group("G5", H=1.0)
    found = bb.admissible_alphas(g, bb.lift_generators(g, (0,)), E3, WINDOW)
    assert [a.multiple_of_pi for a in found] == [Fraction(-11), Fraction(1), Fraction(13)]


def test_window_is_closed():
    g = bb.build_group("G2")
    lift = bb.lift_generators(g, (0, 0, 0))
    found = bb.admissible_alphas(g, lift, E3, (-3 * math.pi, 5 * math.pi))
    assert _multiples(found) == [-3, 1, 5]


def test_errors():
    g = bb.build_group("G2")
    with pytest.raises(ValueError, match="invariant"):
        bb.admissible_alphas(g, bb.lift_generators(g, (0, 0, 0)), [1.0, 0.0, 0.0], WINDOW)
    with pytest.raises(ValueError):
        bb.build_group("G3", H=0.0)
    with pytest.raises(ValueError):
        bb.build_group("G2", S=-1.0)
    with pytest.raises(ValueError):
        bb.build_group("G7")
    with pytest.raises(ValueError):
        bb.build_group("G1", basis=[[1, 0, 0], [2, 0, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        bb.lift_generators(g, (0, 0))
    with pytest.raises(ValueError):
        bb.lift_generators(g, (0, 2, 0))


def test_trivial_translation_only_group_has_zero_residual():
    rep = build_rep(3)
    g = bb.BieberbachGroup("id", {}, (("e", bb.AffineIsometry(np.eye(3), np.zeros(3))),))
    lift = bb.SpinLift({"e": rep.identity}, ())
    pts = np.random.default_rng(0).uniform(-1, 1, (20, 3))
    plus = np.array([1.0, 0.0], dtype=complex)
    assert bb.equivariance_residual(g, lift, E3, 0.37, plus, plus, pts) == 0.0
