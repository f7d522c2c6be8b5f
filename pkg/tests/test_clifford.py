import numpy as np
import pytest

from spinflow.clifford import (
    build_rep,
    clifford_defect,
    intertwiner,
    omega_eigenprojectors,
    two_form_action,
    vector_action,
    xi_split,
)

RNG = np.random.default_rng(2024)


def rand_spinor(n):
    return RNG.normal(size=n) + 1j * RNG.normal(size=n)


@pytest.mark.parametrize("d", range(2, 8))
def test_relations_and_skew_hermitian(d):
    rep = build_rep(d)
    assert rep.spinor_dim == 2 ** (d // 2)
    assert clifford_defect(rep) < 1e-12
    for g in rep.generators:
        assert np.allclose(g, -g.conj().T, atol=1e-12)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_odd_volume_element_is_identity(d):
    rep = build_rep(d)
    assert np.allclose(rep.volume_element(), rep.identity, atol=1e-12)


def test_three_dim_convention():
    g = build_rep(3).generators
    assert np.allclose(-g[0] @ g[1] @ g[2], np.eye(2), atol=1e-12)


def test_deterministic():
    a, b = build_rep.__wrapped__(4), build_rep.__wrapped__(4)
    assert all(np.array_equal(x, y) for x, y in zip(a.generators, b.generators))


@pytest.mark.parametrize("bad", [1, 8, 2.5])
def test_dimension_range(bad):
    with pytest.raises(ValueError):
        build_rep(bad)


def test_vector_action_basics(rep3):
    s = rand_spinor(2)
    assert np.allclose(vector_action(rep3, np.zeros(3), s), 0)
    v = RNG.normal(size=3)
    v /= np.linalg.norm(v)
    assert np.allclose(vector_action(rep3, v, vector_action(rep3, v, s)), -s)
    assert abs(np.real(np.vdot(s, vector_action(rep3, v, s)))) < 1e-12
    with pytest.raises(ValueError):
        vector_action(rep3, np.ones(4), s)


def test_two_form_action(rep3):
    s = rand_spinor(2)
    assert np.allclose(two_form_action(rep3, np.zeros((3, 3)), s), 0)
    w = np.zeros((3, 3))
    w[1, 2], w[2, 1] = 1.0, -1.0
    # -xi e1 e2 = 1 forces e1 e2 = +xi
    assert np.allclose(rep3.two_form(w), rep3.generators[0])
    with pytest.raises(ValueError):
        two_form_action(rep3, np.ones((3, 3)), s)


def test_xi_split(rep3):
    plus, minus = rep3.xi_projectors()
    eig = plus[:, np.argmax(np.linalg.norm(plus, axis=0))]
    sp, sm = xi_split(rep3, eig)
    assert np.allclose(sp, eig) and np.allclose(sm, 0)
    s = rand_spinor(2)
    sp, sm = xi_split(rep3, s)
    assert np.allclose(sp + sm, s)
    assert np.isclose(np.linalg.norm(s) ** 2, np.linalg.norm(sp) ** 2 + np.linalg.norm(sm) ** 2)
    assert round(np.trace(plus).real) == round(np.trace(minus).real) == 1


@pytest.mark.parametrize("d", range(2, 6))
def test_projector_algebra(d):
    rep = build_rep(d)
    plus, minus = rep.xi_projectors()
    for p in (plus, minus):
        assert np.allclose(p, p.conj().T, atol=1e-12)
        assert np.allclose(p @ p, p, atol=1e-12)
    assert np.allclose(plus @ minus, 0, atol=1e-12)
    assert np.allclose(plus + minus, rep.identity, atol=1e-12)
    # a unit vector normal to the flow exchanges the two halves
    v = np.zeros(d)
    v[1:] = RNG.normal(size=d - 1)
    v /= np.linalg.norm(v)
    cv = rep.vector(v)
    assert np.allclose(cv @ plus, minus @ cv, atol=1e-12)


def test_kaehler_m1_rank_one(rep3):
    w = np.zeros((3, 3))
    w[1, 2], w[2, 1] = 1.0, -1.0
    projs = omega_eigenprojectors(rep3, w, 1)
    assert [round(np.trace(p).real) for p in projs] == [1, 1]


def test_kaehler_m2_spectrum():
    rep = build_rep(5)
    w = np.zeros((5, 5))
    w[1, 2], w[3, 4] = 1.0, 1.0
    w -= w.T
    projs = omega_eigenprojectors(rep, w, 2)
    assert [round(np.trace(p).real) for p in projs] == [1, 2, 1]
    evals = np.linalg.eigvals(rep.two_form(w))
    assert np.allclose(sorted(evals.imag), [-2, 0, 0, 2], atol=1e-12)
    total = sum(projs)
    assert np.allclose(total, rep.identity, atol=1e-12)
    ixi = 1j * rep.generators[0]
    for r, p in enumerate(projs):
        assert np.allclose(ixi @ p, (-1) ** r * p, atol=1e-12)


def test_kaehler_rejects_bad_spectrum(rep3):
    w = np.zeros((3, 3))
    w[1, 2], w[2, 1] = 0.5, -0.5
    with pytest.raises(ValueError):
        omega_eigenprojectors(rep3, w, 1)


def test_intertwiner_rotation(rep3):
    gens = rep3.generators
    targets = [gens[1], gens[2], gens[0]]
    u = intertwiner(rep3, targets)
    assert np.allclose(u @ u.conj().T, np.eye(2))
    for g, t in zip(gens, targets):
        assert np.allclose(u @ g @ u.conj().T, t)
    with pytest.raises(ValueError):
        intertwiner(rep3, [gens[0], gens[2], gens[1]])
