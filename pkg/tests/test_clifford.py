import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_reduce import (
    CliffordModule,
    InvalidModuleError,
    NotHyperkahlerError,
    build_module,
    minimal_dimension,
    radon_hurwitz_bound,
)
from dirac_reduce.clifford import pencil_symbol, quaternionic_split


def test_radon_hurwitz_table():
    # n = 2^(4d+c) b: hand-computed 8d + 2^c - 1
    table = {1: 0, 2: 1, 3: 0, 4: 3, 6: 1, 8: 7, 12: 3, 16: 8, 32: 9, 64: 11, 128: 15, 256: 16}
    assert {n: radon_hurwitz_bound(n) for n in table} == table


def test_minimal_dimensions():
    assert [minimal_dimension(r) for r in range(1, 13)] == [2, 4, 4, 8, 8, 8, 8, 16, 32, 64, 64, 128]


@pytest.mark.parametrize("r", range(1, 9))
def test_minimal_modules_satisfy_identities(r):
    m = build_module(r)
    assert m.n == minimal_dimension(r)
    assert m.violations() == []
    eye = np.eye(m.n)
    for j in m.J:
        assert np.allclose(j @ j, -eye, atol=1e-12)
        assert np.allclose(j.T @ j, eye, atol=1e-12)
        assert np.allclose(j.T, -j)
    for a in range(r):
        for b in range(a + 1, r):
            assert np.abs(m.J[a] @ m.J[b] + m.J[b] @ m.J[a]).max() < 1e-12


@pytest.mark.parametrize("r", [9, 10, 12])
def test_period_eight_step(r):
    assert build_module(r).violations() == []


def test_quaternions_are_hyperkahler():
    m = build_module(3, hyperkahler_requested=True)
    assert m.hyperkahler
    assert np.array_equal(m.J[0] @ m.J[1], m.J[2])
    # left multiplication by i on the basis (1, i, j, k): 1 -> i, i -> -1, j -> k, k -> -j
    assert np.array_equal(m.J[0] @ np.array([1.0, 0, 0, 0]), np.array([0.0, 1, 0, 0]))
    assert np.array_equal(m.J[0] @ np.array([0.0, 0, 1, 0]), np.array([0.0, 0, 0, 1]))


def test_hyperkahler_needs_r3():
    with pytest.raises(InvalidModuleError):
        build_module(2, hyperkahler_requested=True)
    with pytest.raises(InvalidModuleError):
        build_module(0)


def test_omega_is_antisymmetric_and_matches_definition(rng):
    m = build_module(3)
    x, y = rng.standard_normal((2, 4))
    for l in (1, 2, 3):
        om = m.omega(l)
        assert np.allclose(om, -om.T)
        assert np.isclose(x @ om @ y, (m.J[l - 1] @ x) @ y)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.data())
def test_pencil_squares_to_minus_norm(r, data):
    lam = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=r, max_size=r)))
    m = build_module(r)
    P = pencil_symbol(m, lam)
    assert np.allclose(P @ P, -(lam @ lam) * np.eye(m.n), atol=1e-10)


def test_corruption_is_named():
    m = build_module(2)
    J = [j.copy() for j in m.J]
    J[1] = J[0].copy()  # J2 = J1 commutes with J1
    bad = CliffordModule(tuple(J)).violations()
    assert any("anti-commutation J1 J2" in b for b in bad)
    J = [j.copy() for j in build_module(3).J]
    J[2] = -J[2]
    bad = CliffordModule(tuple(J), hyperkahler=True).violations()
    assert bad == ["quaternionic relation J1 J2 = J3"]
    with pytest.raises(InvalidModuleError):
        CliffordModule(tuple(J), hyperkahler=True).check()


def test_json_round_trip():
    m = build_module(5)
    text = json.dumps(m.to_json())
    back = CliffordModule.from_json(json.loads(text))
    assert back.n == m.n and back.r == m.r
    assert all(np.array_equal(a, b) for a, b in zip(back.J, m.J))
    with pytest.raises(InvalidModuleError):
        CliffordModule.from_json({"n": 3, "J": m.to_json()["J"]})
    with pytest.raises(InvalidModuleError):
        CliffordModule.from_json({"J": [[[0, 1], [1, 0]], [[0, 1, 0]]]})


def test_quaternionic_split(quaternions):
    V = quaternionic_split(quaternions)
    B = np.column_stack(V)
    assert np.allclose(B.T @ B, np.eye(4))
    with pytest.raises(NotHyperkahlerError):
        quaternionic_split(build_module(2))
