import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_reduce import DomainMismatchError, SU2Time, Term, TorusTime, TrigHamiltonian, min_truncation
from dirac_reduce.su2 import random_points


def _mixed(rng):
    H = TrigHamiltonian.cosine_sum([0.05, -0.02, 0.03, 0.01], r=2)
    return H.plus(Term((1, -1, 0, 2), 0.04, 0.7, TorusTime((1, 2), 0.3)),
                  Term((0, 1, 1, 0), 0.02, -1.1, TorusTime((0, 1))))


def test_value_closed_form():
    H = TrigHamiltonian.cosine_sum([0.05, 0.05], r=1)
    t = np.array([[0.3]])
    w = np.array([[0.25, 0.5]])
    assert np.isclose(H.eval(t, w)[0], 0.05 * (0.0 - 1.0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_grad_and_hess_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    H = _mixed(rng)
    t = rng.uniform(size=(1, 2))
    w = rng.uniform(size=(1, 4))
    h = 1e-6
    fd_g = np.array([(H.eval(t, w + h * e) - H.eval(t, w - h * e))[0] / (2 * h) for e in np.eye(4)])
    assert np.allclose(H.grad_w(t, w)[0], fd_g, atol=1e-7)
    fd_h = np.array([(H.grad_w(t, w + h * e) - H.grad_w(t, w - h * e))[0] / (2 * h) for e in np.eye(4)])
    assert np.allclose(H.hess_w(t, w)[0], fd_h, atol=1e-6)


def test_sup_bounds_dominate_samples(rng):
    H = _mixed(rng)
    t = rng.uniform(size=(4000, 2))
    w = rng.uniform(size=(4000, 4))
    assert np.abs(H.eval(t, w)).max() <= H.sup_bound()
    assert np.linalg.norm(H.grad_w(t, w), axis=1).max() <= H.grad_sup_bound()
    assert np.linalg.norm(H.hess_w(t, w), 2, axis=(1, 2)).max() <= H.hess_sup_bound()


def test_hess_bound_closed_form():
    H = TrigHamiltonian.cosine_sum([0.05] * 4, r=2)
    assert np.isclose(H.hess_sup_bound(), 4 * 0.05 * 4 * np.pi**2)


def test_min_truncation():
    # 0.05 * 4 pi^2 * 2 / (2 pi * 0.5) = 0.4 pi = 1.257 -> 2
    assert min_truncation(TrigHamiltonian.cosine_sum([0.05, 0.05], r=1)) == 2
    assert min_truncation(TrigHamiltonian.cosine_sum([0.05] * 4, r=2)) == 3
    # su2: 4 * 0.005 * 4 pi^2 / 0.5 = 1.579 -> 2
    assert min_truncation(TrigHamiltonian.cosine_sum([0.005] * 4, time_domain="su2")) == 2
    assert min_truncation(TrigHamiltonian.zero(2, r=1)) == 1
    with pytest.raises(ValueError):
        min_truncation(TrigHamiltonian.zero(2, r=1), rho=1.0)


def test_domain_checks():
    H = TrigHamiltonian.cosine_sum([0.1, 0.1], r=1)
    with pytest.raises(DomainMismatchError):
        H.eval(np.zeros((1, 2)), np.zeros((1, 2)))
    S = TrigHamiltonian(2, [Term((1, 0), 0.1, time=SU2Time(1, 0, 0))], "su2")
    with pytest.raises(DomainMismatchError):
        S.eval(np.array([[1.0, 1.0, 0, 0]]), np.zeros((1, 2)))
    with pytest.raises(DomainMismatchError):
        TrigHamiltonian(2, [Term((1, 0), 0.1, time=SU2Time(1, 0, 0))], "torus", r=1)
    with pytest.raises(ValueError):
        TrigHamiltonian(2, [Term((1, 0, 0), 0.1)], r=1)


def test_su2_time_factor(rng):
    S = TrigHamiltonian(1, [Term((1,), 1.0, time=SU2Time(1, 0, 0, "re"))], "su2")
    x = random_points(rng, 5)
    # u^(1)_00 = conj(q0 + i q3) up to the normalization of the identity coefficient
    assert np.allclose(S.eval(x, np.zeros((5, 1))), x[:, 0])
    assert S.time_band() == 1


def test_lattice_periodicity():
    H = TrigHamiltonian.cosine_sum([0.1, 0.1], r=1)
    assert H.is_lattice_periodic(np.eye(2))
    assert not H.is_lattice_periodic(0.5 * np.eye(2))
    assert H.is_lattice_periodic(2 * np.eye(2))


def test_json_round_trip(rng):
    H = _mixed(rng)
    back = TrigHamiltonian.from_json(H.to_json(), 4, "torus", 2)
    t, w = rng.uniform(size=(10, 2)), rng.uniform(size=(10, 4))
    assert np.array_equal(H.eval(t, w), back.eval(t, w))
    assert back.to_json() == H.to_json()
