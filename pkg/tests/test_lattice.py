import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilz._incgamma import scaled_upper_gamma, scaled_upper_gamma_sum
from ilz._lattice import count_in_ball, covering_radius_bound, enumerate_norms, lll_gram


def _random_gram(rng, d, spread=1.0):
    B = rng.normal(size=(d, d)) + 2 * np.eye(d)
    B *= np.exp(spread * rng.normal(size=d))[None, :]
    return B.T @ B


def _brute_norms(G, B, box):
    d = G.shape[0]
    out = []
    for x in itertools.product(range(-box, box + 1), repeat=d):
        x = np.array(x)
        if not x.any():
            continue
        q = x @ G @ x
        if q <= B:
            out.append(q)
    return np.sort(out)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_fincke_pohst_vs_brute_force(d):
    rng = np.random.default_rng(d)
    done = 0
    while done < 6:
        G = _random_gram(rng, d, 0.3)
        B = float(rng.uniform(1, 30))
        # the box must contain the ball: |x_i| <= sqrt(B (G^-1)_ii)
        reach = np.sqrt(B * np.diag(np.linalg.inv(G)))
        if reach.max() >= 6:
            continue
        ref = _brute_norms(G, B, 6)
        got = enumerate_norms(G, B)
        assert len(got) == len(ref)
        assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)
        assert count_in_ball(G, B) == len(ref) + 1
        done += 1


def test_count_examples():
    I2 = np.eye(2)
    assert count_in_ball(I2, 1.0) == 5
    assert count_in_ball(I2, 0.0) == 1
    assert count_in_ball(I2, 2.0) == 9
    assert count_in_ball(np.eye(4), 1.0) == 9
    # D4-ish check: Z^8 with radius^2 = 2 has 1 + 16 + 112 points
    assert count_in_ball(np.eye(8), 2.0) == 129


@pytest.mark.parametrize("d", [2, 4, 8])
def test_lll_unimodular_and_equivalent(d):
    rng = np.random.default_rng(100 + d)
    for _ in range(5):
        G = _random_gram(rng, d, 1.0)
        Gr, U = lll_gram(G)
        assert abs(round(np.linalg.det(U.astype(float)))) == 1
        assert np.allclose(Gr, U.T @ G @ U, rtol=1e-9, atol=1e-9 * np.abs(G).max())
        assert np.linalg.det(Gr) == pytest.approx(np.linalg.det(G), rel=1e-8)
        # size reduction and Lovasz condition
        R = np.linalg.cholesky(Gr).T
        mu = R / np.diag(R)[:, None]
        assert np.all(np.abs(np.triu(mu, 1)) <= 0.5 + 1e-9)
        b = np.diag(R) ** 2
        for k in range(1, d):
            assert b[k] >= (0.99 - mu[k - 1, k] ** 2) * b[k - 1] - 1e-9 * b[k - 1]


def test_lll_preserves_counts():
    rng = np.random.default_rng(5)
    G = _random_gram(rng, 4, 0.5)
    Gr, _ = lll_gram(G)
    B = 3 * float(np.min(np.diag(Gr)))
    assert count_in_ball(G, B) == count_in_ball(Gr, B)


def test_covering_radius_bound_examples():
    assert covering_radius_bound(np.eye(2)) == pytest.approx(math.sqrt(2) / 2)
    assert covering_radius_bound(np.diag([4.0, 1.0])) == pytest.approx(0.5 * math.sqrt(5))


def _mp_g(a, z):
    a, z = mp.mpc(a), mp.mpf(z)
    return complex(mp.gammainc(a, z) * z ** (-a))


@pytest.mark.parametrize(
    "a",
    [0.5, 1.0, 2.5, 4.0, -0.5, -1.0, -2.0, -3.5, 0.25 + 3j, -1.5 + 0.7j, 2 - 10j, 0.01, -0.99, 1e-3 + 1e-3j],
)
def test_scaled_upper_gamma_vs_mpmath(a):
    for z in (1e-3, 0.05, 0.29, 0.3, 0.9, 1.5, 3.0, 8.0, 30.0, 120.0):
        ref = _mp_g(a, z)
        tol = 1e-13 if z >= 0.3 else 4e-13
        got = scaled_upper_gamma(a, z)
        assert abs(got - ref) <= tol * abs(ref), (a, z, got, ref)


@settings(max_examples=150, deadline=None)
@given(st.floats(-4, 6), st.floats(-20, 20), st.floats(0.3, 60))
def test_scaled_upper_gamma_property(ar, ai, z):
    a = complex(ar, ai)
    ref = _mp_g(a, z)
    assert abs(scaled_upper_gamma(a, z) - ref) <= 1e-13 * abs(ref)


def test_scaled_upper_gamma_sum():
    a = 1.25 - 0.5j
    zs = np.sort(np.array([0.4, 1.0, 2.0, 9.0, 9.0]))
    ga = complex(mp.gamma(a))
    assert scaled_upper_gamma_sum(a, zs, ga) == pytest.approx(sum(_mp_g(a, z) for z in zs), rel=1e-13)


@pytest.mark.parametrize("a,z", [(5e-324j, 1.0), (5e-324j, 0.25), (-2 + 1e-300j, 0.1), (1e-310, 0.5)])
def test_scaled_upper_gamma_next_to_a_pole(a, z):
    # Gamma(a) overflows here but G(a, z) is finite
    ref = complex(mp.gammainc(mp.mpc(a), z) * mp.power(z, -mp.mpc(a)))
    assert abs(scaled_upper_gamma(a, z) - ref) <= 1e-13 * abs(ref)


def test_scaled_upper_gamma_rejects_nonpositive_z():
    with pytest.raises(ValueError):
        scaled_upper_gamma(1.0, 0.0)


@settings(max_examples=150, deadline=None)
@given(st.floats(-4, 6), st.floats(-20, 20), st.floats(1e-4, 0.3))
def test_scaled_upper_gamma_small_z_property(ar, ai, z):
    a = complex(ar, ai)
    ref = _mp_g(a, z)
    assert abs(scaled_upper_gamma(a, z) - ref) <= 4e-13 * abs(ref)
