import math
from collections import Counter

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilz.arakelov import ALLOWLIST
from ilz.characters import (
    conductor_product,
    dedekind_zeta,
    enumerate_characters,
    euler_product,
    euler_product_tail_bound,
    hurwitz_zeta,
    hurwitz_zeta_regular,
    l_function,
    residue_at_one,
    subconvexity_profile,
)
from ilz.cyclo_field import create_field, totient
from ilz.errors import NotNormalized, OutOfAccuracyEnvelope, PoleAtOne

CATALAN = 0.915965594177219015054603514932


def _chi_minus4():
    (chi,) = [c for c in enumerate_characters(4) if not c.is_principal]
    return chi


def test_characters_mod_4():
    chars = enumerate_characters(4)
    assert len(chars) == 2
    assert sorted(c.conductor for c in chars) == [1, 4]


def test_characters_mod_8():
    chars = enumerate_characters(8)
    assert Counter(c.conductor for c in chars) == Counter({1: 1, 4: 1, 8: 2})
    assert conductor_product(8) == 256 == create_field(8).abs_disc


def test_characters_reject_bad_n():
    with pytest.raises(NotNormalized):
        enumerate_characters(10)


def _brute_conductor(chi):
    """Smallest q | n such that chi is trivial on residues = 1 mod q."""
    n = chi.modulus
    for q in sorted(d for d in range(1, n + 1) if n % d == 0):
        if all(chi.exponent(a) == 0 for a in range(1, n) if math.gcd(a, n) == 1 and a % q == 1 % q):
            return q
    return n


@pytest.mark.parametrize("n", [3, 4, 5, 7, 8, 9, 12, 15, 16, 20, 21, 24, 32, 36])
def test_character_group_invariants(n):
    chars = enumerate_characters(n)
    assert len(chars) == totient(n)
    assert sum(c.is_principal for c in chars) == 1
    assert chars[0].is_principal
    units = [a for a in range(1, n) if math.gcd(a, n) == 1]
    for chi in chars:
        assert n % chi.conductor == 0
        assert chi.conductor == _brute_conductor(chi)
        for a in units[:8]:
            for b in units[:8]:
                assert chi.exponent(a * b) == (chi.exponent(a) + chi.exponent(b)) % 1
        if not chi.is_principal:
            assert abs(sum(chi(a) for a in range(n))) < 1e-12
    # distinct characters
    assert len({tuple(sorted(c.value_table.items())) for c in chars}) == len(chars)


@pytest.mark.parametrize("n", sorted(ALLOWLIST))
def test_conductor_discriminant_formula(n):
    assert conductor_product(n) == create_field(n).abs_disc


def test_hurwitz_examples():
    assert hurwitz_zeta(2, 1.0) == pytest.approx(math.pi**2 / 6, rel=1e-13)
    assert hurwitz_zeta(2, 0.5) == pytest.approx(math.pi**2 / 2, rel=1e-13)
    with pytest.raises(PoleAtOne):
        hurwitz_zeta(1, 0.5)


def test_hurwitz_vs_mpmath_grid():
    rng = np.random.default_rng(0)
    for _ in range(60):
        s = complex(rng.uniform(-2, 4), rng.uniform(-200, 200))
        a = float(rng.uniform(0.05, 1.0))
        ref = complex(mp.zeta(mp.mpc(s), a))
        assert abs(hurwitz_zeta(s, a) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_hurwitz_regular_at_one_is_minus_digamma():
    for a in (0.25, 0.5, 1.0):
        assert hurwitz_zeta_regular(1.0, a).real == pytest.approx(-float(mp.digamma(a)), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.floats(-3, 5), st.floats(-150, 150), st.floats(0.05, 1.0))
def test_hurwitz_recurrence(sr, si, a):
    s = complex(sr, si)
    if abs(s - 1) < 1e-6:
        return
    z, p = hurwitz_zeta(s, a), a ** (-s)
    rhs = hurwitz_zeta(s, a + 1)
    # relative to the largest term: z and p can both be ~1e6 while rhs ~ 1
    assert abs(z - p - rhs) <= 1e-11 * max(1.0, abs(z), abs(p), abs(rhs))


@settings(max_examples=30, deadline=None)
@given(st.floats(1.1, 6.0))
def test_hurwitz_at_one_is_riemann_zeta(s):
    assert hurwitz_zeta(s, 1.0).real == pytest.approx(float(mp.zeta(s)), rel=1e-12)


def test_l_function_examples():
    chi = _chi_minus4()
    assert l_function(chi, 2).value.real == pytest.approx(CATALAN, rel=1e-12)
    assert l_function(chi, 1).value.real == pytest.approx(math.pi / 4, rel=1e-12)
    principal = enumerate_characters(4)[0]
    assert l_function(principal, 3).value.real == pytest.approx(1.2020569031595942, rel=1e-13)
    assert l_function(principal, 3, imprimitive=True).value.real == pytest.approx(1.2020569031595942 * (1 - 2**-3), rel=1e-13)
    with pytest.raises(PoleAtOne):
        l_function(principal, 1)


def _mp_dirichlet(chi, s):
    vals = [complex(chi.primitive_values[a]) for a in range(chi.conductor)]
    return complex(mp.dirichlet(mp.mpc(s), vals))


@pytest.mark.parametrize("n", [5, 8, 12, 15])
def test_l_function_vs_mpmath(n):
    rng = np.random.default_rng(n)
    for chi in enumerate_characters(n):
        for s in (2.0, 0.5 + 1j * rng.uniform(0, 50), complex(rng.uniform(0.6, 3), rng.uniform(-30, 30))):
            lv = l_function(chi, s)
            ref = _mp_dirichlet(chi, s)
            assert abs(lv.value - ref) <= 1e-10 * max(1.0, abs(ref))
            assert lv.est_error < 1e-10 and not lv.flagged


def test_dedekind_zeta_q_i():
    assert dedekind_zeta(4, 2).real == pytest.approx(math.pi**2 / 6 * CATALAN, rel=1e-12)
    assert dedekind_zeta(4, 2) == pytest.approx(1.5067030099229851, rel=1e-12)
    with pytest.raises(PoleAtOne):
        dedekind_zeta(5, 1)


@pytest.mark.parametrize("n", [5, 8, 16])
def test_dedekind_zeta_conjugate_symmetry(n):
    s = 0.5 + 17.3j
    assert dedekind_zeta(n, s.conjugate()) == pytest.approx(np.conj(dedekind_zeta(n, s)), rel=1e-12)


@pytest.mark.parametrize("n", [4, 5, 8, 12, 15])
def test_dedekind_zeta_vs_euler_product(n):
    z = dedekind_zeta(n, 3).real
    assert abs(z - euler_product(n, 3)) <= euler_product_tail_bound(n, 3) * z


@pytest.mark.parametrize("n", [5, 9, 16])
@pytest.mark.parametrize("s", [2, 3, 4])
def test_dedekind_zeta_real_positive(n, s):
    z = dedekind_zeta(n, s)
    assert abs(z.imag) < 1e-9 and z.real > 0


def test_dedekind_zeta_vectorized():
    s = np.array([2.0, 3.0, 0.5 + 10j])
    z = dedekind_zeta(8, s)
    assert z.shape == (3,)
    assert z[2] == pytest.approx(dedekind_zeta(8, 0.5 + 10j), rel=1e-13)


def test_residue_q_i():
    assert residue_at_one(4) == pytest.approx(math.pi / 4, rel=1e-12)
    # vol(Ar(Q(i))) = 2 pi * 1 / 4 = pi/2
    assert residue_at_one(4) * math.sqrt(4) == pytest.approx(math.pi / 2, rel=1e-12)


@pytest.mark.parametrize("n", [3, 5, 7, 8, 12, 16])
def test_residue_positive_and_matches_limit(n):
    res = residue_at_one(n)
    assert res > 0
    eps = 1e-6
    approx = eps * dedekind_zeta(n, 1 + eps).real
    assert approx == pytest.approx(res, rel=1e-4)


def test_subconvexity_profile():
    rows = subconvexity_profile(4, [0.0])
    assert 0 < rows[0]["abs_zeta"] < math.inf
    rows = subconvexity_profile(5, range(11))
    assert len(rows) == 11
    py = [r["py_curve"] for r in rows]
    assert all(b > a for a, b in zip(py, py[1:]))
    a, b = subconvexity_profile(8, [7.5, -7.5])
    assert a["abs_zeta"] == pytest.approx(b["abs_zeta"], rel=1e-12)
    with pytest.raises(OutOfAccuracyEnvelope):
        subconvexity_profile(5, [250.0])
