import math

import pytest

from ilz.arakelov import ALLOWLIST, mean_count_mc
from ilz.characters import residue_at_one
from ilz.cyclo_field import create_field, totient
from ilz.errors import InsufficientDecay, Overflow
from ilz.packing import (
    PRIMORIAL_KMAX,
    certified_volume_bound,
    mc_soundness_check,
    primorial_table,
    sieve_totient_check,
    stark_floor,
)


@pytest.fixture(scope="module")
def cert16():
    return certified_volume_bound(16)


def test_primorial_examples():
    rows = primorial_table(5)
    assert (rows[2].n, rows[2].phi, rows[2].n_over_phi) == (30, 8, 3.75)
    assert (rows[4].n, rows[4].phi) == (2310, 480)
    assert rows[0].phi_loglog_phi is None
    assert rows[4].phi_loglog_phi == pytest.approx(480 * math.log(math.log(480)))


def test_primorial_full_table():
    rows = primorial_table(PRIMORIAL_KMAX)
    assert rows[-1].n < 2**63
    ratios = [r.n_over_phi for r in rows]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert sieve_totient_check(rows[:8])
    assert all(totient(r.n) == r.phi for r in rows[:8])
    with pytest.raises(Overflow):
        primorial_table(PRIMORIAL_KMAX + 1)
    with pytest.raises(ValueError):
        primorial_table(0)


def test_stark_floor_examples():
    assert stark_floor(4) == pytest.approx(0.000362)
    assert stark_floor(4) < math.pi / 4
    assert 0 < stark_floor(16) < residue_at_one(16)


@pytest.mark.parametrize("n", sorted(ALLOWLIST))
def test_stark_inequality(n):
    K = create_field(n)
    assert residue_at_one(K) >= stark_floor(K) > 0


def test_certificate_q16(cert16):
    c = cert16
    assert 0 < c.V_star < 16
    assert c.margin == pytest.approx(0.16)
    assert c.check()
    assert c.slack >= 0
    d = c.as_dict()
    for key in ("epsilon", "quad_error_est", "tail_bound", "margin", "V_star"):
        assert key in d
    assert "not formal" in c.kind


def test_certificate_small_margin():
    c = certified_volume_bound(16, margin=0.01)
    assert 0 < c.V_star < 16 and c.check()


def test_certificate_insufficient_decay():
    with pytest.raises(InsufficientDecay):
        certified_volume_bound(4)
    with pytest.raises(InsufficientDecay):
        certified_volume_bound(5)


@pytest.mark.slow
def test_certificate_non_decreasing_in_t(cert16):
    c2 = certified_volume_bound(16, T=120.0)
    assert c2.V_star >= cert16.V_star - 1e-6


def test_certificate_mc_soundness(cert16):
    c = cert16
    mc = mean_count_mc(16, c.V_star, 100_000, rng_seed=3)
    assert mc.mean + 3 * mc.stderr < 1 + c.n - c.margin / 2
    sc = mc_soundness_check(c, 20_000, rng_seed=4)
    assert sc.passed and sc.threshold == pytest.approx(17 - 0.08)
