"""Finite-n packing bounds from the mean-count formula, the primorial table and the Stark floor."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .arakelov import _as_field, _check_allowed, mean_count_mc
from .characters import _primes_up_to
from .cyclo_field import totient
from .errors import InsufficientDecay, NoPositiveBound, Overflow
from .gamma_mellin import GammaRatioBoundConfig
from .hecke import DEFAULT_SIGMA, DEFAULT_T, ErrorTermResult, error_term

STARK_C1 = 0.001448
PRIMORIAL_KMAX = 15  # the 16th primorial exceeds 2^63


@dataclass(frozen=True)
class PackingCertificate:
    """Numerical certificate: V + |eps| + quad_error_est + tail_bound <= n - margin at V = V_star.

    Then the mean count 1 + V + eps is below 1 + n, and since every count is
    1 mod n some lattice meets the ball only at the origin. Certified only
    relative to the quadrature estimate and the heuristic tail bound.
    """

    n: int
    V_star: float
    epsilon: float
    quad_error_est: float
    tail_bound: float
    margin: float
    slack: float
    sigma: float
    T: float
    resolution: float
    kind: str = "numerical (quadrature estimate + heuristic zeta tail), not formal"

    def check(self) -> bool:
        """Re-verify the defining inequality from the stored components."""
        return self.V_star + abs(self.epsilon) + self.quad_error_est + self.tail_bound <= self.n - self.margin

    def as_dict(self) -> dict:
        return asdict(self)


def _budget(r: ErrorTermResult) -> float:
    return abs(r.epsilon) + r.quad_error_est + r.tail_bound


def certified_volume_bound(
    K,
    margin: float | None = None,
    sigma: float = DEFAULT_SIGMA,
    T: float = DEFAULT_T,
    cfg: GammaRatioBoundConfig | None = None,
) -> PackingCertificate:
    """Largest V (bisection at resolution 1e-4 n) with V + |eps| + quad + tail <= n - margin."""
    K = _as_field(K)
    if K.r2 < 4:
        raise InsufficientDecay(f"r2 = {K.r2} < 4")
    _check_allowed(K)
    n = K.n
    margin = 0.01 * n if margin is None else float(margin)
    target = n - margin
    res = 1e-4 * n

    def slack(V):
        r = error_term(K, V, sigma, T, cfg)
        return target - V - _budget(r), r

    s_lo, r_lo = slack(res)
    if s_lo < 0:
        raise NoPositiveBound(f"V = {res:g} already violates the bound (slack {s_lo:.3g})")
    lo, hi = res, target
    s_hi, r_hi = slack(hi)
    if s_hi >= 0:
        lo, r_lo, s_lo = hi, r_hi, s_hi
    else:
        while hi - lo > res:
            mid = 0.5 * (lo + hi)
            s_mid, r_mid = slack(mid)
            if s_mid >= 0:
                lo, r_lo, s_lo = mid, r_mid, s_mid
            else:
                hi = mid
    return PackingCertificate(
        n=n,
        V_star=lo,
        epsilon=r_lo.epsilon,
        quad_error_est=r_lo.quad_error_est,
        tail_bound=r_lo.tail_bound,
        margin=margin,
        slack=s_lo,
        sigma=sigma,
        T=T,
        resolution=res,
    )


@dataclass(frozen=True)
class SoundnessCheck:
    mc_mean: float
    mc_stderr: float
    threshold: float
    N: int
    passed: bool


def mc_soundness_check(
    cert: PackingCertificate, N: int = 100_000, rng_seed: int = 0, threads: int | None = None
) -> SoundnessCheck:
    """Monte Carlo mean count at V* must sit below 1 + n - margin/2 by 3 standard errors."""
    mc = mean_count_mc(cert.n, cert.V_star, N, rng_seed=rng_seed, threads=threads)
    threshold = 1 + cert.n - cert.margin / 2
    return SoundnessCheck(mc.mean, mc.stderr, threshold, N, mc.mean + 3 * mc.stderr < threshold)


@dataclass(frozen=True)
class PrimorialRow:
    k: int
    n: int
    phi: int
    n_over_phi: float
    phi_loglog_phi: float | None  # undefined for phi <= 1


def primorial_table(k_max: int) -> list[PrimorialRow]:
    """Rows for n = product of the first k primes, k = 1..k_max."""
    if k_max > PRIMORIAL_KMAX:
        raise Overflow(f"k_max = {k_max} > {PRIMORIAL_KMAX}: primorial exceeds 64 bits")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    primes = _primes_up_to(60)[:k_max]
    rows = []
    n, phi = 1, 1
    for k, p in enumerate(primes, start=1):
        n *= p
        phi *= p - 1
        ll = phi * math.log(math.log(phi)) if phi > 1 else None
        rows.append(PrimorialRow(k, n, phi, n / phi, ll))
    return rows


def stark_floor(K) -> float:
    """c1 / (d |Delta|^{1/d}) with c1 = 0.001448."""
    K = _as_field(K)
    d = K.degree
    return STARK_C1 / (d * math.exp(math.log(K.abs_disc) / d))


def sieve_totient_check(rows: list[PrimorialRow]) -> bool:
    return all(totient(r.n) == r.phi for r in rows)
