"""Hecke integration formula, the contour error term and the mean-count prediction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arakelov import (
    CHUNK,
    MCResult,
    _as_field,
    _check_allowed,
    _draw,
    grams_of,
    log_unit_basis,
    radius_for_volume,
)
from .characters import dedekind_zeta, residue_at_one
from .cyclo_field import CyclotomicField
from .epstein import epstein_continued
from .errors import BadSigma, DivergentRegion, InsufficientDecay, PoleAtOne
from .gamma_mellin import (
    GammaRatioBoundConfig,
    default_bound_config,
    envelope_tail_integral,
    log_gamma,
    mellin_gamma_term,
)

DEFAULT_SIGMA = 0.5
DEFAULT_T = 60.0
GL_NODES = 8
QUAD_RTOL = 1e-9


def log_arakelov_volume(K: CyclotomicField) -> float:
    """log vol(Ar(K)) = log(sqrt(Delta) Res_{s=1} zeta_K)."""
    return 0.5 * math.log(K.abs_disc) + math.log(residue_at_one(K))


def hecke_rhs(K, s: float) -> float:
    """Average of E(Lambda, d s) over Ar(K) from the closed form (r1 = 0)."""
    K = _as_field(K)
    if s == 1:
        raise PoleAtOne("the Hecke formula has a pole at s = 1")
    if s <= 1:
        raise DivergentRegion("the Hecke formula needs s > 1")
    d, r2 = K.degree, K.r2
    logD = math.log(K.abs_disc)
    z = dedekind_zeta(K, s).real
    logv = (
        math.log(z)
        - log_arakelov_volume(K)
        + s * d / 2 * math.log(math.pi)
        - log_gamma(s * d / 2).real
        - math.log(d / 2)
        + s / 2 * logD
        - s * r2 * math.log(2 * math.pi)
        + r2 * log_gamma(s).real
        + r2 * math.log(2 * math.pi)
    )
    return math.exp(logv)


def hecke_lhs_mc(K, s: float, N: int, rng_seed: int = 0, rtol: float = 1e-10) -> MCResult:
    """Monte Carlo mean of E(Lambda, d s) over Haar samples of Ar(K)."""
    K = _as_field(K)
    _check_allowed(K)
    if s == 1:
        raise PoleAtOne("the Hecke formula has a pole at s = 1")
    if s <= 1:
        raise DivergentRegion("the Hecke formula needs s > 1")
    basis = log_unit_basis(K)
    vals = []
    for c, start in enumerate(range(0, N, CHUNK)):
        lam, theta = _draw(basis, K.r2, np.random.default_rng([rng_seed, c]), min(CHUNK, N - start))
        for G in grams_of(K, lam, theta):
            vals.append(epstein_continued(G, K.degree * s, rtol=rtol).real)
    v = np.array(vals)
    mean = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(N)) if N > 1 else 0.0
    return MCResult(mean, se, N, v)


# --------------------------------------------------------------------------
# Error term


@dataclass(frozen=True)
class ErrorTermResult:
    epsilon: float
    sigma: float
    T: float
    quad_error_est: float
    tail_bound: float
    n_nodes: int
    imag_part: float
    R: float
    tail_bound_heuristic: bool = True


_ZETA_CACHE: dict[tuple, np.ndarray] = {}


def _panel_nodes(T: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(GL_NODES)
    h = T / panels
    mid = (np.arange(panels) + 0.5) * h
    t = (mid[:, None] + 0.5 * h * x[None, :]).ravel()
    wt = np.tile(0.5 * h * w, panels)
    return t, wt


def _zeta_nodes(K: CyclotomicField, sigma: float, t: np.ndarray, key: tuple) -> np.ndarray:
    full = (K.n, sigma) + key
    if full not in _ZETA_CACHE:
        _ZETA_CACHE[full] = dedekind_zeta(K, sigma + 1j * t)
    return _ZETA_CACHE[full]


def clear_zeta_cache() -> None:
    _ZETA_CACHE.clear()


def _max_gamma_phase_rate(r: int, sigma: float, T: float) -> float:
    """max over [0, T] of |d/dt arg(Gamma(s)^r / Gamma(r s))| / r, numerically."""
    t = np.linspace(0.0, T, 2001)
    h = 1e-4
    ph = lambda tt: np.imag(r * log_gamma(sigma + 1j * tt) - log_gamma(r * (sigma + 1j * tt)))
    rate = (ph(t + h) - ph(t)) / h
    return float(np.max(np.abs(rate))) / r


def oscillation_rate(K: CyclotomicField, R: float, sigma: float, T: float) -> float:
    """omega = log(Delta)/2 + 2 r2 |log R| + r2 * max gamma phase rate."""
    r2 = K.r2
    return 0.5 * math.log(K.abs_disc) + 2 * r2 * abs(math.log(R)) + r2 * _max_gamma_phase_rate(r2, sigma, T)


def _integrand(K: CyclotomicField, R: float, sigma: float, t: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    s = sigma + 1j * t
    return np.exp(0.5 * s * math.log(K.abs_disc)) * zeta * mellin_gamma_term(K.r2, R, t, sigma)


def _zeta_sup(K: CyclotomicField, sigma: float, T: float) -> float:
    """max |zeta_K(sigma+it)| sampled on [T, 2T]; used flat beyond 2T (heuristic)."""
    key = ("sup", T)
    t = np.linspace(T, 2 * T, max(400, int(40 * T)) + 1)
    z = _zeta_nodes(K, sigma, t, key)
    return float(np.max(np.abs(z)))


def _envelope_factor(r: int, sigma: float, T: float) -> float:
    """Transfer factor from the sigma = 1/2 gamma part to the one at sigma.

    1 at sigma = 1/2, where the envelope dominates directly; otherwise the
    sampled sup over [T, 4T] of |gamma part at sigma| / |gamma part at 1/2|,
    both taken with R = 1 (the R dependence is carried by R^{2 sigma}).
    """
    if sigma == 0.5:
        return 1.0
    t = np.linspace(T, 4 * T, 2001)
    num = np.log(np.abs(mellin_gamma_term(r, 1.0, t, sigma)))
    den = np.log(np.abs(mellin_gamma_term(r, 1.0, t, 0.5)))
    return float(np.exp(np.max(num - den)))


def error_term(
    K,
    V: float,
    sigma: float = DEFAULT_SIGMA,
    T: float = DEFAULT_T,
    cfg: GammaRatioBoundConfig | None = None,
    max_level: int = 18,
) -> ErrorTermResult:
    """epsilon(R, K) from the critical-line integral, folded onto [0, T].

    tail_bound = prefactor * Delta^{sigma/2} * max_{[T,2T]} |zeta_K| *
    int_T^inf envelope: heuristic, since the zeta sup is only sampled.
    """
    K = _as_field(K)
    if K.r2 < 4:
        raise InsufficientDecay(f"r2 = {K.r2} < 4: the integrand does not decay fast enough")
    if not (0.5 <= sigma < 1.0):
        raise BadSigma(f"sigma = {sigma} outside [1/2, 1)")
    if V <= 0:
        raise ValueError("V must be positive")
    r2 = K.r2
    R = radius_for_volume(K.degree, V)
    pref = 2.0 * (2 * math.pi) ** r2 / (math.exp(log_arakelov_volume(K)) * math.pi)
    omega = oscillation_rate(K, R, sigma, T)
    level = max(0, math.ceil(math.log2(T / (math.pi / (4 * omega)))))

    def integral(k):
        t, w = _panel_nodes(T, 2**k)
        z = _zeta_nodes(K, sigma, t, ("gl", T, k))
        return pref * float(np.sum(w * _integrand(K, R, sigma, t, z).real))

    prev = integral(level)
    while True:
        level += 1
        cur = integral(level)
        diff = abs(cur - prev)
        if diff < QUAD_RTOL * (1 + abs(cur)) or level >= max_level:
            break
        prev = cur
    eps = cur

    # Hermitian check: the unfolded integral over [-T, T] must be real
    t, w = _panel_nodes(T, 2**level)
    zpos = _zeta_nodes(K, sigma, t, ("gl", T, level))
    zneg = _zeta_nodes(K, sigma, -t, ("gl-neg", T, level))
    raw = 0.5 * pref * np.sum(w * (_integrand(K, R, sigma, t, zpos) + _integrand(K, R, sigma, -t, zneg)))

    zsup = _zeta_sup(K, sigma, T)
    tail = (
        pref
        * math.exp(0.5 * sigma * math.log(K.abs_disc))
        * zsup
        * _envelope_factor(r2, sigma, T)
        * envelope_tail_integral(r2, R ** (2 * sigma), T, cfg or default_bound_config())
    )
    return ErrorTermResult(
        epsilon=eps,
        sigma=sigma,
        T=T,
        quad_error_est=diff,
        tail_bound=tail,
        n_nodes=GL_NODES * 2**level,
        imag_part=float(raw.imag),
        R=R,
    )


def mean_count_prediction(K, V: float, sigma: float = DEFAULT_SIGMA, T: float = DEFAULT_T) -> float:
    """1 + V + epsilon."""
    return 1.0 + V + error_term(K, V, sigma, T).epsilon


def radius_diagnostic(K, V: float) -> dict:
    """Compare log R^{r2} - (1/2) log V with (d/4) log d; the gap over d/4 is the O(1) term."""
    K = _as_field(K)
    d = K.degree
    R = radius_for_volume(d, V)
    lhs = K.r2 * math.log(R) - 0.5 * math.log(V)
    return {"log_R_r2_minus_half_log_V": lhs, "quarter_d_log_d": 0.25 * d * math.log(d), "o1_term": lhs / (0.25 * d) - math.log(d)}
