"""Complex log-gamma, gamma ratios on the critical line and the ball-indicator Mellin transform."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import PoleAtNonPositiveInteger, PoleAtZero

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
# hi + lo splits of constants that enter at large magnitude
_LOG_SQRT_2PI_LO = -3.8782941580672414e-17
_LOG_PI = math.log(math.pi)
_LOG_PI_LO = 1.0265951162707826e-17
_PI_LO = 1.2246467991473532e-16
_STIRLING_TERMS = 12
_STIRLING_MIN = 15.0
_SPLIT = 134217729.0  # 2^27 + 1


@lru_cache(maxsize=1)
def _stirling_coeffs() -> tuple[float, ...]:
    # B_{2k} / (2k (2k-1))
    B = [Fraction(1)]
    for m in range(1, 2 * _STIRLING_TERMS + 1):
        B.append(-sum(math.comb(m + 1, k) * B[k] for k in range(m)) / Fraction(m + 1))
    return tuple(float(B[2 * k] / (2 * k * (2 * k - 1))) for k in range(1, _STIRLING_TERMS + 1))


# Error-free transformations. For |z| near 10^3, log Gamma is ~6e3 and the
# naive main term loses a few ulp; carrying products and sums in
# double-double keeps the result within about one rounding.


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _sum2(terms):
    """Compensated sum (hi, lo) of a list of equally shaped arrays."""
    s = terms[0]
    c = np.zeros_like(s)
    for t in terms[1:]:
        s, e = _two_sum(s, t)
        c = c + e
    return _two_sum(s, c)


def _loggamma_right_dd(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log Gamma for Re z >= 1/2 as a complex (hi, lo) pair, by upward shift and Stirling."""
    acc = np.zeros(z.shape, dtype=complex)
    w = z.copy()
    need = np.abs(w) < _STIRLING_MIN
    while np.any(need):
        acc[need] += np.log(w[need])
        w[need] += 1.0
        need = np.abs(w) < _STIRLING_MIN
    x, y = w.real, w.imag
    ux = x - 0.5  # exact
    # log w = c + i d with c = log|w| refined from the exact |w|^2
    S, S_lo = _sum2([*_two_prod(x, x), *_two_prod(y, y)])
    c = 0.5 * np.log(S)
    p, e = _two_prod(S, np.exp(-2.0 * c))
    c_lo = 0.5 * (((p - 1.0) + e) + S_lo / S)
    d = np.arctan2(y, x)
    series = np.zeros(z.shape, dtype=complex)
    inv = 1.0 / w
    inv2 = inv * inv
    pw = inv
    for coef in _stirling_coeffs():
        series += coef * pw
        pw = pw * inv2
    rest = series - acc
    pr, er = _two_prod(ux, c)
    qr, fr = _two_prod(y, d)
    re = _sum2([pr, er, ux * c_lo, -qr, -fr, -x, np.full(x.shape, LOG_SQRT_2PI), np.full(x.shape, _LOG_SQRT_2PI_LO), rest.real])
    pi_, ei = _two_prod(ux, d)
    qi, fi = _two_prod(y, c)
    im = _sum2([pi_, ei, qi, fi, y * c_lo, -y, rest.imag])
    return re[0] + 1j * im[0], re[1] + 1j * im[1]


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    hi, lo = _loggamma_right_dd(z)
    return hi + lo


def _log_sin_pi_dd(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log sin(pi z) as a (hi, lo) pair, stable for large |Im z|."""
    # sin(pi z) is 2-periodic; reducing first keeps the phase accurate
    z = z - 2.0 * np.round(z.real / 2.0)
    flip = z.imag < 0
    zu = np.where(flip, np.conj(z), z)
    # sin(pi z) = e^{-i pi z} (e^{2 pi i z} - 1) / (2i); -i pi z = pi y - i pi x
    rest = np.log(np.expm1(2j * np.pi * zu) / 2j)
    py, ey = _two_prod(np.full(zu.shape, math.pi), zu.imag)
    px, ex = _two_prod(np.full(zu.shape, math.pi), zu.real)
    re = _sum2([py, ey, _PI_LO * zu.imag, rest.real])
    im = _sum2([-px, -ex, -_PI_LO * zu.real, rest.imag])
    hi = re[0] + 1j * im[0]
    lo = re[1] + 1j * im[1]
    return np.where(flip, np.conj(hi), hi), np.where(flip, np.conj(lo), lo)


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    hi, lo = _log_sin_pi_dd(z)
    return hi + lo


def log_gamma(z):
    """log Gamma(z) for complex z (vectorized).

    For Re z >= 1/2 this is the branch continuous in z that is real on the
    positive axis; elsewhere the reflection formula is used and only
    exp(log_gamma) is guaranteed.
    """
    z_arr = np.asarray(z, dtype=complex)
    flat = np.atleast_1d(z_arr).ravel()
    bad = (flat.imag == 0) & (flat.real <= 0) & (flat.real == np.round(flat.real))
    if np.any(bad):
        raise PoleAtNonPositiveInteger(f"Gamma has a pole at {flat[bad][0].real:g}")
    out = np.empty(flat.shape, dtype=complex)
    right = flat.real >= 0.5
    if np.any(right):
        out[right] = _loggamma_right(flat[right])
    left = ~right
    if np.any(left):
        zl = flat[left]
        s_hi, s_lo = _log_sin_pi_dd(zl)
        g_hi, g_lo = _loggamma_right_dd(1.0 - zl)
        n = zl.shape
        re = _sum2([np.full(n, _LOG_PI), np.full(n, _LOG_PI_LO), -s_hi.real, -s_lo.real, -g_hi.real, -g_lo.real])
        im = _sum2([-s_hi.imag, -s_lo.imag, -g_hi.imag, -g_lo.imag])
        out[left] = (re[0] + re[1]) + 1j * (im[0] + im[1])
    out = out.reshape(z_arr.shape)
    return complex(out) if out.ndim == 0 else out


def digamma_real_part(z) -> np.ndarray:
    """Re psi(z) for Re z > 0 via a central difference of log|Gamma| along the real axis."""
    z = np.asarray(z, dtype=complex)
    h = 1e-5
    return (np.real(log_gamma(z + h)) - np.real(log_gamma(z - h))) / (2 * h)


# --------------------------------------------------------------------------
# Gamma ratio |Gamma(1/2+it)|^r / |Gamma(r(1/2+it))|


def _log_cosh(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2 * ax)) - math.log(2.0)


def log_gamma_ratio_abs(r: int, t) -> np.ndarray:
    """log of |Gamma(1/2+it)|^r / |Gamma(r(1/2+it))| from the closed-form products.

    Uses |Gamma(1/2+iy)|^2 = pi/cosh(pi y), |Gamma(1+iy)|^2 = pi y/sinh(pi y)
    and the recurrence Gamma(z+1) = z Gamma(z):

      r odd : ratio^2 = pi^{r-1} cosh(pi r t) / (cosh(pi t)^r prod_{k=1}^{(r-1)/2} ((k-1/2)^2 + r^2 t^2))
      r even: ratio^2 = pi^{r-1} sinh(pi r t) / (r t cosh(pi t)^r prod_{k=1}^{r/2-1} (k^2 + r^2 t^2))
    """
    r = int(r)
    if r < 1:
        raise ValueError("r must be >= 1")
    t = np.abs(np.asarray(t, dtype=float))
    rt2 = (r * t) ** 2
    log_sq = (r - 1) * math.log(math.pi) - r * _log_cosh(np.pi * t)
    if r % 2:
        log_sq = log_sq + _log_cosh(np.pi * r * t)
        for k in range(1, (r - 1) // 2 + 1):
            log_sq = log_sq - np.log((k - 0.5) ** 2 + rt2)
    else:
        x = np.pi * r * t
        # log(sinh(x) / (r t)) = log(pi) + log(sinh(x)/x), with the x -> 0 limit
        with np.errstate(divide="ignore", invalid="ignore"):
            shx = np.where(
                x > 1e-8,
                x + np.log(-np.expm1(-2 * np.maximum(x, 1e-300))) - math.log(2.0) - np.log(np.maximum(x, 1e-300)),
                x * x / 6.0,
            )
        log_sq = log_sq + math.log(math.pi) + shx
        for k in range(1, r // 2):
            log_sq = log_sq - np.log(k * k + rt2)
    return 0.5 * log_sq


def gamma_ratio_abs(r: int, t):
    out = np.exp(log_gamma_ratio_abs(r, t))
    return float(out) if out.ndim == 0 else out


def log_gamma_ratio_direct(r: int, t, sigma: float = 0.5) -> np.ndarray:
    """Same ratio at general sigma straight from log_gamma."""
    s = sigma + 1j * np.asarray(t, dtype=float)
    return np.real(r * log_gamma(s) - log_gamma(r * s))


# --------------------------------------------------------------------------
# Fitted constant for the ratio bound


@dataclass(frozen=True)
class GammaRatioBoundConfig:
    C: float
    fitted_over: str


def _bound_excess(r_values, t_values) -> np.ndarray:
    """(log ratio + r log r / 2 + (r-1)/2 log(|t|+1)) / r on the grid, shape (len r, len t)."""
    t = np.asarray(t_values, dtype=float)
    rows = []
    for r in r_values:
        lr = log_gamma_ratio_abs(r, t)
        rows.append((lr + 0.5 * r * math.log(r) + 0.5 * (r - 1) * np.log(np.abs(t) + 1)) / r)
    return np.array(rows)


def fit_gamma_constant(r_max: int = 64, t_max: float = 100.0, t_step: float = 0.1) -> GammaRatioBoundConfig:
    """Smallest C (rounded up to 2 decimals) for which the ratio bound holds on the grid."""
    n_t = int(round(t_max / t_step)) + 1
    t = np.linspace(0.0, t_max, n_t)
    raw = float(np.max(_bound_excess(range(1, r_max + 1), t)))
    C = math.ceil(raw * 100 - 1e-9) / 100
    cfg = GammaRatioBoundConfig(C, f"r in 1..{r_max}, t in 0..{t_max:g} step {t_step:g}")
    if not np.all(gamma_ratio_bound_grid_ok(cfg, range(1, r_max + 1), t)):
        raise ArithmeticError("fitted constant fails on its own grid")
    return cfg


@lru_cache(maxsize=1)
def default_bound_config() -> GammaRatioBoundConfig:
    return fit_gamma_constant()


def log_gamma_ratio_bound(r: int, t, cfg: GammaRatioBoundConfig) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return -0.5 * r * math.log(r) + cfg.C * r - 0.5 * (r - 1) * np.log(np.abs(t) + 1)


def gamma_ratio_bound(r: int, t, cfg: GammaRatioBoundConfig | None = None):
    """e^{-r log r / 2 + C r} / (|t|+1)^{(r-1)/2}."""
    cfg = cfg or default_bound_config()
    out = np.exp(log_gamma_ratio_bound(r, t, cfg))
    return float(out) if out.ndim == 0 else out


def gamma_ratio_bound_grid_ok(cfg: GammaRatioBoundConfig, r_values, t_values) -> np.ndarray:
    t = np.asarray(t_values, dtype=float)
    return np.array([log_gamma_ratio_abs(r, t) <= log_gamma_ratio_bound(r, t, cfg) + 1e-12 for r in r_values])


# --------------------------------------------------------------------------
# Mellin transform of the indicator of [0, R]


def mellin_indicator(R: float, s):
    """M 1_{[0,R]}(s) = R^s / s."""
    s_arr = np.asarray(s, dtype=complex)
    if np.any(s_arr == 0):
        raise PoleAtZero("Mellin transform of the indicator has a pole at s = 0")
    out = np.exp(s_arr * math.log(R)) / s_arr
    return complex(out) if out.ndim == 0 else out


def inverse_mellin_indicator(R: float, x: float, sigma: float, T: float, panels: int = 4000) -> float:
    """(1/2 pi i) int_{sigma-iT}^{sigma+iT} x^{-s} R^s / s ds by Gauss-Legendre panels.

    Tends to 1 for x < R, 0 for x > R and 1/2 at x = R as T grows.
    """
    nodes, weights = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(0.0, T, panels + 1)
    h = (edges[1:] - edges[:-1])[:, None]
    mid = (0.5 * (edges[1:] + edges[:-1]))[:, None]
    t = (mid + 0.5 * h * nodes[None, :]).ravel()
    w = (0.5 * h * weights[None, :]).ravel()
    s = sigma + 1j * t
    f = np.exp(s * math.log(R / x)) / s
    # ds = i dt and the integrand is Hermitian in t
    return float(np.sum(w * f.real) / math.pi)


def log_integrand_envelope(r: int, R: float, t, cfg: GammaRatioBoundConfig | None = None) -> np.ndarray:
    cfg = cfg or default_bound_config()
    t = np.asarray(t, dtype=float)
    return r * math.log(R) - 0.5 * r * math.log(r) + cfg.C * r - 0.5 * (r + 1) * np.log(np.abs(t) + 1)


def integrand_envelope(r: int, R: float, t, cfg: GammaRatioBoundConfig | None = None):
    """R^r e^{-r log r / 2 + C r} / (|t|+1)^{(r+1)/2}."""
    out = np.exp(log_integrand_envelope(r, R, t, cfg))
    return float(out) if out.ndim == 0 else out


def envelope_tail_integral(r: int, R: float, T: float, cfg: GammaRatioBoundConfig | None = None) -> float:
    """int_T^inf envelope dt = envelope(T) (T+1) 2/(r-1), for r >= 2."""
    if r < 2:
        return math.inf
    return integrand_envelope(r, R, T, cfg) * (abs(T) + 1) * 2.0 / (r - 1)


def mellin_gamma_term(r: int, R: float, t, sigma: float = 0.5) -> np.ndarray:
    """M 1_{[0,R]}(2 r s) Gamma(s)^r / (2^{s r} Gamma(r s)) at s = sigma + it (complex)."""
    s = sigma + 1j * np.asarray(t, dtype=float)
    logv = 2 * r * s * math.log(R) - np.log(2 * r * s) + r * log_gamma(s) - s * r * math.log(2.0) - log_gamma(r * s)
    return np.exp(logv)
