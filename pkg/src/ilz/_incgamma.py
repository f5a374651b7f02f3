"""Scaled upper incomplete gamma G(a, z) = z^{-a} Gamma(a, z) = int_1^inf e^{-zx} x^{a-1} dx.

Continued fraction (modified Lentz) for z > Re a + 1, power series otherwise.
For Re a < 1/4 and small z both converge poorly, so a is shifted up to
|Re a| <= 1/2 and brought back by a downward recurrence. Within 1/4 of a pole
the series cancels; there Temme's split Gamma(a) - 1/a = -q(a) / rgamma(1 + a)
is used for small z and the continued fraction for larger z.
z is real and positive, a complex.
"""

from __future__ import annotations

import cmath
import math

import numba as nb
import numpy as np

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 200000
_TEMME_ZMAX = 0.5

# Taylor coefficients of 1 / Gamma(1 + a) at a = 0
_RGAMMA1 = np.array(
    [
        1.0,
        0.577215664901532861,
        -0.655878071520253881,
        -0.0420026350340952355,
        0.16653861138229149,
        -0.0421977345555443367,
        -0.00962197152787697356,
        0.00721894324666309954,
        -0.00116516759185906511,
        -0.000215241674114950973,
        0.000128050282388116186,
        -0.0000201348547807882387,
        -1.25049348214267066e-6,
        1.13302723198169588e-6,
        -2.0563384169776071e-7,
        6.11609510448141582e-9,
        5.00200764446922293e-9,
        -1.18127457048702014e-9,
        1.04342671169110051e-10,
        7.78226343990507125e-12,
        -3.69680561864220571e-12,
        5.10037028745447598e-13,
        -2.05832605356650678e-14,
        -5.34812253942301798e-15,
        1.22677862823826079e-15,
    ]
)


@nb.njit(cache=True, nogil=True)
def g_cf(a, z):
    b = z + 1.0 - a
    c = 1.0 / _TINY + 0j
    d = 1.0 / (b if abs(b) > _TINY else _TINY + 0j)
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-z) * h


@nb.njit(cache=True, nogil=True)
def g_series(a, z, gamma_a):
    term = 1.0 / a
    total = term
    for k in range(1, _MAX_ITER):
        term *= z / (a + k)
        total += term
        if abs(term) < _EPS * abs(total):
            break
    return cmath.exp(-a * math.log(z)) * gamma_a - math.exp(-z) * total


@nb.njit(cache=True, nogil=True)
def g_series_or_cf(a, z, gamma_a):
    """Series, unless it loses more than 2 bits to cancellation against Gamma(a)."""
    g = g_series(a, z, gamma_a)
    if z >= 0.3 and abs(cmath.exp(-a * math.log(z)) * gamma_a) > 4.0 * abs(g):
        return g_cf(a, z)
    return g


@nb.njit(cache=True, nogil=True)
def g_temme0(a, z):
    """G(a, z) for |a| < 1/4 and small z, free of the 1/a cancellation."""
    c = _RGAMMA1
    q = 0j
    for k in range(c.shape[0] - 1, 0, -1):
        q = q * a + c[k]
    rg = 1.0 + a * q
    lz = math.log(z)
    w = a * lz
    if abs(w) < 0.5:
        # (z^a - 1) / a = log z * sum w^k / (k+1)!
        term = 1.0 + 0j
        e = term
        for k in range(1, 40):
            term *= w / (k + 1)
            e += term
            if abs(term) < _EPS * abs(e):
                break
        zam1 = lz * e
    else:
        zam1 = (cmath.exp(w) - 1.0) / a
    t = 1.0 + 0j
    tail = 0j
    for k in range(1, _MAX_ITER):
        t *= -z / k
        term = t / (a + k)
        tail += term
        if abs(term) < _EPS * (abs(tail) + 1e-300):
            break
    za = cmath.exp(w)
    upper = -q / rg - zam1 - za * tail
    return upper / za


@nb.njit(cache=True, nogil=True)
def g_scaled(a, z, gamma_a):
    m = round(-a.real) if a.real < 0.25 else -1.0
    near_pole = m >= 0.0 and abs(a + m) < 0.25
    if m >= 0.0 and z < _TEMME_ZMAX:
        # start at a0 = a + m with |Re a0| <= 1/2, then
        # G(b, z) = (z G(b + 1, z) - e^{-z}) / b down to b = a
        a0 = a + m
        if near_pole:
            g = g_temme0(a0, z)
        else:
            gamma_a0 = gamma_a
            for j in range(int(m)):
                gamma_a0 *= a + j
            g = g_series(a0, z, gamma_a0)
        ez = math.exp(-z)
        for j in range(1, int(m) + 1):
            g = (z * g - ez) / (a0 - j)
        return g
    if z > a.real + 1.0 or near_pole:
        return g_cf(a, z)
    return g_series_or_cf(a, z, gamma_a)


@nb.njit(cache=True, nogil=True)
def g_sum(a, gamma_a, zs):
    """sum_k G(a, zs[k]); zs ascending, so the loop adds the smallest terms first."""
    total = 0j
    for k in range(zs.shape[0] - 1, -1, -1):
        total += g_scaled(a, zs[k], gamma_a)
    return total


def gamma_for_series(a: complex) -> complex:
    """Gamma(a) as consumed by g_scaled; 0 within 1/4 of a pole, where no branch reads it.

    Skipping it there also avoids overflow when a sits at a tiny distance from a pole.
    """
    a = complex(a)
    if a.real < 0.25 and abs(a + round(-a.real)) < 0.25 and round(-a.real) >= 0:
        return 0j
    from .gamma_mellin import log_gamma

    return cmath.exp(log_gamma(a))


def scaled_upper_gamma(a: complex, z: float, gamma_a: complex | None = None) -> complex:
    """Python entry point for G(a, z); gamma_a = Gamma(a) is needed only for the series branch."""
    if z <= 0:
        raise ValueError("z must be positive")
    a = complex(a)
    if gamma_a is None:
        gamma_a = gamma_for_series(a)
    return complex(g_scaled(a, float(z), complex(gamma_a)))


@nb.njit(cache=True, nogil=True)
def g_terms(a, gamma_a, zs):
    out = np.empty(zs.shape[0], np.complex128)
    for k in range(zs.shape[0]):
        out[k] = g_scaled(a, zs[k], gamma_a)
    return out


def scaled_upper_gamma_terms(a: complex, zs: np.ndarray, gamma_a: complex) -> np.ndarray:
    """G(a, z) for each z in zs."""
    return g_terms(complex(a), complex(gamma_a), np.ascontiguousarray(zs, dtype=float))


def scaled_upper_gamma_sum(a: complex, zs: np.ndarray, gamma_a: complex) -> complex:
    return complex(g_sum(complex(a), complex(gamma_a), np.ascontiguousarray(zs, dtype=float)))
