"""Epstein zeta function E(L, s) = sum_{v != 0} q(v)^{-s/2} of a positive definite Gram matrix."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._incgamma import gamma_for_series, scaled_upper_gamma_terms
from ._lattice import covering_radius_bound, enumerate_norms, lll_gram
from .errors import DimensionMismatch, DivergentRegion, NotUnitCovolume, PoleAtD, PoleAtZero
from .gamma_mellin import log_gamma

DEFAULT_RTOL = 1e-14


@dataclass(frozen=True)
class LatticeGram:
    gram: np.ndarray
    dim: int = field(init=False)
    covolume: float = field(init=False)

    def __post_init__(self):
        g = np.array(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionMismatch(f"Gram matrix must be square, got shape {g.shape}")
        if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, float(np.max(np.abs(g))))):
            raise ValueError("Gram matrix is not symmetric")
        g = 0.5 * (g + g.T)
        try:
            L = np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise ValueError("Gram matrix is not positive definite") from None
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "dim", g.shape[0])
        object.__setattr__(self, "covolume", float(np.prod(np.diag(L))))

    def scaled(self, c2: float) -> "LatticeGram":
        return LatticeGram(c2 * self.gram)


def as_gram(L) -> LatticeGram:
    return L if isinstance(L, LatticeGram) else LatticeGram(np.asarray(L, dtype=float))


def dual_gram(L) -> LatticeGram:
    """Gram of the dual lattice in the dual basis: the inverse matrix."""
    L = as_gram(L)
    inv = np.linalg.inv(L.gram)
    return LatticeGram(0.5 * (inv + inv.T))


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


# --------------------------------------------------------------------------
# Direct summation


@dataclass(frozen=True)
class EpsteinDirect:
    value: complex
    tail_estimate: complex
    tail_error_bound: float
    n_vectors: int
    cutoff_radius: float


def _discrepancy_tail_bound(d: int, covol: float, mu: float, sigma: float, abs_s: float, rho: float) -> float:
    """Bound on |sum_{|v|>rho} |v|^{-s} - integral tail| from N(r) within V_d((r+mu)^d - r^d)/covol of V_d r^d/covol."""
    vd = unit_ball_volume(d)
    boundary = 0.0
    integral = 0.0
    for k in range(1, d + 1):
        ck = math.comb(d, k) * mu**k
        boundary += ck * rho ** (d - k - sigma)
        integral += ck * rho ** (d - k - sigma) / (sigma + k - d)
    return vd / covol * (boundary + abs_s * integral)


def epstein_direct(L, s: complex, cutoff_radius: float) -> EpsteinDirect:
    """Sharp-cutoff sum over q(v) <= cutoff^2 plus the integral tail d V_d rho^{d-s} / ((s-d) covol).

    tail_error_bound controls the error of the tail estimate through the
    covering radius: it is rigorous but decays only like rho^{d-1-Re s}.
    """
    L = as_gram(L)
    d = L.dim
    s = complex(s)
    if s.real <= d:
        raise DivergentRegion(f"direct sum diverges for Re s = {s.real:g} <= d = {d}")
    rho = float(cutoff_radius)
    Gr, _ = lll_gram(L.gram)
    q = enumerate_norms(Gr, rho * rho)
    if not len(q):
        total = 0j
    elif s.imag == 0:
        total = complex(np.sum(q[::-1] ** (-0.5 * s.real)))
    else:
        total = complex(np.sum(np.exp(-0.5 * s * np.log(q[::-1]))))
    tail = d * unit_ball_volume(d) * rho ** (d - s) / ((s - d) * L.covolume) if rho > 0 else complex("inf")
    mu = covering_radius_bound(Gr)
    bound = _discrepancy_tail_bound(d, L.covolume, mu, s.real, abs(s), rho) if rho > 0 else math.inf
    return EpsteinDirect(total + tail, tail, bound, len(q), rho)


# --------------------------------------------------------------------------
# Analytic continuation


def _is_nonpositive_even(s: complex) -> bool:
    return s.imag == 0 and s.real <= 0 and (s.real / 2) == round(s.real / 2)


def _theta_sum(gram: np.ndarray, a: complex, gamma_a: complex, rtol: float) -> complex:
    """sum_{v != 0} G(a, pi q(v)), growing the radius until the outermost e-fold shell is below rtol."""
    Gr, _ = lll_gram(gram)
    lam1 = float(np.min(np.diag(Gr)))
    B = lam1 + math.log(1.0 / rtol) / math.pi
    q = enumerate_norms(Gr, B)
    vals = scaled_upper_gamma_terms(a, math.pi * q, gamma_a)
    while True:
        # smallest terms first
        total = complex(np.sum(vals[::-1]))
        shell = complex(np.sum(vals[np.searchsorted(q, B - 1.0 / math.pi) :]))
        scale = max(abs(total), 1e-300)
        if abs(shell) <= 0.5 * rtol * scale:
            return total
        # terms decay like e^{-pi q}; step past the estimated deficit
        B_new = B + (math.log(abs(shell) / (rtol * scale)) + 1.0) / math.pi
        q_new = enumerate_norms(Gr, B_new)
        extra = q_new[np.searchsorted(q_new, B, side="right") :]
        q = np.concatenate([q, extra])
        vals = np.concatenate([vals, scaled_upper_gamma_terms(a, math.pi * extra, gamma_a)])
        B = B_new


def completed_epstein_any(L, s: complex, rtol: float = DEFAULT_RTOL) -> complex:
    """pi^{-s/2} Gamma(s/2) E(L, s) for any covolume, via theta splitting at t = 1.

    The split is balanced only at unit covolume, so L is rescaled to it
    first and the result scaled back by covol^{-s/d}.
    """
    L = as_gram(L)
    d = L.dim
    s = complex(s)
    if s == d:
        raise PoleAtD(f"Epstein zeta has a pole at s = d = {d}")
    if s == 0:
        raise PoleAtZero("completed Epstein zeta has a pole at s = 0")
    log_c = math.log(L.covolume) / d
    gram = L.gram * math.exp(-2.0 * log_c)
    dual = np.linalg.inv(gram)
    dual = 0.5 * (dual + dual.T)
    a1 = s / 2
    a2 = (d - s) / 2
    direct = _theta_sum(gram, a1, gamma_for_series(a1), rtol)
    dual_sum = _theta_sum(dual, a2, gamma_for_series(a2), rtol)
    star = direct + dual_sum + 2.0 / (s - d) - 2.0 / s
    return complex(cmath.exp(-s * log_c) * star)


def epstein_continued(L, s: complex, rtol: float = DEFAULT_RTOL) -> complex:
    """Meromorphic continuation of E(L, s) to s != d."""
    L = as_gram(L)
    s = complex(s)
    if s == L.dim:
        raise PoleAtD(f"Epstein zeta has a pole at s = d = {L.dim}")
    if s == 0:
        return -1.0 + 0j
    if _is_nonpositive_even(s):
        return 0j
    star = completed_epstein_any(L, s, rtol)
    return complex(cmath.exp(0.5 * s * math.log(math.pi) - log_gamma(s / 2)) * star)


def completed_epstein(L, s: complex, rtol: float = DEFAULT_RTOL) -> complex:
    """pi^{-s/2} Gamma(s/2) E(L, s) for a unit-covolume lattice."""
    L = as_gram(L)
    if abs(L.covolume - 1.0) > 1e-9:
        raise NotUnitCovolume(f"covolume {L.covolume:.12g} is not 1")
    return completed_epstein_any(L, s, rtol)


def residue_at_d(L) -> float:
    """Residue of E(L, s) at s = d: d V_d / covol."""
    L = as_gram(L)
    return L.dim * unit_ball_volume(L.dim) / L.covolume
