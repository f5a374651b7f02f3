"""Dirichlet characters, Hurwitz/Dirichlet L-values and the Dedekind zeta of Q(zeta_n).

Characters are stored exactly: each value is an exponent k/ord in Q/Z on a
CRT decomposition of (Z/n)^x into prime-power components.  Complex values are
only produced for numerical evaluation.

L-functions are evaluated from Hurwitz zeta values computed by Euler-Maclaurin
summation.  For K = Q(zeta_n) the Dedekind zeta is the product of the
*primitive* L-functions attached to all characters mod n.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .cyclo_field import CyclotomicField, create_field, factorize, multiplicative_order, totient
from .errors import NotNormalized, OutOfAccuracyEnvelope, PoleAtOne, TooSmall

# --------------------------------------------------------------------------
# Group structure of (Z/n)^x


@dataclass(frozen=True)
class _Component:
    p: int
    k: int
    gens: tuple[int, ...]  # generators mod p^k
    orders: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.p**self.k

    @cached_property
    def dlog(self) -> dict[int, tuple[int, ...]]:
        m = self.modulus
        table: dict[int, tuple[int, ...]] = {}
        for exps in itertools.product(*(range(o) for o in self.orders)):
            a = 1
            for g, e in zip(self.gens, exps):
                a = a * pow(g, e, m) % m
            table[a] = exps
        return table


def _primitive_root(p: int, k: int) -> int:
    m = p**k
    phi = totient(m)
    primes = list(factorize(phi))
    for g in range(2, m):
        if g % p == 0:
            continue
        if all(pow(g, phi // q, m) != 1 for q in primes):
            return g
    raise ArithmeticError(f"no primitive root mod {m}")


def _components(n: int) -> tuple[_Component, ...]:
    comps = []
    for p, k in sorted(factorize(n).items()):
        if p == 2:
            if k == 1:
                continue
            if k == 2:
                comps.append(_Component(2, 2, (3,), (2,)))
            else:
                comps.append(_Component(2, k, (2**k - 1, 5), (2, 2 ** (k - 2))))
        else:
            comps.append(_Component(p, k, (_primitive_root(p, k),), (totient(p**k),)))
    return tuple(comps)


# --------------------------------------------------------------------------
# Characters


@dataclass(frozen=True)
class DirichletCharacter:
    """A character of (Z/nZ)^x with its conductor and primitive inducing data.

    ``value_table`` maps each residue coprime to n to the exponent e in [0, 1)
    with chi(a) = exp(2 pi i e).
    """

    modulus: int
    index: tuple[tuple[int, ...], ...]
    value_table: dict[int, Fraction]
    conductor: int
    is_principal: bool

    def __hash__(self):
        return hash((self.modulus, self.index))

    def __eq__(self, other):
        return isinstance(other, DirichletCharacter) and (self.modulus, self.index) == (
            other.modulus,
            other.index,
        )

    def exponent(self, a: int) -> Fraction | None:
        return self.value_table.get(a % self.modulus)

    def __call__(self, a: int) -> complex:
        e = self.exponent(a)
        if e is None:
            return 0j
        return _root_of_unity(e)

    @property
    def parity(self) -> int:
        e = self.exponent(-1)
        return 1 if e == 0 else -1

    @cached_property
    def primitive_exponents(self) -> dict[int, Fraction]:
        """Exponent table of the primitive character mod the conductor."""
        q, n = self.conductor, self.modulus
        out: dict[int, Fraction] = {}
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            lift = a if a else q
            while math.gcd(lift, n) != 1:
                lift += q
            out[a % q] = self.value_table[lift % n]
        return out

    @cached_property
    def primitive_values(self) -> np.ndarray:
        """Complex values of the primitive character on residues 0..q-1."""
        q = self.conductor
        out = np.zeros(q, dtype=complex)
        for a, e in self.primitive_exponents.items():
            out[a] = _root_of_unity(e)
        return out


def _root_of_unity(e: Fraction) -> complex:
    # exact on the real/imaginary axes, where cos/sin would leave 1e-17 residue
    e = e % 1
    if e.denominator in (1, 2, 4):
        return {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}[e]
    theta = 2 * math.pi * float(e)
    return complex(math.cos(theta), math.sin(theta))


def _component_conductor(comp: _Component, exps: tuple[int, ...]) -> int:
    if not any(exps):
        return 1
    m = comp.modulus
    for j in range(1, comp.k + 1):
        step = comp.p**j
        trivial = True
        for a in range(1, m, step):
            e = sum(Fraction(x * y, o) for x, y, o in zip(exps, comp.dlog[a], comp.orders)) % 1
            if e != 0:
                trivial = False
                break
        if trivial:
            return comp.p**j
    return m


@lru_cache(maxsize=64)
def enumerate_characters(n: int) -> tuple[DirichletCharacter, ...]:
    """All phi(n) characters mod n, principal first."""
    if n < 3:
        raise TooSmall(f"n must be >= 3, got {n}")
    if n % 4 == 2:
        raise NotNormalized(f"n = {n} is 2 mod 4; use n = {n // 2}")
    comps = _components(n)
    residues = [a for a in range(1, n) if math.gcd(a, n) == 1]
    dlogs = {a: tuple(c.dlog[a % c.modulus] for c in comps) for a in residues}

    out = []
    for index in itertools.product(*(itertools.product(*(range(o) for o in c.orders)) for c in comps)):
        table = {}
        for a in residues:
            e = Fraction(0)
            for comp, comp_idx, comp_log in zip(comps, index, dlogs[a]):
                for x, y, o in zip(comp_idx, comp_log, comp.orders):
                    e += Fraction(x * y, o)
            table[a] = e % 1
        conductor = 1
        for comp, comp_idx in zip(comps, index):
            conductor *= _component_conductor(comp, comp_idx)
        principal = all(not any(ci) for ci in index)
        out.append(DirichletCharacter(n, tuple(index), table, conductor, principal))
    return tuple(out)


def conductor_product(n: int) -> int:
    return math.prod(chi.conductor for chi in enumerate_characters(n))


# --------------------------------------------------------------------------
# Hurwitz zeta by Euler-Maclaurin

EM_TERMS = 30


@lru_cache(maxsize=1)
def _bernoulli_even(count: int = EM_TERMS + 1) -> tuple[float, ...]:
    """B_{2j}/(2j)! for j = 1..count."""
    B = [Fraction(1)]
    for m in range(1, 2 * count + 1):
        B.append(-sum(math.comb(m + 1, k) * B[k] for k in range(m)) / Fraction(m + 1))
    return tuple(float(B[2 * j] / math.factorial(2 * j)) for j in range(1, count + 1))


def _shift(s: np.ndarray) -> int:
    # 2 pi N ~ 3|s| is enough with 30 correction terms; a larger N only adds
    # rounding, since for Re s < 0 the head terms grow like N^{-Re s}
    return max(8, int(math.ceil(0.5 * float(np.max(np.abs(s))))))


def _expm1_over(z: np.ndarray) -> np.ndarray:
    """expm1(z)/z with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    big = np.abs(z) > 1e-5
    out[big] = np.expm1(z[big]) / z[big]
    small = ~big
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 6.0
    return out


def _em_tail(s: np.ndarray, w: np.ndarray, regular: bool) -> tuple[np.ndarray, np.ndarray]:
    """sum_{k>=0} (w+k)^{-s} for broadcastable s and w > 0, plus the first omitted term.

    With ``regular`` the pole part 1/(s-1) is subtracted.
    """
    lw = np.log(w)
    if regular:
        lead = -lw * _expm1_over(-(s - 1.0) * lw)
    else:
        lead = np.exp((1.0 - s) * lw) / (s - 1.0)
    total = lead + 0.5 * np.exp(-s * lw)
    coeffs = _bernoulli_even()
    poch = s + 0j
    pw = np.exp(-(s + 1.0) * lw)
    inv_w2 = 1.0 / (w * w)
    for j in range(1, EM_TERMS + 1):
        total = total + coeffs[j - 1] * poch * pw
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        pw = pw * inv_w2
    err = np.abs(coeffs[EM_TERMS] * poch * pw)
    return total, err


def _hurwitz(s, a: float, regular: bool = False) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s, dtype=complex)
    N = _shift(s)
    k = np.arange(N, dtype=float) + a
    head = np.exp(-np.multiply.outer(s, np.log(k))).sum(axis=-1)
    tail, err = _em_tail(s, np.asarray(N + a, dtype=float), regular)
    return head + tail, err


def hurwitz_zeta(s, a: float):
    """zeta(s, a) = sum_{k>=0} (k+a)^{-s}; vectorized over s."""
    s_arr = np.asarray(s, dtype=complex)
    if np.any(s_arr == 1):
        raise PoleAtOne("Hurwitz zeta has a pole at s = 1")
    if a <= 0:
        raise ValueError("a must be positive")
    val, _ = _hurwitz(s_arr, a)
    return complex(val) if val.ndim == 0 else val


def hurwitz_zeta_regular(s, a: float):
    """zeta(s, a) - 1/(s-1); at s = 1 this equals -digamma(a)."""
    val, _ = _hurwitz(np.asarray(s, dtype=complex), a, regular=True)
    return complex(val) if val.ndim == 0 else val


# --------------------------------------------------------------------------
# L-functions


@dataclass(frozen=True)
class LValue:
    s: complex
    value: complex
    est_error: float
    flagged: bool = False


L_TARGET = 1e-10


def l_function(chi: DirichletCharacter, s: complex, imprimitive: bool = False) -> LValue:
    """L(s, chi) of the primitive character inducing chi.

    With ``imprimitive`` the Euler factors at primes dividing the modulus but
    not the conductor are removed, giving the L-function of chi mod n itself.
    """
    s = complex(s)
    q = chi.conductor
    if s == 1 and q == 1:
        raise PoleAtOne("L(s, principal) has a pole at s = 1")
    if q == 1:
        val, err = _hurwitz(s, 1.0)
        value, est = complex(val), float(err)
    else:
        regular = s == 1
        value = 0j
        est = 0.0
        qs = q ** (-s)
        for a, e in chi.primitive_exponents.items():
            x = (a if a else q) / q
            val, err = _hurwitz(s, x, regular=regular)
            value += _root_of_unity(e) * complex(val)
            est += float(err)
        value *= qs
        est *= abs(qs)
    if imprimitive:
        for p in factorize(chi.modulus):
            if q % p:
                value *= 1 - chi.primitive_values[p % q] * p ** (-s)
    return LValue(s, value, est, flagged=est > L_TARGET)


def l_values(chars: Sequence[DirichletCharacter], s, chunk: int = 256) -> np.ndarray:
    """Primitive L-values for many characters at many points, shape (len(s), len(chars)).

    The head of every Hurwitz sum is folded into one Dirichlet partial sum
    sum_{m <= M} chi(m) m^{-s} with M a common multiple of all conductors, so
    the expensive powers m^{-s} are shared between characters.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any((s == 1)) and any(c.conductor == 1 for c in chars):
        raise PoleAtOne("principal L-function has a pole at s = 1")
    lcm = 1
    for c in chars:
        lcm = lcm * c.conductor // math.gcd(lcm, c.conductor)
    by_q: dict[int, list[int]] = {}
    for i, c in enumerate(chars):
        by_q.setdefault(c.conductor, []).append(i)

    out = np.empty((s.size, len(chars)), dtype=complex)
    for start in range(0, s.size, chunk):
        sc = s[start : start + chunk]
        N = _shift(sc)
        M = N * lcm
        logm = np.log(np.arange(1, M + 1, dtype=float))
        table = np.zeros((M, len(chars)), dtype=complex)
        for i, c in enumerate(chars):
            table[:, i] = np.resize(np.roll(c.primitive_values, -1), M)
        heads = np.exp(-np.multiply.outer(sc, logm)) @ table
        res = heads
        for q, idx in by_q.items():
            Nq = M // q
            a = np.arange(1, q + 1)
            w = Nq + a / q
            tails, _ = _em_tail(sc[:, None], w[None, :], regular=False)
            coeff = np.stack([chars[i].primitive_values[a % q] for i in idx], axis=1)
            res[:, idx] = res[:, idx] + (tails @ coeff) * np.exp(-sc * math.log(q))[:, None]
        out[start : start + chunk] = res
    return out


def _as_field(K) -> CyclotomicField:
    return K if isinstance(K, CyclotomicField) else create_field(int(K))


def dedekind_zeta(K, s):
    """zeta_K(s) for K = Q(zeta_n), as the product of primitive L-functions.

    Accepts a scalar or an array of points.
    """
    K = _as_field(K)
    s_arr = np.asarray(s, dtype=complex)
    if np.any(s_arr == 1):
        raise PoleAtOne("Dedekind zeta has a pole at s = 1")
    vals = l_values(enumerate_characters(K.n), s_arr.ravel())
    prod = np.prod(vals, axis=1).reshape(s_arr.shape)
    return complex(prod) if prod.ndim == 0 else prod


def euler_product(K, s: float, pmax: int = 10_000) -> float:
    """Truncated Euler product of zeta_K using the cyclotomic splitting law."""
    K = _as_field(K)
    n, d = K.n, K.degree
    log_total = 0.0
    for p in _primes_up_to(pmax):
        m = n
        while m % p == 0:
            m //= p
        f = multiplicative_order(p, m) if m > 1 else 1
        g = totient(m) // f
        log_total -= g * math.log1p(-(p ** (-f * s)))
    return math.exp(log_total)


def euler_product_tail_bound(K, s: float, pmax: int = 10_000) -> float:
    """Crude relative bound on the omitted factors p > pmax (s > 1)."""
    K = _as_field(K)
    return K.degree * 2.0 * pmax ** (1 - s) / (s - 1)


def _primes_up_to(n: int) -> list[int]:
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, v in enumerate(sieve) if v]


def residue_at_one(K) -> float:
    """Res_{s=1} zeta_K = prod of L(1, chi) over non-principal chi."""
    K = _as_field(K)
    value = 1 + 0j
    for chi in enumerate_characters(K.n):
        if chi.is_principal:
            continue
        value *= l_function(chi, 1.0).value
    if abs(value.imag) > 1e-10 * max(1.0, abs(value)):
        raise ArithmeticError(f"residue has imaginary part {value.imag}")
    return value.real


def subconvexity_profile(K, t_grid: Iterable[float]) -> list[dict]:
    """|zeta_K(1/2+it)| next to the convexity and Petrov-Young shaped curves.

    Purely descriptive: the curves carry unknown implicit constants.
    """
    K = _as_field(K)
    t = np.asarray(list(t_grid), dtype=float)
    if t.size and np.max(np.abs(t)) > 200:
        raise OutOfAccuracyEnvelope("|t| must be <= 200")
    z = np.abs(dedekind_zeta(K, 0.5 + 1j * t)) if t.size else np.array([])
    logD = math.log(K.abs_disc)
    d = K.degree
    rows = []
    for ti, zi in zip(t, np.atleast_1d(z)):
        lt = math.log(abs(ti) + 1)
        rows.append(
            {
                "t": float(ti),
                "abs_zeta": float(zi),
                "convexity_curve": math.exp(logD / 4 + d * lt / 4),
                "py_curve": math.exp(logD / 6 + d * lt / 6),
            }
        )
    return rows
