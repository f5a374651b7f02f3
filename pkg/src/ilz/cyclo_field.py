"""Exact arithmetic in cyclotomic fields Q(zeta_n) and their Minkowski embedding.

Elements are coefficient vectors on the power basis 1, zeta, ..., zeta^(d-1)
with ``Fraction`` entries; ring operations reduce modulo the cyclotomic
polynomial and never round.  Floating point only enters through :func:`embed`.

The real structure on K_R is the trace form q(x) = Tr(x conj(x)), under which
each conjugate pair of complex embeddings contributes 2|sigma_j(x)|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotNormalized, TooSmall

# --------------------------------------------------------------------------
# Elementary arithmetic


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division."""
    out: dict[int, int] = {}
    m = n
    p = 2
    while p * p <= m:
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def totient(n: int) -> int:
    result = n
    for p in factorize(n):
        result = result // p * (p - 1)
    return result


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> list[int]:
    small, large = [], []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
        k += 1
    return small + large[::-1]


def multiplicative_order(a: int, n: int) -> int:
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not a unit mod {n}")
    k, x = 1, a % n
    while x != 1 % n:
        x = x * a % n
        k += 1
    return k


def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first.

    Computed as prod_{e | n} (x^e - 1)^{mu(n/e)}; every division is exact.
    """
    num = [1]
    den = [1]
    for e in divisors(n):
        mu = mobius(n // e)
        if mu == 0:
            continue
        factor = [-1] + [0] * (e - 1) + [1]
        if mu == 1:
            num = _poly_mul(num, factor)
        else:
            den = _poly_mul(den, factor)
    quot, rem = _poly_divmod_int(num, den)
    if any(rem):
        raise ArithmeticError("cyclotomic division not exact")
    return tuple(quot)


def _poly_mul(a: Sequence, b: Sequence) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_divmod_int(num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    # den is monic (or -monic) in every use here
    num = list(num)
    lead = den[-1]
    if abs(lead) != 1:
        raise ValueError("divisor must be monic up to sign")
    dq = len(den) - 1
    if len(num) - 1 < dq:
        return [0], num
    quot = [0] * (len(num) - dq)
    for k in range(len(num) - 1, dq - 1, -1):
        c = num[k] * lead
        quot[k - dq] = c
        if c:
            for j in range(dq + 1):
                num[k - dq + j] -= c * den[j]
    return quot, num[:dq]


def _trim(p: list) -> list:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def resultant(f: Sequence, g: Sequence) -> Fraction:
    """Resultant of two polynomials over Q via the Euclidean algorithm.

    Coefficients are given lowest degree first.
    """
    f = _trim([Fraction(c) for c in f])
    g = _trim([Fraction(c) for c in g])
    sign_scale = Fraction(1)
    while True:
        m, k = len(f) - 1, len(g) - 1
        if k == 0:
            if g[0] == 0:
                return Fraction(0)
            return sign_scale * g[0] ** m
        if m < k:
            if (m * k) % 2:
                sign_scale = -sign_scale
            f, g = g, f
            continue
        r = list(f)
        lead = g[-1]
        for i in range(m, k - 1, -1):
            c = r[i] / lead
            if c:
                for j in range(k + 1):
                    r[i - k + j] -= c * g[j]
        r = _trim(r[:k] if k > 0 else [Fraction(0)])
        if len(r) == 1 and r[0] == 0:
            return Fraction(0)
        l_deg = len(r) - 1
        # Res(f, g) = (-1)^{mk} lc(g)^{m-l} Res(g, r)
        if (m * k) % 2:
            sign_scale = -sign_scale
        sign_scale *= lead ** (m - l_deg)
        f, g = g, r


# --------------------------------------------------------------------------
# Field and elements


@dataclass(frozen=True)
class FieldElement:
    """Exact element of Q(zeta_n) on the power basis."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: FieldElement) -> FieldElement:
        _check_len(self, other)
        return FieldElement(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: FieldElement) -> FieldElement:
        _check_len(self, other)
        return FieldElement(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> FieldElement:
        return FieldElement(tuple(-a for a in self.coeffs))

    def scale(self, c) -> FieldElement:
        c = Fraction(c)
        return FieldElement(tuple(c * a for a in self.coeffs))


def _check_len(x: FieldElement, y: FieldElement) -> None:
    if len(x.coeffs) != len(y.coeffs):
        raise DimensionMismatch(f"element lengths differ: {len(x.coeffs)} vs {len(y.coeffs)}")


@dataclass(frozen=True)
class CyclotomicField:
    """Immutable descriptor of K = Q(zeta_n) with n >= 3, n != 2 mod 4."""

    n: int
    degree: int = field(init=False)
    r2: int = field(init=False)
    phi_n_coeffs: tuple[int, ...] = field(init=False, repr=False)
    embeddings: tuple[int, ...] = field(init=False, repr=False)
    abs_disc: int = field(init=False)

    def __post_init__(self):
        n = self.n
        if n < 3:
            raise TooSmall(f"n must be >= 3, got {n}")
        if n % 4 == 2:
            raise NotNormalized(
                f"n = {n} is 2 mod 4 and Q(zeta_{n}) = Q(zeta_{n // 2}); use n = {n // 2}"
            )
        d = totient(n)
        object.__setattr__(self, "degree", d)
        object.__setattr__(self, "r2", d // 2)
        object.__setattr__(self, "phi_n_coeffs", cyclotomic_polynomial(n))
        emb = tuple(a for a in range(1, (n + 1) // 2) if math.gcd(a, n) == 1)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "abs_disc", discriminant_closed_form(n))

    @property
    def d(self) -> int:
        return self.degree

    @property
    def torsion_order(self) -> int:
        """Number of roots of unity in K."""
        return self.n if self.n % 2 == 0 else 2 * self.n

    @cached_property
    def roots_of_unity(self) -> np.ndarray:
        # each power computed directly from its own angle: no accumulated error
        m = np.arange(self.n)
        return np.exp(2j * np.pi * m / self.n)

    @cached_property
    def embedding_matrix(self) -> np.ndarray:
        """Complex r2 x d matrix E with E[j, k] = sigma_j(zeta^k)."""
        a = np.asarray(self.embeddings)[:, None]
        k = np.arange(self.degree)[None, :]
        return self.roots_of_unity[(a * k) % self.n]

    # ---- constructors -----------------------------------------------------
    def element(self, coeffs: Sequence) -> FieldElement:
        coeffs = list(coeffs)
        if len(coeffs) > self.degree:
            return reduce_poly(coeffs, self)
        return FieldElement(tuple(coeffs) + (0,) * (self.degree - len(coeffs)))

    def one(self) -> FieldElement:
        return self.element([1])

    def zeta(self, k: int = 1) -> FieldElement:
        """zeta^k reduced onto the power basis."""
        k %= self.n
        return reduce_poly([0] * k + [1], self)

    def power_basis(self) -> list[FieldElement]:
        return [self.zeta(k) for k in range(self.degree)]


def create_field(n: int) -> CyclotomicField:
    return CyclotomicField(n)


def discriminant_closed_form(n: int) -> int:
    """|Delta| = n^phi(n) / prod_{p | n} p^{phi(n)/(p-1)}, exactly."""
    d = totient(n)
    num = n**d
    den = 1
    for p in factorize(n):
        den *= p ** (d // (p - 1))
    if num % den:
        raise ArithmeticError("discriminant formula not integral")
    return num // den


# --------------------------------------------------------------------------
# Ring operations


def reduce_poly(coeffs: Sequence, K: CyclotomicField) -> FieldElement:
    """Reduce a polynomial in zeta modulo Phi_n."""
    phi = K.phi_n_coeffs
    d = K.degree
    c = [Fraction(x) for x in coeffs]
    for k in range(len(c) - 1, d - 1, -1):
        lead = c[k]
        if lead:
            for j in range(d + 1):
                c[k - d + j] -= lead * phi[j]
    c = c[:d] + [Fraction(0)] * max(0, d - len(c))
    return FieldElement(tuple(c))


def mul(x: FieldElement, y: FieldElement, K: CyclotomicField) -> FieldElement:
    _check_len(x, y)
    if x.degree != K.degree:
        raise DimensionMismatch(f"element of length {x.degree} in field of degree {K.degree}")
    return reduce_poly(_poly_mul(x.coeffs, y.coeffs), K)


def conjugate(x: FieldElement, K: CyclotomicField) -> FieldElement:
    """Complex conjugation zeta -> zeta^(-1)."""
    out = [Fraction(0)] * K.n
    for k, c in enumerate(x.coeffs):
        out[(-k) % K.n] += c
    return reduce_poly(out, K)


def trace(x: FieldElement, K: CyclotomicField) -> Fraction:
    """Exact absolute trace using Ramanujan sums Tr(zeta^k) = c_n(k)."""
    total = Fraction(0)
    for k, c in enumerate(x.coeffs):
        if c:
            total += c * ramanujan_sum(k, K.n)
    return total


def ramanujan_sum(k: int, n: int) -> int:
    g = math.gcd(k, n)
    m = n // g
    return mobius(m) * totient(n) // totient(m)


def trace_form(x: FieldElement, y: FieldElement, K: CyclotomicField) -> Fraction:
    """Exact Tr(x conj(y))."""
    return trace(mul(x, conjugate(y, K), K), K)


def norm(x: FieldElement, K: CyclotomicField) -> Fraction:
    """Exact absolute norm as the resultant Res(Phi_n, x)."""
    if x.degree != K.degree:
        raise DimensionMismatch(f"element of length {x.degree} in field of degree {K.degree}")
    if x.is_zero():
        return Fraction(0)
    return resultant(K.phi_n_coeffs, x.coeffs)


# --------------------------------------------------------------------------
# Embedding


@dataclass(frozen=True)
class EmbeddedVector:
    components: np.ndarray  # r2 complex values sigma_j(x)

    def q(self) -> float:
        """Trace-form squared length 2 * sum |sigma_j|^2."""
        return float(2.0 * np.sum(np.abs(self.components) ** 2))

    def realify(self) -> np.ndarray:
        """Real coordinates whose Euclidean inner product is the trace form."""
        z = self.components
        out = np.empty(2 * z.size)
        out[0::2] = math.sqrt(2.0) * z.real
        out[1::2] = math.sqrt(2.0) * z.imag
        return out


def embed(x: FieldElement, K: CyclotomicField) -> EmbeddedVector:
    c = np.array([float(a) for a in x.coeffs])
    return EmbeddedVector(K.embedding_matrix @ c)


def realify_matrix(z: np.ndarray) -> np.ndarray:
    """Map complex (..., r2) coordinates to real (..., 2*r2) trace-form coordinates."""
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = math.sqrt(2.0) * z.real
    out[..., 1::2] = math.sqrt(2.0) * z.imag
    return out


def gram_matrix(basis: Sequence[FieldElement], K: CyclotomicField) -> np.ndarray:
    """Trace-form Gram matrix Tr(b_i conj(b_j)) evaluated through the embeddings."""
    if len(basis) != K.degree:
        raise DimensionMismatch(f"basis has {len(basis)} elements, field degree is {K.degree}")
    for b in basis:
        if b.degree != K.degree:
            raise DimensionMismatch("basis element of wrong length")
    vecs = np.array([embed(b, K).realify() for b in basis])
    g = vecs @ vecs.T
    return 0.5 * (g + g.T)


def power_basis_gram(K: CyclotomicField) -> np.ndarray:
    """Gram matrix of O_K = Z[zeta] on the power basis (floating point)."""
    V = realify_matrix(K.embedding_matrix.T)
    return V @ V.T


def covolume(gram: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(gram)
    if sign <= 0:
        raise ValueError("Gram matrix is not positive definite")
    return math.exp(0.5 * logdet)
