"""Haar sampling of the Arakelov class group of Q(zeta_n) and lattice-point counts.

With h = 1 the group is the torus K_R^(1) / O_K^x. A point is stored as
log-moduli lambda (weight-2: lambda_j = 2 log|a_j|, summing to zero) and
phases theta. The lambda part is uniform on a fundamental parallelepiped
of the log-unit lattice; torsion acts trivially on lattices and is not
quotiented.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._lattice import count_in_ball, fp_count_batch, lll_gram
from .cyclo_field import CyclotomicField, create_field, factorize, realify_matrix, totient
from .epstein import LatticeGram
from .errors import UnsupportedField
from .gamma_mellin import log_gamma

# n with h(Q(zeta_n)) = 1 (hence h+ = 1), n != 2 mod 4
ALLOWLIST = frozenset({3, 4, 5, 7, 8, 9, 11, 12, 13, 15, 16, 20, 21, 24, 25, 27, 28, 32, 33, 35, 36, 40, 44, 45, 48, 60, 84})

CHUNK = 1024
BALL_SLACK = 1e-12


def default_threads() -> int:
    env = os.environ.get("ILZ_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _as_field(K) -> CyclotomicField:
    return K if isinstance(K, CyclotomicField) else create_field(int(K))


def _check_allowed(K: CyclotomicField, allowlist=ALLOWLIST) -> None:
    if K.n not in allowlist:
        raise UnsupportedField(f"n = {K.n} is not in the class-number-one allowlist")


# --------------------------------------------------------------------------
# Log-unit lattice


@dataclass(frozen=True)
class LogUnitBasis:
    rank: int
    vectors: np.ndarray  # (rank, r2), rows sum to zero
    regulator_like: float  # |det| of the rank x rank minor: the classical regulator
    hyperplane_covolume: float  # covolume inside the sum-zero hyperplane = sqrt(r2) * regulator

    def coefficients(self, lam: np.ndarray) -> np.ndarray:
        """Coordinates of lambda (..., r2) in the basis (least squares on the hyperplane)."""
        if self.rank == 0:
            return np.zeros(np.shape(lam)[:-1] + (0,))
        sol, *_ = np.linalg.lstsq(self.vectors.T, np.asarray(lam).reshape(-1, self.vectors.shape[1]).T, rcond=None)
        return sol.T.reshape(np.shape(lam)[:-1] + (self.rank,))


def _log_abs_one_minus(K: CyclotomicField, a: int) -> np.ndarray:
    """(2 log|sigma_j(1 - zeta^a)|)_j."""
    e = np.asarray(K.embeddings)
    return 2.0 * np.log(2.0 * np.abs(np.sin(np.pi * a * e / K.n)))


def unit_generator_logs(K: CyclotomicField) -> np.ndarray:
    """Log vectors generating the cyclotomic units modulo torsion.

    1 - zeta^a is a unit unless zeta^a has prime-power order p^k. Those
    non-units generate a p-power ideal with valuation proportional to
    1/phi(p^k); quotients by the deepest one (largest k) are units and,
    with the others, generate the full group.
    """
    n = K.n
    logs = []
    deepest: dict[int, tuple[int, int]] = {}
    prime_power: list[tuple[int, int, int]] = []
    for a in range(1, n):
        m = n // math.gcd(a, n)
        f = factorize(m)
        if len(f) == 1:
            (p, k), = f.items()
            prime_power.append((a, p, k))
            if p not in deepest or k > deepest[p][1]:
                deepest[p] = (a, k)
        else:
            logs.append(_log_abs_one_minus(K, a))
    for a, p, k in prime_power:
        ref, kref = deepest[p]
        if a == ref:
            continue
        ratio = totient(p**kref) // totient(p**k)
        logs.append(_log_abs_one_minus(K, a) - ratio * _log_abs_one_minus(K, ref))
    return np.array(logs).reshape(-1, K.r2)


def _hnf_rows(M: list[list[int]]) -> list[list[int]]:
    """Row Hermite normal form basis of the integer row span (nonzero rows)."""
    A = [row[:] for row in M if any(row)]
    if not A:
        return []
    ncols = len(A[0])
    out = []
    r = 0
    for c in range(ncols):
        rows = [i for i in range(r, len(A)) if A[i][c] != 0]
        if not rows:
            continue
        while True:
            rows = [i for i in range(r, len(A)) if A[i][c] != 0]
            piv = min(rows, key=lambda i: abs(A[i][c]))
            A[r], A[piv] = A[piv], A[r]
            done = True
            for i in range(r + 1, len(A)):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
        r += 1
        if r == len(A):
            break
    out = [row for row in A[:r]]
    return out


@lru_cache(maxsize=None)
def _log_unit_basis_cached(n: int) -> LogUnitBasis:
    K = create_field(n)
    r2 = K.r2
    rank = r2 - 1
    if rank == 0:
        return LogUnitBasis(0, np.zeros((0, r2)), 1.0, math.sqrt(r2))
    gens = unit_generator_logs(K)
    # pivoted elimination picks an independent subset
    _, _, piv = _qr_pivots(gens.T)
    chosen = gens[sorted(piv[:rank])]
    # coordinates of every generator in the chosen vectors; generators lie in a
    # lattice that contains the chosen ones, so coordinates are rational
    coords, *_ = np.linalg.lstsq(chosen.T, gens.T, rcond=None)
    fr = [[Fraction(float(x)).limit_denominator(10_000) for x in col] for col in coords.T]
    resid = np.array([[float(x) for x in row] for row in fr]) @ chosen - gens
    if np.max(np.abs(resid)) > 1e-8:
        raise ArithmeticError("failed to rationalize unit coordinates")
    den = 1
    for row in fr:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    H = _hnf_rows([[int(x * den) for x in row] for row in fr])
    if len(H) != rank:
        raise ArithmeticError("unit lattice has wrong rank")
    basis = (np.array(H, dtype=float) / den) @ chosen
    _, U = lll_gram(basis @ basis.T)
    basis = U.T.astype(float) @ basis
    basis -= basis.mean(axis=1, keepdims=True)  # exact zero-sum up to rounding
    reg = abs(float(np.linalg.det(basis[:, :rank])))
    return LogUnitBasis(rank, basis, reg, math.sqrt(r2) * reg)


def _qr_pivots(A: np.ndarray):
    from scipy.linalg import qr

    return qr(A, pivoting=True, mode="economic")


def log_unit_basis(K, allowlist=ALLOWLIST) -> LogUnitBasis:
    K = _as_field(K)
    _check_allowed(K, allowlist)
    return _log_unit_basis_cached(K.n)


# --------------------------------------------------------------------------
# Points and lattices


@dataclass(frozen=True)
class ArakelovPoint:
    lam: np.ndarray  # (r2,) weight-2 log-moduli summing to zero
    theta: np.ndarray  # (r2,) phases in [0, 2 pi)

    def __post_init__(self):
        if abs(float(np.sum(self.lam))) > 1e-10:
            raise ValueError("log-moduli must sum to zero")

    @property
    def a(self) -> np.ndarray:
        return np.exp(0.5 * self.lam + 1j * self.theta)


def _draw(basis: LogUnitBasis, r2: int, rng: np.random.Generator, m: int) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random((m, basis.rank))
    theta = rng.random((m, r2)) * (2 * np.pi)
    lam = u @ basis.vectors if basis.rank else np.zeros((m, r2))
    return lam, theta


def sample_point(K, basis: LogUnitBasis | None = None, rng_seed=None) -> ArakelovPoint:
    """One Haar sample; rng_seed may be an int or a numpy Generator."""
    K = _as_field(K)
    _check_allowed(K)
    basis = basis or log_unit_basis(K)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    lam, theta = _draw(basis, K.r2, rng, 1)
    return ArakelovPoint(lam[0], theta[0])


def sample_points(K, N: int, rng_seed: int = 0, basis: LogUnitBasis | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(lam, theta) arrays of N samples; chunk c uses the stream (seed, c)."""
    K = _as_field(K)
    _check_allowed(K)
    basis = basis or log_unit_basis(K)
    lams, thetas = [], []
    for c, start in enumerate(range(0, N, CHUNK)):
        lam, th = _draw(basis, K.r2, np.random.default_rng([rng_seed, c]), min(CHUNK, N - start))
        lams.append(lam)
        thetas.append(th)
    if not lams:
        return np.zeros((0, K.r2)), np.zeros((0, K.r2))
    return np.concatenate(lams), np.concatenate(thetas)


@dataclass(frozen=True)
class IdealLatticeReal:
    field: CyclotomicField = field(repr=False)
    basis_embedded: np.ndarray  # (d, d), row k is the realified image of a * zeta^k
    gram: LatticeGram


def _scale(K: CyclotomicField) -> float:
    return math.exp(-math.log(K.abs_disc) / (2 * K.degree))


def embedded_bases(K: CyclotomicField, lam: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Realified bases (m, d, d) for a batch of points."""
    a = np.exp(0.5 * lam + 1j * theta) * _scale(K)  # (m, r2)
    Z = a[:, None, :] * K.embedding_matrix.T[None, :, :]  # (m, d, r2)
    return realify_matrix(Z)


def grams_of(K: CyclotomicField, lam: np.ndarray, theta: np.ndarray) -> np.ndarray:
    X = embedded_bases(K, lam, theta)
    G = X @ np.swapaxes(X, 1, 2)
    return 0.5 * (G + np.swapaxes(G, 1, 2))


def lattice_of(K, p: ArakelovPoint) -> IdealLatticeReal:
    K = _as_field(K)
    X = embedded_bases(K, p.lam[None, :], p.theta[None, :])[0]
    return IdealLatticeReal(K, X, LatticeGram(X @ X.T))


def count_points_in_ball(L, R: float) -> int:
    """#{v : q(v) <= R^2}, origin included (closed ball)."""
    if R < 0:
        raise ValueError("R must be non-negative")
    gram = L.gram.gram if isinstance(L, IdealLatticeReal) else (L.gram if isinstance(L, LatticeGram) else np.asarray(L))
    return count_in_ball(gram, R * R * (1 + BALL_SLACK))


def radius_for_volume(d: int, V: float) -> float:
    """R with pi^{d/2} R^d / Gamma(1 + d/2) = V, via logs."""
    if V <= 0:
        return 0.0
    logR = (math.log(V) + log_gamma(1 + d / 2).real - 0.5 * d * math.log(math.pi)) / d
    return math.exp(logR)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MCResult:
    mean: float
    stderr: float
    n: int
    counts: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter((self.mean, self.stderr))


def _count_chunk(K: CyclotomicField, basis: LogUnitBasis, seed: int, c: int, m: int, bound: float) -> np.ndarray:
    lam, theta = _draw(basis, K.r2, np.random.default_rng([seed, c]), m)
    G = grams_of(K, lam, theta)
    out = np.empty(m, dtype=np.int64)
    fp_count_batch(np.ascontiguousarray(G), np.full(m, bound), out)
    return out


def mean_count_mc(K, V: float, N: int, rng_seed: int = 0, threads: int | None = None) -> MCResult:
    """Mean and standard error of #(B_R cap Lambda) over N Haar samples, vol(B_R) = V."""
    K = _as_field(K)
    _check_allowed(K)
    if N < 1:
        raise ValueError("N must be positive")
    basis = log_unit_basis(K)
    R = radius_for_volume(K.degree, V)
    bound = R * R * (1 + BALL_SLACK)
    jobs = [(c, min(CHUNK, N - start)) for c, start in enumerate(range(0, N, CHUNK))]
    threads = threads or default_threads()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda j: _count_chunk(K, basis, rng_seed, j[0], j[1], bound), jobs))
    else:
        parts = [_count_chunk(K, basis, rng_seed, c, m, bound) for c, m in jobs]
    counts = np.concatenate(parts)
    total = int(np.sum(counts))
    mean = total / N
    var = float(np.sum((counts - mean) ** 2)) / (N - 1) if N > 1 else 0.0
    return MCResult(mean, math.sqrt(var / N), N, counts)


# --------------------------------------------------------------------------
# Measure oracle


@dataclass(frozen=True)
class ConeVolumeMC:
    estimate: float
    stderr: float
    predicted: float


def cone_volume_mc(K, N: int = 200_000, rng_seed: int = 0, half_box: bool = True) -> ConeVolumeMC:
    """Rejection-sampling volume of A*(0,1] for A = {lambda coefficients in [0, 1/2)^rank}.

    Measure on K_R is the trace-form Lebesgue measure (2 per complex place
    times Lebesgue in Re, Im). The parametric prediction is
    P(A) * (2 pi)^{r2} * regulator with P(A) = 2^{-rank}.
    """
    K = _as_field(K)
    _check_allowed(K)
    basis = log_unit_basis(K)
    r2, rank = K.r2, basis.rank
    hi_coef = 0.5 if half_box else 1.0
    corners = np.array(np.meshgrid(*[[0.0, hi_coef]] * rank, indexing="ij")).reshape(rank, -1).T if rank else np.zeros((1, 0))
    w_max = np.max(corners @ basis.vectors if rank else np.zeros((1, r2)), axis=0)
    rho2 = np.exp(w_max)  # |z_j|^2 <= e^{w_j} because sum(u) <= 0
    rng = np.random.default_rng(rng_seed)
    # uniform in the product of discs |z_j|^2 <= rho2_j
    r2_samples = rng.random((N, r2)) * rho2
    u = np.log(r2_samples)
    tau = u.sum(axis=1)
    w = u - tau[:, None] / r2
    coef = basis.coefficients(w)
    inside = (tau <= 0) & np.all((coef >= 0) & (coef < hi_coef), axis=1)
    box = np.prod(2.0 * np.pi * rho2)  # trace measure of the product of discs
    p = float(np.mean(inside))
    est = box * p
    se = box * math.sqrt(p * (1 - p) / N)
    predicted = hi_coef**rank * (2 * np.pi) ** r2 * basis.regulator_like
    return ConeVolumeMC(est, se, predicted)
