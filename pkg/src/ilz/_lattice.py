"""Lattice kernels shared by the Epstein and sampler modules.

Fincke-Pohst enumeration runs in numba on the quadratic-form coefficients
of the Cholesky factor: q(x) = sum_i qd[i] (x_i + sum_{j>i} qo[i, j] x_j)^2.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .errors import DimensionMismatch


def qform_coeffs(gram: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(qd, qo) from the upper Cholesky factor R with gram = R^T R."""
    R = np.linalg.cholesky(gram).T
    diag = np.diag(R).copy()
    qo = R / diag[:, None]
    np.fill_diagonal(qo, 0.0)
    return diag * diag, np.ascontiguousarray(qo)


@nb.njit(cache=True, nogil=True)
def _chol_coeffs(G, qd, qo):
    d = G.shape[0]
    L = np.linalg.cholesky(G)
    for i in range(d):
        r = L[i, i]
        qd[i] = r * r
        for j in range(d):
            qo[i, j] = 0.0
        for j in range(i + 1, d):
            qo[i, j] = L[j, i] / r


@nb.njit(cache=True, nogil=True)
def fp_count(qd, qo, B):
    """Number of integer x (zero included) with q(x) <= B."""
    d = qd.shape[0]
    if B < 0.0:
        return 0
    x = np.zeros(d, np.int64)
    hi = np.zeros(d, np.int64)
    c = np.zeros(d)
    part = np.zeros(d + 1)
    count = 0
    i = d - 1
    descending = True
    while True:
        if descending:
            rem = B - part[i + 1]
            if rem < 0.0:
                rem = -1.0
            if rem >= 0.0:
                r = math.sqrt(rem / qd[i])
                lo_i = math.ceil(c[i] - r)
                hi_i = math.floor(c[i] + r)
                if i == 0:
                    if hi_i >= lo_i:
                        count += hi_i - lo_i + 1
                    descending = False
                    i = 1
                elif hi_i >= lo_i:
                    x[i] = lo_i
                    hi[i] = hi_i
                    dx = x[i] - c[i]
                    part[i] = part[i + 1] + qd[i] * dx * dx
                    i -= 1
                    s = 0.0
                    for j in range(i + 1, d):
                        s += qo[i, j] * x[j]
                    c[i] = -s
                    continue
                else:
                    descending = False
                    i += 1
            else:
                descending = False
                i += 1
        # ascending: advance x[i]
        if i >= d:
            break
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            continue
        dx = x[i] - c[i]
        part[i] = part[i + 1] + qd[i] * dx * dx
        i -= 1
        s = 0.0
        for j in range(i + 1, d):
            s += qo[i, j] * x[j]
        c[i] = -s
        descending = True
    return count


@nb.njit(cache=True, nogil=True)
def fp_norms(qd, qo, B):
    """Values q(x) for all nonzero integer x with q(x) <= B (unordered)."""
    d = qd.shape[0]
    cap = 1024
    out = np.empty(cap)
    n_out = 0
    if B < 0.0:
        return out[:0]
    x = np.zeros(d, np.int64)
    hi = np.zeros(d, np.int64)
    c = np.zeros(d)
    part = np.zeros(d + 1)
    i = d - 1
    descending = True
    while True:
        if descending:
            rem = B - part[i + 1]
            ok = rem >= 0.0
            if ok:
                r = math.sqrt(rem / qd[i])
                lo_i = math.ceil(c[i] - r)
                hi_i = math.floor(c[i] + r)
                if i == 0:
                    tail_zero = True
                    for j in range(1, d):
                        if x[j] != 0:
                            tail_zero = False
                            break
                    for x0 in range(lo_i, hi_i + 1):
                        if tail_zero and x0 == 0:
                            continue
                        dx = x0 - c[0]
                        v = part[1] + qd[0] * dx * dx
                        if v <= B:
                            if n_out == cap:
                                cap *= 2
                                tmp = np.empty(cap)
                                tmp[:n_out] = out[:n_out]
                                out = tmp
                            out[n_out] = v
                            n_out += 1
                    descending = False
                    i = 1
                elif hi_i >= lo_i:
                    x[i] = lo_i
                    hi[i] = hi_i
                    dx = x[i] - c[i]
                    part[i] = part[i + 1] + qd[i] * dx * dx
                    i -= 1
                    s = 0.0
                    for j in range(i + 1, d):
                        s += qo[i, j] * x[j]
                    c[i] = -s
                    continue
                else:
                    descending = False
                    i += 1
            else:
                descending = False
                i += 1
        if i >= d:
            break
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            continue
        dx = x[i] - c[i]
        part[i] = part[i + 1] + qd[i] * dx * dx
        i -= 1
        s = 0.0
        for j in range(i + 1, d):
            s += qo[i, j] * x[j]
        c[i] = -s
        descending = True
    return out[:n_out]


@nb.njit(cache=True, nogil=True)
def fp_count_batch(grams, bounds, out):
    """Counts for a stack of Gram matrices, one bound each."""
    m, d, _ = grams.shape
    qd = np.empty(d)
    qo = np.empty((d, d))
    for k in range(m):
        _chol_coeffs(grams[k], qd, qo)
        out[k] = fp_count(qd, qo, bounds[k])


def enumerate_norms(gram: np.ndarray, bound: float) -> np.ndarray:
    """Sorted q(v) for nonzero lattice vectors with q(v) <= bound."""
    qd, qo = qform_coeffs(np.asarray(gram, dtype=float))
    return np.sort(fp_norms(qd, qo, float(bound)))


def count_in_ball(gram: np.ndarray, bound: float) -> int:
    qd, qo = qform_coeffs(np.asarray(gram, dtype=float))
    return int(fp_count(qd, qo, float(bound)))


@nb.njit(cache=True, nogil=True)
def _gso(G, mu, bstar):
    d = G.shape[0]
    for i in range(d):
        for j in range(i):
            acc = G[i, j]
            for k in range(j):
                acc -= mu[i, k] * mu[j, k] * bstar[k]
            mu[i, j] = acc / bstar[j]
        acc = G[i, i]
        for k in range(i):
            acc -= mu[i, k] * mu[i, k] * bstar[k]
        bstar[i] = acc


@nb.njit(cache=True, nogil=True)
def _lll_kernel(G, U, delta):
    d = G.shape[0]
    mu = np.zeros((d, d))
    bstar = np.zeros(d)
    _gso(G, mu, bstar)
    k = 1
    guard = 0
    while k < d and guard < 1000000:
        guard += 1
        for j in range(k - 1, -1, -1):
            m = np.round(mu[k, j])
            if m != 0.0:
                # b_k <- b_k - m b_j
                mi = np.int64(m)
                for r in range(d):
                    U[r, k] -= mi * U[r, j]
                for r in range(d):
                    G[k, r] -= m * G[j, r]
                for r in range(d):
                    G[r, k] -= m * G[r, j]
                for r in range(j):
                    mu[k, r] -= m * mu[j, r]
                mu[k, j] -= m
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            for r in range(d):
                U[r, k - 1], U[r, k] = U[r, k], U[r, k - 1]
            for r in range(d):
                G[k - 1, r], G[k, r] = G[k, r], G[k - 1, r]
            for r in range(d):
                G[r, k - 1], G[r, k] = G[r, k], G[r, k - 1]
            _gso(G, mu, bstar)
            k = max(k - 1, 1)


def lll_gram(gram: np.ndarray, delta: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """LLL reduction acting on a Gram matrix.

    Returns (G', U) with U unimodular and G' = U^T G U.
    """
    G = np.array(gram, dtype=float)
    d = G.shape[0]
    if G.ndim != 2 or G.shape != (d, d):
        raise DimensionMismatch("Gram matrix must be square")
    U = np.eye(d, dtype=np.int64)
    if d > 1:
        _lll_kernel(G, U, float(delta))
    return 0.5 * (G + G.T), U


def covering_radius_bound(gram: np.ndarray) -> float:
    """Nearest-plane bound: mu <= (1/2) sqrt(sum of squared Gram-Schmidt lengths)."""
    R = np.linalg.cholesky(np.asarray(gram, dtype=float))
    return 0.5 * math.sqrt(float(np.sum(np.diag(R) ** 2)))
