"""Block-filling: water-filling restricted to blocks of size ``1/m``.

When every compressor is an eigenvector of ``D_0``, the relaxed objective
becomes ``prod_i (1 + Lambda_i gamma_i)`` with each ``gamma_i`` a multiple of
``1/m``.  Think of channel ``i`` as a column of initial height ``1/Lambda_i``
into which ``m`` blocks of height ``1/m`` are dropped.  The scalar greedy
policy drops each block on the lowest column.

Allocations keep exact integer block counts; heights and gains are floats.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .waterfill import find_r, water_level

TIE_RTOL = 1e-10
INT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BlockAllocation:
    m: int
    counts: tuple
    Lambdas: np.ndarray

    @property
    def gamma(self):
        if self.m == 0:
            return tuple(Fraction(0) for _ in self.counts)
        return tuple(Fraction(c, self.m) for c in self.counts)

    @property
    def heights(self):
        c = np.asarray(self.counts, dtype=float)
        step = c / self.m if self.m else np.zeros_like(c)
        return 1.0 / self.Lambdas + step

    @property
    def gain(self):
        return allocation_gain(self.Lambdas, self.counts, self.m)


@dataclass(frozen=True)
class TheoremConditionReport:
    """Outcome of a sufficient-condition check for greedy optimality.

    ``details`` carries ``S`` and ``r`` for the eigenvector-subset condition,
    or ``n``, ``m_hat``, ``r`` and ``remainder`` for the integer-gap
    condition.
    """

    theorem: str
    holds: bool
    details: dict


def allocation_gain(Lambdas, counts, m):
    """``0.5 log prod_i (1 + Lambda_i k_i / m)``."""
    if m == 0:
        return 0.0
    L = np.asarray(Lambdas, dtype=float)
    c = np.asarray(counts, dtype=float)
    return 0.5 * float(np.sum(np.log1p(L * c / m)))


def _prefix(Lambdas, m):
    L = np.asarray(Lambdas, dtype=float)
    return L[:min(m, L.size)]


def _lowest(heights, candidates):
    low = min(heights[i] for i in candidates)
    return next(i for i in candidates if heights[i] <= low + TIE_RTOL * abs(low))


def greedy_blockfill(Lambdas, m):
    """Drop ``m`` blocks one at a time on the lowest column, ties to the smallest index."""
    L = np.asarray(Lambdas, dtype=float)
    counts = [0] * L.size
    base = 1.0 / L
    for _ in range(m):
        heights = base + np.asarray(counts) / m
        counts[_lowest(heights, range(L.size))] += 1
    return BlockAllocation(m, tuple(counts), L)


def water_level_for(Lambdas, m):
    """``(r, mu)`` of the continuous problem on the first ``min(m, N)`` channels."""
    head = _prefix(Lambdas, m)
    r = find_r(head)
    return r, water_level(head, r)


def optimal_blockfill(Lambdas, m):
    """Optimal integer allocation.

    Fill each active column with as many blocks as fit under the water level,
    then hand the leftover blocks one each to the lowest columns.
    """
    L = np.asarray(Lambdas, dtype=float)
    if m == 0:
        return BlockAllocation(0, (0,) * L.size, L)
    r, mu = water_level_for(L, m)
    counts = [0] * L.size
    for i in range(r):
        counts[i] = max(0, int(np.floor((mu - 1.0 / L[i]) * m + INT_TOL)))
    left = m - sum(counts)
    heights = 1.0 / L + np.asarray(counts) / m
    pool = list(range(L.size))
    for _ in range(left):
        i = _lowest(heights, pool)
        counts[i] += 1
        pool.remove(i)
    return BlockAllocation(m, tuple(counts), L)


def enumerate_allocations(n, m):
    """All ways to place ``m`` identical blocks into ``n`` columns."""
    for bars in itertools.combinations(range(m + n - 1), n - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(m + n - 1 - prev - 1)
        yield tuple(counts)


def brute_force_blockfill(Lambdas, m):
    """Best allocation by enumeration; ties keep the first in enumeration order."""
    L = np.asarray(Lambdas, dtype=float)
    best, best_gain = None, -np.inf
    for counts in enumerate_allocations(L.size, m):
        g = allocation_gain(L, counts, m)
        if g > best_gain + 1e-14:
            best, best_gain = counts, g
    return BlockAllocation(m, best, L)


def lemma6_certificate(alloc, Lambdas, m):
    """Whether every filled column ends within ``1/m`` of the water level.

    Also requires that no column beyond the first ``r`` receives a block.
    """
    L = np.asarray(Lambdas, dtype=float)
    if m == 0:
        return True
    r, mu = water_level_for(L, m)
    heights = 1.0 / L + np.asarray(alloc.counts, dtype=float) / m
    for i, c in enumerate(alloc.counts):
        if c == 0:
            continue
        if i >= r:
            return False
        if not (mu - 1.0 / m < heights[i] < mu + 1.0 / m):
            return False
    return True


def check_theorem4(S, Lambdas, m):
    """Greedy over eigenvectors ``S`` is optimal when ``S`` holds the top ``r``.

    ``S`` uses 0-based eigenvector indices.
    """
    r, _ = water_level_for(Lambdas, m)
    S = frozenset(int(i) for i in S)
    holds = set(range(r)) <= S
    return TheoremConditionReport("T4", holds, {"S": sorted(S), "r": r})


def check_theorem5(lambdas, sigma2, m):
    """Integer-gap condition under which greedy reaches the relaxed optimum.

    With ``n_k = sigma^2 (1/lambda_{k+1} - 1/lambda_k)`` for ``k < r``, the
    condition holds when every ``n_k`` is a nonnegative integer,
    ``m >= m_hat = sum_k k n_k`` and ``r`` divides ``m - m_hat``.
    """
    lam = np.asarray(lambdas, dtype=float)
    Lambdas = m * lam[lam > 0] / sigma2
    r, _ = water_level_for(Lambdas, m)
    raw = [sigma2 * (1.0 / lam[k + 1] - 1.0 / lam[k]) for k in range(r - 1)]
    integral = all(abs(x - round(x)) < INT_TOL and round(x) >= 0 for x in raw)
    n = [int(round(x)) for x in raw] if integral else raw
    details = {"n": n, "r": r, "m": m}
    if not integral:
        details.update(m_hat=None, remainder=None)
        return TheoremConditionReport("T5", False, details)
    m_hat = sum((k + 1) * nk for k, nk in enumerate(n))
    remainder = (m - m_hat) % r if m >= m_hat else None
    details.update(m_hat=m_hat, remainder=remainder)
    holds = m >= m_hat and remainder == 0
    return TheoremConditionReport("T5", holds, details)
