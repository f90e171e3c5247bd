"""Relaxed optimal policy under the average unit-norm constraint.

With effective eigenvalues ``Lambda_i = m lambda_i / sigma^2`` the relaxed
problem is the classic water-filling problem

    maximize  prod_i (1 + Lambda_i p_i)   subject to  sum_i p_i <= 1,

solved by ``p_i = (mu - 1/Lambda_i)^+`` with water level
``mu = (1 + sum_{i<=r} 1/Lambda_i) / r``.  The number of active channels ``r``
is the unique integer where the inequality
``1/Lambda_k < (1 + sum_{j<=k} 1/Lambda_j) / k`` stops holding.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    CaseSelectionError,
    DegenerateStateError,
    DomainError,
    InfeasibleRecoveryError,
)

CASE_RTOL = 1e-10
ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WaterFillSolution:
    Lambdas: np.ndarray
    r: int
    mu: float
    p: np.ndarray
    H_R: float
    m: int
    sigma2: float

    @property
    def q(self):
        return len(self.Lambdas)


def effective_eigenvalues(lambdas, m, sigma2):
    """``m lambda_i / sigma^2`` for the ``q = min(m, #positive)`` largest."""
    lam = np.asarray(lambdas, dtype=float)
    if sigma2 <= 0:
        raise DomainError(f"sigma^2 must be positive, got {sigma2}")
    if m < 1:
        raise DomainError(f"m must be at least 1, got {m}")
    if np.any(lam < 0):
        raise DomainError("eigenvalues must be nonnegative")
    if np.any(np.diff(lam) > 0):
        raise DomainError("eigenvalues must be sorted in descending order")
    positive = lam[lam > 0]
    if positive.size == 0:
        raise DegenerateStateError("all eigenvalues are zero")
    q = min(m, positive.size)
    return m * positive[:q] / sigma2


def _check_lambdas(Lambdas):
    L = np.asarray(Lambdas, dtype=float)
    if L.ndim != 1 or L.size == 0:
        raise DomainError("expected a nonempty vector of effective eigenvalues")
    if np.any(L <= 0):
        raise DomainError("effective eigenvalues must be strictly positive")
    if np.any(np.diff(L) > 0):
        raise DomainError("effective eigenvalues must be nonincreasing")
    return L


def lemma1_flags(Lambdas):
    """For each k, whether ``1/Lambda_k < (1 + sum_{j<=k} 1/Lambda_j) / k``."""
    L = _check_lambdas(Lambdas)
    inv = 1.0 / L
    k = np.arange(1, L.size + 1)
    return inv < (1.0 + np.cumsum(inv)) / k


def find_r(Lambdas):
    """Number of channels that receive positive allocation."""
    flags = lemma1_flags(Lambdas)
    r = int(np.argmin(flags)) if not flags.all() else flags.size
    if flags[r:].any():
        # Unreachable for nonincreasing input; guards against misuse.
        raise DomainError("inequality pattern has more than one boundary")
    return r


def water_level(Lambdas, r):
    L = _check_lambdas(Lambdas)
    return float((1.0 + np.sum(1.0 / L[:r])) / r)


def allocations(Lambdas, mu):
    L = _check_lambdas(Lambdas)
    return np.clip(mu - 1.0 / L, 0.0, None)


def relaxed_optimal_value(Lambdas):
    """Optimal relaxed net gain ``0.5 log prod_{i<=r}(Lambda_i/r + sum_j Lambda_i/(r Lambda_j))``."""
    L = _check_lambdas(Lambdas)
    r = find_r(L)
    Lr = L[:r]
    terms = Lr / r + Lr * np.sum(1.0 / Lr) / r
    return 0.5 * float(np.sum(np.log(terms)))


def lemma2_sequence(Lambdas):
    """``M_k = ((1 + sum_{j<=k} 1/Lambda_j) / k)^k prod_{i<=k} Lambda_i``."""
    L = _check_lambdas(Lambdas)
    k = np.arange(1, L.size + 1)
    log_m = k * np.log((1.0 + np.cumsum(1.0 / L)) / k) + np.cumsum(np.log(L))
    return np.exp(log_m)


def solve(lambdas, m, sigma2):
    """Full water-filling solution from the spectrum of ``D_0``."""
    L = effective_eigenvalues(lambdas, m, sigma2)
    r = find_r(L)
    mu = water_level(L, r)
    p = allocations(L, mu)
    return WaterFillSolution(L, r, mu, p, relaxed_optimal_value(L), int(m), float(sigma2))


def relaxed_objective(Gtilde, lambdas_full, m, sigma2):
    """``0.5 logdet(I_m + G^T Diag(m lambda / sigma^2) G)`` for a ``K x m`` factor."""
    G = np.asarray(Gtilde, dtype=float)
    Lam = m * np.asarray(lambdas_full, dtype=float) / sigma2
    M = np.eye(G.shape[1]) + G.T @ (Lam[:, None] * G)
    sign, logdet = np.linalg.slogdet(M)
    return 0.5 * logdet


def _check_orthonormal(name, U, n):
    U = np.asarray(U, dtype=float)
    if U.shape != (n, n):
        raise DomainError(f"{name} must be {n} x {n}, got shape {U.shape}")
    if np.abs(U.T @ U - np.eye(n)).max() > ORTHO_TOL:
        raise DomainError(f"{name} is not orthonormal")
    return U


def optimal_case(solution, lambdas_full):
    """Return ``(1, None)`` or ``(2, (alpha, beta))`` for the optimal-factor family."""
    lam = np.asarray(lambdas_full, dtype=float)
    r = solution.r
    n_pos = int(np.sum(lam > 0))
    lam_r = lam[r - 1]
    if r == n_pos or r == lam.size or lam_r - lam[r] > CASE_RTOL * lam_r:
        return 1, None
    same = np.abs(lam - lam_r) <= CASE_RTOL * lam_r
    alpha = int(np.sum(same[:r]))
    beta = int(np.sum(same[r:]))
    if not (r == solution.q == solution.m < n_pos):
        raise CaseSelectionError(
            f"lambda_r = lambda_(r+1) but r={r}, q={solution.q}, m={solution.m}, N={n_pos} "
            "do not satisfy r = q = m < N")
    return 2, (alpha, beta)


def construct_gtilde(solution, lambdas_full, U1=None, U2=None):
    """An optimal ``K x m`` factor of the relaxed problem.

    Case 1 gives ``G0 U1``; Case 2 (a repeated eigenvalue straddling the
    active set) gives ``blockdiag(I, U2, I) G0 U1``.  ``U1``/``U2`` default to
    identities.
    """
    lam = np.asarray(lambdas_full, dtype=float)
    K, m, r = lam.size, solution.m, solution.r
    U1 = np.eye(m) if U1 is None else _check_orthonormal("U1", U1, m)
    G0 = np.zeros((K, m))
    idx = np.arange(r)
    G0[idx, idx] = np.sqrt(solution.p[:r])

    case, ab = optimal_case(solution, lam)
    if case == 1:
        if U2 is not None:
            raise CaseSelectionError("U2 only applies when lambda_r = lambda_(r+1)")
        return G0 @ U1
    alpha, beta = ab
    U2 = np.eye(alpha + beta) if U2 is None else _check_orthonormal("U2", U2, alpha + beta)
    W = np.eye(K)
    lo = r - alpha
    W[lo:lo + alpha + beta, lo:lo + alpha + beta] = U2
    return W @ G0 @ U1


def recover_compressors(Gtilde, V, m, sigma_n2, sigma_w2):
    """Map a normalized factor back to compressors ``a_1, ..., a_m``.

    Undoes ``Gtilde = sigma m^{-1/2} V^T C`` and
    ``c_k = a_k / sqrt(||a_k||^2 sigma_n^2 + sigma_w^2)``.
    """
    sigma = np.sqrt(sigma_n2 + sigma_w2)
    C = np.asarray(V, dtype=float) @ (np.sqrt(m) / sigma * np.asarray(Gtilde, dtype=float))
    out = []
    for k in range(C.shape[1]):
        c = C[:, k]
        c2 = float(c @ c)
        if c2 == 0.0:
            out.append(np.zeros_like(c))
            continue
        if c2 * sigma_n2 >= 1.0:
            raise InfeasibleRecoveryError(
                f"column {k}: ||c||^2 sigma_n^2 = {c2 * sigma_n2:.6g} >= 1")
        out.append(c * np.sqrt(sigma_w2 / (1.0 - c2 * sigma_n2)))
    return out


def embed_compressors(compressors, V, m, sigma_n2, sigma_w2):
    """Inverse of :func:`recover_compressors`."""
    sigma = np.sqrt(sigma_n2 + sigma_w2)
    cols = []
    for a in compressors:
        a = np.asarray(a, dtype=float)
        cols.append(a / np.sqrt(float(a @ a) * sigma_n2 + sigma_w2))
    C = np.column_stack(cols)
    return sigma / np.sqrt(m) * (np.asarray(V, dtype=float).T @ C)
