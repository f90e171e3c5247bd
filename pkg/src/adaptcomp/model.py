"""Linear Gaussian signal-plus-noise measurement model.

The k-th compressed measurement is ``y_k = A_k (H x + n_k) + w_k`` with
``x ~ N(mu, P0)``, ``n_k ~ N(0, Rnn)`` and ``w_k ~ N(0, Rww)``.  A compressor
is either an ``L x K`` matrix or, for scalar measurements, a length-``K``
vector ``a`` standing for the ``1 x K`` matrix ``a^T``.

All gains are in nats.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ArityError,
    ConformanceError,
    DomainError,
    InvariantError,
    SingularityError,
)
from .linalg import check_symmetric_psd, symmetrize

LOG_2PIE = np.log(2.0 * np.pi * np.e)
COND_LIMIT = 1e12
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianSignalModel:
    """Problem instance: channel ``H``, prior, noise covariances and horizon.

    ``allow_singular_noise`` relaxes the positive-definite requirement on
    ``Rww`` to semidefinite.  It exists for noiseless sampling demos; posterior
    updates on such a model may raise :class:`SingularityError`.
    """

    H: np.ndarray
    P0: np.ndarray
    Rnn: np.ndarray
    Rww: np.ndarray
    m: int
    mu: np.ndarray = None
    allow_singular_noise: bool = field(default=False, repr=False)

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        P0 = np.atleast_2d(np.asarray(self.P0, dtype=float))
        Rnn = np.atleast_2d(np.asarray(self.Rnn, dtype=float))
        Rww = np.atleast_2d(np.asarray(self.Rww, dtype=float))
        K, N = H.shape
        mu = np.zeros(N) if self.mu is None else np.asarray(self.mu, dtype=float)
        for name, arr in (("H", H), ("P0", P0), ("Rnn", Rnn), ("Rww", Rww), ("mu", mu)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

        if P0.shape != (N, N):
            raise ConformanceError(f"P0 has shape {P0.shape}, expected {(N, N)}")
        if Rnn.shape != (K, K):
            raise ConformanceError(f"Rnn has shape {Rnn.shape}, expected {(K, K)}")
        if Rww.ndim != 2 or Rww.shape[0] != Rww.shape[1]:
            raise ConformanceError(f"Rww must be square, got shape {Rww.shape}")
        if mu.shape != (N,):
            raise ConformanceError(f"mu has shape {mu.shape}, expected {(N,)}")
        if int(self.m) != self.m or self.m < 0:
            raise InvariantError(f"horizon m must be a nonnegative integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))

        if K < N:
            raise InvariantError(f"channel dimension K={K} must be at least N={N}")
        s = np.linalg.svd(H, compute_uv=False)
        if s.min() <= RANK_TOL * s.max():
            raise InvariantError("H does not have full column rank N")
        check_symmetric_psd("P0", P0, definite=True)
        check_symmetric_psd("Rnn", Rnn)
        check_symmetric_psd("Rww", Rww, definite=not self.allow_singular_noise)

    @property
    def N(self):
        return self.H.shape[1]

    @property
    def K(self):
        return self.H.shape[0]

    @property
    def L(self):
        return self.Rww.shape[0]

    def with_horizon(self, m):
        return replace(self, m=m)


@dataclass(frozen=True, eq=False)
class PosteriorState:
    """Posterior covariance after ``k`` measurements and its entropy."""

    k: int
    P: np.ndarray
    entropy: float

    @property
    def det(self):
        return float(np.linalg.det(self.P))


@dataclass(frozen=True, eq=False)
class PolicyTrace:
    """Outcome of applying a sequence of compressors.

    ``posteriors`` holds ``P_0, ..., P_m``; ``final_posterior`` is its last
    entry.  ``picks`` records action indices when the policy chose from an
    indexed set.
    """

    choices: list
    stage_gains: list
    net_gain: float
    posteriors: list
    picks: tuple = ()

    @property
    def final_posterior(self):
        return self.posteriors[-1]


def as_matrix(A, model):
    """Return compressor ``A`` as an ``L x K`` matrix, checking conformance."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[np.newaxis, :]
    if A.shape != (model.L, model.K):
        raise ConformanceError(
            f"compressor has shape {A.shape}, model expects {(model.L, model.K)}")
    return A


def effective_noise_cov(model, A):
    """Total noise covariance ``A Rnn A^T + Rww`` seen by one measurement."""
    A = as_matrix(A, model)
    return symmetrize(A @ model.Rnn @ A.T + model.Rww)


def entropy(P):
    """Differential entropy ``0.5 logdet P + (N/2) log(2 pi e)`` in nats."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    try:
        Lc = np.linalg.cholesky(symmetrize(P))
    except np.linalg.LinAlgError:
        raise DomainError("entropy requires a positive definite covariance") from None
    logdet = 2.0 * np.sum(np.log(np.diag(Lc)))
    return 0.5 * logdet + 0.5 * P.shape[0] * LOG_2PIE


def initial_state(model):
    return PosteriorState(0, model.P0, entropy(model.P0))


def _check_cond(name, M):
    c = np.linalg.cond(M)
    if not np.isfinite(c) or c > COND_LIMIT:
        raise SingularityError(f"{name} is numerically singular (condition number {c:.3e})")


def _innovation(prev, A, model):
    A = as_matrix(A, model)
    B = A @ model.H
    Nk = effective_noise_cov(model, A)
    S = symmetrize(B @ prev.P @ B.T + Nk)
    return B, Nk, S


def posterior_update(prev, A, model):
    """One covariance update ``P - P B^T (B P B^T + N)^{-1} B P``, ``B = A H``."""
    B, _, S = _innovation(prev, A, model)
    _check_cond("innovation covariance B P B^T + N", S)
    PBt = prev.P @ B.T
    P = symmetrize(prev.P - PBt @ np.linalg.solve(S, PBt.T))
    return PosteriorState(prev.k + 1, P, entropy(P))


def posterior_update_woodbury(prev, A, model):
    """Information-form update ``(P^{-1} + B^T N^{-1} B)^{-1}``."""
    A = as_matrix(A, model)
    B = A @ model.H
    Nk = effective_noise_cov(model, A)
    _check_cond("prior covariance", prev.P)
    _check_cond("effective noise covariance", Nk)
    info = symmetrize(np.linalg.inv(prev.P) + B.T @ np.linalg.solve(Nk, B))
    P = symmetrize(np.linalg.inv(info))
    return PosteriorState(prev.k + 1, P, entropy(P))


def information_determinant(prev, A, model):
    """``det(P^{-1} + B^T N^{-1} B)``, the quantity greedy maximizes per stage."""
    A = as_matrix(A, model)
    B = A @ model.H
    Nk = effective_noise_cov(model, A)
    return float(np.linalg.det(np.linalg.inv(prev.P) + B.T @ np.linalg.solve(Nk, B)))


def per_stage_gain(prev, A, model):
    """Mutual information between ``x`` and one measurement given the past.

    Computed as ``0.5 (logdet(B P B^T + N) - logdet N)``, which equals the
    entropy drop ``H_{k-1} - H_k``.
    """
    _, Nk, S = _innovation(prev, A, model)
    _check_cond("innovation covariance B P B^T + N", S)
    _, logdet_S = np.linalg.slogdet(S)
    _, logdet_N = np.linalg.slogdet(Nk)
    return 0.5 * (logdet_S - logdet_N)


def fold_policy(model, choices, start=None):
    """Apply ``choices`` in order without checking the horizon."""
    state = initial_state(model) if start is None else start
    posteriors = [state]
    gains = []
    for A in choices:
        gains.append(per_stage_gain(state, A, model))
        state = posterior_update(state, A, model)
        posteriors.append(state)
    return PolicyTrace(list(choices), gains, float(sum(gains)), posteriors)


def evaluate_policy(model, choices):
    """Fold the posterior recursion over a full-horizon compressor sequence.

    Gains do not depend on measurement values, so no samples are needed.
    """
    choices = list(choices)
    if len(choices) != model.m:
        raise ArityError(f"expected {model.m} compressors, got {len(choices)}")
    return fold_policy(model, choices)


def _sqrt_psd(M):
    w, U = np.linalg.eigh(symmetrize(M))
    return U * np.sqrt(np.clip(w, 0.0, None))


def simulate_measurements(model, choices, seed):
    """Draw ``x`` once and return ``y_k = A_k (H x + n_k) + w_k`` for each k."""
    mats = [as_matrix(A, model) for A in choices]
    rng = np.random.default_rng(seed)
    x = model.mu + _sqrt_psd(model.P0) @ rng.standard_normal(model.N)
    Sn = _sqrt_psd(model.Rnn)
    Sw = _sqrt_psd(model.Rww)
    ys = []
    for A in mats:
        n = Sn @ rng.standard_normal(model.K)
        w = Sw @ rng.standard_normal(model.L)
        ys.append(A @ (model.H @ x + n) + w)
    return ys
