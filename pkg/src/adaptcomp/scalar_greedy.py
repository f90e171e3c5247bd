"""Greedy policy for sequential scalar measurements.

With ``L = 1``, ``Rww = sigma_w^2`` and ``Rnn = sigma_n^2 I``, every greedy
step measures along the current top eigenvector of ``D_k = H P_k H^T``.  The
eigenvectors of ``D_0`` stay eigenvectors of every ``D_k``; only the picked
eigenvalue changes, to ``(1/lambda + 1/sigma^2)^{-1}``.  The state therefore
carries the fixed basis ``V`` and updates the spectrum analytically.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateStateError, DomainError, SpecializationError
from .linalg import sorted_eigh
from .model import PolicyTrace, fold_policy

TIE_RTOL = 1e-10
ZERO_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class ScalarSensingState:
    """Working state of the scalar greedy policy.

    ``lambdas[i]`` is the current eigenvalue attached to column ``V[:, i]``.
    Columns keep their initial (descending) order, so an index into
    ``lambdas`` is the original eigenvector index.
    """

    V: np.ndarray
    lambdas: np.ndarray
    sigma_n2: float
    sigma_w2: float
    step: int = 0
    pick_history: tuple = ()
    model: object = None

    @property
    def sigma2(self):
        return self.sigma_n2 + self.sigma_w2

    def descending_order(self):
        """Indices by decreasing current eigenvalue, ties by original index."""
        remaining = list(range(len(self.lambdas)))
        order = []
        while remaining:
            top = max(self.lambdas[i] for i in remaining)
            nxt = next(i for i in remaining if self.lambdas[i] >= top - TIE_RTOL * abs(top))
            order.append(nxt)
            remaining.remove(nxt)
        return order

    def D(self):
        return (self.V * self.lambdas) @ self.V.T


def scalar_noise_levels(model):
    """Return ``(sigma_n2, sigma_w2)`` or raise if the model is not scalar."""
    if model.L != 1:
        raise SpecializationError(f"scalar greedy needs L = 1, model has L = {model.L}")
    sigma_w2 = float(model.Rww[0, 0])
    Rnn = model.Rnn
    sigma_n2 = float(np.mean(np.diag(Rnn)))
    scale = max(1.0, abs(sigma_n2))
    if np.abs(Rnn - sigma_n2 * np.eye(model.K)).max() > 1e-12 * scale:
        raise SpecializationError("Rnn must be a scalar multiple of the identity")
    return sigma_n2, sigma_w2


def init_state(model):
    """Eigen-decompose ``D_0 = H P_0 H^T`` and build the greedy state."""
    sigma_n2, sigma_w2 = scalar_noise_levels(model)
    lam, V = sorted_eigh(model.H @ model.P0 @ model.H.T)
    top = lam.max(initial=0.0)
    lam = np.where(np.abs(lam) <= ZERO_RTOL * top, 0.0, lam)
    return ScalarSensingState(V, lam, sigma_n2, sigma_w2, model=model)


def pick_index(state):
    """Index of the largest current eigenvalue, smallest index on ties."""
    lam = state.lambdas
    top = float(lam.max(initial=0.0))
    if top <= 0.0:
        raise DegenerateStateError("all eigenvalues are zero; no informative direction")
    return int(np.flatnonzero(lam >= top * (1.0 - TIE_RTOL))[0])


def greedy_step(state):
    """One greedy measurement.

    Returns
    -------
    a : ndarray
        Chosen unit-norm compressor (an eigenvector of ``D_0``).
    state : ScalarSensingState
        State after the measurement.
    gain : float
        Per-stage information gain ``0.5 log(1 + lambda_max / sigma^2)``.
    """
    i = pick_index(state)
    lam = float(state.lambdas[i])
    s2 = state.sigma2
    new = state.lambdas.copy()
    new[i] = 1.0 / (1.0 / lam + 1.0 / s2)
    gain = 0.5 * np.log1p(lam / s2)
    nxt = replace(state, lambdas=new, step=state.step + 1,
                  pick_history=state.pick_history + (i,))
    return state.V[:, i].copy(), nxt, gain


def greedy_run(state, m):
    """Run ``m`` greedy steps and return the resulting :class:`PolicyTrace`.

    Stage gains come from the analytic spectrum.  When starting from the
    initial state, posteriors are folded through the model so the trace carries
    explicit covariances; otherwise ``posteriors`` is empty.
    """
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    start = len(state.pick_history)
    choices, gains = [], []
    for _ in range(m):
        a, state, g = greedy_step(state)
        choices.append(a)
        gains.append(g)
    fresh = start == 0 and state.model is not None
    posteriors = fold_policy(state.model, choices).posteriors if fresh else []
    return PolicyTrace(choices, gains, float(sum(gains)), posteriors,
                       picks=state.pick_history[start:])


def picked_eigenvalues(state, m):
    """Largest eigenvalue before each of ``m`` greedy steps."""
    out = []
    for _ in range(m):
        out.append(float(state.lambdas[pick_index(state)]))
        _, state, _ = greedy_step(state)
    return out


def greedy_gain_product(picked_lambdas, sigma2):
    """Net gain ``0.5 log prod (1 + lambda_1^{(k-1)} / sigma^2)``."""
    return 0.5 * float(np.log(np.prod(1.0 + np.asarray(picked_lambdas) / sigma2)))


def snr_ratio(state, a):
    """``a^T D a / (sigma_n^2 ||a||^2 + sigma_w^2)`` for the current spectrum."""
    a = np.asarray(a, dtype=float)
    nrm2 = float(a @ a)
    if nrm2 == 0.0:
        raise DomainError("snr_ratio is undefined for the zero vector")
    return float(a @ state.D() @ a) / (state.sigma_n2 * nrm2 + state.sigma_w2)
