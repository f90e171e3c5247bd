"""Brute-force baselines for small instances.

Information gains do not depend on measured values, so the optimal policy
over a finite action set is a deterministic search over action sequences.
The search walks the sequence tree depth first and shares posterior updates
between sequences with a common prefix.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SearchBudgetError, SpecializationError
from .model import (
    GaussianSignalModel,
    PolicyTrace,
    as_matrix,
    evaluate_policy,
    fold_policy,
    initial_state,
    per_stage_gain,
    posterior_update,
)
from .scalar_greedy import scalar_noise_levels

SEARCH_BUDGET = 10**6
GAIN_TABLE_LIMIT = 10**4
TIE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteActionSet:
    actions: list
    labels: list = None

    def __post_init__(self):
        if not self.actions:
            raise DomainError("action set must be nonempty")
        acts = [np.asarray(a, dtype=float) for a in self.actions]
        shapes = {a.shape for a in acts}
        if len(shapes) != 1:
            raise DomainError(f"actions have inconsistent shapes {sorted(shapes)}")
        labels = self.labels
        if labels is None:
            labels = [f"a{i}" for i in range(len(acts))]
        if len(labels) != len(acts):
            raise DomainError("one label per action is required")
        object.__setattr__(self, "actions", acts)
        object.__setattr__(self, "labels", list(labels))

    def __len__(self):
        return len(self.actions)

    def check(self, model):
        for a in self.actions:
            as_matrix(a, model)


@dataclass(frozen=True, eq=False)
class OracleResult:
    best_trace: PolicyTrace
    best_sequence: tuple
    method: str
    gain_table: dict = field(default=None)


def _better(g, best):
    if best == -np.inf:
        return True
    return g > best + TIE_ATOL * max(1.0, abs(best))


def exhaustive_optimal(model, actions, m):
    """Best length-``m`` sequence over ``actions`` by exhaustive search.

    Ties go to the lexicographically smallest index sequence.
    """
    actions.check(model)
    n = len(actions)
    if n**m > SEARCH_BUDGET:
        raise SearchBudgetError(
            f"{n}^{m} = {n**m} sequences exceed the budget of {SEARCH_BUDGET}; "
            "use the relaxed bound instead")
    keep_table = n**m <= GAIN_TABLE_LIMIT
    table = {} if keep_table else None
    best = {"gain": -np.inf, "seq": None}

    def visit(state, prefix, acc):
        if len(prefix) == m:
            if keep_table:
                table[prefix] = acc
            if _better(acc, best["gain"]):
                best["gain"], best["seq"] = acc, prefix
            return
        for i, A in enumerate(actions.actions):
            g = per_stage_gain(state, A, model)
            visit(posterior_update(state, A, model), prefix + (i,), acc + g)

    visit(initial_state(model), (), 0.0)
    seq = best["seq"]
    trace = fold_policy(model, [actions.actions[i] for i in seq])
    trace = PolicyTrace(trace.choices, trace.stage_gains, trace.net_gain,
                        trace.posteriors, picks=seq)
    return OracleResult(trace, seq, "exhaustive", table)


def greedy_over_finite_set(model, actions, m):
    """Stage-wise maximizer of the per-stage gain, ties to the smallest index."""
    actions.check(model)
    state = initial_state(model)
    picks = []
    for _ in range(m):
        best_i, best_g = None, -np.inf
        for i, A in enumerate(actions.actions):
            g = per_stage_gain(state, A, model)
            if _better(g, best_g):
                best_i, best_g = i, g
        picks.append(best_i)
        state = posterior_update(state, actions.actions[best_i], model)
    trace = fold_policy(model, [actions.actions[i] for i in picks])
    return PolicyTrace(trace.choices, trace.stage_gains, trace.net_gain,
                       trace.posteriors, picks=tuple(picks))


def alpha_model(alpha, m=2):
    """Two-dimensional instance ``P0 = I / alpha``, ``H = I``, ``Rww = I``, ``Rnn = 0``."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    model = GaussianSignalModel(H=np.eye(2), P0=np.eye(2) / alpha,
                                Rnn=np.zeros((2, 2)), Rww=np.eye(2), m=m)
    acts = FiniteActionSet(
        [np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), alpha**0.25 * np.eye(2)],
        ["Diag(1,0)", "Diag(0,1)", "alpha^(1/4) I"])
    return model, acts


def alternating_schedule(m, cycle=(0, 1)):
    return [cycle[k % len(cycle)] for k in range(m)]


@dataclass(frozen=True)
class AlphaFamilyPoint:
    alpha: float
    greedy_det: float
    alternating_det: float
    greedy_picks: tuple

    @property
    def ratio(self):
        return self.greedy_det / self.alternating_det

    @property
    def gain_gap(self):
        """``H_alternating - H_greedy`` in nats."""
        return 0.5 * float(np.log(self.greedy_det / self.alternating_det))


def alpha_family(alpha, m=2):
    """Final ``det P_m`` for greedy and for the alternating policy.

    Greedy here is :func:`greedy_over_finite_set`, so for moderate ``alpha``
    it may pick ``alpha^(1/4) I`` more than once.
    """
    model, acts = alpha_model(alpha, m)
    greedy = greedy_over_finite_set(model, acts, m)
    alt = evaluate_policy(model, [acts.actions[i] for i in alternating_schedule(m)])
    return AlphaFamilyPoint(alpha, greedy.final_posterior.det,
                            alt.final_posterior.det, greedy.picks)


def alpha_closed_forms(alpha):
    """Closed-form ``det P_2`` for the sequences (alpha^(1/4) I, Diag(1,0)) and alternating."""
    s = np.sqrt(alpha)
    return 1.0 / (s * (1.0 + s) * (1.0 + s + alpha)), 1.0 / (1.0 + alpha) ** 2


def grid_search_scalar_m2(model, resolution=10**4):
    """Optimal pair of unit-norm scalar compressors for ``m = 2``, ``N = K = 2``.

    The second stage is the last one, so for a fixed first compressor the
    best second compressor is the greedy one.  That leaves a search over the
    angle of ``a_1`` on ``[0, pi)``.
    """
    if model.N != 2 or model.K != 2 or model.L != 1:
        raise SpecializationError("grid search needs N = K = 2 and L = 1")
    if model.m != 2:
        raise SpecializationError(f"grid search needs m = 2, model has m = {model.m}")
    if resolution < 100:
        raise DomainError("resolution must be at least 100")
    sigma_n2, sigma_w2 = scalar_noise_levels(model)
    s2 = sigma_n2 + sigma_w2
    P0 = initial_state(model)
    HPH = model.H @ model.P0 @ model.H.T

    thetas = np.pi * np.arange(resolution) / resolution
    a1 = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    # Batched rank-one update of D = H P H^T along each candidate a_1.
    Da = a1 @ HPH
    quad = np.einsum("ij,ij->i", Da, a1)
    g1 = 0.5 * np.log1p(quad / s2)
    D1 = HPH[None, :, :] - Da[:, :, None] * Da[:, None, :] / (quad + s2)[:, None, None]
    lam_max = np.linalg.eigvalsh(D1)[:, -1]
    total = g1 + 0.5 * np.log1p(lam_max / s2)

    j = int(np.argmax(total))
    first = a1[j]
    P1 = posterior_update(P0, first, model)
    D = model.H @ P1.P @ model.H.T
    w, U = np.linalg.eigh(D)
    second = U[:, -1]
    trace = evaluate_policy(model, [first, second])
    return OracleResult(trace, (j,), "grid")
