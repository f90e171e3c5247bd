"""Acceptance gate.

Each criterion is a function returning ``(passed, detail)``.  Under pytest the
outcomes are also collected and printed as one PASS/FAIL line per criterion in
the terminal summary; running this file directly prints the same lines.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from adaptcomp.blockfill import (  # noqa: E402
    brute_force_blockfill,
    check_theorem5,
    greedy_blockfill,
    lemma6_certificate,
    optimal_blockfill,
)
from adaptcomp.linalg import random_orthonormal  # noqa: E402
from adaptcomp.model import (  # noqa: E402
    GaussianSignalModel,
    information_determinant,
    initial_state,
    posterior_update,
    posterior_update_woodbury,
)
from adaptcomp.oracle import (  # noqa: E402
    FiniteActionSet,
    alpha_closed_forms,
    alpha_family,
    exhaustive_optimal,
    greedy_over_finite_set,
    grid_search_scalar_m2,
)
from adaptcomp.scalar_greedy import greedy_run, init_state  # noqa: E402
from adaptcomp.waterfill import relaxed_optimal_value, solve  # noqa: E402

from conftest import random_model, scalar_model  # noqa: E402

RESULTS = []
SEED = 7


def record(label, ok, detail):
    RESULTS.append((label, bool(ok), detail))
    return ok


def _rel(actual, expected):
    return abs(actual - expected) / abs(expected)


def criterion_1():
    t0 = time.perf_counter()
    model = GaussianSignalModel(H=np.eye(2), P0=16 * np.eye(2), Rnn=np.zeros((2, 2)),
                                Rww=np.eye(2), m=2)
    d10, d01, half = np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), 0.5 * np.eye(2)
    acts = FiniteActionSet([d10, d01, half])
    p0 = initial_state(model)
    p1 = posterior_update(p0, half, model)
    greedy = greedy_over_finite_set(model, acts, 2)
    alt = exhaustive_optimal(model, FiniteActionSet([d10, d01]), 2)
    alt_det = posterior_update(posterior_update(p0, d10, model), d01, model).det
    pairs = [
        (information_determinant(p0, d10, model), 17 / 256),
        (information_determinant(p0, half, model), 25 / 256),
        (information_determinant(p1, d10, model), 105 / 256),
        (information_determinant(p1, half, model), 81 / 256),
        (greedy.final_posterior.det, 256 / 105),
        (alt_det, 256 / 289),
        (alt.best_trace.final_posterior.det, 256 / 289),
    ]
    elapsed = time.perf_counter() - t0
    worst = max(_rel(a, e) for a, e in pairs)
    ok = worst <= 1e-9 and elapsed < 1.0
    return ok, f"max rel err {worst:.2e}, {elapsed:.3f} s"


def criterion_2():
    g, a = alpha_closed_forms(1 / 16)
    pt = alpha_family(1 / 16)
    part_a = max(_rel(g, 256 / 105), _rel(a, 256 / 289),
                 _rel(pt.greedy_det, 256 / 105), _rel(pt.alternating_det, 256 / 289)) <= 1e-9
    # Literal reading: the greedy policy actually run over the three actions.
    mid = alpha_family(0.347809)
    gap = abs(mid.gain_gap)
    part_b = gap < 1e-4
    tiny = alpha_family(1e-6)
    part_c = tiny.ratio > 100
    detail = (f"(a) {'ok' if part_a else 'FAIL'}; (b) |dH| = {gap:.4g} nats with greedy picks "
              f"{mid.greedy_picks}; (c) ratio {tiny.ratio:.1f}")
    return part_a and part_b and part_c, detail


def criterion_3():
    t0 = time.perf_counter()
    model = GaussianSignalModel(H=np.eye(2), P0=np.array([[3.0, 2.0], [2.0, 3.0]]),
                                Rnn=np.zeros((2, 2)), Rww=np.eye(1), m=2)
    st_ = init_state(model)
    H_G = greedy_run(st_, 2).net_gain
    H_R = solve(st_.lambdas, 2, st_.sigma2).H_R
    res = grid_search_scalar_m2(model, 10**4)
    H_O = res.best_trace.net_gain
    a1 = res.best_trace.choices[0]
    elapsed = time.perf_counter() - t0
    errs = (abs(H_G - 0.5 * np.log(12)), abs(H_R - 0.5 * np.log(12.8)),
            abs(H_O - 0.5 * np.log(12.8)), abs(a1[0] * a1[1] - 0.2))
    ok = (errs[0] <= 1e-10 and errs[1] <= 1e-10 and errs[2] <= 1e-6 and errs[3] <= 1e-3
          and elapsed < 10)
    return ok, "errors " + ", ".join(f"{e:.1e}" for e in errs) + f"; {elapsed:.2f} s"


def criterion_4():
    lam, s2 = 2.0, 1.0
    model = scalar_model([lam] * 4, sigma_n2=0.25, sigma_w2=0.75, m=8)
    trace = greedy_run(init_state(model), 8)
    counts = np.bincount(trace.picks, minlength=4)
    err = np.max(np.abs(np.asarray(trace.stage_gains[:4]) - 0.5 * np.log1p(lam / s2)))
    return bool(np.all(counts == 2)) and err <= 1e-10, f"counts {counts.tolist()}, gain err {err:.1e}"


def criterion_5():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(200):
        N = int(rng.integers(1, 6))
        K = int(rng.integers(N, 6))
        L = int(rng.integers(1, 6))
        model = random_model(rng, N, K, L)
        p0 = initial_state(model)
        A = rng.standard_normal((L, K))
        a = posterior_update(p0, A, model).P
        b = posterior_update_woodbury(p0, A, model).P
        worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(a))
    return worst <= 1e-10, f"max rel Frobenius err {worst:.2e} over 200 instances"


def _random_scalar_instance(rng, N):
    lam = np.sort(rng.uniform(0.1, 5.0, N))[::-1]
    V = random_orthonormal(N, rng)
    return lam, V, float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.1, 2.0))


def criterion_6():
    rng = np.random.default_rng(SEED)
    worst = np.inf
    for _ in range(100):
        N, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        lam, V, sn, sw = _random_scalar_instance(rng, N)
        model = scalar_model(lam, sn, sw, m=m, V=V)
        st_ = init_state(model)
        H_G = greedy_run(st_, m).net_gain
        acts = FiniteActionSet([st_.V[:, i] for i in range(N)])
        H_O = exhaustive_optimal(model, acts, m).best_trace.net_gain
        H_R = solve(st_.lambdas, m, st_.sigma2).H_R
        worst = min(worst, H_O - H_G, H_R - H_O)
    return worst >= -1e-8, f"min slack {worst:.2e}"


def criterion_7():
    rng = np.random.default_rng(SEED)
    worst, n_sound = 0.0, 0
    while n_sound < 50:
        N, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        lam, V, sn, sw = _random_scalar_instance(rng, N)
        model = scalar_model(lam, sn, sw, m=m, V=V)
        st_ = init_state(model)
        r = solve(st_.lambdas, m, st_.sigma2).r
        extra = [i for i in range(r, N) if rng.random() < 0.5]
        S = list(range(r)) + extra
        acts = FiniteActionSet([st_.V[:, i] for i in S])
        g = greedy_over_finite_set(model, acts, m).net_gain
        o = exhaustive_optimal(model, acts, m).best_trace.net_gain
        worst = max(worst, abs(g - o))
        n_sound += 1

    bites, tried = 0, 0
    while tried < 10:
        lam, V, sn, sw = _random_scalar_instance(rng, 4)
        m = int(rng.integers(2, 5))
        model = scalar_model(lam, sn, sw, m=m, V=V)
        st_ = init_state(model)
        r = solve(st_.lambdas, m, st_.sigma2).r
        if r < 2 or r >= 4:
            continue
        tried += 1
        S = list(range(r - 1)) + [r]
        g = greedy_over_finite_set(
            model, FiniteActionSet([st_.V[:, i] for i in S]), m).net_gain
        full = FiniteActionSet([st_.V[:, i] for i in range(4)])
        o = exhaustive_optimal(model, full, m).best_trace.net_gain
        bites += g < o - 1e-9
    ok = worst <= 1e-9 and bites >= 1
    return ok, f"max |H_G - H_O| over S {worst:.1e}; strict gap in {bites}/10 truncated sets"


def _theorem5_instances(rng, count):
    yield np.array([1.0, 0.5]), 1.0, 3
    made = 1
    while made < count:
        r = int(rng.integers(1, 4))
        s2 = float(rng.choice([0.5, 1.0, 2.0]))
        lam = [float(rng.uniform(0.5, 4.0))]
        n = rng.integers(0, 3, size=r - 1)
        for nk in n:
            lam.append(lam[-1] if nk == 0 else 1.0 / (1.0 / lam[-1] + nk / s2))
        m_hat = int(sum((k + 1) * nk for k, nk in enumerate(n)))
        m = m_hat + r * int(rng.integers(1, 4))
        if check_theorem5(lam, s2, m).holds:
            made += 1
            yield np.array(lam), s2, m


def criterion_8():
    rng = np.random.default_rng(SEED)
    worst, n = 0.0, 0
    for lam, s2, m in _theorem5_instances(rng, 30):
        model = scalar_model(lam, sigma_w2=s2, m=m)
        st_ = init_state(model)
        H_G = greedy_run(st_, m).net_gain
        H_R = solve(st_.lambdas, m, s2).H_R
        worst = max(worst, abs(H_G - H_R))
        n += 1
    return worst < 1e-9, f"max |H_G - H_R| {worst:.1e} over {n} instances"


def criterion_9():
    rng = np.random.default_rng(SEED)
    worst, certs, total = 0.0, True, 0
    for N in range(1, 5):
        for m in range(1, 7):
            for _ in range(25):
                L = np.sort(rng.exponential(3.0, N) + 1e-3)[::-1]
                best = brute_force_blockfill(L, m).gain
                opt = optimal_blockfill(L, m)
                greedy = greedy_blockfill(L, m)
                worst = max(worst, best - opt.gain)
                certs &= lemma6_certificate(opt, L, m) and lemma6_certificate(greedy, L, m)
                total += 1
    return worst <= 1e-12 and certs, f"max shortfall {worst:.1e}; certificates {'hold' if certs else 'FAIL'}; {total} cases"


def criterion_10():
    rng = np.random.default_rng(SEED)
    worst = -np.inf
    for _ in range(100):
        q = int(rng.integers(1, 7))
        L = np.sort(rng.exponential(5.0, q) + 1e-3)[::-1]
        best = np.exp(2 * relaxed_optimal_value(L))
        p = rng.dirichlet(np.ones(q), size=1000) * rng.uniform(0, 1, size=(1000, 1))
        vals = np.prod(1 + L * p, axis=1)
        worst = max(worst, float(np.max(vals / best)) - 1)
    return worst <= 1e-9, f"max relative excess {worst:.2e}"


CRITERIA = [
    ("1 walkthrough determinants", criterion_1),
    ("2 alpha family", criterion_2),
    ("3 scalar example values", criterion_3),
    ("4 round robin", criterion_4),
    ("5 information-form equivalence", criterion_5),
    ("6 ordering chain", criterion_6),
    ("7 eigenvector subset condition", criterion_7),
    ("8 integer-gap condition", criterion_8),
    ("9 block-filling optimality", criterion_9),
    ("10 water-filling dominance", criterion_10),
]


@pytest.mark.parametrize("label, fn", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(label, fn):
    ok, detail = fn()
    record(label, ok, detail)
    assert ok, detail


def test_alpha_closed_forms_cross_at_stated_point():
    # The two closed forms do meet here; greedy itself follows another sequence.
    g, a = alpha_closed_forms(0.347809)
    assert abs(0.5 * np.log(g / a)) < 1e-4


def main():
    failed = 0
    for label, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
