from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptcomp.blockfill import (
    allocation_gain,
    brute_force_blockfill,
    check_theorem4,
    check_theorem5,
    enumerate_allocations,
    greedy_blockfill,
    lemma6_certificate,
    optimal_blockfill,
)
from adaptcomp.scalar_greedy import greedy_run, init_state
from adaptcomp.waterfill import solve

from conftest import scalar_model


class TestAllocations:
    @pytest.mark.parametrize("n, m", [(1, 3), (2, 4), (3, 3), (4, 6)])
    def test_enumeration_count(self, n, m):
        allocs = list(enumerate_allocations(n, m))
        assert len(allocs) == comb(m + n - 1, n - 1)
        assert all(sum(a) == m and min(a) >= 0 for a in allocs)
        assert len(set(allocs)) == len(allocs)

    def test_gamma_is_exact(self):
        a = greedy_blockfill(np.array([3.0, 1.5]), 3)
        assert a.gamma == (Fraction(2, 3), Fraction(1, 3))

    def test_gain_formula(self):
        np.testing.assert_allclose(allocation_gain([3.0, 1.5], (2, 1), 3),
                                   0.5 * np.log(3.0 * 1.5))

    def test_greedy_matches_scalar_greedy(self):
        lam, m = np.array([1.0, 0.5]), 3
        Lam = m * lam
        alloc = greedy_blockfill(Lam, m)
        trace = greedy_run(init_state(scalar_model(lam, m=m)), m)
        assert alloc.counts == (2, 1)
        np.testing.assert_allclose(alloc.gain, trace.net_gain, atol=1e-12)

    def test_zero_horizon(self):
        a = optimal_blockfill(np.array([2.0, 1.0]), 0)
        assert a.counts == (0, 0) and a.gain == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.05, 50.0), min_size=1, max_size=4), st.integers(1, 6))
def test_optimal_matches_enumeration(xs, m):
    L = np.sort(np.asarray(xs))[::-1]
    best = brute_force_blockfill(L, m)
    opt = optimal_blockfill(L, m)
    greedy = greedy_blockfill(L, m)
    assert opt.gain >= best.gain - 1e-12
    np.testing.assert_allclose(greedy.gain, best.gain, atol=1e-12)
    assert lemma6_certificate(opt, L, m)
    assert lemma6_certificate(greedy, L, m)


class TestCertificate:
    def test_rejects_overfilled_column(self):
        L = np.array([4.0, 4.0])
        bad = greedy_blockfill(L, 4)
        lopsided = type(bad)(4, (4, 0), L)
        assert not lemma6_certificate(lopsided, L, 4)

    def test_rejects_block_beyond_active_set(self):
        L = np.array([100.0, 0.01])
        alloc = type(greedy_blockfill(L, 2))(2, (1, 1), L)
        assert not lemma6_certificate(alloc, L, 2)


class TestConditions:
    def test_subset_condition(self):
        Lam = 3 * np.array([1.0, 0.5, 0.1])
        r = solve([1.0, 0.5, 0.1], 3, 1.0).r
        assert check_theorem4(range(r), Lam, 3).holds
        assert check_theorem4(range(3), Lam, 3).holds
        rep = check_theorem4([0, 2], Lam, 3)
        assert not rep.holds and rep.details["r"] == r

    def test_integer_gap_example(self):
        rep = check_theorem5([1.0, 0.5], 1.0, 3)
        assert rep.holds
        assert rep.details == {"n": [1], "r": 2, "m": 3, "m_hat": 1, "remainder": 0}

    def test_integer_gap_wrong_remainder(self):
        rep = check_theorem5([1.0, 0.5], 1.0, 2)
        assert not rep.holds

    def test_non_integer_gap(self):
        rep = check_theorem5([1.0, 0.4], 1.0, 3)
        assert not rep.holds and rep.details["m_hat"] is None

    @pytest.mark.parametrize("lam, s2, m", [
        ([1.0, 0.5], 1.0, 3),
        ([1.0, 0.5], 1.0, 5),
        ([2.0, 1.0, 2.0 / 3.0], 2.0, 9),
        ([1.0, 1.0], 1.0, 4),
        ([0.5], 1.0, 2),
    ])
    def test_condition_implies_relaxed_optimum(self, lam, s2, m):
        rep = check_theorem5(lam, s2, m)
        assert rep.holds
        model = scalar_model(lam, sigma_w2=s2, m=m)
        st_ = init_state(model)
        np.testing.assert_allclose(greedy_run(st_, m).net_gain,
                                   solve(st_.lambdas, m, s2).H_R, atol=1e-9)
