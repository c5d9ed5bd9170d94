import math
from collections import Counter
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sftpress import BudgetExceeded
from sftpress.orbits import (
    birkhoff_distribution,
    count_window,
    d_psi_w,
    empirical_growth,
    enumerate_cycles,
    make_cycle,
    trace_power,
)
from sftpress.sft import Sft
from sftpress.thermo import EdgePotential

from .conftest import random_irreducible, random_rational_potential


# cycles


def test_make_cycle_checks_closure(loop_graph):
    sft, _ = loop_graph
    with pytest.raises(ValueError):
        make_cycle(sft, [1])


def test_cycle_rotation_and_repetition(loop_graph):
    sft, psi = loop_graph
    c = make_cycle(sft, [1, 3, 2], {"psi": psi})
    assert c.period == 3 and c.sums["psi"] == 1
    for i in range(3):
        assert c.rotated(sft, i).sums["psi"] == 1
    d = c.repeated(2)
    assert d.period == 6 and d.sums["psi"] == 2 and d.mean() == Fraction(1, 3)


# enumeration [TRIVIAL] and [DERIVED]


def test_full_shift_period_three(two_shift):
    assert len(enumerate_cycles(two_shift, 3)) == 8


def test_two_cycle_odd_period():
    assert enumerate_cycles(Sft(2, [(0, 1), (1, 0)]), 3) == []


def test_enumerate_s_component(coding_s):
    sft = coding_s[0]
    A = sft.matrix.astype(object)
    P = np.identity(sft.k, dtype=object)
    for _ in range(4):
        P = P.dot(A)
    assert len(enumerate_cycles(sft, 4)) == int(np.trace(P))


def test_enumeration_budget(two_shift):
    with pytest.raises(BudgetExceeded, match="cycle_len"):
        enumerate_cycles(two_shift, 10**3)


# exact counting


@pytest.mark.parametrize("n", range(1, 21))
def test_binomial_counts(two_shift, indicator, n):
    sums, counts = birkhoff_distribution(two_shift, indicator, n)
    assert counts == [comb(n, m) for m in range(n + 1)]
    assert sum(counts) == 2**n


def test_count_252(two_shift, indicator):
    wc = count_window(two_shift, indicator, 10, Fraction(1, 2), Fraction(1, 20))
    assert wc.count == 252 and wc.total == 1024


def test_wide_window_counts_everything(loop_graph):
    sft, psi = loop_graph
    for n in (3, 7):
        assert count_window(sft, psi, n, 0, 5).count == trace_power(sft, n)


def test_irrational_rejected(two_shift):
    with pytest.raises(ValueError, match="exact counting requires rational potential"):
        count_window(two_shift, EdgePotential([0.5, math.pi, 0.0, 1.0]), 4, 0, 1)


def test_count_budget(two_shift, indicator):
    with pytest.raises(BudgetExceeded):
        count_window(two_shift, indicator, 10**4, 0, 1)


@pytest.mark.parametrize("seed", range(12))
def test_enumeration_filter_equals_coefficients(seed):
    rng = np.random.default_rng(300 + seed)
    sft = random_irreducible(rng, k_max=5)
    psi = random_rational_potential(rng, sft, den=3, lo=-3, hi=3)
    for n in range(1, 9):
        if trace_power(sft, n) > 50_000:
            break
        brute = Counter(c.sums["psi"] for c in enumerate_cycles(sft, n, {"psi": psi}))
        sums, counts = birkhoff_distribution(sft, psi, n)
        assert dict(zip(sums, counts)) == dict(brute)
        assert sum(counts) == trace_power(sft, n)


def _window_by_dp(sft, psi, n, eta, delta):
    """Oracle: periodic points by (start, state, sum) dictionary DP."""
    total = 0
    for s0 in range(sft.k):
        layer = {(s0, Fraction(0)): 1}
        for _ in range(n):
            nxt = {}
            for (u, acc), c in layer.items():
                for e, (a, b) in enumerate(sft.edges):
                    if a == u:
                        key = (b, acc + psi.exact[e])
                        nxt[key] = nxt.get(key, 0) + c
            layer = nxt
        total += sum(c for (u, acc), c in layer.items() if u == s0 and abs(acc / n - eta) < delta)
    return total


def test_dual_window_matches_enumeration(coding_sstar):
    sft, _, psi, _ = coding_sstar
    eta = Fraction(3, 2)
    n, delta = 8, Fraction(1, 16)
    brute = sum(1 for c in enumerate_cycles(sft, n, {"psi": psi}) if abs(c.sums["psi"] / n - eta) < delta)
    assert count_window(sft, psi, n, eta, delta).count == brute > 0
    # n = 12 has 2^24 periodic points; compare against the DP oracle instead
    n, delta = 12, Fraction(1, 24)
    wc = count_window(sft, psi, n, eta, delta)
    assert wc.count == _window_by_dp(sft, psi, n, eta, delta) > 0


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.fractions(-3, 3, max_denominator=4), min_size=4, max_size=4),
    st.fractions(-3, 3, max_denominator=4),
    st.integers(1, 10),
    st.fractions(0, 2, max_denominator=8),
    st.fractions(0, 2, max_denominator=8),
)
def test_window_monotone_and_shift_invariant(vals, c, n, d1, d2):
    sft = Sft(2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    psi = EdgePotential(vals)
    lo, hi = sorted((d1, d2))
    eta = Fraction(1, 3)
    assert count_window(sft, psi, n, eta, lo).count <= count_window(sft, psi, n, eta, hi).count
    shifted = EdgePotential([v + c for v in vals])
    assert count_window(sft, shifted, n, eta + c, hi).count == count_window(sft, psi, n, eta, hi).count


# d(psi, w)


def test_d_indicator_half(two_shift, indicator):
    rep = d_psi_w(two_shift, indicator, Fraction(1, 2), 10)
    assert rep.d == 2 and rep.witnesses == (2, 4, 6, 8, 10) and rep.truncated


def test_d_outside_range(two_shift, indicator):
    assert d_psi_w(two_shift, indicator, 2, 8).d == 0


def test_d_single_loop():
    assert d_psi_w(Sft(1, [(0, 0)]), EdgePotential([3]), 3, 5).d == 1


# growth tables


def test_growth_binomial(two_shift, indicator):
    sched = [(n, Fraction(1, 4)) for n in (4, 8, 12, 16, 20, 24)]
    rows = empirical_growth(two_shift, indicator, Fraction(1, 2), sched)
    rates = [r[2] for r in rows]
    for (n, count, _), (_, d) in zip(rows, sched):
        # oracle: binomial sum over |m/n - 1/2| < 1/4
        assert count == sum(comb(n, m) for m in range(n + 1) if abs(Fraction(m, n) - Fraction(1, 2)) < d)
    assert all(b >= a for a, b in zip(rates, rates[1:]))
    assert abs(rates[-1] - math.log(2)) <= 0.15


def test_growth_extremal_loop(loop_graph):
    sft, psi = loop_graph
    rows = empirical_growth(sft, psi, 1, [(n, Fraction(1, 10**6)) for n in (1, 2, 5)])
    assert [r[1] for r in rows] == [1, 1, 1]
