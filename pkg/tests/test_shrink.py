import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sftpress.orbits import count_window, make_cycle
from sftpress.sft import Sft, primitivity
from sftpress.shrink import (
    QuadraticSurd,
    bound_holds,
    bridged_orbits,
    extremal_means,
    hurwitz_approx,
    rational_orbit,
    shrink_constant,
    shrink_orbits,
    simple_cycles,
)
from sftpress.thermo import EdgePotential

PHI = QuadraticSurd.golden()
INV_PHI = QuadraticSurd(Fraction(-1, 2), Fraction(1, 2), 5)  # (sqrt 5 - 1)/2


def fib(n):
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


# quadratic surds


def test_surd_float_and_floor():
    assert float(PHI) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)
    assert PHI.floor() == 1 and (-PHI).floor() == -2


def test_surd_parse():
    assert float(QuadraticSurd.parse("(1+sqrt(5))/2")) == pytest.approx(float(PHI))
    assert float(QuadraticSurd.parse("phi")) == pytest.approx(float(PHI))
    with pytest.raises(ValueError):
        QuadraticSurd.parse("1.618")


def test_surd_perfect_square_collapses():
    assert QuadraticSurd(1, 2, 9).is_rational


@settings(max_examples=60, deadline=None)
@given(
    st.fractions(-5, 5, max_denominator=7),
    st.fractions(-5, 5, max_denominator=7),
    st.fractions(-5, 5, max_denominator=7),
    st.fractions(-5, 5, max_denominator=7),
    st.sampled_from([2, 3, 5, 7]),
)
def test_surd_arithmetic_matches_float(p1, q1, p2, q2, c):
    x, y = QuadraticSurd(p1, q1, c), QuadraticSurd(p2, q2, c)
    fx, fy = float(x), float(y)
    assert float(x + y) == pytest.approx(fx + fy, abs=1e-9)
    assert float(x * y) == pytest.approx(fx * fy, abs=1e-9)
    assert (x - y).sign() == (fx > fy) - (fx < fy)
    if fy != 0:
        assert float(x / y) == pytest.approx(fx / fy, rel=1e-9, abs=1e-9)
    assert x.floor() == math.floor(fx) or abs(fx - round(fx)) < 1e-12


# Hurwitz step


def test_hurwitz_exact_half():
    assert hurwitz_approx(0, 1, Fraction(1, 2), 1) == [(2, 1, 1)]


def test_hurwitz_golden_fibonacci():
    triples = hurwitz_approx(0, 1, INV_PHI, 8)
    ns = [n for n, _, _ in triples]
    assert ns == sorted(set(ns))
    assert all(n in {fib(i) for i in range(30)} for n in ns)
    for n, a, b in triples:
        assert a + b == n
        # |b/n - eta| sqrt 5 n^2 <= 1, exactly
        assert bound_holds(Fraction(b, n), INV_PHI, 1, n)


def test_hurwitz_four_thirds_exhaustive():
    s, t, eta = Fraction(1), Fraction(2), Fraction(4, 3)
    triples = hurwitz_approx(s, t, eta, 4)
    for n, a, b in triples:
        assert a + b == n and a >= 0 and b >= 0
        assert 5 * ((a * s + b * t) / n - eta) ** 2 * n**4 <= (t - s) ** 2
    # oracle: every qualifying n up to 6 by exhaustion, all hits are in the list
    hits = [n for n in range(1, 7) for a in range(n + 1)
            if 5 * ((a * s + (n - a) * t) / n - eta) ** 2 * n**4 <= 1]
    assert {n for n, _, _ in triples if n <= 6} <= set(hits)
    assert 3 in {n for n, _, _ in triples}


def test_hurwitz_outside_interval():
    with pytest.raises(ValueError):
        hurwitz_approx(0, 1, Fraction(3, 2), 3)


@settings(max_examples=50, deadline=None)
@given(st.fractions(0, 1, max_denominator=50), st.integers(1, 6))
def test_hurwitz_rational_property(eta, count):
    assume(0 < eta < 1)
    out = hurwitz_approx(0, 1, eta, count)
    assert len(out) == count
    assert all(n2 > n1 for (n1, _, _), (n2, _, _) in zip(out, out[1:]))
    for n, a, b in out:
        assert a + b == n
        assert 5 * (Fraction(b, n) - eta) ** 2 * n**4 <= 1


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.sampled_from([2, 3, 6, 7, 10, 11]))
def test_hurwitz_surd_property(a, c):
    # fractional part of sqrt(c)/a style irrationals
    x = QuadraticSurd(0, Fraction(1, a), c)
    eta = x - x.floor()
    assume(not eta.is_rational)
    for n, na, nb in hurwitz_approx(0, 1, eta, 5):
        assert na + nb == n and bound_holds(Fraction(nb, n), eta, 1, n)


# extremal means


def test_extremes_two_loops(loop_graph):
    sft, psi = loop_graph
    ext = extremal_means(sft, psi)
    assert (ext.alpha_min, ext.alpha_max) == (0, 1)
    assert ext.witness_min.edges == (0,) and ext.witness_max.edges == (3,)


def test_extremes_constant(two_shift):
    ext = extremal_means(two_shift, EdgePotential(["2/3"] * 4))
    assert ext.alpha_min == ext.alpha_max == Fraction(2, 3)


@pytest.mark.parametrize("seed", range(8))
def test_extremes_against_simple_cycles(seed):
    import numpy as np

    from .conftest import random_irreducible, random_rational_potential

    rng = np.random.default_rng(400 + seed)
    sft = random_irreducible(rng, k_max=6)
    psi = random_rational_potential(rng, sft)
    ext = extremal_means(sft, psi)
    means = [sum(psi.exact[e] for e in c) / len(c) for c in simple_cycles(sft)]
    assert ext.alpha_min == min(means) and ext.alpha_max == max(means)
    for w, alpha in ((ext.witness_min, ext.alpha_min), (ext.witness_max, ext.alpha_max)):
        states = w.states(sft)
        assert len(set(states)) == len(states)
        assert w.mean() == alpha
    assert ext.block_min.period == ext.block_max.period == ext.l <= sft.k**2


# bridged orbits


def test_bridged_loop_graph(loop_graph):
    sft, psi = loop_graph
    pair = bridged_orbits(sft, psi)
    assert pair.M == 1
    assert pair.x.period == pair.y.period <= 2 * 1 * (1 + 4)
    assert 0 < pair.x.mean() < pair.y.mean() < 1


def test_bridged_constant_error(two_shift):
    with pytest.raises(ValueError, match="cohomologous to constant"):
        bridged_orbits(two_shift, EdgePotential([1, 1, 1, 1]))


def test_bridged_needs_mixing():
    s = Sft(4, [(0, 1), (1, 2), (2, 3), (3, 0), (1, 0), (3, 2)])
    with pytest.raises(ValueError, match="power_subshift"):
        bridged_orbits(s, EdgePotential([0, 0, 1, 1, 0, 2]))


def test_bridged_dual(coding_sstar):
    sft, _, psi, _ = coding_sstar
    pair = bridged_orbits(sft, psi)
    ext = pair.extremes
    assert (ext.alpha_min, ext.alpha_max) == (1, 2)
    assert pair.x.period == pair.y.period <= 2 * pair.M * (1 + sft.k**2)
    assert ext.alpha_min < pair.x.mean() < pair.y.mean() < ext.alpha_max


# certificates


def test_constant_formula():
    assert shrink_constant(2, 6, 1) == 4 * 4 * 37**2
    assert shrink_constant(1, 2, Fraction(1, 2)) == 50


def test_shrink_exact_half(loop_graph):
    sft, psi = loop_graph
    certs = shrink_orbits(sft, psi, Fraction(1, 2), 3)
    assert all(c.satisfied for c in certs)
    assert any(c.mean == Fraction(1, 2) and c.length % 2 == 0 for c in certs)


def test_shrink_inverse_sqrt2(loop_graph):
    sft, psi = loop_graph
    eta = QuadraticSurd(0, Fraction(1, 2), 2)
    certs = shrink_orbits(sft, psi, eta, 5)
    assert len(certs) == 5
    for c in certs:
        assert c.satisfied and c.check()
        # self-verifying: re-sum the potential along the stored cycle
        again = make_cycle(sft, c.cycle.edges, {"psi": psi})
        assert again.mean() == c.mean
        assert c.error <= c.bound * (1 + 1e-12)


def test_shrink_concatenation_law(loop_graph):
    sft, psi = loop_graph
    x = make_cycle(sft, [0], {"psi": psi}).repeated(3)  # sum 0, period 3
    y = make_cycle(sft, [1, 3, 2], {"psi": psi})  # sum 1, period 3
    for n1, n2 in ((1, 1), (3, 2), (0, 4), (5, 0)):
        parts = [x.repeated(n1)] if n1 else []
        parts += [y.repeated(n2)] if n2 else []
        z = parts[0]
        for p in parts[1:]:
            z = z.concat(p)
        z = make_cycle(sft, z.edges, {"psi": psi})
        assert z.mean() == Fraction(n1 * 0 + n2 * 1, (n1 + n2) * 3)


def test_shrink_endpoint_error(loop_graph):
    sft, psi = loop_graph
    with pytest.raises(ValueError):
        shrink_orbits(sft, psi, 1, 2)


def test_shrink_non_mixing_via_power():
    s = Sft(4, [(0, 1), (1, 2), (2, 3), (3, 0), (1, 0), (3, 2)])
    assert primitivity(s).period == 2
    psi = EdgePotential([0, 0, 1, 1, 0, 2])
    certs = shrink_orbits(s, psi, Fraction(1, 2), 3)
    for c in certs:
        assert c.satisfied
        assert make_cycle(s, c.cycle.edges, {"psi": psi}).mean() == c.mean


def test_lattice_obstruction_finite_range(loop_graph):
    # integer psi: means are m/n, and the golden conjugate is badly approximable
    sft, psi = loop_graph
    eta = Fraction(int((math.sqrt(5) - 1) / 2 * 10**15), 10**15)
    eps = Fraction(1, 3)
    for n in range(1, 31):
        assert count_window(sft, psi, n, eta, eps / n**2).count == 0
    # a wider constant lets Fibonacci periods through
    assert any(count_window(sft, psi, n, eta, Fraction(1, n**2)).count for n in range(1, 31))


# rational realisation


def test_rational_half(two_shift, indicator):
    c = rational_orbit(two_shift, indicator, 1, 2)
    assert c.period == 2 and c.mean() == Fraction(1, 2)
    assert set(c.states(two_shift)) == {0, 1}


def test_rational_endpoint_is_witness(loop_graph):
    sft, psi = loop_graph
    assert rational_orbit(sft, psi, 1, 1) == extremal_means(sft, psi).witness_max


def test_rational_outside(two_shift, indicator):
    with pytest.raises(ValueError, match=r"outside \[0, 1\]"):
        rational_orbit(two_shift, indicator, 3, 2)


@settings(max_examples=40, deadline=None)
@given(st.fractions(0, 1, max_denominator=12))
def test_rational_property(w):
    sft = Sft(2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    psi = EdgePotential([0, 0, 0, 1])
    c = rational_orbit(sft, psi, w.numerator, w.denominator)
    assert make_cycle(sft, c.edges, {"psi": psi}).mean() == w
