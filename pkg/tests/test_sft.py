import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sftpress.orbits import enumerate_cycles, trace_power
from sftpress.sft import (
    Sft,
    lift_potential,
    power_subshift,
    primitivity,
    restrict,
    scc_decompose,
    spectral_radius,
)

from .conftest import random_irreducible


def test_full_shift_shape():
    s = Sft.full_shift(3)
    assert s.k == 3 and s.n_edges == 9
    assert np.array_equal(s.matrix, np.ones((3, 3), dtype=s.matrix.dtype))


def test_multi_edges_rejected():
    with pytest.raises(ValueError):
        Sft(1, [(0, 0), (0, 0)])


def test_bad_state_rejected():
    with pytest.raises(ValueError):
        Sft(2, [(0, 2)])


# [TRIVIAL] examples


def test_scc_full_shift():
    sc = scc_decompose(Sft.full_shift(2))
    assert sc.n_components == 1
    assert sc.radii[0] == pytest.approx(2.0, abs=1e-12)


def test_scc_two_loops():
    sc = scc_decompose(Sft(2, [(0, 0), (1, 1)]))
    assert sc.n_components == 2
    assert sc.radii == pytest.approx((1.0, 1.0))
    assert set(sc.maximal) == {0, 1}


def test_scc_transient_state():
    # 0 -> 1 with a loop at 1: state 0 is transient
    sc = scc_decompose(Sft(2, [(0, 1), (1, 1)]))
    rec = [c for c in range(sc.n_components) if sc.recurrent[c]]
    assert len(rec) == 1
    assert sc.states(rec[0]).tolist() == [1]


def test_scc_empty():
    sc = scc_decompose(Sft(0, []))
    assert sc.n_components == 0


def test_primitivity_loop():
    info = primitivity(Sft(1, [(0, 0)]))
    assert (info.period, info.index, info.aperiodic) == (1, 1, True)


def test_primitivity_two_cycle():
    info = primitivity(Sft(2, [(0, 1), (1, 0)]))
    assert info.period == 2 and not info.aperiodic
    assert info.classes[0] != info.classes[1]


def test_primitivity_acyclic():
    with pytest.raises(ValueError, match="acyclic component"):
        primitivity(Sft(2, [(0, 1)]))


def test_restrict_identity():
    s = Sft.full_shift(2)
    r = restrict(s, 0)
    assert r.k == 2 and sorted(r.edges) == sorted(s.edges)


def test_restrict_first_loop():
    r = restrict(Sft(2, [(0, 0), (1, 1)]), 0)
    assert r.k == 1 and r.n_edges == 1


def test_power_subshift_two_cycle():
    p = power_subshift(Sft(2, [(0, 1), (1, 0)]), 2)
    assert p.k == 1 and p.edges == ((0, 0),)


def test_power_subshift_four_cycle():
    p = power_subshift(Sft(4, [(0, 1), (1, 2), (2, 3), (3, 0)]), 2)
    assert p.k == 2 and sorted(p.edges) == [(0, 1), (1, 0)]


def test_power_subshift_bad_p():
    with pytest.raises(ValueError):
        power_subshift(Sft(2, [(0, 1), (1, 0)]), 3)


def test_lift_potential_sums_paths():
    s = Sft(2, [(0, 1), (1, 0)])
    p = power_subshift(s, 2)
    assert lift_potential(s, p, [3, 5]) == [8]


# [DERIVED] against independent oracles


@pytest.mark.parametrize("seed", range(10))
def test_trace_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    s = random_irreducible(rng, k_max=6)
    A = s.matrix.astype(object)
    P = np.identity(s.k, dtype=object)
    for n in range(1, 9):
        P = P.dot(A)
        assert trace_power(s, n) == int(np.trace(P))
        if n <= 6:
            assert len(enumerate_cycles(s, n)) == int(np.trace(P))


def _brute_primitivity_index(A):
    k = A.shape[0]
    B = (A > 0).astype(np.int64)
    P = B.copy()
    for m in range(1, (k - 1) ** 2 + 2):
        if (P > 0).all():
            return m
        P = ((P @ B) > 0).astype(np.int64)
    return None


def _cycle_gcd(A):
    # gcd of closed-walk lengths up to 2k
    from math import gcd

    k = A.shape[0]
    g = 0
    P = np.identity(k, dtype=np.int64)
    for n in range(1, 2 * k + 1):
        P = ((P @ A) > 0).astype(np.int64)
        if np.trace(P) > 0:
            g = gcd(g, n)
    return g


@pytest.mark.parametrize("seed", range(15))
def test_primitivity_against_brute_force(seed):
    rng = np.random.default_rng(100 + seed)
    s = random_irreducible(rng, k_max=6, density=0.25)
    A = s.matrix.astype(np.int64)
    info = primitivity(s)
    assert info.period == _cycle_gcd(A)
    assert info.aperiodic == (info.period == 1)
    if info.aperiodic:
        assert info.index == _brute_primitivity_index(A)


@pytest.mark.parametrize("seed", range(10))
def test_spectral_radius_matches_eigvals(seed):
    rng = np.random.default_rng(200 + seed)
    s = random_irreducible(rng)
    ref = max(abs(np.linalg.eigvals(s.matrix.astype(float))))
    assert spectral_radius(s.matrix) == pytest.approx(ref, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.data())
def test_restrict_then_decompose_is_single(k, data):
    cells = data.draw(st.lists(st.booleans(), min_size=k * k, max_size=k * k))
    edges = [(i, j) for (i, j), on in zip(itertools.product(range(k), repeat=2), cells) if on]
    s = Sft(k, edges)
    sc = scc_decompose(s)
    for c in range(sc.n_components):
        if not sc.recurrent[c]:
            continue
        sub = restrict(s, c)
        sc2 = scc_decompose(sub)
        assert sc2.n_components == 1
        assert sub.k == len(sc.states(c))
        assert sc2.radii[0] == pytest.approx(sc.radii[c], rel=1e-9)
