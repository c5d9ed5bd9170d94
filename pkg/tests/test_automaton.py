import itertools
from fractions import Fraction

import numpy as np
import pytest

from sftpress import VerificationError
from sftpress.freegroup import (
    DualMetricAutomaton,
    FreeWord,
    GenSet,
    dual_potential,
    geodesic_automaton,
    translation_length,
    verify_dual,
)
from sftpress.orbits import enumerate_cycles
from sftpress.sft import primitivity, scc_decompose, spectral_radius

S = GenSet.parse("a,b")
SSTAR = GenSet.parse("a,b,ab")


def shortlex_words(gens, n):
    """Oracle: the shortlex-least label sequence of every element of S-length n."""
    best = {}
    shorter = set()
    for m in range(n):
        for seq in itertools.product(range(len(gens)), repeat=m):
            g = FreeWord(())
            for i in seq:
                g = g * gens[i]
            shorter.add(g)
    for seq in itertools.product(range(len(gens)), repeat=n):
        g = FreeWord(())
        for i in seq:
            g = g * gens[i]
        if g in shorter:
            continue
        if g not in best or seq < best[g]:
            best[g] = seq
    return set(best.values())


def accepted(auto, n):
    return {seq for seq in itertools.product(range(len(auto.labels)), repeat=n) if auto.accepts(seq)}


# geodesic automata


def test_standard_rank2(auto_s):
    assert auto_s.n_states == 5
    assert auto_s.count_words(8) == [1] + [4 * 3 ** (n - 1) for n in range(1, 9)]


def test_rank1():
    auto = geodesic_automaton(1)
    assert auto.n_states == 3
    assert auto.count_words(6) == [1, 2, 2, 2, 2, 2, 2]


def test_sstar_shape(auto_sstar):
    assert auto_sstar.n_states == 4 and len(auto_sstar.edges) == 18
    assert auto_sstar.has_multi_edges()


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sstar_accepts_exactly_shortlex(auto_sstar, n):
    assert accepted(auto_sstar, n) == shortlex_words(SSTAR, n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_standard_accepts_exactly_shortlex(auto_s, n):
    assert accepted(auto_s, n) == shortlex_words(S, n)


def test_deterministic_and_pruned(auto_sstar):
    keys = [(a, l) for a, _, l in auto_sstar.edges]
    assert len(keys) == len(set(keys))
    seen = set(auto_sstar.initial)
    todo = list(seen)
    while todo:
        u = todo.pop()
        for a, b, _ in auto_sstar.edges:
            if a == u and b not in seen:
                seen.add(b)
                todo.append(b)
    assert seen == set(range(auto_sstar.n_states))


def test_growth_rates(auto_s, auto_sstar):
    for auto, rho in ((auto_s, 3.0), (auto_sstar, 4.0)):
        sft = auto.to_sft()[0]
        dec = scc_decompose(sft)
        assert dec.spectral_radius == pytest.approx(rho, abs=1e-9)


def test_sstar_multi_edge_error(auto_sstar):
    with pytest.raises(ValueError, match="parallel edges"):
        auto_sstar.to_sft(multi="error")


def test_line_graph_preserves_counts(auto_sstar):
    # the line-graph coding has the same closed-walk counts as the multigraph
    sft = auto_sstar.to_sft()[0]
    A = np.zeros((auto_sstar.n_states,) * 2)
    for a, b, _ in auto_sstar.edges:
        A[a, b] += 1
    assert spectral_radius(sft.matrix) == pytest.approx(max(abs(np.linalg.eigvals(A))), abs=1e-9)


def test_rho_zero_fails_loudly():
    with pytest.raises(VerificationError, match="increase rho"):
        geodesic_automaton(2, "a,b,ab", rho=0)


def test_string_gens_and_rho_default(auto_sstar):
    assert auto_sstar.rho == 2 * SSTAR.max_length
    assert auto_sstar.spheres[:4] == [1, 6, 24, 96]


# dual potentials


def test_dual_same_metric_is_one(auto_sstar):
    dual = dual_potential(auto_sstar, None, "a,b,ab", verify_cycles_to=6)
    assert set(dual.psi) == {1} and set(dual.r) == {1}


def test_dual_sstar_extremes(coding_sstar, dual_sstar):
    from sftpress.shrink import extremal_means

    sft, r, psi, _ = coding_sstar
    assert sft.k == 12 and sft.n_edges == 48
    assert primitivity(sft).index == 2
    ext = extremal_means(sft, psi)
    assert (ext.alpha_min, ext.alpha_max) == (1, 2)
    assert dual_sstar.meta["memory"] == 0


def test_dual_s_ab_loop(dual_s, coding_s):
    sft, r, psi, emap = coding_s
    labels = dual_s.edge_labels(emap)
    names = [str(w) for w in dual_s.labels]
    hits = 0
    for c in enumerate_cycles(sft, 2, {"psi": psi}):
        word = "".join(names[labels[e]] for e in c.edges)
        if word == "ab":
            hits += 1
            assert c.sums["psi"] == 1 and c.mean() == Fraction(1, 2)
    assert hits >= 1


def _cycle_contract(dual, gens, other, up_to):
    sft, r, psi, emap = dual.to_sft()
    labels = dual.edge_labels(emap)
    gwords = [FreeWord.parse(str(w)) for w in dual.labels]
    bad = 0
    for n in range(1, up_to + 1):
        for c in enumerate_cycles(sft, n, {"psi": psi, "r": r}):
            g = FreeWord(())
            for e in c.edges:
                g = g * gwords[labels[e]]
            if c.sums["psi"] != translation_length(g, other) or c.sums["r"] != translation_length(g, gens):
                bad += 1
    return bad


def test_dual_contract_independent(dual_sstar, dual_s):
    # oracle: word-level translation lengths, cycle by cycle
    assert _cycle_contract(dual_sstar, SSTAR, S, 6) == 0
    assert _cycle_contract(dual_s, S, SSTAR, 6) == 0


def test_verify_dual_detects_corruption(dual_sstar):
    psi = list(dual_sstar.psi)
    # bump an edge between non-initial states so that it lies on a cycle
    e = next(i for i, (a, b, _) in enumerate(dual_sstar.edges) if a == b and a not in dual_sstar.initial)
    psi[e] = psi[e] + 1
    broken = DualMetricAutomaton(
        dual_sstar.n_states, dual_sstar.initial, dual_sstar.edges, dual_sstar.labels,
        dual_sstar.r, psi, dual_sstar.names, dict(dual_sstar.meta),
    )
    with pytest.raises(VerificationError, match="increase memory"):
        verify_dual(broken, SSTAR, S, up_to=4)


def test_dual_memory_too_small(auto_s):
    # the last letter alone cannot tell where an "aab" factor starts
    with pytest.raises(VerificationError, match="increase memory"):
        dual_potential(auto_s, None, "a,b,aab", memory=1, verify_cycles_to=6)


def test_dual_memory_escalates(auto_s):
    dual = dual_potential(auto_s, None, "a,b,aab", verify_cycles_to=6)
    assert dual.meta["memory"] == 2
    assert _cycle_contract(dual, S, GenSet.parse("a,b,aab"), 6) == 0


def test_dual_reports_memory(dual_s, dual_sstar):
    assert dual_s.meta["memory"] == dual_sstar.meta["memory"] == 0
    assert dual_s.meta["verified_cycles_to"] == 8
