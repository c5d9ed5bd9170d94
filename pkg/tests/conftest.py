import math

import numpy as np
import pytest

from sftpress import _config
from sftpress.freegroup import dual_potential, geodesic_automaton
from sftpress.sft import Sft
from sftpress.thermo import EdgePotential


def closed_form(t):
    """exp of the F2 curve: 1/2 e^-t (e^-t + sqrt(e^-t (e^-t + 8)) + 4), logged."""
    u = math.exp(-t)
    return math.log(0.5 * u * (u + math.sqrt(u * (u + 8)) + 4))


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    saved = _config.USE_NUMBA
    _config.USE_NUMBA = request.param == "numba"
    yield request.param
    _config.USE_NUMBA = saved


@pytest.fixture
def two_shift():
    return Sft.full_shift(2)


@pytest.fixture
def indicator(two_shift):
    # psi = indicator of target state 1
    return EdgePotential([1 if b == 1 else 0 for _, b in two_shift.edges])


@pytest.fixture
def loop_graph():
    """Two states, both loops and both cross edges; psi = 1 on the loop at 1."""
    sft = Sft(2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    return sft, EdgePotential([0, 0, 0, 1])


@pytest.fixture(scope="session")
def auto_s():
    return geodesic_automaton(2, "a,b")


@pytest.fixture(scope="session")
def auto_sstar():
    return geodesic_automaton(2, "a,b,ab")


@pytest.fixture(scope="session")
def dual_sstar(auto_sstar):
    """S*-coding with psi = standard word length."""
    return dual_potential(auto_sstar, None, "a,b", verify_cycles_to=8)


@pytest.fixture(scope="session")
def dual_s(auto_s):
    """S-coding with psi = S*-word length."""
    return dual_potential(auto_s, None, "a,b,ab", verify_cycles_to=8)


@pytest.fixture(scope="session")
def coding_sstar(dual_sstar):
    return dual_sstar.maximal_component()


@pytest.fixture(scope="session")
def coding_s(dual_s):
    return dual_s.maximal_component()


def random_irreducible(rng, k_max=8, density=0.4):
    """Random irreducible 0-1 graph: a Hamiltonian cycle plus random edges."""
    k = int(rng.integers(1, k_max + 1))
    A = (rng.random((k, k)) < density).astype(int)
    perm = rng.permutation(k)
    for i in range(k):
        A[perm[i], perm[(i + 1) % k]] = 1
    return Sft.from_matrix(A)


def random_rational_potential(rng, sft, den=6, lo=-6, hi=6):
    from fractions import Fraction

    return EdgePotential(
        [Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, den + 1))) for _ in range(sft.n_edges)]
    )


__all__ = ["closed_form", "random_irreducible", "random_rational_potential", "np"]
