"""Periodic points: enumeration, exact Birkhoff-sum counting and d(psi, w).

Counts are of periodic *points* (solutions of ``sigma^n x = x``), i.e. closed
edge paths with a marked start; divide by the period for orbit counts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, log
from typing import Optional

import numpy as np

from . import _config, _kernels
from ._config import BudgetExceeded
from .sft import Sft
from .thermo import EdgePotential, as_fraction

__all__ = [
    "Cycle",
    "WindowCount",
    "GcdReport",
    "make_cycle",
    "trace_power",
    "enumerate_cycles",
    "closed_walk_array",
    "birkhoff_distribution",
    "count_window",
    "d_psi_w",
    "empirical_growth",
]


@dataclass(frozen=True)
class Cycle:
    """A closed edge path with its Birkhoff sums.

    Attributes
    ----------
    start : int
        Start (and end) state.
    edges : tuple of int
        Edge indices in traversal order.
    sums : dict
        ``name -> Birkhoff sum``; exact ``Fraction`` when the potential is
        rational.  The declared period is ``len(edges)`` and need not be the
        least period.
    """

    start: int
    edges: tuple
    sums: dict = field(default_factory=dict, compare=False)

    @property
    def period(self):
        return len(self.edges)

    def mean(self, name="psi"):
        s = self.sums[name]
        return s / self.period if isinstance(s, float) else Fraction(s) / self.period

    def states(self, sft):
        return [int(sft.src[e]) for e in self.edges]

    def rotated(self, sft, i):
        i %= self.period
        edges = self.edges[i:] + self.edges[:i]
        return Cycle(int(sft.src[edges[0]]), edges, dict(self.sums))

    def repeated(self, m):
        if m < 1:
            raise ValueError("repeat count must be positive")
        return Cycle(self.start, self.edges * m, {k: v * m for k, v in self.sums.items()})

    def concat(self, other):
        if other.start != self.start:
            raise ValueError("cycles must share the start state")
        sums = {k: self.sums[k] + other.sums[k] for k in self.sums if k in other.sums}
        return Cycle(self.start, self.edges + other.edges, sums)

    def __repr__(self):
        sums = ", ".join(f"{k}={v}" for k, v in self.sums.items())
        return f"Cycle(start={self.start}, period={self.period}, {sums})"


def _birkhoff(pot, edges):
    if pot.exact is not None:
        return sum((pot.exact[e] for e in edges), Fraction(0))
    return float(sum(pot.values[list(edges)]))


def make_cycle(sft: Sft, edges, potentials=None) -> Cycle:
    """Validate a closed edge path and attach Birkhoff sums."""
    edges = tuple(int(e) for e in edges)
    if not edges:
        raise ValueError("a cycle needs at least one edge")
    for a, b in zip(edges, edges[1:] + edges[:1]):
        if sft.dst[a] != sft.src[b]:
            raise ValueError(f"edges {a} and {b} are not consecutive")
    sums = {name: _birkhoff(p, edges) for name, p in (potentials or {}).items()}
    return Cycle(int(sft.src[edges[0]]), edges, sums)


def trace_power(sft: Sft, n: int) -> int:
    """``tr(A^n)`` in exact integer arithmetic."""
    A = sft.matrix.astype(object)
    P = np.identity(sft.k, dtype=object)
    base, m = A, int(n)
    while m:
        if m & 1:
            P = P.dot(base)
        base = base.dot(base)
        m >>= 1
    return int(sum(P[i, i] for i in range(sft.k)))


def closed_walk_array(sft: Sft, n: int) -> np.ndarray:
    """All closed edge paths of length ``n`` as an ``(count, n)`` edge array."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n > _config.BUDGET["cycle_len"]:
        raise BudgetExceeded(f"n={n} exceeds cycle_len budget {_config.BUDGET['cycle_len']}")
    total = trace_power(sft, n)
    if total > _config.BUDGET["cycle_points"]:
        raise BudgetExceeded(
            f"tr(A^{n}) = {total} periodic points exceeds cycle_points budget {_config.BUDGET['cycle_points']}"
        )
    ptr, out_edge = sft.csr()
    walks = _kernels.closed_walks(sft.k, ptr, out_edge, sft.dst, n, total)
    if walks.shape[0] != total:  # pragma: no cover - kernel invariant
        raise RuntimeError("closed walk enumeration disagrees with tr(A^n)")
    return walks


def enumerate_cycles(sft: Sft, n: int, potentials=None) -> list:
    """Every periodic point of period ``n`` as a :class:`Cycle`.

    Each closed path is reported once per starting position, so the list has
    ``tr(A^n)`` entries.
    """
    walks = closed_walk_array(sft, n)
    pots = potentials or {}
    sums = {}
    for name, p in pots.items():
        if p.exact is not None:
            sums[name] = None
        else:
            sums[name] = p.values[walks].sum(axis=1) if walks.size else np.zeros(0)
    out = []
    for row, w in enumerate(walks.tolist()):
        vals = {}
        for name, p in pots.items():
            vals[name] = _birkhoff(p, w) if sums[name] is None else float(sums[name][row])
        out.append(Cycle(int(sft.src[w[0]]), tuple(w), vals))
    return out


# ---------------------------------------------------------------------------
# exact Birkhoff-sum distribution


@dataclass(frozen=True)
class _Scaled:
    D: int
    L: int
    expo: np.ndarray


def _scale(psi):
    if psi.exact is None:
        raise ValueError("exact counting requires rational potential")
    D = 1
    for q in psi.exact:
        D = D * q.denominator // gcd(D, q.denominator)
    ints = [int(q * D) for q in psi.exact]
    L = max(0, -min(ints)) if ints else 0
    return _Scaled(D, L, np.array([v + L for v in ints], dtype=np.int64))


def birkhoff_distribution(sft: Sft, psi: EdgePotential, n: int):
    """Exact coefficients of ``tr(M(z)^n)`` for ``M(z)`` with ``z^{psi(e)}`` per edge.

    Returns
    -------
    sums : list of Fraction
        Distinct possible Birkhoff sums ``psi^n`` in increasing order.
    counts : list of int
        Number of periodic points attaining each sum.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n > _config.BUDGET["count_len"]:
        raise BudgetExceeded(f"n={n} exceeds count_len budget {_config.BUDGET['count_len']}")
    sc = _scale(psi)
    width = n * int(sc.expo.max(initial=0)) + 1
    if width > 10**7:
        raise BudgetExceeded(f"polynomial degree {width} too large; reduce denominators or n")
    maxdeg = int(np.bincount(sft.src, minlength=sft.k).max()) if sft.n_edges else 0
    fits = sft.k * maxdeg**n < 2**62
    coeffs = _kernels.poly_trace(sft.k, sft.src, sft.dst, sc.expo, n, exact_int64=fits)
    sums, counts = [], []
    for E, c in enumerate(coeffs.tolist()):
        if c:
            sums.append(Fraction(E - n * sc.L, sc.D))
            counts.append(int(c))
    return sums, counts


@dataclass(frozen=True)
class WindowCount:
    """Number of ``x`` with ``sigma^n x = x`` and ``|psi^n(x)/n - eta| < delta``.

    ``delta == 0`` is read as the exact-sum test ``psi^n(x) = n eta``.
    """

    n: int
    eta: Fraction
    delta: Fraction
    count: int
    total: int


def _in_window(mean, eta, delta):
    if delta == 0:
        return mean == eta
    return abs(mean - eta) < delta


def count_window(sft: Sft, psi: EdgePotential, n: int, eta, delta) -> WindowCount:
    """Exact window count via polynomial transfer matrices (no rounding)."""
    eta = as_fraction(eta)
    delta = as_fraction(delta)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    sums, counts = birkhoff_distribution(sft, psi, n)
    c = sum(cnt for s, cnt in zip(sums, counts) if _in_window(s / n, eta, delta))
    return WindowCount(int(n), eta, delta, c, sum(counts))


@dataclass(frozen=True)
class GcdReport:
    """Truncated ``d(psi, w)``: gcd of the periods ``n <= n_max`` with an exact hit.

    ``d`` is 0 when no witness was found.  The value is an upper-bound
    certificate: later periods can only make the true gcd a divisor of it.
    """

    d: int
    witnesses: tuple
    n_max: int
    truncated: bool = True


def d_psi_w(sft: Sft, psi: EdgePotential, w, n_max: int) -> GcdReport:
    w = as_fraction(w)
    d = 0
    wit = []
    for n in range(1, int(n_max) + 1):
        if count_window(sft, psi, n, w, 0).count > 0:
            wit.append(n)
            d = gcd(d, n)
    return GcdReport(d, tuple(wit), int(n_max))


def empirical_growth(sft: Sft, psi: EdgePotential, eta, schedule) -> list:
    """Rows ``(n, count, log(count)/n)`` for each ``(n, delta_n)`` in ``schedule``."""
    rows = []
    for n, delta in schedule:
        c = count_window(sft, psi, n, eta, delta).count
        rows.append((int(n), c, log(c) / n if c > 0 else float("-inf")))
    return rows
