"""Subshifts of finite type given by 0-1 transition graphs.

A :class:`Sft` is a directed graph on ``k`` dense states with at most one
edge per ordered pair.  The alphabet of the shift is the edge set, so
potentials (see :mod:`sftpress.thermo`) are indexed by edge number.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels

__all__ = [
    "Sft",
    "SccDecomposition",
    "PrimitivityInfo",
    "scc_decompose",
    "primitivity",
    "restrict",
    "power_subshift",
    "spectral_radius",
]


@dataclass(frozen=True, eq=False)
class Sft:
    """Edge shift on a 0-1 transition graph.

    Parameters
    ----------
    k : int
        Number of states.
    edges : sequence of (int, int)
        Directed edges ``(from, to)``; each pair at most once.  Edge ``e`` of
        the shift is ``edges[e]``.
    names : sequence of str, optional
        External state names (side table only).
    origin : tuple, optional
        Provenance per state, e.g. the original state index after
        :func:`restrict` or the original edge path after
        :func:`power_subshift`.
    """

    k: int
    edges: tuple
    names: Optional[tuple] = None
    origin: Optional[tuple] = None
    src: np.ndarray = field(init=False, repr=False)
    dst: np.ndarray = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        k = int(self.k)
        if k < 0:
            raise ValueError("state count must be non-negative")
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        seen = set()
        for a, b in edges:
            if not (0 <= a < k and 0 <= b < k):
                raise ValueError(f"edge ({a}, {b}) has a state outside [0, {k})")
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a}, {b}); multi-edges are not allowed in an Sft")
            seen.add((a, b))
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "edges", edges)
        if self.names is not None:
            names = tuple(str(x) for x in self.names)
            if len(names) != k:
                raise ValueError("names must have one entry per state")
            object.__setattr__(self, "names", names)
        src = np.array([a for a, _ in edges], dtype=np.int64)
        dst = np.array([b for _, b in edges], dtype=np.int64)
        src.setflags(write=False)
        dst.setflags(write=False)
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_matrix(cls, A, names=None):
        """Build from a square 0-1 matrix (row = from, column = to)."""
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("transition matrix must be square")
        if not np.isin(A, (0, 1)).all():
            raise ValueError("transition matrix must be 0-1")
        rows, cols = np.nonzero(A)
        return cls(A.shape[0], list(zip(rows.tolist(), cols.tolist())), names=names)

    @classmethod
    def full_shift(cls, n):
        return cls.from_matrix(np.ones((n, n), dtype=int))

    # -- views ------------------------------------------------------------
    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def matrix(self):
        A = np.zeros((self.k, self.k), dtype=np.int64)
        if self.n_edges:
            A[self.src, self.dst] = 1
        return A

    def edge_index(self, a, b):
        """Index of the edge ``a -> b``; raises ``KeyError`` if absent."""
        for e, pair in enumerate(self.edges):
            if pair == (a, b):
                return e
        raise KeyError((a, b))

    def csr(self):
        """Out-edge adjacency as ``(ptr, out_edge)`` arrays."""
        order = np.argsort(self.src, kind="stable")
        counts = np.bincount(self.src, minlength=self.k) if self.n_edges else np.zeros(self.k, dtype=np.int64)
        ptr = np.zeros(self.k + 1, dtype=np.int64)
        np.cumsum(counts, out=ptr[1:])
        return ptr, order.astype(np.int64)

    @property
    def is_irreducible(self):
        # cached: the object is immutable
        if "irreducible" not in self._cache:
            self._cache["irreducible"] = self.n_edges > 0 and _n_strong(self) == 1
        return self._cache["irreducible"]

    @property
    def is_aperiodic(self):
        if "aperiodic" not in self._cache:
            self._cache["aperiodic"] = self.is_irreducible and primitivity(self, 0).aperiodic
        return self._cache["aperiodic"]

    def __repr__(self):
        return f"Sft(k={self.k}, n_edges={self.n_edges})"


def _n_strong(sft):
    A = csr_matrix((np.ones(sft.n_edges), (sft.src, sft.dst)), shape=(sft.k, sft.k))
    n, _ = connected_components(A, directed=True, connection="strong")
    return n


def spectral_radius(A):
    """Perron root of a non-negative square matrix via shifted power iteration.

    Works for reducible input by taking the maximum over strongly connected
    pieces, so the iteration is only ever run on irreducible blocks.
    """
    A = np.asarray(A, dtype=np.float64)
    k = A.shape[0]
    if k == 0:
        return 0.0
    g = csr_matrix(A > 0)
    n, labels = connected_components(g, directed=True, connection="strong")
    best = 0.0
    for c in range(n):
        idx = np.flatnonzero(labels == c)
        block = A[np.ix_(idx, idx)]
        if not (block > 0).any():
            continue
        scale = block.max()
        rho, _, _, _ = _kernels.power_iter(block / scale, shift=1.0)
        best = max(best, rho * scale)
    return best


@dataclass(frozen=True)
class SccDecomposition:
    """Strongly connected components of an :class:`Sft`.

    Attributes
    ----------
    labels : ndarray
        Component id per state; ids partition the states and are ordered by
        the smallest state they contain.
    n_components : int
        Number of components (transient singletons included).
    recurrent : tuple of bool
        Whether a component carries at least one internal edge.
    dag : tuple of (int, int)
        Edges of the condensation (component ``i`` has an edge into ``j``).
    radii : tuple of float
        Spectral radius per component (0 for transient ones).
    maximal : tuple of int
        Recurrent components attaining the global spectral radius.
    """

    labels: np.ndarray
    n_components: int
    recurrent: tuple
    dag: tuple
    radii: tuple
    maximal: tuple

    @property
    def spectral_radius(self):
        return max(self.radii) if self.radii else 0.0

    def states(self, component):
        return np.flatnonzero(self.labels == component)


def scc_decompose(sft: Sft) -> SccDecomposition:
    """Strongly connected components with per-component spectral radii."""
    k = sft.k
    if k == 0:
        return SccDecomposition(np.zeros(0, dtype=np.int64), 0, (), (), (), ())
    A = sft.matrix
    n, raw = connected_components(csr_matrix(A), directed=True, connection="strong")
    first = {}
    for s, c in enumerate(raw.tolist()):
        first.setdefault(c, s)
    order = sorted(first, key=first.get)
    remap = {c: i for i, c in enumerate(order)}
    labels = np.array([remap[int(c)] for c in raw], dtype=np.int64)
    recurrent, radii = [], []
    for i in range(n):
        idx = np.flatnonzero(labels == i)
        block = A[np.ix_(idx, idx)]
        recurrent.append(bool(block.any()))
        radii.append(spectral_radius(block) if block.any() else 0.0)
    dag = sorted({(int(labels[a]), int(labels[b])) for a, b in sft.edges if labels[a] != labels[b]})
    top = max(radii) if radii else 0.0
    maximal = tuple(
        i for i, r in enumerate(radii) if recurrent[i] and abs(r - top) <= 1e-12 * max(top, 1.0)
    )
    return SccDecomposition(labels, n, tuple(recurrent), tuple(dag), tuple(radii), maximal)


@dataclass(frozen=True)
class PrimitivityInfo:
    """Period and primitivity data of one strongly connected component.

    ``index`` (the primitivity index M) is ``None`` unless ``aperiodic``.
    ``classes`` assigns each state of the component its residue class mod
    ``period`` (keyed by original state index).
    """

    period: int
    index: Optional[int]
    aperiodic: bool
    classes: dict


def primitivity(sft: Sft, component: int = 0) -> PrimitivityInfo:
    """Period ``p`` (gcd of cycle lengths) and, when ``p == 1``, the index M."""
    dec = scc_decompose(sft)
    idx = dec.states(component)
    if idx.size == 0:
        raise ValueError("acyclic component")
    A = sft.matrix[np.ix_(idx, idx)]
    if not A.any():
        raise ValueError("acyclic component")
    m = idx.size
    # BFS levels from local state 0; period = gcd of level(u)+1-level(v)
    level = -np.ones(m, dtype=np.int64)
    level[0] = 0
    queue = [0]
    for u in queue:
        for v in np.flatnonzero(A[u]):
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    p = 0
    for u, v in zip(*np.nonzero(A)):
        p = gcd(p, int(abs(level[u] + 1 - level[v])))
    classes = {int(idx[i]): int(level[i] % p) for i in range(m)}
    if p != 1:
        return PrimitivityInfo(p, None, False, classes)
    # boolean powering; Wielandt's bound (m-1)^2 + 1 caps the search
    B = A.astype(bool)
    P = B.copy()
    M = 1
    cap = (m - 1) ** 2 + 1
    while not P.all():
        P = (P.astype(np.int64) @ B.astype(np.int64)) > 0
        M += 1
        if M > cap:  # pragma: no cover - contradicts Wielandt
            raise RuntimeError("primitivity index exceeds Wielandt bound")
    return PrimitivityInfo(1, M, True, classes)


def restrict(sft: Sft, component: int) -> Sft:
    """Sub-shift on one component, states re-indexed in increasing order.

    The returned shift's ``origin`` holds the original state index per new
    state; ``names`` are carried over when present.
    """
    dec = scc_decompose(sft)
    if not 0 <= component < dec.n_components:
        raise ValueError(f"no component with id {component}")
    idx = dec.states(component)
    pos = {int(s): i for i, s in enumerate(idx)}
    edges = [(pos[a], pos[b]) for a, b in sft.edges if a in pos and b in pos]
    names = tuple(sft.names[int(s)] for s in idx) if sft.names else None
    return Sft(len(idx), edges, names=names, origin=tuple(int(s) for s in idx))


def restrict_edges(sft: Sft, sub: Sft):
    """Indices of ``sub``'s edges in ``sft`` when ``sub = restrict(sft, c)``."""
    lookup = {pair: e for e, pair in enumerate(sft.edges)}
    org = sub.origin
    return np.array([lookup[(org[a], org[b])] for a, b in sub.edges], dtype=np.int64)


def power_subshift(sft: Sft, p: int) -> Sft:
    """Higher-block presentation of the ``p``-th power on one residue class.

    States of the result are the ``p``-step edge paths that start in the
    residue class of state 0; there is an edge from path ``u`` to path ``v``
    when ``u`` ends where ``v`` starts.  The result is again 0-1.  ``origin``
    stores each state's edge path in the input shift, which lets cycles be
    lifted back.  A potential lifts by summing it along each path (the lift
    uses the path of the transition's source state).
    """
    p = int(p)
    if p < 1:
        raise ValueError("p must be positive")
    if not sft.is_irreducible:
        raise ValueError("power_subshift needs a transitive shift; restrict to a component first")
    info = primitivity(sft, 0)
    if info.period % p != 0:
        raise ValueError(f"p={p} does not divide the period {info.period}")
    base = info.classes[0] % p
    starts = sorted(s for s, c in info.classes.items() if c % p == base)
    ptr, out_edge = sft.csr()
    paths = []
    for s in starts:
        stack = [(s, ())]
        while stack:
            u, path = stack.pop()
            if len(path) == p:
                paths.append(path)
                continue
            for e in out_edge[ptr[u]:ptr[u + 1]][::-1]:
                stack.append((int(sft.dst[e]), path + (int(e),)))
    paths.sort()
    by_start = {}
    for i, path in enumerate(paths):
        by_start.setdefault(int(sft.src[path[0]]), []).append(i)
    edges = []
    for i, path in enumerate(paths):
        end = int(sft.dst[path[-1]])
        for j in by_start.get(end, []):
            edges.append((i, j))
    return Sft(len(paths), edges, origin=tuple(paths))


def lift_potential(sft: Sft, power: Sft, values: Sequence):
    """Sum ``values`` (indexed by ``sft`` edges) along each transition's source path."""
    vals = list(values)
    out = []
    for a, _ in power.edges:
        total = vals[power.origin[a][0]]
        for e in power.origin[a][1:]:
            total = total + vals[e]
        out.append(total)
    return out
