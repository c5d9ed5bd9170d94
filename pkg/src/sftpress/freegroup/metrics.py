"""Word length and translation length for arbitrary finite generating sets.

Both are computed by a min-plus transfer over the reduced standard word.  If
every generator has standard length at most ``c``, a geodesic in the Cayley
graph crosses each tree edge ``(v_i, v_{i+1})`` of the standard geodesic for
the last time at a point ``v_{i+1} a`` with ``|a| <= c - 1`` and ``a`` not
starting with the inverse of the letter just read.  Distances between
consecutive cut points only involve elements of standard length at most
``2c - 1``, which are tabulated once by breadth-first search.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .. import _config, _kernels
from .._config import BudgetExceeded
from .words import (
    FreeWord,
    GenSet,
    code_bits,
    encode,
    max_code_length,
    multiply_codes,
    necklace_array,
    reduce_letters,
)

__all__ = [
    "LocalMetric",
    "local_metric",
    "word_length",
    "word_lengths",
    "translation_length",
    "translation_lengths",
    "sphere_sizes",
    "growth_rate",
    "TauEstimate",
    "tau_empirical",
]

INT_INF = _kernels.INT_INF


def _inv(letters):
    return tuple(x ^ 1 for x in reversed(letters))


def _reduced_words(rank, max_len):
    """All reduced words of length <= max_len, shortest first then lex."""
    out = [()]
    layer = [()]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for x in range(2 * rank):
                if w and w[-1] == x ^ 1:
                    continue
                nxt.append(w + (x,))
        out += nxt
        layer = nxt
    return out


def _ball_distances(gens: GenSet, radius: int) -> dict:
    """S-distance from the identity to every element of standard length <= radius,
    moving only inside that ball."""
    budget = _config.BUDGET["word_nodes"]
    steps = [w.letters for w in gens.words]
    dist = {(): 0}
    queue = deque([()])
    while queue:
        g = queue.popleft()
        d = dist[g] + 1
        for s in steps:
            h = reduce_letters(g + s)
            if len(h) <= radius and h not in dist:
                dist[h] = d
                queue.append(h)
                if len(dist) > budget:
                    raise BudgetExceeded(f"ball of radius {radius} exceeds word_nodes budget {budget}")
    return dist


class LocalMetric:
    """Precomputed cut tables for one generating set.

    Attributes
    ----------
    gens : GenSet
    c : int
        Largest standard length of a generator.
    table : dict
        ``letters -> |h|_S`` for all ``h`` with standard length ``<= 2c - 1``.
    allowed : list of list of tuple
        ``allowed[p]``: cut offsets after reading letter ``p`` (``()`` first).
    W : ndarray, shape (2r, 2r, K, K)
        ``W[p, q, i, j] = |a_i^-1 q a'_j|_S`` with ``a_i`` in ``allowed[p]`` and
        ``a'_j`` in ``allowed[q]``.
    """

    def __init__(self, gens: GenSet):
        self.gens = gens
        self.rank = gens.rank
        self.c = gens.max_length
        self.table = self._build_table()
        base = _reduced_words(self.rank, self.c - 1)
        self.allowed = [[a for a in base if not a or a[0] != p ^ 1] for p in range(2 * self.rank)]
        self.K = len(self.allowed[0])
        R = 2 * self.rank
        W = np.full((R, R, self.K, self.K), INT_INF, dtype=np.int64)
        for p, q in product(range(R), range(R)):
            for i, a in enumerate(self.allowed[p]):
                pre = _inv(a) + (q,)
                for j, b in enumerate(self.allowed[q]):
                    W[p, q, i, j] = self.table[reduce_letters(pre + b)]
        self.W = W

    def _build_table(self):
        need = 2 * self.c - 1
        radius = need
        while True:
            dist = _ball_distances(self.gens, radius)
            table = {w: dist.get(w) for w in _reduced_words(self.rank, need)}
            if any(v is None for v in table.values()):
                radius += self.c
                continue
            # the i-th point of a geodesic of length D to h has standard length
            # <= min(c i, |h| + c (D - i)) <= (|h| + c D) / 2
            bound = max((len(h) + self.c * d) // 2 for h, d in table.items())
            if bound <= radius:
                return table
            radius = bound

    def word_length(self, g: FreeWord) -> int:
        w = g.letters
        if not w:
            return 0
        v = np.array([self.table[reduce_letters((w[0],) + a)] for a in self.allowed[w[0]]], dtype=np.int64)
        for p, q in zip(w, w[1:]):
            v = np.min(v[:, None] + self.W[p, q], axis=0)
        return int(v[0])

    def translation_length(self, g: FreeWord, method="karp") -> Fraction:
        _, core = g.cyclic_reduce()
        if not len(core):
            return Fraction(0)
        if method == "karp":
            num, den = _kernels.translation_batch(np.array([core.letters]), self.W)
            return Fraction(int(num[0]), int(den[0]))
        if method == "increment":
            return _increment(self, core)
        raise ValueError(f"unknown method {method!r}")

    def translation_lengths(self, words: np.ndarray) -> list:
        """Exact translation lengths for a batch of cyclically reduced words of
        equal length (rows of standard letters)."""
        words = np.asarray(words, dtype=np.int64)
        if words.shape[0] == 0:
            return []
        if words.shape[1] == 0:
            return [Fraction(0)] * words.shape[0]
        num, den = _kernels.translation_batch(words, self.W)
        return [Fraction(int(a), int(b)) for a, b in zip(num.tolist(), den.tolist())]


@lru_cache(maxsize=32)
def local_metric(gens: GenSet) -> LocalMetric:
    return LocalMetric(gens)


def _as_word(g):
    return g if isinstance(g, FreeWord) else FreeWord.parse(g)


def _bfs_length(g: FreeWord, gens: GenSet) -> int:
    """Bidirectional breadth-first search; an independent exact oracle."""
    target = g.letters
    if not target:
        return 0
    steps = [w.letters for w in gens.words]
    budget = _config.BUDGET["word_nodes"]
    fwd, bwd = {(): 0}, {target: 0}
    ff, bf = [()], [target]
    while ff and bf:
        if len(fwd) + len(bwd) > budget:
            raise BudgetExceeded(f"word_nodes budget {budget} exhausted by breadth-first search")
        grow_fwd = len(ff) <= len(bf)
        front, seen, other = (ff, fwd, bwd) if grow_fwd else (bf, bwd, fwd)
        nxt = []
        best = None
        for h in front:
            d = seen[h] + 1
            for s in steps:
                x = reduce_letters(h + s)
                if x in other:
                    cand = d + other[x]
                    best = cand if best is None else min(best, cand)
                if x not in seen:
                    seen[x] = d
                    nxt.append(x)
        if best is not None:
            return best
        if grow_fwd:
            ff = nxt
        else:
            bf = nxt
    raise ValueError("element not reachable")  # pragma: no cover


def word_length(g, gens: GenSet, method="dp") -> int:
    """``|g|_S``, the least number of elements of ``gens`` with product ``g``.

    Parameters
    ----------
    g : FreeWord or str
    gens : GenSet
    method : {"dp", "bfs"}
        ``"dp"`` is the cut transfer (linear in ``|g|``); ``"bfs"`` is a
        bidirectional search kept as an oracle.
    """
    g = _as_word(g)
    if method == "dp":
        return local_metric(gens).word_length(g)
    if method == "bfs":
        return _bfs_length(g, gens)
    raise ValueError(f"unknown method {method!r}")


def word_lengths(words, gens: GenSet) -> list:
    lm = local_metric(gens)
    return [lm.word_length(_as_word(g)) for g in words]


def _increment(lm: LocalMetric, core: FreeWord) -> Fraction:
    """``(|g^{2m}| - |g^m|)/m`` for ``m = 1, 2, ...`` until three consecutive
    values agree."""
    cap = int(_config.BUDGET["power"])
    vals = []
    for m in range(1, cap + 1):
        vals.append(Fraction(lm.word_length(core ** (2 * m)) - lm.word_length(core**m), m))
        if len(vals) >= 3 and vals[-1] == vals[-2] == vals[-3]:
            return vals[-1]
    raise BudgetExceeded(f"increment did not stabilise for m <= {cap}; increase power budget")


def translation_length(g, gens: GenSet, method="karp") -> Fraction:
    """``l_S[g] = lim |g^m|_S / m`` as an exact rational.

    ``method="karp"`` takes the minimum cycle mean of the one-period transfer
    matrix.  ``method="increment"`` evaluates ``(|g^{2m}| - |g^m|)/m`` for
    ``m = 1, 2, ...`` until three consecutive values agree; it is slower and
    kept for cross-checks.
    """
    return local_metric(gens).translation_length(_as_word(g), method=method)


def translation_lengths(words: np.ndarray, gens: GenSet) -> list:
    return local_metric(gens).translation_lengths(words)


# ---------------------------------------------------------------------------
# spheres


def _member(sorted_arr, x):
    if sorted_arr.size == 0:
        return np.zeros(x.shape, dtype=bool)
    i = np.minimum(np.searchsorted(sorted_arr, x), sorted_arr.size - 1)
    return sorted_arr[i] == x


def sphere_sizes(gens: GenSet, depth: int) -> list:
    """``#{g : |g|_S = n}`` for ``n = 0..depth`` by breadth-first search on
    integer-coded elements: ``S_{n+1} = expand(S_n) minus (S_n u S_{n-1})``."""
    bits = code_bits(gens.rank)
    if gens.max_length * depth > max_code_length(gens.rank):
        raise BudgetExceeded(f"depth {depth} exceeds the integer code width")
    steps = [w.letters for w in gens.words]
    prev = np.zeros(0, dtype=np.int64)
    cur = np.array([encode((), bits)], dtype=np.int64)
    sizes = [1]
    budget = _config.BUDGET["sphere_nodes"]
    for n in range(depth):
        if cur.size * len(steps) > 2 * budget:
            raise BudgetExceeded(f"sphere {n + 1} would exceed sphere_nodes budget {budget}")
        parts = []
        for s in steps:
            c = multiply_codes(cur, s, bits)
            c = c[~_member(cur, c) & ~_member(prev, c)]
            parts.append(np.unique(c))
        nxt = np.unique(np.concatenate(parts))
        del parts
        prev, cur = cur, nxt
        sizes.append(int(cur.size))
    return sizes


def growth_rate(sizes) -> float:
    """``log`` of the last sphere-size ratio."""
    sizes = list(sizes)
    return float(np.log(sizes[-1] / sizes[-2]))


# ---------------------------------------------------------------------------
# average length ratio over conjugacy classes


@dataclass(frozen=True)
class TauEstimate:
    """Average of ``l_other[g] / l_base[g]`` over classes with ``l_base[g] < T``.

    ``mean`` is exact (``Fraction``) when the other lengths are rational.
    """

    T: float
    count: int
    mean: object

    @property
    def value(self):
        return float(self.mean)


def _nd(lm: LocalMetric, core: np.ndarray):
    return _kernels.translation_batch(core, lm.W)


def tau_empirical(rank: int, base: GenSet, other, T) -> TauEstimate:
    """Empirical ``tau(T)`` over necklaces.

    Classes with ``l_base < T`` all have standard length below ``c T`` where
    ``c`` is the longest generator of ``base``; those necklaces are enumerated
    and filtered.

    Parameters
    ----------
    rank : int
    base : GenSet
    other : GenSet or callable
        A callable receives an ``(N, n)`` array of cyclically reduced words and
        returns ``N`` lengths.
    T : float
    """
    if isinstance(base, str):
        base = GenSet.parse(base, rank=rank)
    if isinstance(other, str):
        other = GenSet.parse(other, rank=rank)
    lb = local_metric(base)
    lo = local_metric(other) if isinstance(other, GenSet) else None
    n_max = int(np.ceil(base.max_length * T)) - 1
    groups = {}
    floats = 0.0
    exact = True
    count = 0
    for n in range(1, n_max + 1):
        words = necklace_array(rank, n).astype(np.int64)
        if words.shape[0] == 0:
            continue
        if base.is_standard:
            bn = np.full(words.shape[0], n, dtype=np.int64)
            bd = np.ones(words.shape[0], dtype=np.int64)
        else:
            bn, bd = _nd(lb, words)
        keep = bn < T * bd
        if not keep.any():
            continue
        words, bn, bd = words[keep], bn[keep], bd[keep]
        count += int(words.shape[0])
        if lo is not None:
            on, od = _nd(lo, words)
        else:
            vals = list(other(words))
            if all(isinstance(v, (int, Fraction)) for v in vals):
                fr = [Fraction(v) for v in vals]
                on = np.array([f.numerator for f in fr], dtype=np.int64)
                od = np.array([f.denominator for f in fr], dtype=np.int64)
            else:
                exact = False
                floats += float(np.sum(np.asarray(vals, dtype=float) * bd / bn))
                continue
        num = on * bd
        den = od * bn
        for d in np.unique(den).tolist():
            groups[d] = groups.get(d, 0) + int(num[den == d].sum())
    if count == 0:
        raise ValueError(f"no classes with base length below {T}")
    total = sum((Fraction(v, d) for d, v in groups.items()), Fraction(0))
    mean = total / count if exact else (float(total) + floats) / count
    return TauEstimate(T, count, mean)
