"""Shortlex geodesic automata and dual metric potentials.

The automaton for a generating set ``S`` reads shortlex-least geodesic words.
Its states are classes of group elements keyed by two invariants computed
from the shortlex tree: the cone set within radius ``rho`` (which ``h`` in the
``rho``-ball satisfy ``|gh| = |g| + |h|``) and the shape of the shortlex
subtree below ``g`` to depth ``rho``.  The result is checked against sphere
sizes from an independent breadth-first search.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .. import _config, _kernels
from .._config import BudgetExceeded, VerificationError
from ..orbits import closed_walk_array
from ..sft import Sft, restrict, scc_decompose
from ..thermo import EdgePotential, Roof
from .metrics import local_metric, sphere_sizes
from .words import (
    FreeWord,
    GenSet,
    code_bits,
    codes_to_arrays,
    cyclic_core_arrays,
    decode,
    max_code_length,
    multiply_codes,
    multiply_codes_var,
)

__all__ = [
    "DualMetricAutomaton",
    "GeodesicAutomaton",
    "geodesic_automaton",
    "dual_potential",
    "verify_dual",
]


@dataclass
class DualMetricAutomaton:
    """A finite labelled graph with a roof ``r`` and a potential ``psi`` per edge.

    Attributes
    ----------
    n_states : int
    initial : list of int
    edges : list of (int, int, int)
        ``(source, target, label)`` with ``label`` an index into ``labels``.
    labels : list of str
        Generator words.
    r, psi : list of Fraction
        Per-edge values.
    names : list of str
        State names (representative words).
    meta : dict
        Provenance such as the generating sets and refinement memory.
    """

    n_states: int
    initial: list
    edges: list
    labels: list
    r: list
    psi: list
    names: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def has_multi_edges(self):
        pairs = [(a, b) for a, b, _ in self.edges]
        return len(set(pairs)) != len(pairs)

    def to_sft(self, multi="line"):
        """The edge shift with its potentials.

        Parameters
        ----------
        multi : {"line", "error"}
            Parallel edges are recoded on the line graph (one state per
            automaton edge, potentials read on the source edge) or rejected.

        Returns
        -------
        sft : Sft
        r : Roof
        psi : EdgePotential
        edge_map : ndarray
            Automaton edge index of every shift edge.
        """
        if not self.has_multi_edges():
            sft = Sft(self.n_states, [(a, b) for a, b, _ in self.edges], names=list(self.names) or None)
            emap = np.arange(len(self.edges))
        elif multi == "line":
            out = {}
            for i, (a, _, _) in enumerate(self.edges):
                out.setdefault(a, []).append(i)
            pairs = [(i, j) for i, (_, b, _) in enumerate(self.edges) for j in out.get(b, [])]
            names = [f"{self.names[a] if self.names else a}>{self.labels[l]}" for a, _, l in self.edges]
            sft = Sft(len(self.edges), pairs, names=names)
            emap = np.array([i for i, _ in pairs], dtype=np.int64)
        elif multi == "error":
            raise ValueError("automaton has parallel edges; use multi='line'")
        else:
            raise ValueError(f"unknown multi-edge mode {multi!r}")
        r = Roof([self.r[e] for e in emap.tolist()])
        psi = EdgePotential([self.psi[e] for e in emap.tolist()])
        return sft, r, psi, emap

    def edge_labels(self, emap):
        return np.array([self.edges[e][2] for e in np.asarray(emap).tolist()], dtype=np.int64)

    def maximal_component(self, multi="line"):
        """Restriction to the recurrent component of largest spectral radius.

        Returns ``(sft, r, psi, emap)`` like :meth:`to_sft`.  When several
        components tie, the first is used and a warning is issued.
        """
        sft, r, psi, emap = self.to_sft(multi)
        dec = scc_decompose(sft)
        if len(dec.maximal) > 1:
            warnings.warn(f"{len(dec.maximal)} maximal components; using the first", stacklevel=2)
        comp = dec.maximal[0]
        sub = restrict(sft, comp)
        keep = [e for e, (a, b) in enumerate(sft.edges) if dec.labels[a] == comp and dec.labels[b] == comp]
        return sub, r.restricted(keep), psi.restricted(keep), emap[keep]


@dataclass
class GeodesicAutomaton(DualMetricAutomaton):
    """Shortlex geodesic automaton (``r = 1``, ``psi = 0``).

    Extra attributes: ``gens``, ``rho`` and the verified ``spheres``.
    """

    gens: Optional[GenSet] = None
    rho: int = 0
    spheres: list = field(default_factory=list)
    reps: list = field(default_factory=list)

    def count_words(self, depth):
        """Accepted words of each length ``0..depth``."""
        A = np.zeros((self.n_states, self.n_states), dtype=object)
        for a, b, _ in self.edges:
            A[a, b] += 1
        v = np.zeros(self.n_states, dtype=object)
        v[self.initial[0]] = 1
        out = [1]
        for _ in range(depth):
            v = v.dot(A)
            out.append(int(v.sum()))
        return out

    def accepts(self, labels):
        trans = {(a, l): b for a, b, l in self.edges}
        q = self.initial[0]
        for l in labels:
            q = trans.get((q, l))
            if q is None:
                return False
        return True


# ---------------------------------------------------------------------------
# shortlex tree on integer codes


class _Tree:
    def __init__(self, gens: GenSet, max_level: int):
        self.gens = gens
        self.bits = code_bits(gens.rank)
        self.steps = [w.letters for w in gens.words]
        self.G = len(self.steps)
        self.max_level = max_level
        self.codes = [np.array([1], dtype=np.int64)]
        self.parent = [np.zeros(1, dtype=np.int64)]
        self.gen = [np.full(1, -1, dtype=np.int64)]
        self.sorted = [(self.codes[0], np.zeros(1, dtype=np.int64))]
        self._shape = {}
        self._shape_ids = {(): 0}

    def level(self, m):
        while len(self.codes) <= m:
            self._grow()
        return self.codes[m]

    def _grow(self):
        n = len(self.codes) - 1
        if n + 1 > self.max_level:
            raise BudgetExceeded(f"shortlex tree depth {n + 1} exceeds automaton_levels budget {self.max_level}")
        if self.gens.max_length * (n + 1) > max_code_length(self.gens.rank):
            raise BudgetExceeded("shortlex tree exceeds the integer code width")
        cur = self.codes[n]
        if cur.size * self.G > 4 * _config.BUDGET["word_nodes"]:
            raise BudgetExceeded(f"shortlex level {n + 1} exceeds word_nodes budget")
        cand = np.stack([multiply_codes(cur, s, self.bits) for s in self.steps], axis=1).ravel()
        excl = np.isin(cand, cur)
        if n >= 1:
            excl |= np.isin(cand, self.codes[n - 1])
        idx = np.nonzero(~excl)[0]
        _, first = np.unique(cand[idx], return_index=True)
        pos = np.sort(idx[first])
        codes = cand[pos]
        self.codes.append(codes)
        self.parent.append(pos // self.G)
        self.gen.append(pos % self.G)
        order = np.argsort(codes, kind="stable")
        self.sorted.append((codes[order], order))

    def contains(self, m, codes):
        self.level(m)
        srt, _ = self.sorted[m]
        i = np.searchsorted(srt, codes)
        i = np.minimum(i, srt.size - 1)
        return srt[i] == codes

    def children(self, m):
        """For level ``m``: start offsets into level ``m+1`` (CSR by parent)."""
        self.level(m + 1)
        return np.searchsorted(self.parent[m + 1], np.arange(self.codes[m].size + 1))

    def shape(self, d, m):
        """Interned ids of depth-``d`` subtree shapes at level ``m``."""
        key = (d, m)
        if key in self._shape:
            return self._shape[key]
        n = self.level(m).size
        if d == 0:
            out = np.zeros(n, dtype=np.int64)
        else:
            below = self.shape(d - 1, m + 1)
            ptr = self.children(m)
            gen = self.gen[m + 1]
            out = np.empty(n, dtype=np.int64)
            for i in range(n):
                sig = tuple(zip(gen[ptr[i]:ptr[i + 1]].tolist(), below[ptr[i]:ptr[i + 1]].tolist()))
                out[i] = self._shape_ids.setdefault(sig, len(self._shape_ids))
        self._shape[key] = out
        return out

    def ball(self, rho):
        """Codes and lengths of all elements with ``|h| <= rho``."""
        codes, lens = [], []
        for j in range(rho + 1):
            c = self.level(j)
            codes.append(c)
            lens.append(np.full(c.size, j, dtype=np.int64))
        return np.concatenate(codes), np.concatenate(lens)

    def cones(self, m, rho):
        cur = self.level(m)
        hc, hl = self.ball(rho)
        mask = np.zeros((cur.size, hc.size), dtype=bool)
        for t, (c, j) in enumerate(zip(hc.tolist(), hl.tolist())):
            letters = decode(c, self.bits).letters
            mask[:, t] = self.contains(m + j, multiply_codes(cur, letters, self.bits))
        return np.packbits(mask, axis=1)


def _build(gens: GenSet, rho: int, verify_depth: int) -> GeodesicAutomaton:
    cap = _config.BUDGET["automaton_levels"]
    tree = _Tree(gens, cap)
    state_of = {}
    reps = []
    trans = {}

    def keys(m):
        cones = tree.cones(m, rho)
        shapes = tree.shape(rho, m)
        out = np.empty(cones.shape[0], dtype=np.int64)
        for i in range(cones.shape[0]):
            k = (cones[i].tobytes(), int(shapes[i]))
            if k not in state_of:
                state_of[k] = len(state_of)
                reps.append((m, i))
            out[i] = state_of[k]
        return out

    cur = keys(0)
    m = 0
    while True:
        nxt = keys(m + 1)
        ptr = tree.children(m)
        gen = tree.gen[m + 1]
        for i, q in enumerate(cur.tolist()):
            row = [-1] * tree.G
            for c in range(ptr[i], ptr[i + 1]):
                row[int(gen[c])] = int(nxt[c])
            row = tuple(row)
            if trans.setdefault(q, row) != row:
                raise VerificationError("cone radius too small; increase rho")
        m += 1
        cur = nxt
        if all(q in trans for q in range(len(state_of))):
            # one more level confirms the transitions of the last new states
            if m >= 2 and all(q in trans for q in set(cur.tolist())):
                break
    edges = [(q, b, s) for q in range(len(state_of)) for s, b in enumerate(trans[q]) if b >= 0]
    names = []
    for lvl, i in reps:
        word = []
        while lvl > 0:
            word.append(int(tree.gen[lvl][i]))
            i = int(tree.parent[lvl][i])
            lvl -= 1
        names.append(".".join(str(gens[s]) for s in reversed(word)) or "1")
    auto = GeodesicAutomaton(
        n_states=len(state_of),
        initial=[0],
        edges=edges,
        labels=[str(w) for w in gens.words],
        r=[Fraction(1)] * len(edges),
        psi=[Fraction(0)] * len(edges),
        names=names,
        meta={"gens": [str(w) for w in gens.words], "rank": gens.rank, "rho": rho},
        gens=gens,
        rho=rho,
    )
    depth = min(verify_depth, max_code_length(gens.rank) // gens.max_length)
    want = sphere_sizes(gens, depth)
    got = auto.count_words(depth)
    if want != got:
        raise VerificationError(f"cone radius too small; increase rho (spheres {got} != {want})")
    auto.spheres = want
    return auto


def geodesic_automaton(rank, gens=None, rho: Optional[int] = None, verify_depth: int = 8) -> GeodesicAutomaton:
    """Shortlex geodesic automaton for ``gens``.

    Parameters
    ----------
    rank : int
    gens : GenSet or str, optional
        ``"a,b,ab"`` style text is accepted; the standard set by default.
    rho : int, optional
        Cone radius, by default twice the longest generator.
    verify_depth : int
        Sphere sizes up to this length are compared with breadth-first search.

    Raises
    ------
    VerificationError
        "cone radius too small; increase rho" when the result does not verify.
    """
    if gens is None:
        gens = GenSet.standard(rank)
    elif isinstance(gens, str):
        gens = GenSet.parse(gens, rank=rank)
    if gens.rank != rank:
        raise ValueError(f"generating set has rank {gens.rank}, expected {rank}")
    if rho is None:
        rho = 2 * gens.max_length
    return _build(gens, int(rho), int(verify_depth))


# ---------------------------------------------------------------------------
# dual potential


def _refine(auto: GeodesicAutomaton, memory: int):
    """States ``(q, last m labels)`` reached from the start, with the
    shortlex-least label word reaching each."""
    out = {}
    for a, b, l in auto.edges:
        out.setdefault(a, []).append((l, b))
    for a in out:
        out[a].sort()
    start = (auto.initial[0], ())
    index = {start: 0}
    words = [()]
    edges = []
    frontier = [start]
    budget = _config.BUDGET["dual_states"]
    while frontier:
        nxt = []
        for st in frontier:
            q, suf = st
            i = index[st]
            for l, b in out.get(q, []):
                tgt = (b, (suf + (l,))[-memory:] if memory else ())
                if tgt not in index:
                    index[tgt] = len(index)
                    words.append(words[i] + (l,))
                    nxt.append(tgt)
                    if len(index) > budget:
                        raise BudgetExceeded(f"refined automaton exceeds dual_states budget {budget}")
                edges.append((i, index[tgt], l))
        frontier = nxt
    return len(index), edges, words


def _group_element(gens: GenSet, labels):
    g = FreeWord(())
    for l in labels:
        g = g * gens[l]
    return g


def _as_int_array(vals):
    if all(Fraction(v).denominator == 1 for v in vals):
        return np.array([int(v) for v in vals], dtype=np.int64)
    return None


def _verify_cycles(dual: DualMetricAutomaton, gens: GenSet, base: GenSet, other, up_to: int):
    """Exact check of every closed walk of length ``<= up_to``.

    ``other(core)`` returns ``(num, den)`` arrays of translation lengths.
    """
    sft, _, _, emap = dual.to_sft("line")
    lab = dual.edge_labels(emap)
    pv = _as_int_array([dual.psi[e] for e in emap.tolist()])
    rv = _as_int_array([dual.r[e] for e in emap.tolist()])
    if pv is None or rv is None:
        raise ValueError("cycle verification needs integer r and psi")
    bits = code_bits(gens.rank)
    gl = [w.letters for w in gens.words]
    lb = local_metric(base)
    for n in range(1, up_to + 1):
        if gens.max_length * n > max_code_length(gens.rank):
            break
        walks = closed_walk_array(sft, n).astype(np.int64)
        if walks.shape[0] == 0:
            continue
        codes = np.ones(walks.shape[0], dtype=np.int64)
        for t in range(n):
            codes = multiply_codes_var(codes, lab[walks[:, t]], gl, bits)
        letters, lengths = codes_to_arrays(codes, bits)
        start, ln = cyclic_core_arrays(letters, lengths)
        psum = pv[walks].sum(axis=1)
        rsum = rv[walks].sum(axis=1)
        for L in np.unique(ln).tolist():
            rows = np.nonzero(ln == L)[0]
            if L == 0:
                on = od = bn = None
                bad = (psum[rows] != 0) | (rsum[rows] != 0)
            else:
                cols = start[rows][:, None] + np.arange(L)[None, :]
                core = letters[rows[:, None], cols]
                on, od = other(core)
                bn, bd = _kernels.translation_batch(core, lb.W)
                bad = (psum[rows] * od != on) | (rsum[rows] * bd != bn)
            if bad.any():
                k = int(np.nonzero(bad)[0][0])
                row = int(rows[k])
                word = str(FreeWord(tuple(letters[row, : lengths[row]].tolist())))
                want_o = "0" if on is None else str(Fraction(int(on[k]), int(od[k])))
                want_b = "0" if bn is None else str(Fraction(int(bn[k]), int(bd[k])))
                raise VerificationError(
                    f"dual potential fails on the cycle reading {word}: psi-sum {psum[row]} vs "
                    f"length {want_o}, period {rsum[row]} vs {want_b}; increase memory"
                )


def verify_dual(dual: DualMetricAutomaton, gens, other, up_to: int = 8) -> None:
    """Check the dual contract on every cycle of length ``<= up_to``.

    ``gens`` is the generating set the edge labels refer to (the base metric,
    ``r = 1``); ``other`` the metric that ``psi`` encodes.

    Raises
    ------
    VerificationError
        On the first cycle whose sums disagree with the translation lengths.
    """
    rank = dual.meta.get("rank")
    if isinstance(gens, str):
        gens = GenSet.parse(gens, rank=rank)
    if isinstance(other, str):
        other = GenSet.parse(other, rank=gens.rank)
    lm = local_metric(other)
    _verify_cycles(dual, gens, gens, lambda core: _kernels.translation_batch(core, lm.W), up_to)


def dual_potential(
    auto: GeodesicAutomaton,
    base_gens=None,
    other_gens=None,
    memory: Optional[int] = None,
    verify_cycles_to: int = 8,
) -> DualMetricAutomaton:
    """Potential ``psi`` on a refinement of ``auto`` with Birkhoff sums equal to
    the translation length in ``other`` along every cycle.

    States of the refinement remember the last ``memory`` labels.  For the
    edge ``q --s--> q'`` with representative word ``w`` at ``q``,
    ``psi = |w s|_other - |w|_other``; ``r = 1``.

    Parameters
    ----------
    auto : GeodesicAutomaton
    base_gens : GenSet or str, optional
        Must be the automaton's own generating set (the default).
    other_gens : GenSet or str
    memory : int, optional
        When omitted, ``0, 1, 2, ...`` are tried until verification passes.
    verify_cycles_to : int
        Every cycle of length up to this is checked exactly.

    Raises
    ------
    VerificationError
        "increase memory" with the offending cycle.
    """
    gens = auto.gens
    if isinstance(base_gens, str):
        base_gens = GenSet.parse(base_gens, rank=gens.rank)
    if base_gens is not None and base_gens != gens:
        raise ValueError("base_gens must be the generating set the automaton was built for")
    other = other_gens
    if other is None:
        raise ValueError("other_gens is required")
    if isinstance(other, str):
        other = GenSet.parse(other, rank=gens.rank)
    lm = local_metric(other)

    def other_len(core):
        return _kernels.translation_batch(core, lm.W)

    mems = [int(memory)] if memory is not None else list(range(0, 6))
    last = None
    for m in mems:
        n, edges, words = _refine(auto, m)
        cache = {}

        def length(labels):
            if labels not in cache:
                cache[labels] = lm.word_length(_group_element(gens, labels))
            return cache[labels]

        psi = [Fraction(length(words[a] + (l,)) - length(words[a])) for a, _, l in edges]
        names = [".".join(str(gens[l]) for l in w) or "1" for w in words]
        dual = DualMetricAutomaton(
            n_states=n,
            initial=[0],
            edges=edges,
            labels=list(auto.labels),
            r=[Fraction(1)] * len(edges),
            psi=psi,
            names=names,
            meta={
                "gens": [str(w) for w in gens.words],
                "other": [str(w) for w in other.words],
                "rank": gens.rank,
                "rho": auto.rho,
                "memory": m,
                "verified_cycles_to": verify_cycles_to,
            },
        )
        try:
            _verify_cycles(dual, gens, gens, other_len, verify_cycles_to)
        except VerificationError as exc:
            last = exc
            continue
        return dual
    raise last
