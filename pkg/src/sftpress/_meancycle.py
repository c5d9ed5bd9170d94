"""Exact maximum cycle mean (Karp) with potentials and simple-cycle witnesses.

Values may be ``Fraction`` (exact) or ``float``; the arithmetic is generic.
"""
from __future__ import annotations

from fractions import Fraction


def max_cycle_mean(k, src, dst, w):
    """Karp's maximum cycle mean over an irreducible graph."""
    NEG = None
    D = [[NEG] * k for _ in range(k + 1)]
    D[0] = [0] * k
    edges = list(zip(src, dst, w))
    for step in range(1, k + 1):
        prev, cur = D[step - 1], D[step]
        for a, b, x in edges:
            if prev[a] is not None:
                c = prev[a] + x
                if cur[b] is None or c > cur[b]:
                    cur[b] = c
    best = None
    for v in range(k):
        if D[k][v] is None:
            continue
        worst = None
        for s in range(k):
            if D[s][v] is None:
                continue
            val = _div(D[k][v] - D[s][v], k - s)
            if worst is None or val < worst:
                worst = val
        if best is None or worst > best:
            best = worst
    return best


def _div(x, n):
    if isinstance(x, (int, Fraction)):
        return Fraction(x, 1) / n
    return x / n


def potentials(k, src, dst, w, lam):
    """Longest-path potentials for weights ``w - lam`` (no positive cycles)."""
    pot = [0] * k
    edges = list(zip(src, dst, w))
    for _ in range(k + 1):
        changed = False
        for a, b, x in edges:
            c = pot[a] + x - lam
            if c > pot[b] and not _close(c, pot[b]):
                pot[b] = c
                changed = True
        if not changed:
            return pot
    raise ArithmeticError("positive cycle after subtracting the maximum mean")


def _close(x, y):
    if isinstance(x, float) or isinstance(y, float):
        return abs(x - y) <= 1e-12 * max(1.0, abs(x), abs(y))
    return x == y


def tight_edges(src, dst, w, lam, pot):
    return [e for e, (a, b, x) in enumerate(zip(src, dst, w)) if _close(pot[a] + x - lam, pot[b])]


def tight_cycle(k, src, dst, tight, start=None):
    """A simple cycle in the subgraph of ``tight`` edges, as an edge list.

    Every cycle of the tight subgraph attains the extremal mean.  When
    ``start`` is given, roots are tried from that state first.
    """
    out = {}
    for e in tight:
        out.setdefault(src[e], []).append(e)
    order = [start] if start is not None else []
    order += [v for v in range(k) if v != start]
    done = set()
    for root in order:
        if root in done:
            continue
        onpath = {root: 0}
        path_edges = []
        nodes = [root]
        iters = [iter(out.get(root, []))]
        while iters:
            e = next(iters[-1], None)
            if e is None:
                iters.pop()
                v = nodes.pop()
                onpath.pop(v)
                done.add(v)
                if path_edges:
                    path_edges.pop()
                continue
            b = dst[e]
            if b in onpath:
                return path_edges[onpath[b]:] + [e]
            if b in done:
                continue
            path_edges.append(e)
            onpath[b] = len(path_edges)
            nodes.append(b)
            iters.append(iter(out.get(b, [])))
    return None


def rotate_to(cycle_edges, src, state):
    """Rotate an edge cycle so it starts at ``state`` (must lie on it)."""
    for i, e in enumerate(cycle_edges):
        if src[e] == state:
            return cycle_edges[i:] + cycle_edges[:i]
    raise ValueError("state not on cycle")
