"""Hot loops, each as a numba kernel (``_nb_*``) with a numpy twin (``_np_*``).

The public dispatchers at the bottom pick the compiled kernel unless
``SFTPRESS_DISABLE_NUMBA`` is set (see :mod:`sftpress._config`).  Both
variants are always importable so the benchmark and the tests can compare
them directly.
"""
from __future__ import annotations

import numpy as np

from . import _config

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kws):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


INT_INF = np.int64(2**62)


# ---------------------------------------------------------------------------
# power iteration


@njit(cache=True)
def _nb_power_iter(B, shift, rtol, cap):
    k = B.shape[0]
    v = np.ones(k)
    lo = 0.0
    hi = 0.0
    best = np.inf
    last_check = 0
    it = 0
    converged = False
    while it < cap:
        w = B @ v
        lo = np.inf
        hi = 0.0
        vmax = 0.0
        for i in range(k):
            w[i] += shift * v[i]
            if v[i] > 1e-280:
                ratio = w[i] / v[i]
                if ratio < lo:
                    lo = ratio
                if ratio > hi:
                    hi = ratio
            if w[i] > vmax:
                vmax = w[i]
        for i in range(k):
            v[i] = w[i] / vmax
        it += 1
        if hi - lo <= rtol * (hi - shift):
            converged = True
            break
        if it - last_check >= 2000:
            # stalled at the floating point floor
            if hi > best * (1.0 - 1e-3 * rtol):
                break
            best = hi
            last_check = it
    return 0.5 * (lo + hi) - shift, v, it, converged


def _np_power_iter(B, shift, rtol, cap):
    k = B.shape[0]
    v = np.ones(k)
    lo = hi = 0.0
    best = np.inf
    last_check = 0
    it = 0
    converged = False
    while it < cap:
        w = B @ v + shift * v
        mask = v > 1e-280
        ratio = w[mask] / v[mask]
        lo, hi = ratio.min(), ratio.max()
        v = w / w.max()
        it += 1
        if hi - lo <= rtol * (hi - shift):
            converged = True
            break
        if it - last_check >= 2000:
            if hi > best * (1.0 - 1e-3 * rtol):
                break
            best = hi
            last_check = it
    return 0.5 * (lo + hi) - shift, v, it, converged


# ---------------------------------------------------------------------------
# maximum cycle mean (float Karp) and longest-path potentials, used to
# gauge-balance exponential weights before power iteration


@njit(cache=True)
def _nb_balance(k, src, dst, w):
    ne = src.shape[0]
    D = np.full((k + 1, k), -np.inf)
    for v in range(k):
        D[0, v] = 0.0
    for step in range(1, k + 1):
        for e in range(ne):
            cand = D[step - 1, src[e]] + w[e]
            if cand > D[step, dst[e]]:
                D[step, dst[e]] = cand
    lam = -np.inf
    for v in range(k):
        if D[k, v] == -np.inf:
            continue
        worst = np.inf
        for s in range(k):
            if D[s, v] == -np.inf:
                continue
            val = (D[k, v] - D[s, v]) / (k - s)
            if val < worst:
                worst = val
        if worst > lam:
            lam = worst
    pot = np.zeros(k)
    for _ in range(k + 1):
        changed = False
        for e in range(ne):
            cand = pot[src[e]] + w[e] - lam
            if cand > pot[dst[e]] + 1e-300:
                pot[dst[e]] = cand
                changed = True
        if not changed:
            break
    return lam, pot


def _np_balance(k, src, dst, w):
    D = np.full((k + 1, k), -np.inf)
    D[0] = 0.0
    for step in range(1, k + 1):
        cand = D[step - 1, src] + w
        np.maximum.at(D[step], dst, cand)
    with np.errstate(invalid="ignore"):
        s = np.arange(k)[:, None]
        diff = (D[k][None, :] - D[:k]) / (k - s)
    diff = np.where(np.isfinite(D[:k]), diff, np.inf)
    worst = diff.min(axis=0)
    worst = worst[np.isfinite(D[k])]
    lam = worst.max() if worst.size else -np.inf
    pot = np.zeros(k)
    for _ in range(k + 1):
        new = pot.copy()
        np.maximum.at(new, dst, pot[src] + w - lam)
        if np.array_equal(new, pot):
            break
        pot = new
    return lam, pot


# ---------------------------------------------------------------------------
# closed walks of length n (periodic points)


@njit(cache=True)
def _nb_closed_walks(k, ptr, out_edge, dst, n, total):
    out = np.empty((total, n), dtype=np.int32)
    row = 0
    path = np.empty(n, dtype=np.int32)
    pos = np.empty(n + 1, dtype=np.int64)
    state = np.empty(n + 1, dtype=np.int64)
    for start in range(k):
        depth = 0
        state[0] = start
        pos[0] = ptr[start]
        while depth >= 0:
            u = state[depth]
            if depth == n:
                if u == start:
                    for t in range(n):
                        out[row, t] = path[t]
                    row += 1
                depth -= 1
                continue
            if pos[depth] < ptr[u + 1]:
                e = out_edge[pos[depth]]
                pos[depth] += 1
                path[depth] = e
                state[depth + 1] = dst[e]
                pos[depth + 1] = ptr[dst[e]]
                depth += 1
            else:
                depth -= 1
    return out[:row]


def _np_closed_walks(k, ptr, out_edge, dst, n, total):
    blocks = []
    deg = np.diff(ptr)
    for start in range(k):
        paths = np.empty((1, 0), dtype=np.int32)
        cur = np.array([start], dtype=np.int64)
        for _ in range(n):
            reps = deg[cur]
            idx = np.repeat(np.arange(cur.shape[0]), reps)
            offs = np.arange(idx.shape[0]) - np.repeat(np.cumsum(reps) - reps, reps)
            edges = out_edge[ptr[cur][idx] + offs]
            paths = np.concatenate([paths[idx], edges[:, None].astype(np.int32)], axis=1)
            cur = dst[edges]
        blocks.append(paths[cur == start])
    if not blocks:
        return np.empty((0, n), dtype=np.int32)
    return np.concatenate(blocks, axis=0)


# ---------------------------------------------------------------------------
# coefficients of tr(M(z)^n) for M(z)_{ij} = sum over edges z^{expo(e)}


@njit(cache=True)
def _nb_poly_trace(k, src, dst, expo, n):
    emax = 0
    for e in range(expo.shape[0]):
        if expo[e] > emax:
            emax = expo[e]
    width = n * emax + 1
    total = np.zeros(width, dtype=np.int64)
    for start in range(k):
        cur = np.zeros((k, width), dtype=np.int64)
        cur[start, 0] = 1
        top = 0
        for step in range(n):
            new = np.zeros((k, width), dtype=np.int64)
            for e in range(src.shape[0]):
                a = src[e]
                b = dst[e]
                x = expo[e]
                for d in range(top + 1):
                    c = cur[a, d]
                    if c != 0:
                        new[b, d + x] += c
            cur = new
            top += emax
        for d in range(width):
            total[d] += cur[start, d]
    return total


def _np_poly_trace(k, src, dst, expo, n, dtype=np.int64):
    emax = int(expo.max()) if expo.size else 0
    width = n * emax + 1
    total = np.zeros(width, dtype=dtype)
    if dtype is object:
        total[:] = 0
    for start in range(k):
        cur = np.zeros((k, width), dtype=dtype)
        if dtype is object:
            cur[:] = 0
        cur[start, 0] = 1
        top = 0
        for _ in range(n):
            new = np.zeros((k, width), dtype=dtype)
            if dtype is object:
                new[:] = 0
            for a, b, x in zip(src.tolist(), dst.tolist(), expo.tolist()):
                new[b, x:x + top + 1] += cur[a, :top + 1]
            cur = new
            top += emax
        total += cur[start]
    return total


# ---------------------------------------------------------------------------
# necklaces: rotation-minimal cyclically reduced words of length n


@njit(cache=True)
def _nb_necklaces(n_letters, n, total):
    out = np.empty((total, n), dtype=np.int8)
    row = 0
    w = np.zeros(n, dtype=np.int64)
    per = np.zeros(n + 1, dtype=np.int64)
    nxt = np.zeros(n + 1, dtype=np.int64)
    depth = 0
    nxt[0] = 0
    per[0] = 1
    while depth >= 0:
        if depth == n:
            p = per[n]
            if n % p == 0 and (w[n - 1] ^ 1) != w[0]:
                for t in range(n):
                    out[row, t] = w[t]
                row += 1
            depth -= 1
            continue
        x = nxt[depth]
        if x >= n_letters:
            depth -= 1
            continue
        nxt[depth] = x + 1
        if depth > 0 and (w[depth - 1] ^ 1) == x:
            continue
        if depth == 0:
            p = 1
        else:
            p = per[depth]
            ref = w[depth - p]
            if x < ref:
                continue
            if x > ref:
                p = depth + 1
        w[depth] = x
        per[depth + 1] = p
        depth += 1
        nxt[depth] = 0
    return out[:row]


def _np_necklaces(n_letters, n, total):
    words = np.arange(n_letters, dtype=np.int8)[:, None]
    per = np.ones(n_letters, dtype=np.int64)
    for depth in range(1, n):
        cnt = words.shape[0]
        cand = np.repeat(words, n_letters, axis=0)
        x = np.tile(np.arange(n_letters, dtype=np.int8), cnt)
        p = np.repeat(per, n_letters)
        ref = cand[np.arange(cand.shape[0]), depth - p]
        ok = ((cand[:, -1] ^ 1) != x) & (x >= ref)
        p = np.where(x > ref, depth + 1, p)
        words = np.concatenate([cand, x[:, None]], axis=1)[ok]
        per = p[ok]
    keep = (n % per == 0) & ((words[:, -1] ^ 1) != words[:, 0])
    return np.ascontiguousarray(words[keep])


# ---------------------------------------------------------------------------
# translation length in a general generating set: one-period min-plus
# transfer matrix followed by an exact (integer) Karp minimum cycle mean


@njit(cache=True)
def _nb_translation_batch(words, W):
    N = words.shape[0]
    n = words.shape[1]
    K = W.shape[2]
    inf = INT_INF
    num = np.empty(N, dtype=np.int64)
    den = np.empty(N, dtype=np.int64)
    T = np.empty((K, K), dtype=np.int64)
    tmp = np.empty((K, K), dtype=np.int64)
    D = np.empty((K + 1, K), dtype=np.int64)
    for idx in range(N):
        for a in range(K):
            for b in range(K):
                T[a, b] = inf if a != b else 0
        for t in range(n):
            p = words[idx, t]
            q = words[idx, (t + 1) % n]
            M = W[p, q]
            for a in range(K):
                for b in range(K):
                    best = inf
                    for c in range(K):
                        x = T[a, c]
                        y = M[c, b]
                        if x < inf and y < inf and x + y < best:
                            best = x + y
                    tmp[a, b] = best
            for a in range(K):
                for b in range(K):
                    T[a, b] = tmp[a, b]
        # Karp on T
        for v in range(K):
            D[0, v] = 0
        for s in range(1, K + 1):
            for v in range(K):
                best = inf
                for u in range(K):
                    if D[s - 1, u] < inf and T[u, v] < inf:
                        c = D[s - 1, u] + T[u, v]
                        if c < best:
                            best = c
                D[s, v] = best
        bn = 0
        bd = 1
        have_best = False
        for v in range(K):
            if D[K, v] >= inf:
                continue
            wn = 0
            wd = 1
            have = False
            for s in range(K):
                if D[s, v] >= inf:
                    continue
                cn = D[K, v] - D[s, v]
                cd = K - s
                if not have or cn * wd > wn * cd:
                    wn = cn
                    wd = cd
                    have = True
            if have and (not have_best or wn * bd < bn * wd):
                bn = wn
                bd = wd
                have_best = True
        num[idx] = bn
        den[idx] = bd
    return num, den


def _np_translation_batch(words, W):
    N, n = words.shape
    K = W.shape[2]
    inf = np.float64(np.inf)
    Wf = np.where(W >= INT_INF, inf, W.astype(np.float64))
    T = np.broadcast_to(np.where(np.eye(K, dtype=bool), 0.0, inf), (N, K, K)).copy()
    for t in range(n):
        M = Wf[words[:, t], words[:, (t + 1) % n]]
        T = np.min(T[:, :, :, None] + M[:, None, :, :], axis=2)
    D = np.full((K + 1, N, K), inf)
    D[0] = 0.0
    for s in range(1, K + 1):
        D[s] = np.min(D[s - 1][:, :, None] + T, axis=1)
    num = np.empty(N, dtype=np.int64)
    den = np.empty(N, dtype=np.int64)
    for idx in range(N):
        best = None
        for v in range(K):
            if not np.isfinite(D[K, idx, v]):
                continue
            worst = None
            for s in range(K):
                if not np.isfinite(D[s, idx, v]):
                    continue
                cand = (int(D[K, idx, v] - D[s, idx, v]), K - s)
                if worst is None or cand[0] * worst[1] > worst[0] * cand[1]:
                    worst = cand
            if best is None or worst[0] * best[1] < best[0] * worst[1]:
                best = worst
        num[idx], den[idx] = best
    return num, den


# ---------------------------------------------------------------------------
# dispatch


def _use_numba():
    return HAVE_NUMBA and _config.USE_NUMBA


def power_iter(B, shift=1.0, rtol=None, cap=None):
    rtol = _config.PRESSURE_RTOL * 1e-2 if rtol is None else rtol
    cap = _config.POWER_ITER_CAP if cap is None else cap
    B = np.ascontiguousarray(B, dtype=np.float64)
    fn = _nb_power_iter if _use_numba() else _np_power_iter
    return fn(B, float(shift), float(rtol), int(cap))


def balance(k, src, dst, w):
    fn = _nb_balance if _use_numba() else _np_balance
    return fn(int(k), src, dst, np.ascontiguousarray(w, dtype=np.float64))


def closed_walks(k, ptr, out_edge, dst, n, total):
    fn = _nb_closed_walks if _use_numba() else _np_closed_walks
    return fn(int(k), ptr, out_edge, dst, int(n), int(total))


def poly_trace(k, src, dst, expo, n, exact_int64=True):
    if exact_int64 and _use_numba():
        return _nb_poly_trace(int(k), src, dst, expo, int(n))
    return _np_poly_trace(int(k), src, dst, expo, int(n), dtype=np.int64 if exact_int64 else object)


def necklace_words(n_letters, n, total):
    fn = _nb_necklaces if _use_numba() else _np_necklaces
    return fn(int(n_letters), int(n), int(total))


def translation_batch(words, W):
    words = np.ascontiguousarray(words, dtype=np.int64)
    W = np.ascontiguousarray(W, dtype=np.int64)
    fn = _nb_translation_batch if _use_numba() else _np_translation_batch
    return fn(words, W)
