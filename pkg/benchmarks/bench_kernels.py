"""Time the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run once to warm the JIT cache, then timed ``--repeat`` times
per backend; the best time is reported along with a check that both backends
return the same result.
"""
import argparse
import time

import numpy as np

from sftpress import _config, _kernels
from sftpress.freegroup import GenSet, local_metric, necklace_count
from sftpress.orbits import trace_power
from sftpress.sft import Sft


def _best(fn, repeat):
    out = fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind == "f":
        return np.allclose(a, b, rtol=1e-10, atol=1e-12)
    return np.array_equal(a.astype(object), b.astype(object))


def cases():
    rng = np.random.default_rng(7)
    A = (rng.random((60, 60)) < 0.15).astype(np.int64)
    np.fill_diagonal(A, 1)
    sft = Sft.from_matrix(A)
    w = rng.normal(size=sft.n_edges)
    B = np.zeros((sft.k, sft.k))
    B[sft.src, sft.dst] = np.exp(w - w.max())

    full3 = Sft.full_shift(3)
    ptr, out_edge = full3.csr()
    n_walk = 11
    total_walk = trace_power(full3, n_walk)

    two = Sft.full_shift(2)
    expo = np.array([0, 1, 0, 1], dtype=np.int64)

    lm = local_metric(GenSet.parse("a,b,ab"))
    words = rng.integers(0, 4, size=(20000, 12))
    # make rows cyclically reduced and freely reduced
    for j in range(1, 12):
        bad = words[:, j] == (words[:, j - 1] ^ 1)
        words[bad, j] = words[bad, j - 1]
    bad = words[:, 0] == (words[:, -1] ^ 1)
    words[bad, 0] = words[bad, -1]

    return [
        ("power_iter 60x60", lambda: _kernels.power_iter(B)[:2]),
        ("balance 60 states", lambda: _kernels.balance(sft.k, sft.src, sft.dst, w)),
        (f"closed_walks full 3-shift n={n_walk}",
         lambda: _kernels.closed_walks(3, ptr, out_edge, full3.dst, n_walk, total_walk)),
        ("poly_trace 2-shift n=40", lambda: _kernels.poly_trace(2, two.src, two.dst, expo, 40)),
        ("necklaces rank 2 n=12", lambda: _kernels.necklace_words(4, 12, necklace_count(2, 12))),
        ("translation_batch 20000 x 12", lambda: _kernels.translation_batch(words, lm.W)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
    print(f"{'kernel':38s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}  same")
    saved = _config.USE_NUMBA
    try:
        for name, fn in cases():
            _config.USE_NUMBA = True
            t_nb, r_nb = _best(fn, args.repeat)
            _config.USE_NUMBA = False
            t_np, r_np = _best(fn, args.repeat)
            print(f"{name:38s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}  {_same(r_nb, r_np)}")
    finally:
        _config.USE_NUMBA = saved


if __name__ == "__main__":
    main()
