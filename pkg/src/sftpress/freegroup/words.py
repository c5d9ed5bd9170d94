"""Reduced words, generating sets and necklaces in free groups.

Letters are small integers: generator ``g`` is ``2g`` and its inverse is
``2g + 1`` (so inversion is ``x ^ 1``).  As strings, generators are lowercase
(``a``, ``b``, ...) and inverses uppercase (``A`` = a^-1).  The fixed letter
order ``a < A < b < B < ...`` is the integer order.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Iterator

import numpy as np

from .. import _config, _kernels
from .._config import BudgetExceeded

__all__ = [
    "FreeWord",
    "GenSet",
    "Necklace",
    "reduce_letters",
    "letter_str",
    "necklaces",
    "necklace_array",
    "necklace_count",
    "canonical_rotation",
    "encode",
    "decode",
    "multiply_codes",
    "codes_to_arrays",
    "code_bits",
]


def letter_str(x: int) -> str:
    ch = chr(ord("a") + (x >> 1))
    return ch.upper() if x & 1 else ch


def _parse_letter(ch: str) -> int:
    if not ch.isalpha():
        raise ValueError(f"bad letter {ch!r}")
    g = ord(ch.lower()) - ord("a")
    return 2 * g + (1 if ch.isupper() else 0)


def reduce_letters(letters: Iterable[int]) -> tuple:
    """Free reduction with a stack."""
    out = []
    for x in letters:
        x = int(x)
        if out and out[-1] == x ^ 1:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True, order=True)
class FreeWord:
    """An element of a free group, stored as a reduced letter tuple.

    >>> FreeWord.parse("abBA") == FreeWord.identity()
    True
    >>> str(FreeWord.parse("ab") * FreeWord.parse("Ba"))
    'aa'
    """

    letters: tuple

    def __post_init__(self):
        red = reduce_letters(self.letters)
        object.__setattr__(self, "letters", red)

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        text = text.strip()
        if text in ("", "1", "e"):
            return cls(())
        return cls(tuple(_parse_letter(ch) for ch in text))

    @classmethod
    def identity(cls):
        return cls(())

    @classmethod
    def generator(cls, g: int, inverse=False):
        return cls((2 * g + int(bool(inverse)),))

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(x ^ 1 for x in reversed(self.letters)))

    def __pow__(self, m: int) -> "FreeWord":
        if m < 0:
            return self.inverse() ** (-m)
        return FreeWord(self.letters * m)

    @property
    def rank(self):
        return (max(self.letters) >> 1) + 1 if self.letters else 0

    @property
    def is_cyclically_reduced(self):
        return len(self.letters) <= 1 or self.letters[0] != self.letters[-1] ^ 1

    def cyclic_reduce(self):
        """``(c, u)`` with ``self = c u c^-1`` and ``u`` cyclically reduced."""
        w = self.letters
        i, j = 0, len(w)
        while j - i >= 2 and w[i] == w[j - 1] ^ 1:
            i += 1
            j -= 1
        return FreeWord(w[:i]), FreeWord(w[i:j])

    def conjugate(self, h: "FreeWord") -> "FreeWord":
        return h * self * h.inverse()

    def __str__(self):
        return "".join(letter_str(x) for x in self.letters) or "1"

    def __repr__(self):
        return f"FreeWord('{self}')"


class GenSet:
    """A finite symmetric generating set of a free group.

    The closure order is: each input word followed by its inverse, in input
    order, duplicates and the identity dropped.  That order is the letter
    order used for shortlex.

    Parameters
    ----------
    words : iterable of FreeWord or str
    rank : int, optional
        Rank of the free group; defaults to the largest generator used.
    check : bool
        Verify that every standard letter is a product of at most
        ``BUDGET['genset_radius']`` elements.
    """

    def __init__(self, words, rank=None, check=True):
        ws = [w if isinstance(w, FreeWord) else FreeWord.parse(w) for w in words]
        self.symmetric = all(w.inverse() in ws for w in ws)
        out = []
        for w in ws:
            for x in (w, w.inverse()):
                if len(x) and x not in out:
                    out.append(x)
        if not out:
            raise ValueError("generating set is empty")
        self.words = tuple(out)
        self.rank = int(rank) if rank is not None else max(w.rank for w in out)
        if check:
            self._check_generates()

    @classmethod
    def standard(cls, rank):
        return cls([FreeWord.generator(g) for g in range(rank)], rank=rank)

    @classmethod
    def parse(cls, text, rank=None):
        """From ``"a,b,ab"`` style text."""
        return cls([t for t in text.replace(" ", "").split(",") if t], rank=rank)

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __getitem__(self, i):
        return self.words[i]

    @property
    def max_length(self):
        return max(len(w) for w in self.words)

    @property
    def is_standard(self):
        return self.max_length == 1 and len(self.words) == 2 * self.rank

    def inverse_index(self, i):
        return self.words.index(self.words[i].inverse())

    def _check_generates(self):
        targets = {FreeWord.generator(g) for g in range(self.rank)}
        frontier = {FreeWord.identity()}
        seen = set(frontier)
        radius = _config.BUDGET["genset_radius"]
        for _ in range(radius):
            targets -= seen
            if not targets:
                return
            nxt = set()
            for g in frontier:
                for s in self.words:
                    h = g * s
                    if h not in seen and len(h) <= radius * self.max_length:
                        nxt.add(h)
            seen |= nxt
            frontier = nxt
        targets -= seen
        if targets:
            missing = ", ".join(str(t) for t in sorted(targets))
            raise ValueError(f"generating set does not produce {missing} within radius {radius}")

    def __repr__(self):
        return "GenSet([" + ", ".join(str(w) for w in self.words) + "])"

    def __eq__(self, other):
        return isinstance(other, GenSet) and self.words == other.words and self.rank == other.rank

    def __hash__(self):
        return hash((self.words, self.rank))


# ---------------------------------------------------------------------------
# necklaces


def canonical_rotation(letters) -> tuple:
    w = tuple(letters)
    return min(w[i:] + w[:i] for i in range(len(w))) if w else w


@dataclass(frozen=True, order=True)
class Necklace:
    """A conjugacy class, as the rotation-minimal cyclically reduced word."""

    letters: tuple

    def __post_init__(self):
        w = FreeWord(self.letters)
        _, core = w.cyclic_reduce()
        object.__setattr__(self, "letters", canonical_rotation(core.letters))

    @classmethod
    def of(cls, g: FreeWord):
        return cls(g.letters)

    @property
    def word(self):
        return FreeWord(self.letters)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return str(self.word)


def _no_backtrack_trace(rank, d):
    n = 2 * rank
    A = np.ones((n, n), dtype=object)
    for x in range(n):
        A[x, x ^ 1] = 0
    P = np.identity(n, dtype=object)
    for _ in range(d):
        P = P.dot(A)
    return int(sum(P[i, i] for i in range(n)))


def _phi(n):
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


def necklace_count(rank: int, n: int) -> int:
    """Number of conjugacy classes of cyclic length ``n`` (Burnside count)."""
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += _phi(n // d) * _no_backtrack_trace(rank, d)
    return total // n


def necklace_array(rank: int, n: int) -> np.ndarray:
    """All canonical necklaces of length ``n`` as an ``int8`` array, in lex order."""
    if n < 1:
        return np.zeros((0, max(n, 0)), dtype=np.int8)
    cap = _config.BUDGET["necklace_len"] + (2 if rank == 1 else 0)
    if rank == 2 and n > _config.BUDGET["necklace_len"]:
        raise BudgetExceeded(f"necklace length {n} exceeds budget {_config.BUDGET['necklace_len']}")
    if rank > 2 and (2 * rank - 1) ** n > (3**cap):
        raise BudgetExceeded(f"necklace length {n} too large for rank {rank}")
    total = necklace_count(rank, n)
    arr = _kernels.necklace_words(2 * rank, n, total)
    if arr.shape[0] != total:  # pragma: no cover - kernel invariant
        raise RuntimeError("necklace enumeration disagrees with the Burnside count")
    return arr


def necklaces(rank: int, max_len: int) -> Iterator[Necklace]:
    """Each conjugacy class with ``1 <= l_S < max_len`` exactly once."""
    for n in range(1, int(max_len)):
        for row in necklace_array(rank, n).tolist():
            yield Necklace(tuple(row))


# ---------------------------------------------------------------------------
# integer codes for reduced words: a leading 1 bit then ``bits`` bits per
# letter (2 for rank 2); the identity is 1


def code_bits(rank: int) -> int:
    return max(1, (2 * int(rank) - 1).bit_length())


def max_code_length(rank: int) -> int:
    return 62 // code_bits(rank)


def encode(word, bits=2) -> int:
    letters = word.letters if isinstance(word, FreeWord) else word
    c = 1
    for x in letters:
        c = (c << bits) | int(x)
    return c


def decode(code: int, bits=2) -> FreeWord:
    letters = []
    code = int(code)
    mask = (1 << bits) - 1
    while code > 1:
        letters.append(code & mask)
        code >>= bits
    return FreeWord(tuple(reversed(letters)))


def multiply_codes(codes: np.ndarray, letters, bits=2) -> np.ndarray:
    """Right-multiply every encoded element by the same letter sequence."""
    out = np.asarray(codes, dtype=np.int64).copy()
    mask = (1 << bits) - 1
    for x in letters:
        x = int(x)
        cancel = (out > 1) & ((out & mask) == (x ^ 1))
        out = np.where(cancel, out >> bits, (out << bits) | x)
    return out


def multiply_codes_var(codes: np.ndarray, labels: np.ndarray, gens_letters, bits=2) -> np.ndarray:
    """Right-multiply element ``i`` by generator ``labels[i]``."""
    out = np.asarray(codes, dtype=np.int64).copy()
    for s, word in enumerate(gens_letters):
        m = labels == s
        if m.any():
            out[m] = multiply_codes(out[m], word, bits)
    return out


def code_lengths(codes: np.ndarray, bits=2) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    ln = np.zeros(codes.shape, dtype=np.int64)
    tmp = codes.copy()
    while True:
        m = tmp > 1
        if not m.any():
            return ln
        ln[m] += 1
        tmp[m] >>= bits


def codes_to_arrays(codes: np.ndarray, bits=2):
    """Left-justified letter matrix (padded with -1) and word lengths."""
    codes = np.asarray(codes, dtype=np.int64)
    lengths = code_lengths(codes, bits)
    width = int(lengths.max(initial=0))
    out = -np.ones((codes.shape[0], width), dtype=np.int64)
    mask = (1 << bits) - 1
    for pos in range(width):
        m = pos < lengths
        shift = bits * (lengths[m] - 1 - pos)
        out[m, pos] = (codes[m] >> shift) & mask
    return out, lengths


def cyclic_core_arrays(letters: np.ndarray, lengths: np.ndarray):
    """Start offsets and lengths of the cyclically reduced cores."""
    start = np.zeros_like(lengths)
    ln = lengths.copy()
    rows = np.arange(letters.shape[0])
    while True:
        idx = rows[ln >= 2]
        if idx.size == 0:
            break
        first = letters[idx, start[idx]]
        last = letters[idx, start[idx] + ln[idx] - 1]
        trim = idx[first == (last ^ 1)]
        if trim.size == 0:
            break
        start[trim] += 1
        ln[trim] -= 2
    return start, ln
