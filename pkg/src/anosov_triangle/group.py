"""Words in the triangle group Gamma(p1, p2, p3).

Words are strings over ``a, b, c`` standing for s1, s2, s3 ("abc" = s1 s2 s3).
:func:`reduce` returns the shortlex-least reduced expression of the group
element, so two words name the same element exactly when they reduce to the
same string.  Evaluation through a representation is cached per
(representation, word) in a thread-safe LRU table.
"""

from __future__ import annotations

import collections
import dataclasses
import functools
import threading

import numpy as np

from . import errors
from .cartan import TriangleSignature

LETTERS = "abc"
_INDEX = {ch: i for i, ch in enumerate(LETTERS)}
_SHIFT = str.maketrans("abc", "bca")


def order(sig: TriangleSignature, x: str, y: str) -> int:
    """Order of the product of two distinct generators."""
    i, j = _INDEX[x], _INDEX[y]
    return sig.ps[3 - i - j]


def inverse(w: str) -> str:
    return w[::-1]


def cyclic_shift(w: str, k: int = 1) -> str:
    """Replace s1 -> s2 -> s3 -> s1, ``k`` times."""
    for _ in range(k % 3):
        w = w.translate(_SHIFT)
    return w


def alternating(x: str, y: str, n: int) -> str:
    return "".join(x if i % 2 == 0 else y for i in range(n))


# ---------------------------------------------------------------------------
# reduction


def _free_reduce(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if out and out[-1] == ch:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def rewrite(w: str, sig: TriangleSignature) -> str:
    """Free reduction plus dihedral shortening, repeated until nothing changes.

    A maximal alternating run in two letters whose length L exceeds the order
    m of their product is replaced by the inverse of its complement in the
    relator of length 2m.
    """
    w = _free_reduce(w)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(w) - 1:
            x, y = w[i], w[i + 1]
            j = i + 2
            while j < len(w) and w[j] == (x if (j - i) % 2 == 0 else y):
                j += 1
            m = order(sig, x, y)
            run = j - i
            if run > m:
                keep = run % (2 * m)
                if keep > m:
                    repl = alternating(x, y, 2 * m)[keep:][::-1]
                else:
                    repl = alternating(x, y, keep)
                w = _free_reduce(w[:i] + repl + w[j:])
                changed = True
                break
            i = max(j - 1, i + 1)
    return w


@functools.lru_cache(maxsize=None)
def _tits(sig: TriangleSignature):
    ps = sig.ps
    m = np.ones((3, 3))
    m[1, 2] = m[2, 1] = ps[0]
    m[2, 0] = m[0, 2] = ps[1]
    m[0, 1] = m[1, 0] = ps[2]
    form = -np.cos(np.pi / m)
    refl = []
    for i in range(3):
        r = np.eye(3)
        r[i, :] -= 2.0 * form[i, :]
        refl.append(r)
    return tuple(refl)


@functools.lru_cache(maxsize=None)
def _tits_mp(sig: TriangleSignature, dps: int):
    import mpmath

    with mpmath.workdps(dps):
        ps = sig.ps
        mm = [[1, ps[2], ps[1]], [ps[2], 1, ps[0]], [ps[1], ps[0], 1]]
        form = [[-mpmath.cos(mpmath.pi / mm[i][j]) for j in range(3)] for i in range(3)]
        refl = []
        for i in range(3):
            r = mpmath.eye(3)
            for j in range(3):
                r[i, j] -= 2 * form[i][j]
            refl.append(r)
        return tuple(refl)


class _Ambiguous(Exception):
    pass


def _shortlex_float(w: str, sig: TriangleSignature) -> str:
    refl = _tits(sig)
    t = np.eye(3)
    for ch in w:  # t = Tits(w^-1)
        t = refl[_INDEX[ch]] @ t
    out = []
    scale = max(1.0, float(np.max(np.abs(t))))
    eps = 64.0 * np.finfo(float).eps * (len(w) + 1)
    while True:
        for k in range(3):
            col = float(t[0, k] + t[1, k] + t[2, k])
            if abs(col) <= eps * scale:
                raise _Ambiguous
            if col < 0:
                out.append(LETTERS[k])
                t = t @ refl[k]
                scale = max(scale, float(np.max(np.abs(t))))
                break
        else:
            return "".join(out)
        if len(out) > len(w):
            raise _Ambiguous


def _shortlex_mp(w: str, sig: TriangleSignature, dps: int = 80) -> str:
    import mpmath

    refl = _tits_mp(sig, dps)
    with mpmath.workdps(dps):
        t = mpmath.eye(3)
        for ch in w:
            t = refl[_INDEX[ch]] * t
        out = []
        while True:
            for k in range(3):
                col = t[0, k] + t[1, k] + t[2, k]
                if col < 0:
                    out.append(LETTERS[k])
                    t = t * refl[k]
                    break
            else:
                return "".join(out)


def reduce(w: str, sig: TriangleSignature) -> str:
    """Shortlex normal form of the element named by ``w``.

    Dihedral rewriting shortens the word first; the normal form is then read
    off by repeatedly splitting the smallest left descent, detected through
    the sign of w^-1(alpha_s) in the Tits reflection representation.  When a
    floating-point sign is too close to call, the computation is redone in
    80-digit arithmetic.

    >>> reduce("bccba", TriangleSignature(3, 3, 5))
    'a'
    """
    for ch in w:
        if ch not in _INDEX:
            raise ValueError(f"letter {ch!r} is not one of a, b, c")
    w = rewrite(w, sig)
    try:
        return _shortlex_float(w, sig)
    except _Ambiguous:
        return _shortlex_mp(w, sig)


def descends(w: str, letter: str, sig: TriangleSignature) -> bool:
    """True when ``w + letter`` is shorter than ``w`` (``w`` must be reduced)."""
    return len(reduce(w + letter, sig)) < len(w)


def elements_by_length(sig: TriangleSignature, max_len: int) -> list[list[str]]:
    """All group elements of length <= max_len, grouped by length, as normal forms."""
    layers = [[""]]
    seen = {""}
    for _ in range(max_len):
        nxt = []
        for w in layers[-1]:
            for ch in LETTERS:
                if w and w[-1] == ch:
                    continue
                v = reduce(w + ch, sig)
                if len(v) == len(w) + 1 and v not in seen:
                    seen.add(v)
                    nxt.append(v)
        nxt.sort()
        layers.append(nxt)
    return layers


# ---------------------------------------------------------------------------
# alphabets


@dataclasses.dataclass(frozen=True)
class Alphabet:
    frame: str  # "unprimed", "primed" or "double-primed"
    words: tuple


def _q_words(p: int) -> list[str]:
    words = []
    for j in range(1, (p - 1) // 2 + 1):
        for delta in (1, 0):
            words.append("a" * delta + "ab" * j)
    return words


def alphabets(sig: TriangleSignature):
    """The subdivision alphabets (Q, Q', Q'', T) for an all-odd signature.

    Q = {s1^d (s1 s2)^j : d in {0, 1}, 1 <= j <= (p3 - 1)/2}; Q' and Q'' are
    its images under the cyclic relabelling, built with p1 and p2 in place of
    p3.  T lists the products q q'' q' in lexicographic order of the
    (Q, Q'', Q') indices.
    """
    if not sig.all_odd:
        raise errors.EvenSignature(f"alphabets need all orders odd, got {sig.ps}")
    p1, p2, p3 = sig.ps
    q = tuple(reduce(w, sig) for w in _q_words(p3))
    q1 = tuple(reduce(cyclic_shift(w, 1), sig) for w in _q_words(p1))
    q2 = tuple(reduce(cyclic_shift(w, 2), sig) for w in _q_words(p2))
    t = tuple(reduce(x + y + z, sig) for x in q for y in q2 for z in q1)
    return (Alphabet("unprimed", q), Alphabet("primed", q1), Alphabet("double-primed", q2),
            Alphabet("T", t))


T_BAR = "abcabc"


# ---------------------------------------------------------------------------
# evaluation


class WordCache:
    """LRU table of word matrices keyed by (representation key, word).

    All access goes through one lock, so concurrent readers and writers can
    only affect timing, never the stored values.
    """

    def __init__(self, maxsize: int = 1 << 20):
        self.maxsize = maxsize
        self._data: collections.OrderedDict = collections.OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        with self._lock:
            value = self._data.get(key)
            if value is None:
                self.misses += 1
                return None
            self._data.move_to_end(key)
            self.hits += 1
            return value

    def put(self, key, value) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            self.hits = self.misses = 0

    def __len__(self) -> int:
        return len(self._data)


CACHE = WordCache()


def evaluate(w: str, rep, cache: WordCache | None = CACHE) -> np.ndarray:
    """Matrix of ``w`` under ``rep`` (left-to-right product of generator images).

    ``rep`` is anything with ``gens`` (three matrices) and a hashable ``key``.
    The result is read-only because it may be shared through the cache.
    """
    gens = rep.gens
    if cache is None:
        m = np.eye(gens[0].shape[0])
        for ch in w:
            m = m @ gens[_INDEX[ch]]
        m.setflags(write=False)
        return m
    key = rep.key
    hit = cache.get((key, w))
    if hit is not None:
        return hit
    # longest cached prefix, then extend one letter at a time
    start = 0
    m = np.eye(gens[0].shape[0])
    for k in range(len(w) - 1, 0, -1):
        prev = cache.get((key, w[:k]))
        if prev is not None:
            start, m = k, prev
            break
    for k in range(start, len(w)):
        m = m @ gens[_INDEX[w[k]]]
        m.setflags(write=False)
        cache.put((key, w[: k + 1]), m)
    if not w:
        m = m.copy()
        m.setflags(write=False)
    return m


def word_matrices(words, rep) -> np.ndarray:
    """Stacked matrices of several words, shape (len(words), n, n)."""
    return np.stack([evaluate(w, rep) for w in words])


def letter_index(ch: str) -> int:
    return _INDEX[ch]


__all__ = [
    "Alphabet", "CACHE", "LETTERS", "T_BAR", "WordCache", "alphabets", "alternating",
    "cyclic_shift", "descends", "elements_by_length", "evaluate", "inverse", "order",
    "reduce", "rewrite", "word_matrices",
]
