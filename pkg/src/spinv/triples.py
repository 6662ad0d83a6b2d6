"""Index bookkeeping for coordinates on the space of alternating 3-forms.

Coordinates are labelled by strictly increasing triples (a, b, c) with
1 <= a < b < c <= 2n, listed in lexicographic order.  Triples are 1-based to
match the usual basis-index conventions; the linearized rank is 0-based.
"""
from __future__ import annotations

import math
from functools import lru_cache

from .errors import DimensionError


def _check_two_n(two_n) -> None:
    if not isinstance(two_n, int) or two_n < 2 or two_n % 2:
        raise DimensionError(
            f"ambient dimension must be a positive even integer, got {two_n!r}"
        )


def lambda3_dim(two_n: int) -> int:
    """Number of 3-form coordinates, C(2n, 3).  Zero when two_n == 2."""
    _check_two_n(two_n)
    return math.comb(two_n, 3)


def sp_dim(n: int) -> int:
    """Dimension n(2n+1) of the symplectic algebra sp(2n)."""
    if not isinstance(n, int) or n < 1:
        raise DimensionError(f"half-dimension must be a positive integer, got {n!r}")
    return n * (2 * n + 1)


def enumerate_triples(two_n: int) -> list[tuple[int, int, int]]:
    """All strictly increasing triples for the given even dimension, in
    lexicographic order."""
    _check_two_n(two_n)
    return [
        (a, b, c)
        for a in range(1, two_n + 1)
        for b in range(a + 1, two_n + 1)
        for c in range(b + 1, two_n + 1)
    ]


class TripleIndexer:
    """Rank/unrank bijection between triples and 0 .. C(2n,3)-1."""

    def __init__(self, two_n: int):
        _check_two_n(two_n)
        self.two_n = two_n
        self.triples = enumerate_triples(two_n)
        self._index = {t: k for k, t in enumerate(self.triples)}

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, t) -> bool:
        return t in self._index

    def rank(self, t: tuple[int, int, int]) -> int:
        try:
            return self._index[t]
        except (KeyError, TypeError):
            raise IndexError(
                f"{t!r} is not a valid triple for dimension {self.two_n}"
            ) from None

    def unrank(self, k: int) -> tuple[int, int, int]:
        if not isinstance(k, int) or not 0 <= k < len(self.triples):
            raise IndexError(
                f"triple index {k!r} out of range for dimension {self.two_n}"
            )
        return self.triples[k]


@lru_cache(maxsize=None)
def triple_indexer(two_n: int) -> TripleIndexer:
    """Cached indexer, one per ambient dimension."""
    return TripleIndexer(two_n)


def rank_triple(t, two_n: int) -> int:
    return triple_indexer(two_n).rank(tuple(t))


def unrank_triple(k: int, two_n: int) -> tuple[int, int, int]:
    return triple_indexer(two_n).unrank(k)


def normalize_triple(i: int, j: int, k: int):
    """Sort (i, j, k), tracking the permutation parity.

    Returns (sign, sorted_triple), or (0, None) when two indices coincide.
    """
    sign = 1
    if i > j:
        i, j = j, i
        sign = -sign
    if j > k:
        j, k = k, j
        sign = -sign
        if i > j:
            i, j = j, i
            sign = -sign
    if i == j or j == k:
        return 0, None
    return sign, (i, j, k)


@lru_cache(maxsize=None)
def triples_through(two_n: int) -> dict[int, list[tuple[int, int]]]:
    """For each index v, the list of (coordinate rank, position of v) over all
    triples containing v.  Used by sparse evaluations of the induced action."""
    idx = triple_indexer(two_n)
    out: dict[int, list[tuple[int, int]]] = {v: [] for v in range(1, two_n + 1)}
    for k, t in enumerate(idx.triples):
        for pos, v in enumerate(t):
            out[v].append((k, pos))
    return out
