"""Words, cylinders and Birkhoff sums on the full shift over ``d`` symbols.

Symbols are the integers ``1..d``.  The empty word stands for the cylinder
equal to the whole shift space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import EnumerationTooLarge

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class Word:
    symbols: tuple[int, ...]
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"alphabet size must be positive, got {self.d}")
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        for s in self.symbols:
            if not 1 <= s <= self.d:
                raise ValueError(f"symbol {s} outside alphabet 1..{self.d}")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, k):
        return self.symbols[k]

    def __add__(self, other: "Word") -> "Word":
        if other.d != self.d:
            raise ValueError("cannot concatenate words over different alphabets")
        return Word(self.symbols + other.symbols, self.d)

    def rotations(self) -> list["Word"]:
        n = len(self.symbols)
        return [Word(self.symbols[k:] + self.symbols[:k], self.d) for k in range(max(n, 1))]

    def canonical_rotation(self) -> "Word":
        """Lexicographically least rotation."""
        return min(self.rotations(), key=lambda w: w.symbols)

    def __str__(self):
        return "<" + ",".join(map(str, self.symbols)) + ">"


def as_word(word, d: int | None = None) -> Word:
    if isinstance(word, Word):
        return word
    symbols = tuple(word)
    if d is None:
        d = max(symbols, default=1)
    return Word(symbols, d)


def check_cap(d: int, n: int, cap: int = DEFAULT_CAP) -> int:
    count = d**n
    if count > cap:
        raise EnumerationTooLarge(count, cap)
    return count


def enumerate_words(d: int, n: int, cap: int = DEFAULT_CAP) -> list[Word]:
    """All ``d**n`` words of length ``n`` in lexicographic order."""
    if d < 2:
        raise ValueError("alphabet needs at least two symbols")
    if n < 0:
        raise ValueError("depth must be non-negative")
    check_cap(d, n, cap)
    words = [()]
    for _ in range(n):
        words = [w + (s,) for w in words for s in range(1, d + 1)]
    return [Word(w, d) for w in words]


def birkhoff_sum(values_per_symbol: Sequence[float], word) -> float:
    """Birkhoff sum ``sum_k a[word_k]`` of a potential depending on the first symbol."""
    word = as_word(word, len(values_per_symbol))
    if len(word) == 0:
        raise ValueError("Birkhoff sum of empty word undefined")
    if word.d != len(values_per_symbol):
        raise ValueError("potential length does not match the alphabet size")
    return math.fsum(values_per_symbol[s - 1] for s in word)


def lyndon_words(d: int, n: int) -> Iterator[tuple[int, ...]]:
    """Duval's algorithm: aperiodic necklace representatives of length 1..n, lexicographic."""
    w = [0]
    while w:
        yield tuple(s + 1 for s in w)
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == d - 1:
            w.pop()
        if w:
            w[-1] += 1


def periodic_orbit_sums(
    values_per_symbol: Sequence[float], max_period: int, cap: int = DEFAULT_CAP
) -> dict[Word, float]:
    """Birkhoff sums over every primitive periodic orbit of period at most ``max_period``.

    Each orbit is keyed by its lexicographically least rotation, so a non-primitive
    word such as ``<1,1>`` is represented by ``<1>``.
    """
    if max_period < 1:
        raise ValueError("max_period must be at least 1")
    d = len(values_per_symbol)
    check_cap(d, max_period, cap)
    return {
        Word(w, d): math.fsum(values_per_symbol[s - 1] for s in w)
        for w in lyndon_words(d, max_period)
    }
