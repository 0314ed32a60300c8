"""Finite words over {0, ..., m-1}, cylinders and the shift metric.

Words are immutable and store their symbols as ``bytes`` so that substring
search and slicing stay in C.  All user-facing indices are 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

from .errors import AlphabetMismatch, RecurError

MAX_ALPHABET = 256


class Indistinguishable(Enum):
    """Two finite prefixes that agree on all their common coordinates."""

    TOKEN = "indistinguishable"

    def __repr__(self) -> str:
        return "Indistinguishable"


INDISTINGUISHABLE = Indistinguishable.TOKEN


@dataclass(frozen=True)
class Word:
    symbols: bytes
    m: int = 2

    def __post_init__(self):
        if not isinstance(self.symbols, bytes):
            object.__setattr__(self, "symbols", bytes(self.symbols))
        if not 2 <= self.m <= MAX_ALPHABET:
            raise RecurError(f"alphabet size must be in [2, {MAX_ALPHABET}], got {self.m}")
        if self.symbols and max(self.symbols) >= self.m:
            raise RecurError(f"symbol {max(self.symbols)} outside alphabet of size {self.m}")

    @classmethod
    def empty(cls, m: int = 2) -> "Word":
        return cls(b"", m)

    @classmethod
    def of(cls, symbols: Iterable[int], m: int = 2) -> "Word":
        return cls(bytes(symbols), m)

    @classmethod
    def parse(cls, text: str, m: int = 2) -> "Word":
        """Inverse of :meth:`format`; ``""`` and ``"eps"`` give the empty word."""
        text = text.strip()
        if text in ("", "eps"):
            return cls(b"", m)
        if "," in text or m > 10:
            return cls(bytes(int(s) for s in text.split(",")), m)
        return cls(bytes(int(c) for c in text), m)

    def format(self, cli: bool = False) -> str:
        if not self.symbols:
            return "eps" if cli else ""
        if self.m <= 10:
            return "".join(str(s) for s in self.symbols)
        return ",".join(str(s) for s in self.symbols)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Word({self.format(cli=True)!r}, m={self.m})"

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.symbols[i], self.m)
        return self.symbols[i]

    def __add__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __lt__(self, other: "Word") -> bool:
        return self.symbols < other.symbols


def _check_same(u: Word, v: Word) -> None:
    if u.m != v.m:
        raise AlphabetMismatch(f"alphabet sizes differ: {u.m} vs {v.m}")


def concat(u: Word, v: Word) -> Word:
    _check_same(u, v)
    return Word(u.symbols + v.symbols, u.m)


def prefix(w: Word, n: int) -> Word:
    """w_1 ... w_n (requires 1 <= n <= |w|)."""
    if not 1 <= n <= len(w):
        raise RecurError(f"prefix length {n} out of range for word of length {len(w)}")
    return Word(w.symbols[:n], w.m)


def suffix(w: Word, n: int) -> Word:
    """w_{|w|-n+1} ... w_{|w|} (requires 1 <= n <= |w|)."""
    if not 1 <= n <= len(w):
        raise RecurError(f"suffix length {n} out of range for word of length {len(w)}")
    return Word(w.symbols[len(w) - n:], w.m)


def subword_occurrences(v: Word, w: Word) -> list[int]:
    """1-based start positions of every (possibly overlapping) occurrence of v in w."""
    _check_same(v, w)
    if len(v) == 0:
        raise RecurError("pattern must be non-empty")
    out = []
    hay, pat = w.symbols, v.symbols
    i = hay.find(pat)
    while i >= 0:
        out.append(i + 1)
        i = hay.find(pat, i + 1)
    return out


def metric_distance(x: Word, y: Word) -> Union[float, Indistinguishable]:
    """exp(-i) where i is the first (1-based) index at which x and y differ."""
    _check_same(x, y)
    a, b = x.symbols, y.symbols
    for i in range(min(len(a), len(b))):
        if a[i] != b[i]:
            return math.exp(-(i + 1))
    return INDISTINGUISHABLE
