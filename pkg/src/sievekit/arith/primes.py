"""Prime generation by a segmented sieve of Eratosthenes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

SEGMENT = 1 << 20


@dataclass(frozen=True)
class PrimeRange:
    lo: int
    hi: int
    excluded: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "excluded", frozenset(int(p) for p in self.excluded))
        if self.lo < 0 or self.hi < self.lo - 1:
            raise ValueError(f"bad prime range [{self.lo}, {self.hi}]")
        if self.hi > 2 ** 63:
            raise ValueError("upper end exceeds 2^63")


def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit via a plain sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(limit + 1, dtype=bool)
    mark[:2] = False
    mark[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if mark[p]:
            mark[p * p::2 * p] = False
    return np.flatnonzero(mark).astype(np.int64)


def prime_segments(lo: int, hi: int, segment: int = SEGMENT) -> Iterator[np.ndarray]:
    """Yield ascending arrays of the primes in [lo, hi], one per segment."""
    lo = max(lo, 2)
    if hi < lo:
        return
    base = small_primes(math.isqrt(hi))
    for start in range(lo, hi + 1, segment):
        stop = min(start + segment, hi + 1)
        mark = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            mark[first - start::p] = False
        yield np.flatnonzero(mark).astype(np.int64) + start


def primes_array(rng: PrimeRange) -> np.ndarray:
    chunks = list(prime_segments(rng.lo, rng.hi))
    out = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    if rng.excluded:
        out = out[~np.isin(out, np.fromiter(rng.excluded, dtype=np.int64))]
    return out


def primes_in(rng: PrimeRange) -> Iterator[int]:
    for chunk in prime_segments(rng.lo, rng.hi):
        for p in chunk.tolist():
            if p not in rng.excluded:
                yield p


def prime_pi(x: int) -> int:
    return sum(len(c) for c in prime_segments(2, x))
