"""Prime generation, factorization and the squarefree/Moebius stream.

Everything downstream is indexed either by primes p (the reduction primes)
or by squarefree integers k (the inclusion-exclusion index), so this module
keeps both cheap: a segmented sieve for primes and a smallest-prime-factor
sieve for the squarefree stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

DEFAULT_SEGMENT = 1 << 20
MAX_SIEVE_LIMIT = 10**10

# Witnesses making Miller-Rabin deterministic for n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_LIMIT = 10**4


class CapacityError(Exception):
    """An input exceeds the configured size limits."""


def _simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (plain in-memory sieve)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_primes(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT) -> Iterator[int]:
    """Yield the primes in [lo, hi] in increasing order.

    Segmented: memory is O(segment_size + sqrt(hi)), never O(hi).
    """
    if hi > MAX_SIEVE_LIMIT:
        raise CapacityError(f"sieve bound {hi} exceeds limit {MAX_SIEVE_LIMIT}")
    if hi < 2 or hi < lo:
        return
    lo = max(lo, 2)
    base = _simple_sieve(math.isqrt(hi))
    for seg_lo in range(lo, hi + 1, segment_size):
        seg_hi = min(seg_lo + segment_size - 1, hi)
        flags = np.ones(seg_hi - seg_lo + 1, dtype=bool)
        if seg_lo == 1:
            flags[0] = False
        for p in base:
            p = int(p)
            start = max(p * p, ((seg_lo + p - 1) // p) * p)
            if start > seg_hi:
                continue
            flags[start - seg_lo :: p] = False
        if seg_lo <= 1:
            flags[: 2 - seg_lo] = False
        for idx in np.flatnonzero(flags):
            yield seg_lo + int(idx)


@dataclass(frozen=True)
class PrimeRange:
    """A closed range [lo, hi]; iterating yields exactly the primes inside."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty range: lo={self.lo} > hi={self.hi}")

    def __iter__(self) -> Iterator[int]:
        return sieve_primes(self.lo, self.hi)


@dataclass(frozen=True)
class SquarefreeTerm:
    """A squarefree index k with its Moebius value and prime factors."""

    k: int
    mu: int
    factors: tuple[int, ...]


def smallest_factor_table(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n, for 2 <= n <= limit."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            view = spf[p * p :: p]
            view[view == 0] = p
    rest = np.flatnonzero(spf[2:] == 0) + 2
    spf[rest] = rest
    return spf


def squarefree_stream(limit: int) -> Iterator[SquarefreeTerm]:
    """Yield every squarefree k <= limit, increasing, with mu(k) and factors."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    yield SquarefreeTerm(1, 1, ())
    if limit < 2:
        return
    spf = smallest_factor_table(limit)
    for k in range(2, limit + 1):
        n = k
        factors = []
        squarefree = True
        while n > 1:
            p = int(spf[n])
            n //= p
            if n % p == 0:
                squarefree = False
                break
            factors.append(p)
        if squarefree:
            yield SquarefreeTerm(k, -1 if len(factors) % 2 else 1, tuple(factors))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for every 64-bit input."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(int(p) for p in _simple_sieve(_TRIAL_LIMIT))


def _pollard_rho(n: int) -> int:
    """A nontrivial factor of composite odd n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    seed = 1
    while True:
        y, c, m = 2 + seed, 1 + seed, 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
        seed += 1


def factorize(n: int) -> list[int]:
    """Prime factors of n >= 1 with multiplicity, sorted."""
    if n < 1:
        raise ValueError("factorize requires n >= 1")
    factors: list[int] = []
    for p in _trial_primes():
        if p * p > n:
            break
        while n % p == 0:
            factors.append(p)
            n //= p
    if n > 1:
        stack = [n]
        while stack:
            m = stack.pop()
            if is_prime(m):
                factors.append(m)
            else:
                d = _pollard_rho(m)
                stack.append(d)
                stack.append(m // d)
    return sorted(factors)


def factor_counts(n: int) -> dict[int, int]:
    """Prime -> multiplicity map for n >= 1."""
    counts: dict[int, int] = {}
    for p in factorize(n):
        counts[p] = counts.get(p, 0) + 1
    return counts
