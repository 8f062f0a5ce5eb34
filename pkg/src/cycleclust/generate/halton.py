"""Halton low-discrepancy sequences on the first primes."""

from __future__ import annotations

import numpy as np


def first_primes(count: int) -> list[int]:
    primes = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return primes


def _radical_inverse(base: int, index: int) -> float:
    result = 0.0
    frac = 1.0 / base
    while index > 0:
        result += (index % base) * frac
        index //= base
        frac /= base
    return result


def low_discrepancy_points(count: int, dim: int, lo: float, hi: float) -> np.ndarray:
    """`count` Halton points scaled to [lo, hi]^dim, starting at index 1."""
    if count < 1 or dim < 1:
        raise ValueError("count and dim must be positive")
    if not lo < hi:
        raise ValueError("need lo < hi")
    primes = first_primes(dim)
    unit = np.array([[_radical_inverse(p, k) for p in primes]
                     for k in range(1, count + 1)])
    return lo + (hi - lo) * unit
