"""Small exact number-theoretic helpers shared across modules."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial


@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Bernoulli number B_k with the convention B_1 = -1/2."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return Fraction(1)
    if k == 1:
        return Fraction(-1, 2)
    if k % 2:
        return Fraction(0)
    # sum_{j<k} C(k+1, j) B_j = -(k+1) B_k
    total = sum(comb(k + 1, j) * bernoulli(j) for j in range(k))
    return -total / (k + 1)


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def sigma(k: int, n: int) -> int:
    """Divisor power sum sigma_k(n)."""
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    """p(n) via Euler's pentagonal recurrence."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total = 0
    j = 1
    while True:
        g1 = j * (3 * j - 1) // 2
        if g1 > n:
            break
        sign = 1 if j % 2 else -1
        total += sign * partition_count(n - g1)
        g2 = j * (3 * j + 1) // 2
        if g2 <= n:
            total += sign * partition_count(n - g2)
        j += 1
    return total


def euler_product(N: int) -> list[int]:
    """Coefficients of prod_{k>=1} (1 - q^k) up to q^N."""
    coeffs = [0] * (N + 1)
    coeffs[0] = 1
    for k in range(1, N + 1):
        for n in range(N, k - 1, -1):
            coeffs[n] -= coeffs[n - k]
    return coeffs


def falling(n: int, k: int) -> int:
    """Falling factorial n (n-1) ... (n-k+1)."""
    out = 1
    for j in range(k):
        out *= n - j
    return out


__all__ = [
    "bernoulli", "double_factorial", "sigma", "partition_count",
    "euler_product", "falling", "factorial", "comb",
]
