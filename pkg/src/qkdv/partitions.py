"""Partitions and the ring of power-sum polynomials Lambda = Q[p1, p2, ...].

Elements of Lambda are stored in the monomial basis ``p_lambda`` as a sparse
map from partitions to :class:`~qkdv.scalar.Scalar` coefficients.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .scalar import Scalar, ZERO, format_rational, scalar_from_json, scalar_to_json


class Partition(tuple):
    """Weakly decreasing tuple of positive integers.

    Plain tuples with the same parts compare and hash equal, so hot loops may
    use bare tuples as dictionary keys.
    """

    def __new__(cls, parts=()):
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if parts and parts[-1] <= 0:
            raise ValueError(f"partition parts must be positive: {parts}")
        return super().__new__(cls, parts)

    @property
    def parts(self) -> tuple[int, ...]:
        return tuple(self)

    def size(self) -> int:
        return sum(self)

    def length(self) -> int:
        return len(self)

    def multiplicity(self, m: int) -> int:
        return self.count(m)

    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self))

    def conjugate(self) -> "Partition":
        if not self:
            return Partition()
        return Partition(sum(1 for p in self if p > i) for i in range(self[0]))

    def __repr__(self) -> str:
        return f"Partition({tuple(self)!r})"


@lru_cache(maxsize=None)
def _partitions(n: int, max_part: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def partitions_of(n: int) -> tuple[Partition, ...]:
    """All partitions of ``n`` in reverse lexicographic order, e.g. (4), (3,1), (2,2), ..."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return tuple(Partition(p) for p in _partitions(n, n))


def partitions_upto(N: int):
    for n in range(N + 1):
        yield from partitions_of(n)


@lru_cache(maxsize=None)
def z_factor(lam: tuple[int, ...]) -> int:
    """z_lambda = prod_m r_m! m^{r_m}."""
    out = 1
    for m, r in Counter(lam).items():
        out *= factorial(r) * m ** r
    return out


class LambdaElement:
    """Sparse element of Lambda: ``{partition: coefficient of p_partition}``."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict[tuple[int, ...], Scalar] = {}
        if terms:
            for lam, coeff in terms.items():
                coeff = Scalar.coerce(coeff)
                if coeff:
                    self.terms[Partition(lam)] = coeff

    @classmethod
    def p(cls, *parts: int) -> "LambdaElement":
        return cls({Partition(parts): Scalar.const(1)})

    @classmethod
    def one(cls) -> "LambdaElement":
        return cls.p()

    @classmethod
    def _raw(cls, terms: dict) -> "LambdaElement":
        out = cls.__new__(cls)
        out.terms = {lam: c for lam, c in terms.items() if c}
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, LambdaElement):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other: "LambdaElement") -> "LambdaElement":
        out = dict(self.terms)
        for lam, c in other.terms.items():
            out[lam] = out[lam] + c if lam in out else c
        return LambdaElement._raw(out)

    def __neg__(self):
        return LambdaElement._raw({lam: -c for lam, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "LambdaElement":
        if isinstance(s, Scalar):
            return LambdaElement._raw({lam: c * s for lam, c in self.terms.items()})
        s = Fraction(s)
        return LambdaElement._raw({lam: c.scale(s) for lam, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, LambdaElement):
            return self.scale(other)
        out: dict = {}
        for l1, c1 in self.terms.items():
            for l2, c2 in other.terms.items():
                lam = Partition(l1 + l2)
                prod = c1 * c2
                out[lam] = out[lam] + prod if lam in out else prod
        return LambdaElement._raw(out)

    __rmul__ = scale

    def coefficient(self, lam) -> Scalar:
        return self.terms.get(tuple(lam), ZERO)

    def weight_decompose(self) -> dict[int, "LambdaElement"]:
        out: dict[int, dict] = {}
        for lam, c in self.terms.items():
            out.setdefault(sum(lam), {})[lam] = c
        return {n: LambdaElement._raw(t) for n, t in sorted(out.items())}

    def is_homogeneous(self, n: int) -> bool:
        return all(sum(lam) == n for lam in self.terms)

    def __repr__(self):
        return f"LambdaElement({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for lam in sorted(self.terms, key=_canonical_key):
            mono = "*".join(f"p{j}" for j in lam) or "1"
            parts.append(f"({self.terms[lam]})*{mono}")
        return " + ".join(parts)


def _canonical_key(lam):
    # by size, then reverse lexicographic inside each size
    return (sum(lam), tuple(-x for x in lam))


def canonical_sorted(parts):
    return sorted(parts, key=_canonical_key)


def inner_product(f: LambdaElement, g: LambdaElement) -> Scalar:
    """Bilinear extension of (p_lambda, p_mu) = z_lambda delta_{lambda, mu}."""
    total = ZERO
    for lam, c in f.terms.items():
        d = g.terms.get(lam)
        if d is not None:
            total = total + (c * d).scale(z_factor(lam))
    return total


@lru_cache(maxsize=None)
def complete_homogeneous(k: int) -> LambdaElement:
    """h_k = sum_{lambda |- k} p_lambda / z_lambda (coefficient of y^k in exp(sum p_j y^j / j))."""
    if k < 0:
        return LambdaElement()
    return LambdaElement._raw({
        lam: Scalar.const(Fraction(1, z_factor(lam))) for lam in partitions_of(k)
    })


@lru_cache(maxsize=None)
def schur(lam: tuple[int, ...]) -> LambdaElement:
    """Schur function via the Jacobi-Trudi determinant det[h_{lam_i - i + j}]."""
    lam = Partition(lam)
    n = len(lam)
    if n == 0:
        return LambdaElement.one()
    # Laplace expansion along rows, memoized on the set of columns already used
    memo: dict[frozenset, LambdaElement] = {}

    def minor(row: int, used: frozenset) -> LambdaElement:
        if row == n:
            return LambdaElement.one()
        if used in memo:
            return memo[used]
        total = LambdaElement()
        free = [j for j in range(n) if j not in used]
        for pos, j in enumerate(free):
            idx = lam[row] - row + j
            if idx < 0:
                continue
            sub = minor(row + 1, used | {j})
            if not sub:
                continue
            term = complete_homogeneous(idx) * sub
            total = total - term if pos % 2 else total + term
        memo[used] = total
        return total

    return minor(0, frozenset())


def lambda_to_json(f: LambdaElement) -> list[dict]:
    return [
        {"partition": list(lam), "scalar": scalar_to_json(f.terms[lam])}
        for lam in canonical_sorted(f.terms)
    ]


def lambda_from_json(data: list[dict]) -> LambdaElement:
    return LambdaElement({tuple(rec["partition"]): scalar_from_json(rec["scalar"]) for rec in data})


__all__ = [
    "Partition", "partitions_of", "partitions_upto", "z_factor", "LambdaElement",
    "inner_product", "complete_homogeneous", "schur", "lambda_to_json",
    "lambda_from_json", "canonical_sorted", "format_rational",
]
