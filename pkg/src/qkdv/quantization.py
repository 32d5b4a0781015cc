"""Quantization g -> g-bar of differential polynomials to operators on Lambda.

A monomial u_{a1}...u_{an} is sent to the normal-ordered sum over k in Z^n with
sum(k) = 0 of prod (i k_j)^{a_j} P_{k_j}, where P_k = p_k for k > 0,
P_0 = c and P_k = -k d/dp_{-k} for k < 0.

Nothing infinite is ever built.  Each slot of a monomial is either a zero mode
(factor c, only allowed when a_j = 0), a creator or an annihilator.  Acting on
p_lambda the annihilators pick a sub-multiset nu of the parts of lambda and the
creators redistribute |nu| as an ordered composition.  All integer work is done
per monomial and cached; the overall phase of a monomial is i^{|a|}.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product as iproduct
from math import factorial, prod

from .arith import bernoulli, double_factorial, euler_product, falling
from .diffpoly import DiffPoly
from .partitions import (LambdaElement, Partition, canonical_sorted, inner_product,
                         partitions_of, schur, z_factor)
from .quasimodular import QMPoly, QSeries, eisenstein_qm
from .scalar import Scalar, ZERO, scalar_from_json, scalar_to_json

_PHASE = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _phase_scalar(a_sum: int, by_cpower: dict[int, int]) -> Scalar:
    re, im = _PHASE[a_sum % 4]
    return Scalar({(z, 0, 0): (Fraction(v * re), Fraction(v * im))
                   for z, v in by_cpower.items()})


# -- combinatorial building blocks ------------------------------------------

@lru_cache(maxsize=None)
def _splits(a: tuple[int, ...]) -> tuple[tuple[int, tuple, tuple, int], ...]:
    """Ways to send the slots of ``a`` to (zero, creator, annihilator) modes.

    Returns ``(z, P, N, mult)`` with P and N sorted index tuples and ``mult`` the
    number of slot-level assignments giving that split.  Splits where exactly
    one of P, N is empty cannot conserve momentum and are dropped.
    """
    counts = sorted(Counter(a).items())
    per_value = []
    for v, e in counts:
        opts = []
        for z in range(e + 1 if v == 0 else 1):
            for p in range(e - z + 1):
                n = e - z - p
                mult = factorial(e) // (factorial(z) * factorial(p) * factorial(n))
                opts.append((z, (v,) * p, (v,) * n, mult))
        per_value.append(opts)
    out = []
    for choice in iproduct(*per_value):
        z = sum(c[0] for c in choice)
        P = tuple(x for c in choice for x in c[1])
        N = tuple(x for c in choice for x in c[2])
        if bool(P) != bool(N):
            continue
        out.append((z, P, N, prod(c[3] for c in choice)))
    return tuple(out)


@lru_cache(maxsize=None)
def _arrangement_sum(S: tuple[int, ...], nu: tuple[int, ...]) -> int:
    """Sum over distinct arrangements of the multiset ``nu`` on slots with exponents ``S``."""
    return sum(prod(x ** s for x, s in zip(perm, S)) for perm in set(permutations(nu)))


@lru_cache(maxsize=None)
def _creations(P: tuple[int, ...], w: int) -> dict[tuple[int, ...], int]:
    """Sum over compositions kappa of w into len(P) parts of prod kappa_j^{P_j}, grouped by sorted kappa."""
    t = len(P)
    out: dict[tuple[int, ...], int] = {}

    def rec(j: int, left: int, parts: tuple[int, ...], weight: int):
        if j == t - 1:
            val = weight * left ** P[j]
            key = tuple(sorted(parts + (left,), reverse=True))
            out[key] = out.get(key, 0) + val
            return
        for x in range(1, left - (t - 1 - j) + 1):
            rec(j + 1, left - x, parts + (x,), weight * x ** P[j])

    if t and w >= t:
        rec(0, w, (), 1)
    return {k: v for k, v in out.items() if v}


def _submultisets(lam: tuple[int, ...], t: int):
    """Yield (nu, falling-factorial weight, rest) for sub-multisets nu of lam with t parts."""
    items = sorted(Counter(lam).items(), reverse=True)

    def rec(idx: int, need: int, nu: tuple, weight: int, rest: tuple):
        if idx == len(items):
            if need == 0:
                yield nu, weight, rest
            return
        m, r = items[idx]
        for s in range(min(r, need) + 1):
            yield from rec(idx + 1, need - s, nu + (m,) * s, weight * falling(r, s),
                           rest + (m,) * (r - s))

    yield from rec(0, t, (), 1, ())


@lru_cache(maxsize=None)
def _apply_monomial(a: tuple[int, ...], lam: tuple[int, ...]) -> dict[tuple[tuple, int], int]:
    """Integer action of the monomial on p_lam: ``{(result partition, c-power): int}``.

    The true coefficient is this integer times i^{|a|}.
    """
    out: dict[tuple[tuple, int], int] = {}
    for z, P, N, mult in _splits(a):
        if not P:
            key = (lam, z)
            out[key] = out.get(key, 0) + mult
            continue
        sign = -1 if sum(N) % 2 else 1
        for nu, fall, rest in _submultisets(lam, len(N)):
            ann = _arrangement_sum(N, nu) * prod(nu) * fall
            if not ann:
                continue
            for kappa, cw in _creations(P, sum(nu)).items():
                res = tuple(sorted(rest + kappa, reverse=True))
                key = (res, z)
                out[key] = out.get(key, 0) + sign * mult * ann * cw
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _diag_kernel(a: tuple[int, ...], nu: tuple[int, ...]) -> int:
    """Integer weight W_a(nu) with which annihilating and recreating nu contributes to a diagonal entry."""
    t = len(nu)
    total = 0
    for z, P, N, mult in _splits(a):
        if len(P) != t or len(N) != t:
            continue
        sign = -1 if sum(N) % 2 else 1
        total += sign * mult * prod(nu) * _arrangement_sum(N, nu) * _arrangement_sum(P, nu)
    return total


@lru_cache(maxsize=None)
def _containment(n: int, t: int) -> dict[tuple[int, ...], int]:
    """F(n, nu) = sum over lam |- n containing nu (len t) of prod_m r_m(lam)!/(r_m(lam)-r_m(nu))!."""
    out: dict[tuple[int, ...], int] = {}
    for lam in partitions_of(n):
        for nu, fall, _ in _submultisets(tuple(lam), t):
            out[nu] = out.get(nu, 0) + fall
    return out


@lru_cache(maxsize=None)
def _monomial_diagonal(a: tuple[int, ...], lam: tuple[int, ...]) -> dict[int, int]:
    out: dict[int, int] = {}
    if all(x == 0 for x in a):
        out[len(a)] = 1
    for t in range(1, len(a) // 2 + 1):
        z = len(a) - 2 * t
        acc = 0
        for nu, fall, _ in _submultisets(lam, t):
            acc += fall * _diag_kernel(a, nu)
        if acc:
            out[z] = out.get(z, 0) + acc
    return out


@lru_cache(maxsize=None)
def _monomial_trace(a: tuple[int, ...], n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    if all(x == 0 for x in a):
        out[len(a)] = len(partitions_of(n))
    for t in range(1, len(a) // 2 + 1):
        z = len(a) - 2 * t
        acc = 0
        for nu, F in _containment(n, t).items():
            acc += F * _diag_kernel(a, nu)
        if acc:
            out[z] = out.get(z, 0) + acc
    return out


# -- matrices ----------------------------------------------------------------

class OperatorMatrix:
    """Matrix of an operator on Lambda_n in the p_lambda basis (column = input)."""

    def __init__(self, n: int, entries: dict | None = None):
        self.n = n
        self.basis = canonical_sorted(partitions_of(n))
        self.entries: dict[tuple[tuple, tuple], Scalar] = {
            (tuple(r), tuple(c)): v for (r, c), v in (entries or {}).items() if v}

    def entry(self, row, col) -> Scalar:
        return self.entries.get((tuple(row), tuple(col)), ZERO)

    def __eq__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return self.n == other.n and self.entries == other.entries

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return OperatorMatrix(self.n, out)

    def __neg__(self):
        return OperatorMatrix(self.n, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        by_row: dict[tuple, list] = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        out: dict = {}
        for (r, m), v in self.entries.items():
            for c, w in by_row.get(m, ()):
                key = (r, c)
                p = v * w
                out[key] = out[key] + p if key in out else p
        return OperatorMatrix(self.n, out)

    def map_scalars(self, fn) -> "OperatorMatrix":
        return OperatorMatrix(self.n, {k: fn(v) for k, v in self.entries.items()})

    def is_zero(self) -> bool:
        return not self.entries

    def is_diagonal(self) -> bool:
        return all(r == c for r, c in self.entries)

    def is_z_symmetric(self) -> bool:
        """Self-adjointness for (p_l, p_m) = z_l delta: M[l, m] z_l == M[m, l] z_m."""
        for (r, c), v in self.entries.items():
            if v.scale(z_factor(r)) != self.entry(c, r).scale(z_factor(c)):
                return False
        return True

    def trace(self) -> Scalar:
        total = ZERO
        for lam in self.basis:
            total = total + self.entry(lam, lam)
        return total

    def rows(self) -> list[list[Scalar]]:
        return [[self.entry(r, c) for c in self.basis] for r in self.basis]

    def to_json(self) -> dict:
        entries = []
        for r in self.basis:
            for c in self.basis:
                v = self.entries.get((tuple(r), tuple(c)))
                if v:
                    entries.append({"row": list(r), "col": list(c), "scalar": scalar_to_json(v)})
        return {"n": self.n, "basis_order": [list(b) for b in self.basis], "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> "OperatorMatrix":
        return cls(data["n"], {(tuple(e["row"]), tuple(e["col"])): scalar_from_json(e["scalar"])
                               for e in data["entries"]})

    def __repr__(self):
        return f"OperatorMatrix(n={self.n}, nnz={len(self.entries)})"


# -- operators ----------------------------------------------------------------

class PartitionFunction:
    """A function from partitions to Scalars, memoized."""

    def __init__(self, evaluator, name: str = "f"):
        self.evaluator = evaluator
        self.name = name
        self._memo: dict[tuple, Scalar] = {}

    def __call__(self, lam) -> Scalar:
        key = tuple(sorted(lam, reverse=True))
        if key not in self._memo:
            self._memo[key] = Scalar.coerce(self.evaluator(Partition(key)))
        return self._memo[key]

    def __repr__(self):
        return f"PartitionFunction({self.name})"


class QuantizedOperator:
    """The operator g-bar for a density g (never materialized as an infinite sum)."""

    def __init__(self, source: DiffPoly):
        self.source = source
        self._matrices: dict[int, OperatorMatrix] = {}

    def apply_partition(self, lam) -> dict[tuple, Scalar]:
        lam = tuple(sorted(lam, reverse=True))
        out: dict[tuple, Scalar] = {}
        for a, s in self.source.terms.items():
            grouped: dict[tuple, dict[int, int]] = {}
            for (res, z), v in _apply_monomial(a, lam).items():
                grouped.setdefault(res, {})[z] = v
            for res, by_c in grouped.items():
                val = s * _phase_scalar(sum(a), by_c)
                out[res] = out[res] + val if res in out else val
        return {k: v for k, v in out.items() if v}

    def diagonal(self, lam) -> Scalar:
        lam = tuple(sorted(lam, reverse=True))
        total = ZERO
        for a, s in self.source.terms.items():
            d = _monomial_diagonal(a, lam)
            if d:
                total = total + s * _phase_scalar(sum(a), d)
        return total

    def trace(self, n: int) -> Scalar:
        total = ZERO
        for a, s in self.source.terms.items():
            d = _monomial_trace(a, n)
            if d:
                total = total + s * _phase_scalar(sum(a), d)
        return total

    def __repr__(self):
        return f"QuantizedOperator({self.source})"


class DiagonalOperator:
    """Operator acting on p_lambda by a partition function (used for odd-k L_k)."""

    def __init__(self, func: PartitionFunction):
        self.func = func
        self.source = None
        self._matrices: dict[int, OperatorMatrix] = {}

    def apply_partition(self, lam) -> dict[tuple, Scalar]:
        lam = tuple(sorted(lam, reverse=True))
        v = self.func(lam)
        return {lam: v} if v else {}

    def diagonal(self, lam) -> Scalar:
        return self.func(lam)

    def trace(self, n: int) -> Scalar:
        total = ZERO
        for lam in partitions_of(n):
            total = total + self.func(lam)
        return total

    def __repr__(self):
        return f"DiagonalOperator({self.func.name})"


def quantize(g: DiffPoly) -> QuantizedOperator:
    return QuantizedOperator(g)


def apply(op, f: LambdaElement) -> LambdaElement:
    out: dict[tuple, Scalar] = {}
    for lam, coeff in f.terms.items():
        for res, v in op.apply_partition(lam).items():
            val = coeff * v
            out[res] = out[res] + val if res in out else val
    return LambdaElement._raw(out)


def matrix_on(op, n: int) -> OperatorMatrix:
    if n < 0:
        raise ValueError("n must be non-negative")
    cached = op._matrices.get(n)
    if cached is None:
        entries = {}
        for lam in partitions_of(n):
            for res, v in op.apply_partition(lam).items():
                entries[(res, tuple(lam))] = v
        cached = OperatorMatrix(n, entries)
        op._matrices[n] = cached
    return cached


def trace_on(op, n: int) -> Scalar:
    if n < 0:
        raise ValueError("n must be non-negative")
    return op.trace(n)


def diagonal(op, lam) -> Scalar:
    return op.diagonal(lam)


def _normalize_by_partitions(values: list[Scalar], N: int) -> QSeries:
    eul = euler_product(N)
    out = []
    for n in range(N + 1):
        acc = ZERO
        for j in range(n + 1):
            if eul[j] and values[n - j]:
                acc = acc + values[n - j].scale(eul[j])
        out.append(acc)
    return QSeries(out, N)


def q_series(op, N: int) -> QSeries:
    """{op}_q = sum q^n tr op|Lambda_n / sum q^n p(n), to order q^N."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return _normalize_by_partitions([op.trace(n) for n in range(N + 1)], N)


def q_bracket(f: PartitionFunction, N: int) -> QSeries:
    """<f>_q = sum f(lam) q^|lam| / sum q^|lam|, to order q^N."""
    if N < 0:
        raise ValueError("N must be non-negative")
    values = []
    for n in range(N + 1):
        acc = ZERO
        for lam in partitions_of(n):
            acc = acc + f(lam)
        values.append(acc)
    return _normalize_by_partitions(values, N)


# -- distinguished functions on partitions -------------------------------------

def qk_function(k: int) -> PartitionFunction:
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return PartitionFunction(lambda lam: Scalar.const(1), "Q_0")
    beta = (Fraction(1, 2 ** (k - 1)) - 1) * bernoulli(k) / factorial(k)
    half = Fraction(1, 2)

    def q(lam):
        total = Fraction(0)
        for i, part in enumerate(lam, start=1):
            total += (part - i + half) ** (k - 1) - (-i + half) ** (k - 1)
        return Scalar.const(total / factorial(k - 1) + beta)

    return PartitionFunction(q, f"Q_{k}")


def moment_sk(k: int) -> PartitionFunction:
    if k < 1:
        raise ValueError("k must be at least 1")
    const = -bernoulli(k) / (2 * k)
    return PartitionFunction(lambda lam: Scalar.const(const + sum(p ** (k - 1) for p in lam)),
                             f"S_{k}")


def hook_tk(k: int) -> PartitionFunction:
    if k < 2:
        raise ValueError("k must be at least 2")
    qs = [qk_function(i) for i in range(k + 1)]
    pref = Fraction(factorial(k - 2), 2)

    def t(lam):
        total = ZERO
        for i in range(k + 1):
            term = qs[i](lam) * qs[k - i](lam)
            total = total - term if i % 2 else total + term
        return total.scale(pref)

    return PartitionFunction(t, f"T_{k}")


def hopf_eigenvalue(k: int) -> PartitionFunction:
    """E_k^[0](lam) = sum_j c^{k+2-j}/(k+2-j)! Q_j(lam)."""
    if k < -2:
        raise ValueError("k must be at least -2")
    qs = [qk_function(j) for j in range(k + 3)]

    def e(lam):
        total = ZERO
        for j in range(k + 3):
            total = total + qs[j](lam) * Scalar.monomial(c=k + 2 - j,
                                                         value=Fraction(1, factorial(k + 2 - j)))
        return total

    return PartitionFunction(e, f"E_{k}^[0]")


def infinite_eigenvalue(k: int) -> PartitionFunction:
    """E_k^[inf](lam) = (c^2/2) delta_{k,0} + S_{2k+2}(lam) / ((-4)^k (2k+1)!!)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    s = moment_sk(2 * k + 2)
    denom = (-4) ** k * double_factorial(2 * k + 1)
    extra = Scalar.monomial(c=2, value=Fraction(1, 2)) if k == 0 else ZERO

    def e(lam):
        return extra + s(lam).scale(Fraction(1, denom))

    return PartitionFunction(e, f"E_{k}^[inf]")


def l_operator(k: int):
    """L_k = -B_k/2k + sum_j j^{k-1} p_j d/dp_j.

    For even k this is the quantization of -B_k/2k - (i^k/2) u0 u_{k-2}, corrected
    by -c^2/2 at k = 2 since u0^2 quantizes with a c^2 term.  For odd k the
    u-form quantizes to zero, so the operator is assembled diagonally.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k % 2:
        return DiagonalOperator(moment_sk(k))
    src = DiffPoly.const(-bernoulli(k) / (2 * k))
    src = src + DiffPoly.u(0, k - 2).scale(Fraction(-(-1) ** (k // 2), 2))
    if k == 2:
        src = src - DiffPoly.const(Scalar.monomial(c=2, value=Fraction(1, 2)))
    return QuantizedOperator(src)


def diagonal_function(op, basis: str = "monomial") -> PartitionFunction:
    """lam -> (b_lam, op b_lam) / (b_lam, b_lam) for b = p (monomial) or s (schur)."""
    if basis == "monomial":
        return PartitionFunction(lambda lam: op.diagonal(lam), f"diag_p({op!r})")
    if basis == "schur":
        def f(lam):
            s = schur(tuple(lam))
            return inner_product(s, apply(op, s)) / inner_product(s, s)
        return PartitionFunction(f, f"diag_s({op!r})")
    raise ValueError("basis must be 'monomial' or 'schur'")


# -- the pairing formula -------------------------------------------------------

def _matchings(items: tuple[int, ...]):
    if not items:
        yield ()
        return
    first = items[0]
    for j in range(1, len(items)):
        rest = items[1:j] + items[j + 1:]
        for m in _matchings(rest):
            yield ((first, items[j]),) + m


@lru_cache(maxsize=None)
def _pair_factor(ai: int, aj: int, reduced: bool) -> QMPoly:
    total = ai + aj
    if total % 2:
        return QMPoly()
    # s = i^{a_A} ((-1)^{a_i} + (-1)^{a_j}) = 2 (-1)^{a_A/2 + a_i}
    s = 2 * (-1) ** (total // 2 + ai)
    k = total + 2
    f = eisenstein_qm(k)
    if not reduced:
        f = f + QMPoly.const(bernoulli(k) / (2 * k))
    return f.scale(s)


@lru_cache(maxsize=None)
def _pairing_cached(a: tuple[int, ...], reduced: bool) -> QMPoly:
    n = len(a)
    forced = [i for i in range(n) if a[i] != 0]
    free = [i for i in range(n) if a[i] == 0]
    total = QMPoly()
    for r in range(len(free) + 1):
        if (len(forced) + r) % 2:
            continue
        m = (len(forced) + r) // 2
        cpow = QMPoly.const(Scalar.monomial(c=n - 2 * m))
        for extra in combinations(free, r):
            B = tuple(sorted(forced + list(extra)))
            for matching in _matchings(B):
                term = cpow
                for i, j in matching:
                    term = term * _pair_factor(a[i], a[j], reduced)
                    if not term:
                        break
                total = total + term
    return total


def pairing_qseries(a, reduced: bool = False) -> QMPoly:
    """The q-series of u_{a1}...u_{an}-bar through the pair-partition formula."""
    return _pairing_cached(tuple(sorted(a)), bool(reduced))


__all__ = [
    "QuantizedOperator", "DiagonalOperator", "OperatorMatrix", "PartitionFunction",
    "quantize", "apply", "matrix_on", "trace_on", "diagonal", "q_series", "q_bracket",
    "qk_function", "moment_sk", "hook_tk", "l_operator", "diagonal_function",
    "pairing_qseries", "hopf_eigenvalue", "infinite_eigenvalue",
]
