"""Differential polynomials Q[u0, u1, ...] with Scalar coefficients.

A monomial ``u_{a1} ... u_{an}`` is stored as the ascending tuple
``(a1, ..., an)``; the empty tuple is the constant monomial.  Weights follow
the convention u_i -> i + 1, c -> +1, eps -> -1, mu -> -1.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .arith import bernoulli
from .errors import NotInImage
from .scalar import Scalar, ZERO, scalar_from_json, scalar_to_json

Monomial = tuple[int, ...]


def mono_weight(m: Monomial) -> int:
    return sum(m) + len(m)


def mono_parity(m: Monomial) -> int:
    return sum(m) % 2


def _mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    out = []
    for idx, e in sorted(Counter(m).items()):
        out.append(f"u{idx}" if e == 1 else f"u{idx}^{e}")
    return " ".join(out)


class DiffPoly:
    """Immutable sparse differential polynomial ``{monomial: Scalar}``."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict[Monomial, Scalar] = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = Scalar.coerce(coeff)
                if coeff:
                    key = tuple(sorted(mono))
                    if key in self.terms:
                        coeff = self.terms[key] + coeff
                        if not coeff:
                            del self.terms[key]
                            continue
                    self.terms[key] = coeff

    @classmethod
    def _raw(cls, terms: dict) -> "DiffPoly":
        out = cls.__new__(cls)
        out.terms = {m: c for m, c in terms.items() if c}
        return out

    @classmethod
    def u(cls, *indices: int) -> "DiffPoly":
        """The monomial u_{i1} u_{i2} ... (``u()`` is the constant 1)."""
        return cls({tuple(sorted(indices)): Scalar.const(1)})

    @classmethod
    def const(cls, value) -> "DiffPoly":
        return cls({(): Scalar.coerce(value)})

    # -- ring structure -----------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            other = DiffPoly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return DiffPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            other = DiffPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return DiffPoly.const(other) - self

    def scale(self, s) -> "DiffPoly":
        if isinstance(s, Scalar):
            return DiffPoly._raw({m: c * s for m, c in self.terms.items()})
        s = Fraction(s)
        if s == 0:
            return DiffPoly()
        return DiffPoly._raw({m: c.scale(s) for m, c in self.terms.items()})

    def __mul__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                prod = c1 * c2
                out[m] = out[m] + prod if m in out else prod
        return DiffPoly._raw(out)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, x):
        return self.scale(Fraction(1) / Fraction(x))

    def __pow__(self, n: int) -> "DiffPoly":
        out = DiffPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    # -- inspection ---------------------------------------------------
    def coefficient(self, *indices: int) -> Scalar:
        return self.terms.get(tuple(sorted(indices)), ZERO)

    def u_degree(self) -> int:
        return max((len(m) for m in self.terms), default=-1)

    def max_index(self) -> int:
        return max((max(m) for m in self.terms if m), default=-1)

    def weights(self) -> set[int]:
        out = set()
        for m, c in self.terms.items():
            w = mono_weight(m)
            out.update(w + sw for sw in c.weights())
        return out

    def is_homogeneous(self, weight: int | None = None) -> bool:
        ws = self.weights()
        if not ws:
            return True
        if weight is None:
            return len(ws) == 1
        return ws == {weight}

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    def param_degree(self) -> int:
        return max((c.param_degree() for c in self.terms.values()), default=-1)

    def map_scalars(self, fn) -> "DiffPoly":
        return DiffPoly._raw({m: fn(c) for m, c in self.terms.items()})

    def subs(self, **values) -> "DiffPoly":
        """Specialize parameters (``c``, ``eps``, ``mu``) to rationals."""
        return self.map_scalars(lambda s: s.subs(**values))

    def coeff_of(self, var: str, power: int) -> "DiffPoly":
        return self.map_scalars(lambda s: s.coeff_of(var, power))

    def with_trunc(self, trunc: int | None) -> "DiffPoly":
        return self.map_scalars(lambda s: s.with_trunc(trunc))

    def partial(self, j: int) -> "DiffPoly":
        """d/du_j."""
        out: dict = {}
        for m, c in self.terms.items():
            e = m.count(j)
            if not e:
                continue
            pos = m.index(j)
            new = m[:pos] + m[pos + 1:]
            out[new] = out[new] + c.scale(e) if new in out else c.scale(e)
        return DiffPoly._raw(out)

    def variables(self) -> set[int]:
        return {i for m in self.terms for i in m}

    def __repr__(self):
        return f"DiffPoly({self})"

    def __str__(self):
        return render(self)


# -- derivations ------------------------------------------------------------

def _raise_index(m: Monomial) -> dict[Monomial, int]:
    """dx applied to a single monomial, as {monomial: integer coefficient}."""
    out: dict[Monomial, int] = {}
    for idx, e in Counter(m).items():
        pos = m.index(idx)
        new = tuple(sorted(m[:pos] + m[pos + 1:] + (idx + 1,)))
        out[new] = out.get(new, 0) + e
    return out


def dx(p: DiffPoly) -> DiffPoly:
    """The total derivative sum_i u_{i+1} d/du_i."""
    out: dict = {}
    for m, c in p.terms.items():
        for new, k in _raise_index(m).items():
            term = c.scale(k)
            out[new] = out[new] + term if new in out else term
    return DiffPoly._raw(out)


def dx_power(p: DiffPoly, n: int) -> DiffPoly:
    for _ in range(n):
        p = dx(p)
    return p


def dx_invert(p: DiffPoly) -> DiffPoly:
    """The unique ``q`` without constant term such that ``dx(q) == p``.

    ``dx`` preserves the u-weight grading and every parameter multidegree, so
    the system splits into finite graded blocks.  Ordering monomials by their
    largest u-index makes each block triangular: the image of a monomial whose
    top index is ``M - 1`` is the only one reaching index ``M``.  Back
    substitution from the top index down therefore solves the block exactly, and
    a leftover term that cannot be a leading term signals infeasibility.
    """
    rest = dict(p.terms)
    result: dict = {}
    while rest:
        # the term with the largest top index (ties broken deterministically)
        r = max(rest, key=lambda m: (m[-1] if m else -1, m))
        coeff = rest[r]
        top = r[-1] if r else -1
        if top <= 0 or (len(r) > 1 and r[-2] == top):
            raise NotInImage(f"{render(p)} is not a total x-derivative "
                             f"(obstruction at monomial {_mono_str(r)})")
        pre = r[:-1] + (top - 1,)
        mult = pre.count(top - 1)
        q_coeff = coeff.scale(Fraction(1, mult))
        result[pre] = result[pre] + q_coeff if pre in result else q_coeff
        for new, k in _raise_index(pre).items():
            term = q_coeff.scale(k)
            val = rest[new] - term if new in rest else -term
            if val:
                rest[new] = val
            else:
                rest.pop(new, None)
    return DiffPoly._raw(result)


def weight_decompose(p: DiffPoly) -> dict[int, DiffPoly]:
    """Split by total weight (u_i: i+1, c: +1, eps: -1, mu: -1)."""
    parts: dict[int, dict] = {}
    for m, c in p.terms.items():
        w0 = mono_weight(m)
        for key, val in c.terms.items():
            w = w0 + key[0] - key[1] - key[2]
            bucket = parts.setdefault(w, {})
            s = Scalar({key: val}, c.trunc)
            bucket[m] = bucket[m] + s if m in bucket else s
    return {w: DiffPoly._raw(t) for w, t in sorted(parts.items())}


def parity_split(p: DiffPoly) -> tuple[DiffPoly, DiffPoly]:
    """(even, odd) parts for the operator sum_j j u_j d/du_j."""
    even = {m: c for m, c in p.terms.items() if mono_parity(m) == 0}
    odd = {m: c for m, c in p.terms.items() if mono_parity(m) == 1}
    return DiffPoly._raw(even), DiffPoly._raw(odd)


def d_operator(p: DiffPoly) -> DiffPoly:
    """eps d/deps + mu d/dmu."""
    return p.map_scalars(lambda s: s.map_keys(lambda k: k[1] + k[2]))


def u0_integrate(p: DiffPoly) -> DiffPoly:
    """Antiderivative in u0 with no u0-free term added."""
    out = {}
    for m, c in p.terms.items():
        e = m.count(0)
        out[(0,) + m] = c.scale(Fraction(1, e + 1))
    return DiffPoly._raw(out)


# -- the B operator ---------------------------------------------------------

@lru_cache(maxsize=None)
def nu(i: int, j: int) -> Fraction:
    """(-1)^{(i-j)/2} B_{i+j+2} / (i+j+2), defined as 0 for i, j of different parity."""
    if (i - j) % 2:
        return Fraction(0)
    sign = -1 if (abs(i - j) // 2) % 2 else 1
    return sign * bernoulli(i + j + 2) / (i + j + 2)


def nu_laplacian(p: DiffPoly) -> DiffPoly:
    """sum_{i,j >= 0} nu_{i,j} d^2/du_i du_j."""
    out: dict = {}
    for m, c in p.terms.items():
        counts = Counter(m)
        idxs = sorted(counts)
        for a, i in enumerate(idxs):
            for j in idxs[a:]:
                if i == j:
                    ei = counts[i]
                    if ei < 2:
                        continue
                    factor = nu(i, i) * ei * (ei - 1)
                else:
                    factor = 2 * nu(i, j) * counts[i] * counts[j]
                if not factor:
                    continue
                new = list(m)
                new.remove(i)
                new.remove(j)
                new = tuple(new)
                term = c.scale(factor)
                out[new] = out[new] + term if new in out else term
    return DiffPoly._raw(out)


def b_operator(p: DiffPoly, inverse: bool = False) -> DiffPoly:
    """exp(-1/2 sum nu_ij d^2/du_i du_j); the inverse flips the sign."""
    half = Fraction(1, 2) if inverse else Fraction(-1, 2)
    total = p
    term = p
    k = 0
    while True:
        k += 1
        term = nu_laplacian(term).scale(half / k)
        if not term:
            return total
        total = total + term


# -- hbar normalization -----------------------------------------------------

def hbar_normalize(p: DiffPoly, k: int) -> dict[int, DiffPoly]:
    """Reinstate the quantization parameter in a level-``k`` density.

    Applies eps -> eps (i hbar)^{-1/2}, u_j -> u_j (i hbar)^{-1/2},
    mu -> mu (i hbar)^{1/2} and an overall factor (i hbar)^{(k+2)/2}.  The result
    maps ``e`` to the part multiplying ``(i hbar)^{e/2}``.
    """
    out: dict[int, dict] = {}
    for m, c in p.terms.items():
        for key, val in c.terms.items():
            e = (k + 2) - len(m) - key[1] + key[2]
            bucket = out.setdefault(e, {})
            s = Scalar({key: val}, c.trunc)
            bucket[m] = bucket[m] + s if m in bucket else s
    return {e: DiffPoly._raw(t) for e, t in sorted(out.items())}


# -- rendering and JSON -----------------------------------------------------

def _fraction_parts(x: Fraction) -> tuple[int, int, int]:
    sign = -1 if x < 0 else 1
    return sign, abs(x.numerator), x.denominator


def _param_str(key) -> str:
    names = ("c", "eps", "mu")
    out = []
    for name, e in zip(names, key):
        if e == 1:
            out.append(name)
        elif e > 1:
            out.append(f"{name}^{e}")
    return "*".join(out)


def _coeff_times(x: Fraction, body: str) -> tuple[int, str]:
    """Render ``x * body`` as ``(sign, text)`` with a ``num*body/den`` layout."""
    sign, num, den = _fraction_parts(x)
    if not body:
        return sign, (f"{num}" if den == 1 else f"{num}/{den}")
    text = body if num == 1 else f"{num}*{body}"
    if den != 1:
        text = f"{text}/{den}"
    return sign, text


def _term_text(mono: Monomial, key, re: Fraction, im: Fraction) -> tuple[int, str]:
    u = "" if not mono else _mono_str(mono)
    param = _param_str(key)
    imag = im != 0
    if imag and re != 0:
        return 1, f"({re} + {im}*i){('*' + param) if param else ''} {u}".replace("+ -", "- ").strip()
    x = im if imag else re
    if imag:
        param = "i*" + param if param else "i"
    if not param:
        return _coeff_times(x, u)
    sign, inner = _coeff_times(x, param)
    return sign, f"({inner}) {u}".strip() if u else inner


def render(p: DiffPoly) -> str:
    """Human-readable text, e.g. ``u0^2/2 - 1/24 + (eps/24) u2``."""
    if not p.terms:
        return "0"
    rows = []
    for m, c in p.terms.items():
        for key, (re, im) in c.terms.items():
            rows.append((key[1] + key[2], key, -len(m), m, re, im))
    rows.sort()
    out = []
    for _, key, _, m, re, im in rows:
        sign, text = _term_text(m, key, re, im)
        if not out:
            out.append(("-" if sign < 0 else "") + text)
        else:
            out.append(("- " if sign < 0 else "+ ") + text)
    return " ".join(out)


def diffpoly_to_json(p: DiffPoly) -> list[dict]:
    return [{"monomial": list(m), "scalar": scalar_to_json(p.terms[m])}
            for m in sorted(p.terms, key=lambda m: (len(m), m))]


def diffpoly_from_json(data: list[dict], trunc: int | None = None) -> DiffPoly:
    return DiffPoly({tuple(rec["monomial"]): scalar_from_json(rec["scalar"], trunc) for rec in data})


U0 = DiffPoly.u(0)
ONE = DiffPoly.const(1)

__all__ = [
    "DiffPoly", "Monomial", "mono_weight", "mono_parity", "dx", "dx_power", "dx_invert",
    "weight_decompose", "parity_split", "d_operator", "u0_integrate", "nu", "nu_laplacian",
    "b_operator", "bernoulli", "hbar_normalize", "render", "diffpoly_to_json",
    "diffpoly_from_json", "factorial",
]
