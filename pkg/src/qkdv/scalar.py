"""Coefficient ring: Gaussian-rational polynomials in the parameters c, eps, mu.

A :class:`Scalar` is a sparse map ``(c_exp, eps_exp, mu_exp) -> (re, im)`` with
``re``/``im`` exact :class:`fractions.Fraction` values.  An optional truncation
degree ``G`` kills every term lying in the ideal ``(eps*mu)^G``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

Key = tuple[int, int, int]
Gauss = tuple[Fraction, Fraction]

_ZERO = Fraction(0)
_ONE_KEY: Key = (0, 0, 0)


def _min_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` (or a plain integer) into a Fraction."""
    return Fraction(text)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class Scalar:
    """Immutable element of Q(i)[c, eps, mu] / (eps*mu)^G."""

    __slots__ = ("terms", "trunc")

    def __init__(self, terms: dict[Key, Gauss] | None = None, trunc: int | None = None):
        # callers hand over ownership of ``terms``; zeros and truncated keys are pruned here
        self.trunc = trunc
        if not terms:
            self.terms = {}
            return
        clean = {}
        for key, (re, im) in terms.items():
            if re == 0 and im == 0:
                continue
            if trunc is not None and min(key[1], key[2]) >= trunc:
                continue
            clean[key] = (re, im)
        self.terms = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, value=0, imag=0, trunc: int | None = None) -> "Scalar":
        return cls({_ONE_KEY: (Fraction(value), Fraction(imag))}, trunc)

    @classmethod
    def monomial(cls, c: int = 0, eps: int = 0, mu: int = 0, value=1, imag=0,
                 trunc: int | None = None) -> "Scalar":
        return cls({(c, eps, mu): (Fraction(value), Fraction(imag))}, trunc)

    @classmethod
    def i(cls) -> "Scalar":
        return cls.const(0, 1)

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Rational)):
            return cls.const(x)
        if isinstance(x, complex):
            raise TypeError("floating complex values are not exact")
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")

    # -- predicates ---------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_real(self) -> bool:
        return all(im == 0 for _, im in self.terms.values())

    def is_imaginary(self) -> bool:
        return all(re == 0 for re, _ in self.terms.values())

    def is_constant(self) -> bool:
        return all(k == _ONE_KEY for k in self.terms)

    def constant_value(self) -> Fraction:
        """Real rational value of a constant, real scalar."""
        if not self.is_constant() or not self.is_real():
            raise ValueError(f"{self} is not a real rational constant")
        return self.terms.get(_ONE_KEY, (_ZERO, _ZERO))[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- ring operations ----------------------------------------------
    def __add__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            other = Scalar.coerce(other)
        out = dict(self.terms)
        for key, (re, im) in other.terms.items():
            if key in out:
                a, b = out[key]
                out[key] = (a + re, b + im)
            else:
                out[key] = (re, im)
        return Scalar(out, _min_trunc(self.trunc, other.trunc))

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        s = Scalar.__new__(Scalar)
        s.trunc = self.trunc
        s.terms = {k: (-re, -im) for k, (re, im) in self.terms.items()}
        return s

    def __sub__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            other = Scalar.coerce(other)
        return self + (-other)

    def __rsub__(self, other) -> "Scalar":
        return Scalar.coerce(other) - self

    def scale(self, x) -> "Scalar":
        """Multiply by a rational number."""
        x = Fraction(x)
        if x == 0:
            return Scalar(None, self.trunc)
        s = Scalar.__new__(Scalar)
        s.trunc = self.trunc
        s.terms = {k: (re * x, im * x) for k, (re, im) in self.terms.items()}
        return s

    def scale_gauss(self, re: Fraction, im: Fraction) -> "Scalar":
        """Multiply by the Gaussian rational ``re + i*im``."""
        if im == 0:
            return self.scale(re)
        out = {}
        for k, (a, b) in self.terms.items():
            out[k] = (a * re - b * im, a * im + b * re)
        return Scalar(out, self.trunc)

    def __mul__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Rational)):
                return self.scale(other)
            other = Scalar.coerce(other)
        trunc = _min_trunc(self.trunc, other.trunc)
        out: dict[Key, Gauss] = {}
        for (c1, e1, m1), (a, b) in self.terms.items():
            for (c2, e2, m2), (c, d) in other.terms.items():
                key = (c1 + c2, e1 + e2, m1 + m2)
                if trunc is not None and min(key[1], key[2]) >= trunc:
                    continue
                if b == 0 and d == 0:
                    re, im = a * c, _ZERO
                else:
                    re, im = a * c - b * d, a * d + b * c
                if key in out:
                    x, y = out[key]
                    out[key] = (x + re, y + im)
                else:
                    out[key] = (re, im)
        return Scalar(out, trunc)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Scalar":
        if isinstance(other, (int, Rational)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, Scalar) and other.is_constant():
            re, im = other.terms.get(_ONE_KEY, (_ZERO, _ZERO))
            norm = re * re + im * im
            if norm == 0:
                raise ZeroDivisionError("division by zero scalar")
            return self.scale_gauss(re / norm, -im / norm)
        raise TypeError("only division by constants is supported")

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = Scalar.const(1, trunc=self.trunc)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def with_trunc(self, trunc: int | None) -> "Scalar":
        return Scalar(dict(self.terms), _min_trunc(self.trunc, trunc))

    # -- structure ----------------------------------------------------
    def real_part(self) -> "Scalar":
        return Scalar({k: (re, _ZERO) for k, (re, _) in self.terms.items()}, self.trunc)

    def imag_part(self) -> "Scalar":
        return Scalar({k: (im, _ZERO) for k, (_, im) in self.terms.items()}, self.trunc)

    def keys(self):
        return self.terms.keys()

    def coefficient(self, key: Key) -> Gauss:
        return self.terms.get(key, (_ZERO, _ZERO))

    def split_keys(self) -> dict[Key, "Scalar"]:
        """One single-key scalar per parameter monomial."""
        return {k: Scalar({k: v}, self.trunc) for k, v in self.terms.items()}

    def weights(self) -> set[int]:
        """Grading weights present (c: +1, eps: -1, mu: -1)."""
        return {c - e - m for (c, e, m) in self.terms}

    def param_degree(self) -> int:
        """Largest total (eps, mu)-degree, -1 for zero."""
        return max((e + m for (_, e, m) in self.terms), default=-1)

    def degree(self, var: str) -> int:
        idx = _VAR_INDEX[var]
        return max((k[idx] for k in self.terms), default=-1)

    def coeff_of(self, var: str, power: int) -> "Scalar":
        """Coefficient of ``var**power`` (as a scalar in the remaining variables)."""
        idx = _VAR_INDEX[var]
        out = {}
        for k, v in self.terms.items():
            if k[idx] == power:
                kk = list(k)
                kk[idx] = 0
                out[tuple(kk)] = v
        return Scalar(out, self.trunc)

    def map_keys(self, fn) -> "Scalar":
        """Multiply each term by ``fn(key)`` (a rational)."""
        out = {}
        for k, (re, im) in self.terms.items():
            f = fn(k)
            if f:
                out[k] = (re * f, im * f)
        return Scalar(out, self.trunc)

    def diff(self, var: str) -> "Scalar":
        idx = _VAR_INDEX[var]
        out: dict[Key, Gauss] = {}
        for k, (re, im) in self.terms.items():
            e = k[idx]
            if e == 0:
                continue
            kk = list(k)
            kk[idx] = e - 1
            out[tuple(kk)] = (re * e, im * e)
        return Scalar(out, self.trunc)

    def subs(self, **values) -> "Scalar":
        """Specialize parameters to rational values, e.g. ``subs(mu=0)``."""
        out: dict[Key, Gauss] = {}
        idxs = [(_VAR_INDEX[name], Fraction(v)) for name, v in values.items()]
        for k, (re, im) in self.terms.items():
            kk = list(k)
            f = Fraction(1)
            for idx, val in idxs:
                f *= val ** kk[idx]
                kk[idx] = 0
            if f == 0:
                continue
            key = tuple(kk)
            x, y = out.get(key, (_ZERO, _ZERO))
            out[key] = (x + re * f, y + im * f)
        return Scalar(out, self.trunc)

    # -- output -------------------------------------------------------
    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms):
            re, im = self.terms[key]
            mono = _param_monomial_str(key)
            parts.append(_term_str(re, im, mono))
        text = " + ".join(parts)
        return text.replace("+ -", "- ")


_VAR_INDEX = {"c": 0, "eps": 1, "mu": 2}


def _param_monomial_str(key: Key) -> str:
    names = ("c", "eps", "mu")
    out = []
    for name, e in zip(names, key):
        if e == 1:
            out.append(name)
        elif e > 1:
            out.append(f"{name}^{e}")
    return "*".join(out)


def _gauss_str(re: Fraction, im: Fraction) -> str:
    if im == 0:
        return str(re)
    if re == 0:
        return f"{im}*i" if im not in (1, -1) else ("i" if im == 1 else "-i")
    return f"({re} + {im}*i)".replace("+ -", "- ")


def _term_str(re: Fraction, im: Fraction, mono: str) -> str:
    if not mono:
        return _gauss_str(re, im)
    if im == 0 and re == 1:
        return mono
    if im == 0 and re == -1:
        return "-" + mono
    return f"{_gauss_str(re, im)}*{mono}"


ZERO = Scalar()
ONE = Scalar.const(1)
C = Scalar.monomial(c=1)
EPS = Scalar.monomial(eps=1)
MU = Scalar.monomial(mu=1)
I = Scalar.i()


def scalar_to_json(s: Scalar) -> list[dict]:
    return [
        {"c": k[0], "eps": k[1], "mu": k[2],
         "re": format_rational(re), "im": format_rational(im)}
        for k, (re, im) in sorted(s.terms.items())
    ]


def scalar_from_json(data: list[dict], trunc: int | None = None) -> Scalar:
    terms = {}
    for rec in data:
        key = (int(rec["c"]), int(rec["eps"]), int(rec["mu"]))
        terms[key] = (parse_rational(rec["re"]), parse_rational(rec["im"]))
    return Scalar(terms, trunc)
