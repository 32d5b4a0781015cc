"""Truncated q-series, the ring Q[G2, G4, G6] of quasimodular forms, recognition.

Eisenstein series are normalized as ``G_k = -B_k/(2k) + sum_{n>=1} sigma_{k-1}(n) q^n``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb

from .arith import bernoulli, sigma
from .errors import InsufficientOrder, NotRecognized
from .linalg import ExactSolver
from .scalar import Scalar, ZERO, scalar_from_json, scalar_to_json

RECOGNITION_MARGIN = 5


class QSeries:
    """Power series in q known up to and including q^N, with Scalar coefficients."""

    __slots__ = ("N", "coeffs")

    def __init__(self, coeffs, N: int | None = None):
        coeffs = [Scalar.coerce(c) for c in coeffs]
        if N is None:
            N = len(coeffs) - 1
        if len(coeffs) < N + 1:
            coeffs = coeffs + [ZERO] * (N + 1 - len(coeffs))
        self.N = N
        self.coeffs = coeffs[: N + 1]

    @classmethod
    def zero(cls, N: int) -> "QSeries":
        return cls([ZERO] * (N + 1), N)

    def __getitem__(self, n: int) -> Scalar:
        return self.coeffs[n]

    def __len__(self):
        return self.N + 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        n = min(self.N, other.N)
        return all(self.coeffs[i] == other.coeffs[i] for i in range(n + 1))

    def is_zero(self) -> bool:
        return all(not c for c in self.coeffs)

    def truncate(self, N: int) -> "QSeries":
        return QSeries(self.coeffs[: N + 1], min(N, self.N))

    def __add__(self, other: "QSeries") -> "QSeries":
        N = min(self.N, other.N)
        return QSeries([self.coeffs[i] + other.coeffs[i] for i in range(N + 1)], N)

    def __neg__(self) -> "QSeries":
        return QSeries([-c for c in self.coeffs], self.N)

    def __sub__(self, other: "QSeries") -> "QSeries":
        return self + (-other)

    def scale(self, s) -> "QSeries":
        if isinstance(s, Scalar):
            return QSeries([c * s for c in self.coeffs], self.N)
        return QSeries([c.scale(s) for c in self.coeffs], self.N)

    def __mul__(self, other) -> "QSeries":
        if not isinstance(other, QSeries):
            return self.scale(other)
        N = min(self.N, other.N)
        out = [ZERO] * (N + 1)
        for i in range(N + 1):
            a = self.coeffs[i]
            if not a:
                continue
            for j in range(N + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] = out[i + j] + a * b
        return QSeries(out, N)

    __rmul__ = scale

    def q_derivative(self) -> "QSeries":
        """q d/dq."""
        return QSeries([c.scale(n) for n, c in enumerate(self.coeffs)], self.N)

    def diff(self, var: str) -> "QSeries":
        return QSeries([c.diff(var) for c in self.coeffs], self.N)

    def map_scalars(self, fn) -> "QSeries":
        return QSeries([fn(c) for c in self.coeffs], self.N)

    def __repr__(self):
        return f"QSeries({self})"

    def __str__(self):
        parts = []
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            body = f"({c})" if len(c.terms) > 1 or not c.is_real() else str(c)
            parts.append(body if n == 0 else f"{body}*q^{n}")
        return (" + ".join(parts) or "0") + f" + O(q^{self.N + 1})"


def series_from_rationals(values, N: int | None = None) -> QSeries:
    return QSeries([Scalar.const(v) for v in values], N)


@lru_cache(maxsize=None)
def eisenstein_coeffs(k: int, N: int) -> tuple[Fraction, ...]:
    if k < 2 or k % 2:
        raise ValueError("Eisenstein series need even weight k >= 2")
    out = [-bernoulli(k) / (2 * k)]
    out.extend(Fraction(sigma(k - 1, n)) for n in range(1, N + 1))
    return tuple(out)


def eisenstein(k: int, N: int) -> QSeries:
    """G_k = -B_k/2k + sum sigma_{k-1}(n) q^n to order q^N."""
    return series_from_rationals(eisenstein_coeffs(k, N), N)


# -- the ring Q[G2, G4, G6] -------------------------------------------------

GMono = tuple[int, int, int]


def gmono_weight(m: GMono) -> int:
    return 2 * m[0] + 4 * m[1] + 6 * m[2]


@lru_cache(maxsize=None)
def gmonomials(max_weight: int, modular_only: bool = False) -> tuple[GMono, ...]:
    """All G2^a G4^b G6^c with weight <= max_weight, ordered by weight then exponents."""
    out = []
    for w in range(0, max_weight + 1, 2):
        for a in range(w // 2 + 1):
            if modular_only and a:
                continue
            for b in range((w - 2 * a) // 4 + 1):
                rest = w - 2 * a - 4 * b
                if rest % 6 == 0:
                    out.append((a, b, rest // 6))
    return tuple(out)


class QMPoly:
    """Polynomial in G2, G4, G6 with Scalar coefficients: ``{(a, b, c): Scalar}``."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict[GMono, Scalar] = {}
        if terms:
            for m, c in terms.items():
                c = Scalar.coerce(c)
                if c:
                    m = tuple(m)
                    self.terms[m] = self.terms[m] + c if m in self.terms else c
                    if not self.terms[m]:
                        del self.terms[m]

    @classmethod
    def gen(cls, k: int) -> "QMPoly":
        idx = {2: (1, 0, 0), 4: (0, 1, 0), 6: (0, 0, 1)}[k]
        return cls({idx: 1})

    @classmethod
    def const(cls, value) -> "QMPoly":
        return cls({(0, 0, 0): Scalar.coerce(value)})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, QMPoly):
            try:
                other = QMPoly.const(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __add__(self, other) -> "QMPoly":
        if not isinstance(other, QMPoly):
            other = QMPoly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return QMPoly({m: c for m, c in out.items() if c})

    __radd__ = __add__

    def __neg__(self):
        return QMPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, QMPoly):
            other = QMPoly.const(other)
        return self + (-other)

    def scale(self, s) -> "QMPoly":
        if isinstance(s, Scalar):
            return QMPoly({m: c * s for m, c in self.terms.items()})
        return QMPoly({m: c.scale(s) for m, c in self.terms.items()})

    def __mul__(self, other) -> "QMPoly":
        if not isinstance(other, QMPoly):
            return self.scale(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                p = c1 * c2
                out[m] = out[m] + p if m in out else p
        return QMPoly({m: c for m, c in out.items() if c})

    __rmul__ = scale

    def __pow__(self, n: int) -> "QMPoly":
        out = QMPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def diff(self, var: str) -> "QMPoly":
        return QMPoly({m: c.diff(var) for m, c in self.terms.items()})

    def map_scalars(self, fn) -> "QMPoly":
        return QMPoly({m: fn(c) for m, c in self.terms.items()})

    def subs(self, **values) -> "QMPoly":
        return self.map_scalars(lambda s: s.subs(**values))

    def weights(self) -> set[int]:
        out = set()
        for m, c in self.terms.items():
            out.update(gmono_weight(m) + w for w in c.weights())
        return out

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    def __repr__(self):
        return f"QMPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (-gmono_weight(m), m)):
            g = []
            for name, e in zip(("G2", "G4", "G6"), m):
                if e == 1:
                    g.append(name)
                elif e > 1:
                    g.append(f"{name}^{e}")
            body = "*".join(g)
            c = self.terms[m]
            coeff = str(c)
            if not body:
                parts.append(coeff if len(c.terms) == 1 else f"({coeff})")
            elif coeff == "1":
                parts.append(body)
            else:
                parts.append(f"({coeff})*{body}")
        return " + ".join(parts)


def weight_split(f: QMPoly) -> dict[int, QMPoly]:
    """Split by total weight (G_k: k, c: +1, eps and mu: -1)."""
    out: dict[int, dict] = {}
    for m, c in f.terms.items():
        gw = gmono_weight(m)
        for key, val in c.terms.items():
            w = gw + key[0] - key[1] - key[2]
            bucket = out.setdefault(w, {})
            s = Scalar({key: val}, c.trunc)
            bucket[m] = bucket[m] + s if m in bucket else s
    return {w: QMPoly(t) for w, t in sorted(out.items())}


def is_homogeneous(f: QMPoly, weight: int) -> bool:
    return set(weight_split(f)) <= {weight}


def frak_d(f: QMPoly) -> QMPoly:
    """Derivation with d(G2) = -1/2 that kills G4 and G6."""
    out = {}
    for (a, b, c), s in f.terms.items():
        if a:
            out[(a - 1, b, c)] = s.scale(Fraction(-a, 2))
    return QMPoly(out)


@lru_cache(maxsize=None)
def _gmono_series(m: GMono, N: int) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * (N + 1)
    out[0] = Fraction(1)
    for k, e in zip((2, 4, 6), m):
        g = eisenstein_coeffs(k, N)
        for _ in range(e):
            new = [Fraction(0)] * (N + 1)
            for i, x in enumerate(out):
                if x:
                    for j in range(N + 1 - i):
                        new[i + j] += x * g[j]
            out = new
    return tuple(out)


def qm_to_series(f: QMPoly, N: int) -> QSeries:
    """Expand a polynomial in G2, G4, G6 to order q^N."""
    out = [ZERO] * (N + 1)
    for m, c in f.terms.items():
        ser = _gmono_series(m, N)
        for n, x in enumerate(ser):
            if x:
                out[n] = out[n] + c.scale(x)
    return QSeries(out, N)


@lru_cache(maxsize=None)
def eisenstein_qm(k: int) -> QMPoly:
    """G_k written as a polynomial in G2, G4, G6 (k even, k >= 2)."""
    if k in (2, 4, 6):
        return QMPoly.gen(k)
    if k < 2 or k % 2:
        raise ValueError("Eisenstein series need even weight k >= 2")
    basis = [m for m in gmonomials(k, modular_only=True) if gmono_weight(m) == k]
    N = 2 * len(basis) + 10
    rows = [[_gmono_series(m, N)[n] for m in basis] for n in range(N + 1)]
    sol = ExactSolver(rows).solve(list(eisenstein_coeffs(k, N)))
    if sol is None:
        raise NotRecognized(f"G_{k} not found in the span of G4, G6 monomials")
    return QMPoly({m: Scalar.const(x) for m, x in zip(basis, sol) if x})


@lru_cache(maxsize=None)
def _recognition_solver(max_gweight: int, N: int, exact: bool = False
                        ) -> tuple[tuple[GMono, ...], ExactSolver]:
    basis = gmonomials(max_gweight)
    if exact:
        basis = tuple(m for m in basis if gmono_weight(m) == max_gweight)
    rows = [[_gmono_series(m, N)[n] for m in basis] for n in range(N + 1)]
    return basis, ExactSolver(rows)


def recognition_dimension(max_weight: int, scalar_weights) -> int:
    """Size of the largest per-coefficient basis used by :func:`recognize`."""
    dims = [len(gmonomials(max_weight - sw)) for sw in scalar_weights if max_weight - sw >= 0]
    return max(dims, default=0)


def recognize(s: QSeries, max_weight: int, margin: int = RECOGNITION_MARGIN,
              basis: str = "le", info: dict | None = None) -> QMPoly:
    """The unique QMPoly of total weight <= ``max_weight`` expanding to ``s``.

    Each (c, eps, mu)-coefficient is solved separately: a coefficient of scalar
    weight ``w`` may only use G-monomials of weight ``<= max_weight - w``
    (``basis="le"``) or of weight exactly ``max_weight - w`` (``basis="exact"``).
    ``basis="adaptive"`` uses "le" where the order allows the margin and falls
    back to "exact" elsewhere; the keys that fell back are listed in
    ``info["exact_keys"]``.  Raises InsufficientOrder when ``s.N < dim + margin``
    and NotRecognized when a block has no solution.
    """
    if basis not in ("le", "exact", "adaptive"):
        raise ValueError("basis must be 'le', 'exact' or 'adaptive'")
    N = s.N
    keys: dict = {}
    trunc = None
    for c in s.coeffs:
        for key in c.terms:
            keys.setdefault(key, None)
        if c.trunc is not None:
            trunc = c.trunc if trunc is None else min(trunc, c.trunc)
    result: dict[GMono, dict] = {}
    exact_keys = []
    for key in sorted(keys):
        sw = key[0] - key[1] - key[2]
        gw = max_weight - sw
        re = [c.coefficient(key)[0] for c in s.coeffs]
        im = [c.coefficient(key)[1] for c in s.coeffs]
        if gw < 0:
            raise NotRecognized(f"coefficient of c^{key[0]} eps^{key[1]} mu^{key[2]} "
                                f"would need negative weight {gw}")
        exact = basis == "exact"
        if basis == "adaptive" and N < len(gmonomials(gw)) + margin:
            exact = True
        mons, solver = _recognition_solver(gw, N, exact)
        if exact:
            exact_keys.append(key)
        if N < len(mons) + margin:
            raise InsufficientOrder(
                f"q-order {N} too small for weight {gw} (dimension {len(mons)}, margin {margin})")
        if not solver.full_column_rank:
            raise InsufficientOrder(f"G-monomials of weight <= {gw} are dependent to order {N}")
        for part, vec in ((0, re), (1, im)):
            if not any(vec):
                continue
            sol = solver.solve(vec)
            if sol is None:
                raise NotRecognized(
                    f"coefficient of c^{key[0]} eps^{key[1]} mu^{key[2]} is not quasimodular "
                    f"of weight {'=' if exact else '<='} {gw}")
            for m, x in zip(mons, sol):
                if x:
                    slot = result.setdefault(m, {})
                    re0, im0 = slot.get(key, (Fraction(0), Fraction(0)))
                    slot[key] = (re0 + x, im0) if part == 0 else (re0, im0 + x)
    out = QMPoly({m: Scalar(t, trunc) for m, t in result.items()})
    if qm_to_series(out, N) != s:
        raise NotRecognized("residual does not vanish")
    if info is not None:
        info["exact_keys"] = exact_keys
    return out


# -- Skoruppa's identity ------------------------------------------------------

def _skoruppa_polynomial(a: tuple[int, int, int]) -> dict[tuple[int, int], int]:
    """H(x, y) = sum_{pi in S3} x^{a_pi1} (-y)^{a_pi2} (y - x)^{a_pi3} as {(deg_x, deg_y): coeff}."""
    H: dict[tuple[int, int], int] = {}
    for p1, p2, p3 in permutations(a):
        for k in range(p3 + 1):
            coeff = comb(p3, k) * (-1) ** (p2 + k)
            key = (p1 + k, p2 + p3 - k)
            H[key] = H.get(key, 0) + coeff
    return {k: v for k, v in H.items() if v}


def _poly_subs_yx(H: dict[tuple[int, int], int]) -> dict[tuple[int, int], int]:
    """H(y, y - x)."""
    out: dict[tuple[int, int], int] = {}
    for (i, j), h in H.items():
        # y^i (y - x)^j
        for k in range(j + 1):
            coeff = h * comb(j, k) * (-1) ** k
            key = (k, i + j - k)
            out[key] = out.get(key, 0) + coeff
    return {k: v for k, v in out.items() if v}


def skoruppa_check(a1: int, a2: int, a3: int, N: int = 30) -> dict[str, bool]:
    """Verify the symmetry hypothesis, the Eisenstein identity, and its Bernoulli shadows."""
    if (a1 + a2 + a3) % 2:
        raise ValueError("a1 + a2 + a3 must be even")
    a = (a1, a2, a3)
    n = sum(a)
    H = _skoruppa_polynomial(a)
    swapped = {(j, i): v for (i, j), v in H.items()}
    symmetric = H == swapped and _poly_subs_yx(H) == H
    h_nu = {i: v for (i, j), v in H.items()}  # coefficient of x^nu y^{n-nu}
    h = Fraction(-1, 2) * sum(Fraction(v, n - nu + 1) for nu, v in h_nu.items())
    lhs = QSeries.zero(N)
    for nu in range(1, n, 2):
        if h_nu.get(nu):
            lhs = lhs + (eisenstein(nu + 1, N) * eisenstein(n + 1 - nu, N)).scale(h_nu[nu])
    rhs = eisenstein(n + 2, N).scale(h) - eisenstein(n, N).q_derivative().scale(
        Fraction(h_nu.get(1, 0), n))
    series_ok = lhs == rhs

    def b(k):
        return bernoulli(k) / k

    bern_lhs = sum((h_nu.get(nu, 0) * b(nu + 1) * b(n + 1 - nu) for nu in range(1, n, 2)),
                   Fraction(0))
    bernoulli_ok = bern_lhs == -2 * h * b(n + 2)
    specialized_lhs = Fraction(0)
    spec_rhs = Fraction(0)
    for p1, p2, p3 in permutations(a):
        for k in range(p3 + 1):
            specialized_lhs += comb(p3, k) * (-1) ** (p2 + k) * b(p1 + k + 1) * b(p2 + p3 - k + 1)
        spec_rhs += (-1) ** p1 * Fraction(_fact(p2) * _fact(p3), _fact(p2 + p3 + 1))
    specialized_ok = specialized_lhs == b(n + 2) * spec_rhs
    return {"symmetry": symmetric, "series": series_ok, "bernoulli": bernoulli_ok,
            "specialized": specialized_ok}


def _fact(n: int) -> int:
    out = 1
    for j in range(2, n + 1):
        out *= j
    return out


# -- JSON -------------------------------------------------------------------

def qmpoly_to_json(f: QMPoly) -> list[dict]:
    return [{"g2": m[0], "g4": m[1], "g6": m[2], "scalar": scalar_to_json(f.terms[m])}
            for m in sorted(f.terms)]


def qmpoly_from_json(data: list[dict]) -> QMPoly:
    return QMPoly({(r["g2"], r["g4"], r["g6"]): scalar_from_json(r["scalar"]) for r in data})


def qseries_to_json(s: QSeries) -> dict:
    return {"N": s.N, "coefficients": [scalar_to_json(c) for c in s.coeffs]}


def verify_theorem(*args, **kwargs):
    """See :func:`qkdv.verify.verify_theorem` (lives there to avoid an import cycle)."""
    from .verify import verify_theorem as impl
    return impl(*args, **kwargs)


def anomaly_check(*args, **kwargs):
    """See :func:`qkdv.verify.anomaly_check`."""
    from .verify import anomaly_check as impl
    return impl(*args, **kwargs)


__all__ = [
    "QSeries", "QMPoly", "eisenstein", "eisenstein_qm", "qm_to_series", "recognize",
    "weight_split", "is_homogeneous", "frak_d", "skoruppa_check", "gmonomials",
    "gmono_weight", "qmpoly_to_json", "qmpoly_from_json", "qseries_to_json",
    "series_from_rationals", "RECOGNITION_MARGIN", "recognition_dimension",
    "verify_theorem", "anomaly_check",
]
