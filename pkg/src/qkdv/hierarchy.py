"""Quantum KdV / ILW densities via the commutator recursion.

Densities are produced through their reduced versions g~_k = B^{-1} g_k, which
obey (k+2+D) dx g~_{k+1} = R1 g~_k with R1 a first plus second order operator.
The full recursion (d g_{k+1}/du0 = g_k and (k+2+D) dx g_{k+1} = [g_k, G_1])
is checked afterwards with the general commutator formula.
"""
from __future__ import annotations

import json
import os
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, factorial, prod

from .arith import bernoulli, double_factorial
from .diffpoly import (DiffPoly, b_operator, d_operator, diffpoly_from_json,
                       diffpoly_to_json, dx, dx_invert, dx_power)
from .errors import DegenerateSpectrum, NotInImage, RecursionInconsistent
from .linalg import inverse
from .partitions import canonical_sorted, partitions_of, schur
from .quantization import QuantizedOperator, l_operator, matrix_on, quantize
from .scalar import Scalar, ZERO

MODES = ("kdv", "ilw")
DEFAULT_GENUS = 3


# -- P polynomials -------------------------------------------------------------

class PPolynomial:
    """P_ell(xi) stored as a coefficient list (index = power of xi)."""

    def __init__(self, ell, coeffs):
        self.ell = tuple(ell)
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = c

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, j: int) -> Fraction:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else Fraction(0)

    def __call__(self, xi):
        return sum((c * xi ** j for j, c in enumerate(self.coeffs)), Fraction(0))

    def __eq__(self, other):
        if isinstance(other, PPolynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __repr__(self):
        terms = [f"{c}*xi^{j}" for j, c in enumerate(self.coeffs) if c]
        return f"P{self.ell}(" + (" + ".join(terms) or "0") + ")"


def _tilde_values(ell: tuple[int, ...], X: int) -> list[int]:
    """P~_ell(xi) for xi = 0..X by convolving a -> a^{ell_i} (with 0^0 = 1)."""
    vals = [1] + [0] * X
    for e in ell:
        f = [a ** e for a in range(X + 1)]
        vals = [sum(vals[b] * f[x - b] for b in range(x + 1)) for x in range(X + 1)]
    return vals


def _interpolate(xs: list[int], ys: list[int]) -> list[Fraction]:
    """Coefficients of the unique polynomial of degree < len(xs) through the points (Newton form)."""
    n = len(xs)
    dd = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j])
    coeffs = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        # coeffs = coeffs * (xi - xs[i]) + dd[i]
        new = [Fraction(0)] * n
        for j, c in enumerate(coeffs):
            if c:
                if j + 1 < n:
                    new[j + 1] += c
                new[j] -= c * xs[i]
        new[0] += dd[i]
        coeffs = new
    return coeffs


@lru_cache(maxsize=None)
def tilde_p(ell: tuple[int, ...]) -> tuple[Fraction, ...]:
    n = len(ell)
    deg = sum(ell) + n - 1
    xs = list(range(1, deg + 2))
    ys = _tilde_values(ell, deg + 1)[1:]
    return tuple(_interpolate(xs, ys))


@lru_cache(maxsize=None)
def _p_coeffs(ell: tuple[int, ...]) -> tuple[Fraction, ...]:
    n = len(ell)
    L = sum(ell)
    out = []
    for j, c in enumerate(tilde_p(ell)):
        e = n - 1 - j + L
        out.append(Fraction(0) if e % 2 else (-1) ** (e // 2) * c)
    return tuple(out)


def p_polynomial(ell) -> PPolynomial:
    """P_ell from the combinatorial values of P~_ell and the parity/sign rule."""
    ell = tuple(sorted(ell))
    return PPolynomial(ell, _p_coeffs(ell))


def p_polynomial_closed(l: int, m: int, printed: bool = False) -> PPolynomial:
    """Closed form of P_{l,m}.

    The lower Bernoulli terms carry the sign (-1)^{m+i+1} resp. (-1)^{l+i+1},
    which is what the parity rule gives.  ``printed=True`` uses
    (-1)^{l+i} resp. (-1)^{m+i} instead; the two agree only for l+m odd.
    """
    top = l + m + 1
    coeffs = [Fraction(0)] * (top + 1)
    coeffs[top] = Fraction(factorial(l) * factorial(m), factorial(top))
    i = 0
    while l + m - 2 * i - 1 >= 0:
        b = bernoulli(2 * i + 2) / (2 * i + 2)
        if printed:
            s1, s2 = (-1) ** (l + i), (-1) ** (m + i)
        else:
            s1, s2 = (-1) ** (m + i + 1), (-1) ** (l + i + 1)
        t = s1 * _binom(l, 2 * i + 1 - m) + s2 * _binom(m, 2 * i + 1 - l)
        coeffs[l + m - 2 * i - 1] += b * t
        i += 1
    return PPolynomial((l, m), coeffs)


def _binom(n: int, k: int) -> int:
    return comb(n, k) if 0 <= k <= n else 0


# -- the commutator with a quantized density -----------------------------------

def _sub_multisets(m: tuple[int, ...], n: int):
    items = sorted(Counter(m).items())

    def rec(idx, need, acc):
        if need == 0:
            yield tuple(acc)
            return
        if idx == len(items):
            return
        v, e = items[idx]
        for s in range(min(e, need), -1, -1):
            yield from rec(idx + 1, need - s, acc + [v] * s)

    yield from rec(0, n, [])


def _derivatives(p: DiffPoly, n: int) -> dict[tuple[int, ...], DiffPoly]:
    """All n-th partial derivatives d^n p / du_S for multisets S, as {S: DiffPoly}."""
    out: dict[tuple[int, ...], dict] = {}
    for m, c in p.terms.items():
        if len(m) < n:
            continue
        cm = Counter(m)
        for S in _sub_multisets(m, n):
            cs = Counter(S)
            factor = prod(factorial(cm[v]) // factorial(cm[v] - k) for v, k in cs.items())
            rest = list(m)
            for v in S:
                rest.remove(v)
            rest = tuple(rest)
            bucket = out.setdefault(S, {})
            term = c.scale(factor)
            bucket[rest] = bucket[rest] + term if rest in bucket else term
    return {S: DiffPoly._raw(t) for S, t in out.items() if t}


@lru_cache(maxsize=None)
def _pair_poly(S: tuple[int, ...], R: tuple[int, ...]) -> tuple[Fraction, ...]:
    """Sum over ordered s in arr(S), r in arr(R) of P_{r+s+1}, as coefficients."""
    arr_s = set(permutations(S))
    s0 = S
    acc: list[Fraction] = []
    for r in set(permutations(R)):
        ell = tuple(sorted(a + b + 1 for a, b in zip(s0, r)))
        c = _p_coeffs(ell)
        if len(c) > len(acc):
            acc.extend([Fraction(0)] * (len(c) - len(acc)))
        for j, x in enumerate(c):
            acc[j] += x
    return tuple(x * len(arr_s) for x in acc)


def commutator_bracket(f: DiffPoly, g: DiffPoly) -> DiffPoly:
    """Density of [f, g-bar] via the n-fold derivative formula with P polynomials."""
    total = DiffPoly()
    nmax = min(f.u_degree(), g.u_degree())
    for n in range(1, nmax + 1):
        df = _derivatives(f, n)
        dg = _derivatives(g, n)
        pref = Fraction((-1) ** (n - 1), factorial(n))
        for R, gR in dg.items():
            sign = -1 if sum(R) % 2 else 1
            powers = [gR]
            for S, fS in df.items():
                poly = _pair_poly(S, R)
                inner = DiffPoly()
                for j, cj in enumerate(poly):
                    if not cj:
                        continue
                    while len(powers) <= j:
                        powers.append(dx(powers[-1]))
                    inner = inner + powers[j].scale(cj)
                if inner:
                    total = total + (fS * inner).scale(pref * sign)
    return total


# -- ILW input data --------------------------------------------------------------

def _genus_coeff(g: int, G: int | None, mode: str) -> Scalar:
    """(eps - mu) (eps mu)^{g-1} (mu = 0 in KdV mode)."""
    if mode == "kdv":
        return Scalar.monomial(eps=1) if g == 1 else ZERO
    s = Scalar({(0, g, g - 1): (Fraction(1), Fraction(0)),
                (0, g - 1, g): (Fraction(-1), Fraction(0))}, G)
    return s


def _genera(G: int | None, mode: str) -> range:
    return range(1, 2) if mode == "kdv" else range(1, G + 1)


def ilw_g1(G: int = DEFAULT_GENUS, mode: str = "ilw") -> DiffPoly:
    """u0^3/6 - u0/24 + (eps - mu) sum_g (eps mu)^{g-1} |B_2g|/(2 (2g)!) (u0 u_2g - |B_{2g+2}|/(2g+2))."""
    if mode == "ilw" and G < 1:
        raise ValueError("genus cutoff must be at least 1")
    trunc = G if mode == "ilw" else None
    out = DiffPoly.u(0, 0, 0).scale(Fraction(1, 6)) - DiffPoly.u(0).scale(Fraction(1, 24))
    for g in _genera(G, mode):
        coeff = _genus_coeff(g, trunc, mode).scale(abs(bernoulli(2 * g)) / (2 * factorial(2 * g)))
        inner = DiffPoly.u(0, 2 * g) - DiffPoly.const(abs(bernoulli(2 * g + 2)) / (2 * g + 2))
        out = out + inner * DiffPoly.const(coeff)
    return out.with_trunc(trunc)


@lru_cache(maxsize=None)
def _r1_potential(G: int | None, mode: str) -> DiffPoly:
    v = DiffPoly.u(0, 0).scale(Fraction(1, 2))
    trunc = G if mode == "ilw" else None
    for g in _genera(G, mode):
        coeff = _genus_coeff(g, trunc, mode).scale(abs(bernoulli(2 * g)) / factorial(2 * g))
        v = v + DiffPoly({(2 * g,): coeff})
    return v


_DX_POT: dict = {}


def _potential_derivative(i: int, G, mode) -> DiffPoly:
    key = (i, G, mode)
    if key not in _DX_POT:
        _DX_POT[key] = dx_power(_r1_potential(G, mode), i + 1)
    return _DX_POT[key]


def r1_ilw(g: DiffPoly, G: int | None = DEFAULT_GENUS, mode: str = "ilw") -> DiffPoly:
    """First-order transport along dx^{i+1}(potential) minus the u_{i+j+3} second-order part."""
    total = DiffPoly()
    for i in sorted(g.variables()):
        d = g.partial(i)
        total = total + _potential_derivative(i, G, mode) * d
    for S, h in _derivatives(g, 2).items():
        i, j = S
        # the ordered sum over (i, j) and (j, i) gives a factor 2 unless i == j
        mult = 1 if i == j else 2
        coeff = Fraction(-mult * factorial(i + 1) * factorial(j + 1), 2 * factorial(i + j + 3))
        total = total + DiffPoly.u(i + j + 3) * h.scale(coeff)
    if mode == "ilw":
        total = total.with_trunc(G)
    return total


def r2_ilw(g: DiffPoly, printed: bool = False) -> DiffPoly:
    """Second-order remainder of [g, G_1] beyond R1.

    sum_{i,j,l} (1/2) B_{2l+2}/(2l+2) ((-1)^{j+l+1} C(i+1, 2l-j) + (-1)^{i+l+1} C(j+1, 2l-i))
    u_{i+j+1-2l} d^2/du_i du_j, which is what the commutator formula produces.
    ``printed=True`` gives the variant with signs (-1)^{i+l}, (-1)^{j+l} and no 1/2,
    which differs by -1/2 (i+j even) or 1/2 (i+j odd).
    """
    total = DiffPoly()
    for S, h in _derivatives(g, 2).items():
        i, j = S
        mult = 1 if i == j else 2
        coeff_by_idx: dict[int, Fraction] = {}
        l = 0
        while i + j + 1 - 2 * l >= 0:
            b = bernoulli(2 * l + 2) / (2 * l + 2)
            if printed:
                t = (-1) ** (i + l) * _binom(i + 1, 2 * l - j) + (-1) ** (j + l) * _binom(j + 1, 2 * l - i)
            else:
                t = Fraction((-1) ** (j + l + 1) * _binom(i + 1, 2 * l - j)
                             + (-1) ** (i + l + 1) * _binom(j + 1, 2 * l - i), 2)
            if t:
                idx = i + j + 1 - 2 * l
                coeff_by_idx[idx] = coeff_by_idx.get(idx, Fraction(0)) + mult * b * t
            l += 1
        for idx, c in coeff_by_idx.items():
            if c:
                total = total + DiffPoly.u(idx) * h.scale(c)
    return total


# -- density tables ------------------------------------------------------------------

class DensityTable:
    """Densities g_k (or reduced g~_k) for -2 <= k <= k_max."""

    def __init__(self, mode: str, G: int | None, densities: dict[int, DiffPoly],
                 reduced: bool = False):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.G = G if mode == "ilw" else None
        self.densities = dict(sorted(densities.items()))
        self.reduced = reduced

    @property
    def k_max(self) -> int:
        return max(self.densities)

    def __getitem__(self, k: int) -> DiffPoly:
        return self.densities[k]

    def __contains__(self, k):
        return k in self.densities

    def items(self):
        return self.densities.items()

    def to_json(self) -> dict:
        return {"mode": self.mode, "G": self.G, "k_max": self.k_max, "reduced": self.reduced,
                "densities": [{"k": k, "density": diffpoly_to_json(p)}
                              for k, p in self.densities.items()]}

    @classmethod
    def from_json(cls, data: dict) -> "DensityTable":
        G = data.get("G")
        trunc = G if data["mode"] == "ilw" else None
        dens = {rec["k"]: diffpoly_from_json(rec["density"], trunc) for rec in data["densities"]}
        return cls(data["mode"], G, dens, data.get("reduced", False))


def _inverse_k_plus_d(p: DiffPoly, k: int) -> DiffPoly:
    """(k+2+D)^{-1}, termwise."""
    return p.map_scalars(lambda s: s.map_keys(lambda key: Fraction(1, k + 2 + key[1] + key[2])))


def _check_mode(mode: str, G):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "ilw" and (G is None or G < 1):
        raise ValueError("ILW mode needs a genus cutoff G >= 1")


@lru_cache(maxsize=None)
def _reduced_cached(mode: str, k_max: int, G) -> DensityTable:
    trunc = G if mode == "ilw" else None
    dens = {-2: DiffPoly.const(Scalar.const(1, trunc=trunc)), -1: DiffPoly.u(0).with_trunc(trunc)}
    if k_max >= 0:
        prev = _reduced_cached(mode, k_max - 1, G) if k_max > 0 else None
        if prev is not None:
            dens.update(prev.densities)
        for k in range(max(dens) , k_max):
            gk = dens[k]
            rhs = _inverse_k_plus_d(r1_ilw(gk, G, mode), k)
            try:
                nxt = dx_invert(rhs)
            except NotInImage as exc:
                raise RecursionInconsistent(f"step {k} -> {k + 1}: {exc}") from exc
            if nxt.partial(0) != gk:
                raise RecursionInconsistent(
                    f"step {k} -> {k + 1}: u0-derivative does not reproduce the previous density")
            dens[k + 1] = nxt.with_trunc(trunc)
    return DensityTable(mode, G, {k: v for k, v in dens.items() if k <= k_max}, reduced=True)


def reduced_densities(mode: str = "kdv", k_max: int = 2, G: int | None = None) -> DensityTable:
    if mode == "ilw" and G is None:
        G = DEFAULT_GENUS
    _check_mode(mode, G)
    if k_max < -1:
        raise ValueError("k_max must be at least -1")
    return _reduced_cached(mode, k_max, G if mode == "ilw" else None)


def densities(mode: str = "kdv", k_max: int = 2, G: int | None = None,
              check: bool = False) -> DensityTable:
    """Full densities g_k = B g~_k.  ``check=True`` asserts the full recursion afterwards."""
    if mode == "ilw" and G is None:
        G = DEFAULT_GENUS
    _check_mode(mode, G)
    if k_max < -2:
        raise ValueError("k_max must be at least -2")
    red = reduced_densities(mode, max(k_max, -1), G)
    table = DensityTable(mode, G, {k: b_operator(p) for k, p in red.items() if k <= k_max})
    if check:
        residuals = recursion_residuals(table)
        bad = {k: r for k, r in residuals.items() if any(r)}
        if bad:
            raise RecursionInconsistent(f"full recursion fails at steps {sorted(bad)}")
    return table


def recursion_residuals(table: DensityTable, k_from: int = -1) -> dict[int, tuple[DiffPoly, DiffPoly]]:
    """(d g_{k+1}/du0 - g_k, (k+2+D) dx g_{k+1} - [g_k, G_1]) for each step k."""
    g1 = table[1] if 1 in table else densities(table.mode, 1, table.G)[1]
    out = {}
    for k in range(k_from, table.k_max):
        gk, gn = table[k], table[k + 1]
        r_a = gn.partial(0) - gk
        lhs = dx(gn)
        lhs = lhs.scale(k + 2) + d_operator(lhs)
        r_b = lhs - commutator_bracket(gk, g1)
        if table.mode == "ilw":
            r_a, r_b = r_a.with_trunc(table.G), r_b.with_trunc(table.G)
        out[k] = (r_a, r_b)
    return out


def stabilization_check(k_max: int, G: int) -> bool:
    """ILW densities at cutoff G+1 agree with cutoff G modulo (eps mu)^G."""
    a = reduced_densities("ilw", k_max, G)
    b = reduced_densities("ilw", k_max, G + 1)
    return all(b[k].with_trunc(G) == a[k] for k in a.densities)


# -- cache file ----------------------------------------------------------------------

def cache_path(path: str | None = None) -> str:
    if path:
        return path
    return os.environ.get("QKDV_CACHE", os.path.join(os.path.expanduser("~"), ".cache",
                                                     "qkdv", "densities.json"))


def validate_table(table: DensityTable) -> bool:
    """Recheck every step of the reduced recursion for a reduced table."""
    if table[-2] != DiffPoly.const(1).with_trunc(table.G) or table[-1] != DiffPoly.u(0).with_trunc(table.G):
        return False
    for k in range(-1, table.k_max):
        lhs = dx(table[k + 1])
        lhs = lhs.scale(k + 2) + d_operator(lhs)
        if lhs != r1_ilw(table[k], table.G, table.mode):
            return False
        if table[k + 1].partial(0) != table[k]:
            return False
    return True


def save_tables(tables: list[DensityTable], path: str | None = None) -> str:
    """Write tables as canonical JSON (sorted keys, tables ordered by mode and G)."""
    path = cache_path(path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tables = sorted(tables, key=lambda t: (t.mode, t.G or 0))
    text = json.dumps({"tables": [t.to_json() for t in tables]}, sort_keys=True, indent=1)
    with open(path, "w") as fh:
        fh.write(text + "\n")
    return path


def build_cache(mode: str, k_max: int, G: int | None = None, path: str | None = None) -> str:
    """Compute the reduced table and store it, replacing any entry with the same (mode, G)."""
    if mode == "ilw" and G is None:
        G = DEFAULT_GENUS
    table = reduced_densities(mode, k_max, G)
    try:
        tables = load_tables(path)
    except FileNotFoundError:
        tables = []
    tables = [t for t in tables if (t.mode, t.G) != (table.mode, table.G)] + [table]
    return save_tables(tables, path)


def cached_reduced(mode: str, k_max: int, G: int | None = None,
                   path: str | None = None) -> DensityTable | None:
    """A valid cached reduced table covering k_max, or None."""
    if mode == "ilw" and G is None:
        G = DEFAULT_GENUS
    try:
        tables = load_tables(path)
    except (OSError, ValueError, KeyError):
        return None
    for t in tables:
        if t.mode == mode and t.G == (G if mode == "ilw" else None) and t.k_max >= k_max:
            return t if validate_table(t) else None
    return None


def load_tables(path: str | None = None) -> list[DensityTable]:
    path = cache_path(path)
    with open(path) as fh:
        data = json.load(fh)
    return [DensityTable.from_json(t) for t in data.get("tables", [])]


# -- appendix: eps = 0 and the eps extremes --------------------------------------------

def _series_mul(a: list, b: list, K: int) -> list:
    out = [DiffPoly() for _ in range(K + 1)]
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(K + 1 - i):
            if b[j]:
                out[i + j] = out[i + j] + x * b[j]
    return out


def eliashberg_densities(k_max: int) -> dict[int, tuple[DiffPoly, DiffPoly]]:
    """Coefficients of y^{k+2} in exp(y S(iy dx) u0)/S(y) and exp(y S(iy dx) u0): {k: (full, reduced)}."""
    K = k_max + 2
    # y S(iy dx) u0 = sum_k (-1)^k y^{2k+1} u_{2k} / (4^k (2k+1)!)
    A = [DiffPoly() for _ in range(K + 1)]
    for k in range(K):
        if 2 * k + 1 <= K:
            A[2 * k + 1] = DiffPoly.u(2 * k).scale(Fraction((-1) ** k, 4 ** k * factorial(2 * k + 1)))
    expo = [DiffPoly() for _ in range(K + 1)]
    expo[0] = DiffPoly.const(1)
    power = list(expo)
    for n in range(1, K + 1):
        power = _series_mul(power, A, K)
        for j in range(K + 1):
            if power[j]:
                expo[j] = expo[j] + power[j].scale(Fraction(1, factorial(n)))
    # 1/S(y) with S(y) = sum y^{2k} / (4^k (2k+1)!)
    s = [Fraction(0)] * (K + 1)
    for k in range(K // 2 + 1):
        s[2 * k] = Fraction(1, 4 ** k * factorial(2 * k + 1))
    inv = [Fraction(0)] * (K + 1)
    inv[0] = Fraction(1)
    for n in range(1, K + 1):
        inv[n] = -sum(s[j] * inv[n - j] for j in range(1, n + 1))
    full = _series_mul(expo, [DiffPoly.const(x) if x else DiffPoly() for x in inv], K)
    return {k: (full[k + 2], expo[k + 2]) for k in range(-2, k_max + 1)}


@lru_cache(maxsize=None)
def d_coeff(j: int, k: int) -> Fraction:
    """d(j, k) from d(0,0) = 1/2 and the recurrence in k."""
    if j < 0 or k < 0 or j > 2 * k:
        return Fraction(0)
    if k == 0:
        return Fraction(1, 2)
    kk = k - 1  # solving for d(., kk+1)
    rhs = Fraction(comb(2 * kk + 3, j), 2 * factorial(kk + 1)) + 2 * (d_coeff(j - 3, kk) + d_coeff(j, kk))
    return rhs / (2 * kk + 3) - d_coeff(j - 1, k)


def d_recurrence_consistent(k: int) -> bool:
    """The recurrence at j = 2k+3 must reproduce d(2k+2, k+1) + d(2k+3, k+1) consistently."""
    j = 2 * k + 3
    lhs = (2 * k + 3) * (d_coeff(j, k + 1) + d_coeff(j - 1, k + 1))
    rhs = Fraction(comb(2 * k + 3, j), 2 * factorial(k + 1)) + 2 * (d_coeff(j - 3, k) + d_coeff(j, k))
    return lhs == rhs


def d_genfun_coefficients(k_max: int) -> dict[tuple[int, int], Fraction]:
    """[y^j x^k] of 1/(2 sqrt(1 - 2x(1+y)^2) (1 - 2x(1-y+y^2))) for k <= k_max."""
    def ypow(poly, n):
        out = [Fraction(1)]
        for _ in range(n):
            new = [Fraction(0)] * (len(out) + len(poly) - 1)
            for i, a in enumerate(out):
                for j, b in enumerate(poly):
                    new[i + j] += a * b
            out = new
        return out

    # (1 - t)^{-1/2} = sum C(2n, n)/4^n t^n with t = 2x (1+y)^2; 1/(1-s) = sum s^n, s = 2x(1-y+y^2)
    sq = {n: [Fraction(comb(2 * n, n) * 2 ** n, 4 ** n) * c for c in ypow([1, 2, 1], n)]
          for n in range(k_max + 1)}
    geo = {n: [Fraction(2 ** n) * c for c in ypow([1, -1, 1], n)] for n in range(k_max + 1)}
    out: dict[tuple[int, int], Fraction] = {}
    for k in range(k_max + 1):
        acc: dict[int, Fraction] = {}
        for a in range(k + 1):
            for i, x in enumerate(sq[a]):
                for j, y in enumerate(geo[k - a]):
                    acc[i + j] = acc.get(i + j, Fraction(0)) + x * y / 2
        for j, v in acc.items():
            out[(j, k)] = v
    return out


def d_genfun_check(j_max: int, k_max: int) -> bool:
    gf = d_genfun_coefficients(k_max)
    for k in range(k_max + 1):
        for j in range(j_max + 1):
            if double_factorial(2 * k + 1) * d_coeff(j, k) != gf.get((j, k), Fraction(0)):
                return False
    return True


def epsilon_extremes(k: int) -> tuple[DiffPoly, DiffPoly | None]:
    """([eps^{k+1}] g_k, [eps^k] g_k) in closed form; subleading is None for k = -1."""
    if k < -1:
        raise ValueError("k must be at least -1")
    leading = DiffPoly.u(2 * k + 2).scale(Fraction(1, 24 ** (k + 1) * factorial(k + 1)))
    if k == -1:
        return leading, None
    const = -bernoulli(2 * k + 2) / ((-4) ** k * double_factorial(2 * k + 1) * (4 * k + 4))
    sub = DiffPoly.const(const)
    for j in range(2 * k + 1):
        d = d_coeff(j, k)
        if d:
            sub = sub + DiffPoly.u(j, 2 * k - j).scale(d / 24 ** k)
    return leading, sub


def g_infinity_operator(k: int) -> QuantizedOperator:
    """(c^2/2) delta_{k,0} + L_{2k+2} / ((-4)^k (2k+1)!!)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    src = l_operator(2 * k + 2).source.scale(Fraction(1, (-4) ** k * double_factorial(2 * k + 1)))
    if k == 0:
        src = src + DiffPoly.const(Scalar.monomial(c=2, value=Fraction(1, 2)))
    return QuantizedOperator(src)


# -- perturbative eigenvalues (exploratory) --------------------------------------------

def _rational_matrix(op_source: DiffPoly, n: int, basis) -> list[list[Fraction]]:
    m = matrix_on(quantize(op_source), n)
    # quantization reintroduces c through normal ordering; H is taken at c = 0
    return [[m.entry(r, c).subs(c=0).constant_value() for c in basis] for r in basis]


def _matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
            for i in range(len(a))]


def perturbative_eigenvalues(k: int, n: int, order: int, weights: list[int] | None = None
                             ) -> dict[tuple[int, ...], Scalar]:
    """Eigenvalues of G_k^KdV(eps) on Lambda_n as polynomials in c and eps mod eps^{order+1}.

    Eigenvectors are followed by Rayleigh-Schroedinger perturbation of
    H = sum_j t_j G_j (j = 0..n) at c = 0, starting from the Schur basis.
    """
    if n < 1 or order < 0:
        raise ValueError("need n >= 1 and order >= 0")
    jmax = max(n, k)
    table = densities("kdv", jmax)
    basis = canonical_sorted(partitions_of(n))
    size = len(basis)
    # Schur change of basis: column lam holds the p-coefficients of s_lam
    S = [[schur(tuple(lam)).coefficient(mu).constant_value() for lam in basis] for mu in basis]
    S_inv = inverse(S)
    if weights is None:
        weights = [(n + 3) ** j for j in range(n + 1)]
    # H^{(a)} in the Schur basis at c = 0
    H: dict[int, list[list[Fraction]]] = {}
    for j, t in enumerate(weights):
        g = table[j].subs(c=0)
        for a in range(g.param_degree() + 1):
            part = g.coeff_of("eps", a)
            if not part:
                continue
            M = _matmul(S_inv, _matmul(_rational_matrix(part, n, basis), S))
            acc = H.setdefault(a, [[Fraction(0)] * size for _ in range(size)])
            for r in range(size):
                for c in range(size):
                    acc[r][c] += t * M[r][c]
    H0 = H[0]
    for r in range(size):
        for c in range(size):
            if r != c and H0[r][c]:
                raise DegenerateSpectrum("eps = 0 operator is not diagonal in the Schur basis")
    e0 = [H0[i][i] for i in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            if e0[i] == e0[j]:
                raise DegenerateSpectrum(
                    f"order-0 eigenvalues of {basis[i]} and {basis[j]} coincide",
                    pair=(basis[i], basis[j]))
    # target operator G_k(eps) with c formal, in the Schur basis
    gk = table[k]
    target: dict[int, list[list[Scalar]]] = {}
    for a in range(min(order, gk.param_degree()) + 1):
        part = gk.coeff_of("eps", a)
        if not part:
            continue
        Mc = matrix_on(quantize(part), n)
        target[a] = [[sum((S_inv[r][x] * _scalar_entry(Mc, basis[x], basis[y]) * S[y][c]
                           for x in range(size) for y in range(size)
                           if S_inv[r][x] and S[y][c]), ZERO)
                      for c in range(size)] for r in range(size)]
    out = {}
    for lam_i, lam in enumerate(basis):
        # v^{(m)} with v^{(0)} = e_lam and v^{(m)}_lam = 0
        vs = [[Fraction(int(i == lam_i)) for i in range(size)]]
        es = [e0[lam_i]]
        for m in range(1, order + 1):
            rhs = [Fraction(0)] * size
            for a in range(1, m + 1):
                if a in H:
                    Ha = H[a]
                    v = vs[m - a]
                    for i in range(size):
                        rhs[i] += sum((Ha[i][x] * v[x] for x in range(size) if v[x]), Fraction(0))
            em = rhs[lam_i] - sum((es[a] * vs[m - a][lam_i] for a in range(1, m)), Fraction(0))
            es.append(em)
            vm = [Fraction(0)] * size
            for i in range(size):
                if i == lam_i:
                    continue
                val = rhs[i] - sum((es[a] * vs[m - a][i] for a in range(1, m + 1)), Fraction(0))
                vm[i] = val / (e0[lam_i] - e0[i])
            vs.append(vm)
        total = ZERO
        for m in range(order + 1):
            for a, T in target.items():
                if a > m:
                    continue
                v = vs[m - a]
                comp = ZERO
                for x in range(size):
                    if v[x]:
                        comp = comp + T[lam_i][x].scale(v[x])
                total = total + comp * Scalar.monomial(eps=m)
        out[tuple(lam)] = total
    return out


def _scalar_entry(M, r, c) -> Scalar:
    return M.entry(r, c)


__all__ = [
    "PPolynomial", "p_polynomial", "p_polynomial_closed", "tilde_p", "commutator_bracket",
    "ilw_g1", "r1_ilw", "r2_ilw", "DensityTable", "reduced_densities", "densities",
    "recursion_residuals", "stabilization_check", "eliashberg_densities", "d_coeff",
    "d_genfun_check", "d_recurrence_consistent", "epsilon_extremes", "g_infinity_operator",
    "perturbative_eigenvalues", "validate_table", "save_tables", "load_tables", "cache_path",
    "build_cache", "cached_reduced", "DEFAULT_GENUS",
]
