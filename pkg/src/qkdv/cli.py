"""Command-line front end: densities, q-series, recognition, verification, matrices, cache.

Exit codes: 0 ok, 1 a mathematical check failed, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .diffpoly import b_operator, diffpoly_to_json, render
from .errors import DegenerateSpectrum, QKdVError
from .hierarchy import (DEFAULT_GENUS, DensityTable, build_cache, cache_path, cached_reduced,
                        densities, ilw_g1, load_tables, perturbative_eigenvalues,
                        reduced_densities, validate_table)
from .quantization import matrix_on, q_series, quantize
from .quasimodular import (QSeries, qmpoly_to_json, qseries_to_json, recognize,
                           weight_split)
from .scalar import parse_rational, scalar_to_json
from .verify import verify_theorem

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class Config:
    qorder: int = 24
    genus: int = DEFAULT_GENUS
    c: Fraction | None = None  # None means formal
    json: bool = False
    cache: str | None = None

    def __post_init__(self):
        if self.qorder < 1:
            raise ValueError("--qorder must be at least 1")
        if self.genus < 1:
            raise ValueError("--genus must be at least 1")

    def specialize_c(self, obj):
        """Specialize c in any object with map_scalars, if a rational c was requested."""
        if self.c is None:
            return obj
        return obj.map_scalars(lambda s: s.subs(c=self.c))


def _c_value(text: str) -> Fraction | None:
    if text == "formal":
        return None
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"--c expects 'formal' or a rational, got {text!r}")


def _emit(cfg: Config, payload: dict, text: str) -> None:
    if cfg.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _genus(cfg: Config, mode: str):
    return cfg.genus if mode == "ilw" else None


def _table(cfg: Config, mode: str, k: int, reduced: bool = False) -> DensityTable:
    G = _genus(cfg, mode)
    if cfg.cache:
        red = cached_reduced(mode, max(k, -1), G, cfg.cache)
        if red is not None:
            if reduced:
                return red
            return DensityTable(mode, G, {j: b_operator(p) for j, p in red.items()})
    if reduced:
        return reduced_densities(mode, max(k, -1), G)
    return densities(mode, k, G)


# -- subcommands ---------------------------------------------------------------------

def cmd_density(cfg: Config, args) -> int:
    if args.source:
        g = ilw_g1(cfg.genus, args.mode)
    else:
        if args.reduced and args.k < -1:
            raise ValueError("reduced densities start at k = -1")
        g = _table(cfg, args.mode, args.k, args.reduced)[args.k]
    values = {}
    if args.eps is not None:
        values["eps"] = args.eps
    if args.mu is not None:
        values["mu"] = args.mu
    if values:
        g = g.subs(**values)
    g = cfg.specialize_c(g)
    payload = {"mode": args.mode, "k": args.k, "reduced": args.reduced,
               "G": _genus(cfg, args.mode), "density": diffpoly_to_json(g)}
    _emit(cfg, payload, render(g))
    return EXIT_OK


def _series(cfg: Config, mode: str, k: int) -> QSeries:
    return q_series(quantize(_table(cfg, mode, k)[k]), cfg.qorder)


def cmd_qseries(cfg: Config, args) -> int:
    s = cfg.specialize_c(_series(cfg, args.mode, args.k))
    _emit(cfg, {"mode": args.mode, "k": args.k, "series": qseries_to_json(s)}, str(s))
    return EXIT_OK


def cmd_recognize(cfg: Config, args) -> int:
    s = _series(cfg, args.mode, args.k)
    weight = args.weight if args.weight is not None else args.k + 2
    f = cfg.specialize_c(recognize(s, weight, basis=args.basis))
    payload = {"mode": args.mode, "k": args.k, "recognized": qmpoly_to_json(f),
               "weights": sorted(weight_split(f))}
    _emit(cfg, payload, str(f))
    return EXIT_OK


def cmd_verify(cfg: Config, args) -> int:
    start = -2 if args.start is None else args.start
    ks = range(start, args.k_max + 1) if args.k_max >= start else [args.k_max]
    reports = [verify_theorem(args.mode, k, N=cfg.qorder, G=_genus(cfg, args.mode)) for k in ks]
    if cfg.json:
        print(json.dumps({"reports": [r.to_json() for r in reports],
                          "ok": all(r.ok for r in reports)}, sort_keys=True))
    else:
        for r in reports:
            status = "PASS" if r.ok else "FAIL"
            weights = ",".join(str(w) for w in r.weights) or "-"
            print(f"{status}  k={r.k:<3d} weight={weights:<4s} {r.recognized}")
            for note in r.notes:
                print(f"      note: {note}")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def cmd_matrix(cfg: Config, args) -> int:
    g = _table(cfg, args.mode, args.k)[args.k]
    M = cfg.specialize_c(matrix_on(quantize(g), args.n))
    lines = ["basis: " + " ".join(_plabel(b) for b in M.basis)]
    for r, row in zip(M.basis, M.rows()):
        lines.append(f"{_plabel(r):>12s} | " + "  ".join(str(v) for v in row))
    _emit(cfg, {"k": args.k, "mode": args.mode, "matrix": M.to_json()}, "\n".join(lines))
    return EXIT_OK


def _plabel(lam) -> str:
    return "p(" + ",".join(map(str, lam)) + ")" if lam else "p()"


def cmd_eigenvalues(cfg: Config, args) -> int:
    try:
        ev = perturbative_eigenvalues(args.k, args.n, args.order)
    except DegenerateSpectrum as exc:
        pair = " and ".join(str(list(p)) for p in exc.pair) if exc.pair else "unknown"
        print(f"degenerate spectrum: {exc} (partitions {pair})", file=sys.stderr)
        return EXIT_FAIL
    ev = {lam: (v if cfg.c is None else v.subs(c=cfg.c)) for lam, v in ev.items()}
    payload = {"k": args.k, "n": args.n, "order": args.order,
               "eigenvalues": [{"schur": list(lam), "value": scalar_to_json(v)}
                               for lam, v in ev.items()]}
    text = "\n".join(f"s({','.join(map(str, lam))}): {v}" for lam, v in ev.items())
    _emit(cfg, payload, text)
    return EXIT_OK


def cmd_cache(cfg: Config, args) -> int:
    path = cache_path(cfg.cache)
    if args.action == "build":
        mode = args.mode or "kdv"
        k_max = 6 if args.k_max is None else args.k_max
        build_cache(mode, k_max, _genus(cfg, mode), path)
        print(f"built {mode} k<={k_max} -> {path}")
        return EXIT_OK
    if args.action == "clear":
        if os.path.exists(path):
            os.remove(path)
            print(f"removed {path}")
        else:
            print(f"no cache at {path}")
        return EXIT_OK
    # validate
    try:
        tables = load_tables(path)
    except FileNotFoundError:
        print(f"no cache at {path}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError) as exc:
        print(f"unreadable cache {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ok = True
    for t in tables:
        good = validate_table(t)
        ok &= good
        label = f"{t.mode}" + (f" G={t.G}" if t.G else "")
        print(f"{'OK  ' if good else 'FAIL'} {label} k<={t.k_max}")
    return EXIT_OK if ok else EXIT_FAIL


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--qorder", type=int, default=argparse.SUPPRESS,
                        help="q-series truncation order N (default 24)")
    common.add_argument("--genus", type=int, default=argparse.SUPPRESS,
                        help="ILW genus cutoff G: work modulo (eps mu)^G (default 3)")
    common.add_argument("--c", type=_c_value, default=argparse.SUPPRESS,
                        help="'formal' (default) or a rational value for c in the output")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="canonical JSON output")
    common.add_argument("--cache", default=argparse.SUPPRESS,
                        help="density cache file (default $QKDV_CACHE or ~/.cache/qkdv)")

    p = argparse.ArgumentParser(prog="qkdv", description=__doc__.splitlines()[0],
                                parents=[common])
    p.add_argument("--version", action="version", version=f"qkdv {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def mode_k(sp):
        sp.add_argument("mode", choices=["kdv", "ilw"])
        sp.add_argument("k", type=int)

    sp = sub.add_parser("density", parents=[common], help="print a Hamiltonian density g_k")
    mode_k(sp)
    sp.add_argument("--reduced", action="store_true", help="the reduced density B^{-1} g_k")
    sp.add_argument("--source", action="store_true",
                    help="print the closed-form G_1 source instead of a recursion output")
    sp.add_argument("--eps", type=parse_rational, help="specialize eps")
    sp.add_argument("--mu", type=parse_rational, help="specialize mu")
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("qseries", parents=[common], help="q-series of the quantized g_k")
    mode_k(sp)
    sp.set_defaults(func=cmd_qseries)

    sp = sub.add_parser("recognize", parents=[common],
                        help="write the q-series of g_k in G2, G4, G6")
    mode_k(sp)
    sp.add_argument("--weight", type=int, help="maximal total weight (default k+2)")
    sp.add_argument("--basis", choices=["le", "exact", "adaptive"], default="adaptive")
    sp.set_defaults(func=cmd_recognize)

    sp = sub.add_parser("verify", parents=[common],
                        help="check quasimodularity of weight k+2 for -2 <= k <= k_max")
    sp.add_argument("mode", choices=["kdv", "ilw"])
    sp.add_argument("k_max", type=int)
    sp.add_argument("--from", dest="start", type=int, help="first k (default -2)")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("matrix", parents=[common], help="matrix of G_k on Lambda_n, p-basis")
    sp.add_argument("k", type=int)
    sp.add_argument("n", type=int)
    sp.add_argument("--mode", choices=["kdv", "ilw"], default="kdv")
    sp.set_defaults(func=cmd_matrix)

    sp = sub.add_parser("eigenvalues", parents=[common],
                        help="perturbative eigenvalues of G_k on Lambda_n (exploratory)")
    sp.add_argument("k", type=int)
    sp.add_argument("n", type=int)
    sp.add_argument("--order", type=int, default=2, help="eps order (default 2)")
    sp.set_defaults(func=cmd_eigenvalues)

    sp = sub.add_parser("cache", parents=[common], help="manage the density cache")
    sp.add_argument("action", choices=["build", "validate", "clear"])
    sp.add_argument("mode", nargs="?", choices=["kdv", "ilw"])
    sp.add_argument("k_max", nargs="?", type=int)
    sp.set_defaults(func=cmd_cache)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(qorder=getattr(args, "qorder", 24), genus=getattr(args, "genus", DEFAULT_GENUS),
                     c=getattr(args, "c", None), json=getattr(args, "json", False),
                     cache=getattr(args, "cache", None))
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return args.func(cfg, args)
    except QKdVError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
