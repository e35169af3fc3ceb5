"""Command-line front end.

Exit codes: 0 on success (or a relation that holds), 1 on a failed
verification or inconsistent samples, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .arith import InconsistentSamples, format_rational
from .cohft import chiodo_chern_character
from .graphs import (
    UnstablePair,
    automorphism_order,
    enumerate_stable_graphs,
    graph_to_json,
)
from .intersect import IntegralCache, kappa_psi_integral
from .pixton import PixtonInput, dr_cycle, pixton_rpoly, sample_range
from .strata import TautClass, set_integral_cache
from .verify import compare_hain, compare_pixton_zvonkine, verify_dr_vanishing

CACHE_ENV = "DRCYCLES_CACHE"


class UsageError(Exception):
    pass


def _int_list(text: str | None) -> list[int]:
    if text is None or text.strip() in ("", "()", "[]"):
        return []
    try:
        return [int(x) for x in text.replace("(", "").replace(")", "").split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _emit(data, fmt: str, table) -> None:
    if fmt == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        for line in table():
            print(line)


def _class_table(cl: TautClass):
    def rows():
        for item in cl.to_json():
            dec = item["decoration"]
            yield (
                f"{item['coefficient']:>14}  vertices={item['graph']['vertices']} "
                f"legs={item['graph']['legs']} edges={item['graph']['edges']} "
                f"kappa={dec['kappa']} psi={dec['psi']}"
            )
    return rows


def _resolve(args, need_A: bool = True):
    g = args.g if args.g is not None else args.g_pos
    if g is None:
        raise UsageError("genus missing: pass --g")
    A_text = args.A if args.A is not None else args.A_pos
    if A_text is None and need_A:
        A_text = ""
    k = args.k if args.k is not None else (args.k_pos if args.k_pos is not None else 0)
    A = _int_list(A_text)
    if 2 * g - 2 + len(A) <= 0:
        raise UsageError(f"(g, n) = ({g}, {len(A)}) is unstable: need 2g - 2 + n > 0")
    return g, A, k


def _max_codim(args, g: int, n: int) -> int:
    dim = 3 * g - 3 + n
    if args.max_codim is None:
        return dim
    if not 0 <= args.max_codim <= dim:
        raise UsageError(f"--max-codim must lie in 0..{dim}")
    return args.max_codim


def _samples(args, inp: PixtonInput):
    rs = sample_range(inp, r_min=args.r_min, oversample=args.oversample, count=args.r_samples)
    return rs


def cmd_graphs(args) -> int:
    g = args.g if args.g is not None else args.g_pos
    n = args.n if args.n is not None else args.n_pos
    if g is None or n is None:
        raise UsageError("graphs needs a genus and a number of markings")
    try:
        gs = enumerate_stable_graphs(g, n)
    except UnstablePair as e:
        raise UsageError(str(e)) from None
    data = [dict(graph_to_json(G), automorphisms=automorphism_order(G)) for G in gs]

    def table():
        yield f"{len(gs)} stable graphs for (g, n) = ({g}, {n})"
        for d in data:
            yield f"  |Aut|={d['automorphisms']:<3} vertices={d['vertices']} legs={d['legs']} edges={d['edges']}"

    _emit({"g": g, "n": n, "count": len(gs), "graphs": data}, args.format, table)
    return 0


def cmd_integral(args) -> int:
    g = args.g if args.g is not None else args.g_pos
    if g is None:
        raise UsageError("integral needs --g")
    psi = _int_list(args.psi if args.psi is not None else args.psi_pos)
    kappa = _int_list(args.kappa)
    if any(x < 0 for x in psi + kappa):
        raise UsageError("exponents must be non-negative")
    n = len(psi)
    if 2 * g - 2 + n <= 0:
        raise UsageError(f"(g, n) = ({g}, {n}) is unstable")
    cache = _cache(args)
    if cache is not None:
        value = cache.get(g, psi, kappa)
    else:
        value = kappa_psi_integral(g, n, kappa, psi)
    _emit({"g": g, "psi": psi, "kappa": kappa, "value": format_rational(value)}, args.format,
          lambda: [format_rational(value)])
    return 0


def cmd_pixton(args) -> int:
    g, A, k = _resolve(args)
    inp = PixtonInput(g, A, k, _max_codim(args, g, len(A)))
    rs = _samples(args, inp)
    rp = pixton_rpoly(inp, rs, jobs=args.jobs)
    const = rp.constant_term()
    data = {
        "g": g, "A": A, "k": k, "max_codim": inp.max_codim, "r_samples": rs,
        "polynomials_in_r": rp.to_json(), "constant_term": const.to_json(),
    }
    _emit(data, args.format, _class_table(const))
    return 0


def cmd_dr(args) -> int:
    g, A, _ = _resolve(args)
    if sum(A) != 0:
        raise UsageError("the DR cycle needs sum(A) = 0")
    D = dr_cycle(g, A, oversample=args.oversample, jobs=args.jobs)
    _emit({"g": g, "A": A, "class": D.to_json()}, args.format, _class_table(D))
    return 0


def cmd_verify(args) -> int:
    g, A, k = _resolve(args)
    n = len(A)
    if sum(A) != k * (2 * g - 2 + n):
        raise UsageError(f"need sum(A) = k(2g - 2 + n) = {k * (2 * g - 2 + n)}")
    d_range = _int_list(args.d) if args.d else None
    dim = 3 * g - 3 + n
    if d_range and any(d <= g or d > dim for d in d_range):
        raise UsageError(f"degrees must lie in ({g}, {dim}]")
    certs = verify_dr_vanishing(g, A, k, d_range, oversample=args.oversample, jobs=args.jobs)
    data = [c.to_json() for c in certs]

    def table():
        for c in certs:
            bad = c.nonzero()
            yield (f"degree {c.d}: {c.verdict} ({len(c.pairings)} pairings"
                   + (f", {len(bad)} nonzero" if bad else "") + ")")

    _emit({"certificates": data}, args.format, table)
    return 0 if all(c.holds for c in certs) else 1


def cmd_compare(args) -> int:
    g, A, k = _resolve(args)
    mc = _max_codim(args, g, len(A))
    if args.which == "zvonkine":
        if sum(A) != k * (2 * g - 2 + len(A)):
            raise UsageError("need sum(A) = k(2g - 2 + n)")
        res = compare_pixton_zvonkine(g, A, k, mc, oversample=args.oversample)
    else:
        if sum(A) != 0 or k != 0:
            raise UsageError("the compact-type comparison needs k = 0 and sum(A) = 0")
        res = compare_hain(g, A, mc)
    _emit(res.to_json(), args.format, lambda: [f"{args.which}: {'equal' if res.equal else 'DIFFERENT'}"])
    return 0 if res.equal else 1


def cmd_chiodo(args) -> int:
    g, A, k = _resolve(args)
    if args.r is None or args.r < 1:
        raise UsageError("chiodo needs --r >= 1")
    if args.d is None:
        raise UsageError("chiodo needs --d")
    d = int(args.d)
    if (sum(A) - k * (2 * g - 2 + len(A))) % args.r:
        raise UsageError("need sum(A) = k(2g - 2 + n) mod r")
    ch = chiodo_chern_character(g, A, k, args.r, d)
    _emit({"g": g, "A": A, "k": k, "r": args.r, "d": d, "class": ch.to_json()}, args.format,
          _class_table(ch))
    return 0


def _cache(args):
    path = args.cache or os.environ.get(CACHE_ENV)
    if not path:
        return None
    cache = IntegralCache(path)
    set_integral_cache(cache)
    return cache


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--g", type=int, help="genus")
    common.add_argument("--A", help="comma-separated integers; use --A=-1,1 when the first is negative")
    common.add_argument("--k", type=int, help="twist by powers of the log canonical (default 0)")
    common.add_argument("--max-codim", type=int, dest="max_codim")
    common.add_argument("--r-min", type=int, dest="r_min", help="smallest r sample")
    common.add_argument("--r-samples", type=int, dest="r_samples", help="number of r samples")
    common.add_argument("--oversample", type=int, default=3, help="surplus samples checked (default 3)")
    common.add_argument("--cache", help=f"integral cache file (default: ${CACHE_ENV})")
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("--format", choices=("json", "table"), default="json")

    p = argparse.ArgumentParser(prog="drcycles", description="Pixton's DR formula in the strata algebra")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("graphs", parents=[common], help="enumerate stable graphs")
    s.add_argument("g_pos", type=int, nargs="?")
    s.add_argument("n_pos", type=int, nargs="?")
    s.add_argument("--n", type=int)
    s.set_defaults(func=cmd_graphs)

    s = sub.add_parser("integral", parents=[common], help="psi/kappa intersection number")
    s.add_argument("g_pos", type=int, nargs="?")
    s.add_argument("psi_pos", nargs="?")
    s.add_argument("--psi", help="psi exponents, one per marking")
    s.add_argument("--kappa", help="kappa indices")
    s.set_defaults(func=cmd_integral)

    for name, func, hlp in (
        ("pixton", cmd_pixton, "Omega^r as polynomials in r and the constant term"),
        ("dr", cmd_dr, "the double ramification cycle"),
        ("verify", cmd_verify, "certify vanishing of Omega in degrees above g"),
        ("chiodo", cmd_chiodo, "Chern character of the pushforward of the r-th root"),
    ):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("g_pos", type=int, nargs="?")
        s.add_argument("A_pos", nargs="?")
        s.add_argument("k_pos", type=int, nargs="?")
        if name == "verify":
            s.add_argument("--d", help="comma-separated degrees (default: all above g)")
        if name == "chiodo":
            s.add_argument("--r", type=int)
            s.add_argument("--d", type=int)
        s.set_defaults(func=func)

    s = sub.add_parser("compare", parents=[common], help="cross-check constructions")
    s.add_argument("which", choices=("zvonkine", "hain"))
    s.add_argument("g_pos", type=int, nargs="?")
    s.add_argument("A_pos", nargs="?")
    s.add_argument("k_pos", type=int, nargs="?")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.oversample < 0:
        parser.error("--oversample must be >= 0")
    try:
        if args.command != "integral":
            _cache(args)
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except InconsistentSamples as e:
        print(f"error: {e}\nhint: the r-threshold or degree bound was too small; "
              f"retry with a larger --r-min", file=sys.stderr)
        return 1
    finally:
        set_integral_cache(None)


if __name__ == "__main__":
    sys.exit(main())
