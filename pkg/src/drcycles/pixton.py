"""Pixton's graph sum Omega^r_{g,A,k}, its polynomial dependence on r, the
constant term Omega_{g,A,k}, Hain's compact-type class and the DR cycle."""
from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Iterable, Mapping, Sequence

from .arith import format_rational, interpolate_polynomial
from .graphs import (
    StableGraph,
    automorphism_order,
    enumerate_stable_graphs,
    enumerate_weightings,
    from_key,
    trivial_graph,
)
from .strata import TautClass, generator_codim, generator_key

__all__ = [
    "PixtonInput",
    "RPolyClass",
    "DivisibilityFailure",
    "r_threshold",
    "sample_range",
    "interpolate_classes",
    "max_degree_bound",
    "local_polynomial_sum",
    "pixton_fixed_r",
    "pixton_rpoly",
    "pixton_class",
    "hain_class",
    "hain_power_expansion",
    "dr_cycle",
]

log = logging.getLogger(__name__)


class DivisibilityFailure(ArithmeticError):
    """A weighting sum failed to be divisible by r^{h1}."""


class PixtonInput:
    __slots__ = ("g", "A", "k", "max_codim")

    def __init__(self, g: int, A: Sequence[int], k: int = 0, max_codim: int | None = None):
        n = len(A)
        if 2 * g - 2 + n <= 0:
            raise ValueError(f"(g, n) = ({g}, {n}) is unstable")
        dim = 3 * g - 3 + n
        if max_codim is None:
            max_codim = dim
        if not 0 <= max_codim <= dim:
            raise ValueError(f"max_codim must lie in 0..{dim}")
        self.g = g
        self.A = tuple(int(a) for a in A)
        self.k = int(k)
        self.max_codim = max_codim

    @property
    def n(self) -> int:
        return len(self.A)

    def balanced(self) -> bool:
        return sum(self.A) == self.k * (2 * self.g - 2 + self.n)

    def __repr__(self) -> str:
        return f"PixtonInput(g={self.g}, A={list(self.A)}, k={self.k}, max_codim={self.max_codim})"


# ----------------------------------------------------------------------------
# local polynomials in kappa_1 at vertices and psi at half-edges

Poly = dict  # exponent tuple -> Fraction


def _mul(p: Poly, q: Poly, cap: int) -> Poly:
    out: Poly = defaultdict(Fraction)
    for e1, c1 in p.items():
        d1 = sum(e1)
        for e2, c2 in q.items():
            if d1 + sum(e2) > cap:
                continue
            out[tuple(a + b for a, b in zip(e1, e2))] += c1 * c2
    return {e: c for e, c in out.items() if c}


def _exp_linear(nvars: int, idx: int, c: Fraction, cap: int) -> Poly:
    """exp(c * x_idx) truncated at degree ``cap``."""
    out = {}
    for m in range(cap + 1):
        e = [0] * nvars
        e[idx] = m
        out[tuple(e)] = c**m / factorial(m)
    return out


def _edge_coefficient(m: int, x) -> Fraction:
    """Coefficient of (psi + psi')^m in (1 - exp(-x (psi + psi')/2)) / (psi + psi')."""
    return -((-Fraction(x) / 2) ** (m + 1)) / factorial(m + 1)


def local_polynomial_sum(
    graph: StableGraph,
    weightings: Iterable[Mapping[int, int]],
    cap: int,
    edge_coefficient: Callable[[int, int, int], Fraction],
) -> dict[tuple[int, ...], Fraction]:
    """Sum over weightings of the product of edge series.

    Returns a map from edge-degree vectors (m_e) to the summed scalar
    coefficient of prod_e (psi_h + psi_h')^{m_e}.  ``edge_coefficient(m, w, w')``
    supplies the series coefficients.
    """
    E = graph.num_edges
    vectors = [v for v in itertools.product(range(cap + 1), repeat=E) if sum(v) <= cap]
    out: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    for w in weightings:
        per_edge = []
        for h, h2 in graph.edges:
            per_edge.append([edge_coefficient(m, w[h], w[h2]) for m in range(cap + 1)])
        for vec in vectors:
            c = Fraction(1)
            for e, m in enumerate(vec):
                c *= per_edge[e][m]
                if not c:
                    break
            if c:
                out[vec] += c
    return dict(out)


def _assemble(
    graph: StableGraph,
    edge_sums: Mapping[tuple[int, ...], Fraction],
    cap: int,
    vertex_kappa: Fraction,
    leg_psi: Sequence[Fraction],
    scale: Fraction,
) -> dict:
    """Expand vertex/leg exponentials and edge powers into generator keys.

    Vertex factor exp(vertex_kappa * kappa_1), leg factor exp(leg_psi[i] * psi_i).
    """
    halves = [h for hs in graph.legs for h in hs]
    hidx = {h: graph.num_vertices + i for i, h in enumerate(halves)}
    nvars = graph.num_vertices + len(halves)
    base: Poly = {(0,) * nvars: Fraction(1)}
    for v in range(graph.num_vertices):
        if vertex_kappa:
            base = _mul(base, _exp_linear(nvars, v, vertex_kappa, cap), cap)
    for i, c in enumerate(leg_psi, start=1):
        if c:
            base = _mul(base, _exp_linear(nvars, hidx[i], c, cap), cap)
    total: Poly = defaultdict(Fraction)
    for vec, s in edge_sums.items():
        if sum(vec) > cap:
            continue
        p: Poly = {(0,) * nvars: s}
        for (h, h2), m in zip(graph.edges, vec):
            if m == 0:
                continue
            binom: Poly = {}
            for j in range(m + 1):
                e = [0] * nvars
                e[hidx[h]] = j
                e[hidx[h2]] = m - j
                binom[tuple(e)] = Fraction(comb(m, j))
            p = _mul(p, binom, cap)
        for e, c in p.items():
            total[e] += c
    full = _mul(dict(total), base, cap)
    out: dict = defaultdict(Fraction)
    for e, c in full.items():
        kappa = [(1,) * e[v] for v in range(graph.num_vertices)]
        psi = {h: e[hidx[h]] for h in halves if e[hidx[h]]}
        out[generator_key(graph, kappa, psi)] += scale * c
    return out


# ----------------------------------------------------------------------------
# fixed r


def _graphs(g: int, n: int, max_edges: int, trees_only: bool = False) -> list[StableGraph]:
    gs = enumerate_stable_graphs(g, n, max_edges=max_edges)
    if trees_only:
        gs = [G for G in gs if G.h1 == 0]
    return gs


def _raw_edge_sums(inp: PixtonInput, r: int) -> list[tuple[StableGraph, dict]]:
    """Per graph: weighting sums of edge coefficients before 1/r^{h1}."""
    out = []
    for G in _graphs(inp.g, inp.n, inp.max_codim):
        cap = inp.max_codim - G.num_edges
        ws = enumerate_weightings(G, inp.A, inp.k, r)
        if not ws:
            continue
        sums = local_polynomial_sum(G, ws, cap, lambda m, a, b: _edge_coefficient(m, a * b))
        out.append((G, sums))
    return out


def pixton_fixed_r(inp: PixtonInput, r: int) -> TautClass:
    """Omega^r_{g,A,k} up to codimension ``max_codim`` at a fixed modulus r.

    Weightings use the residues of A mod r; the leg exponentials use the
    original integers a_i.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    g, n, k = inp.g, inp.n, inp.k
    terms: dict = defaultdict(Fraction)
    legs = [Fraction(a * a, 2) for a in inp.A]
    for G, sums in _raw_edge_sums(inp, r):
        cap = inp.max_codim - G.num_edges
        scale = Fraction(1, automorphism_order(G) * r**G.h1)
        part = _assemble(G, sums, cap, Fraction(-k * k, 2), legs, scale)
        for key, c in part.items():
            terms[key] += c
    return TautClass(g, n, terms)


# ----------------------------------------------------------------------------
# polynomial dependence on r


class RPolyClass:
    """Strata-algebra class with coefficients polynomial in r."""

    def __init__(self, g: int, n: int, polys: Mapping | None = None):
        self.g = g
        self.n = n
        self.polys = {k: p for k, p in (polys or {}).items() if p.coeffs}

    def evaluate(self, r) -> TautClass:
        return TautClass(self.g, self.n, {k: p(r) for k, p in self.polys.items()})

    def constant_term(self) -> TautClass:
        return self.evaluate(0)

    def max_degree(self) -> int:
        return max((p.degree for p in self.polys.values()), default=-1)

    def to_json(self) -> list[dict]:
        out = []
        for key, poly in sorted(self.polys.items()):
            item = TautClass(self.g, self.n, {key: 1}).to_json()[0]
            del item["coefficient"]
            item["coefficients_in_r"] = [format_rational(c) for c in poly.coeffs]
            out.append(item)
        return out


def r_threshold(inp: PixtonInput) -> int:
    """Samples are taken at r strictly above this value."""
    return max(sum(abs(a) for a in inp.A), inp.n * abs(inp.k) * (2 * inp.g - 2 + inp.n), 1)


def _degree_bound(key) -> int:
    graph, _, _ = from_key(key)
    return 2 * generator_codim(key) + graph.h1


def max_degree_bound(inp: PixtonInput) -> int:
    return 2 * inp.max_codim + inp.g


def sample_range(inp: PixtonInput, r_min: int | None = None, oversample: int = 3,
                 count: int | None = None) -> list[int]:
    lo = r_threshold(inp) + 1
    if r_min is not None:
        lo = max(lo, r_min)
    need = max_degree_bound(inp) + 1 + oversample
    if count is not None:
        need = max(need, count)
    return list(range(lo, lo + need))


def interpolate_classes(g: int, n: int, samples: Sequence[tuple[int, TautClass]],
                        bound: Callable = _degree_bound) -> RPolyClass:
    keys = set()
    for _, cl in samples:
        keys.update(cl.terms)
    polys = {}
    for key in sorted(keys):
        pts = [(r, cl.terms.get(key, Fraction(0))) for r, cl in samples]
        polys[key] = interpolate_polynomial(pts, bound(key), var="r")
    return RPolyClass(g, n, polys)


def _check_divisibility(inp: PixtonInput, raw: Sequence[tuple[int, list]]) -> None:
    """The weighting sum of every edge-degree vector is divisible by r^{h1}."""
    table: dict = defaultdict(dict)
    for r, per_graph in raw:
        for G, sums in per_graph:
            for vec, s in sums.items():
                table[(G, vec)][r] = s
    for (G, vec), vals in table.items():
        if G.h1 == 0:
            continue
        bound = 2 * (sum(vec) + G.num_edges) + G.h1
        pts = [(r, vals.get(r, Fraction(0))) for r, _ in raw]
        if len(pts) < bound + 1:
            continue
        poly = interpolate_polynomial(pts, bound, var="r")
        if any(poly[i] for i in range(G.h1)):
            raise DivisibilityFailure(f"weighting sum on {G} not divisible by r^{G.h1}: {poly}")


def pixton_rpoly(inp: PixtonInput, r_samples: Sequence[int] | None = None, oversample: int = 3,
                 jobs: int = 1, check_divisibility: bool = True) -> RPolyClass:
    """Interpolate Omega^r coefficient-wise in r.

    Raises :class:`InconsistentSamples` if a surplus sample disagrees.
    """
    if r_samples is None:
        r_samples = sample_range(inp, oversample=oversample)
    r_samples = sorted(set(r_samples))
    thr = r_threshold(inp)
    if min(r_samples) <= thr:
        raise ValueError(f"all samples must exceed the threshold r > {thr}")

    def one(r):
        per_graph = _raw_edge_sums(inp, r)
        return r, per_graph

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            raw = list(ex.map(one, r_samples))
    else:
        raw = [one(r) for r in r_samples]
    if check_divisibility:
        _check_divisibility(inp, raw)
    legs = [Fraction(a * a, 2) for a in inp.A]
    samples = []
    for r, per_graph in raw:
        terms: dict = defaultdict(Fraction)
        for G, sums in per_graph:
            cap = inp.max_codim - G.num_edges
            scale = Fraction(1, automorphism_order(G) * r**G.h1)
            for key, c in _assemble(G, sums, cap, Fraction(-inp.k**2, 2), legs, scale).items():
                terms[key] += c
        samples.append((r, TautClass(inp.g, inp.n, terms)))
    return interpolate_classes(inp.g, inp.n, samples)


def pixton_class(inp: PixtonInput, **kw) -> TautClass:
    """Omega_{g,A,k}: the r = 0 value of the polynomial interpolation."""
    if not inp.balanced():
        raise ValueError("sum(A) must equal k(2g - 2 + n)")
    return pixton_rpoly(inp, **kw).constant_term()


def dr_cycle(g: int, A: Sequence[int], **kw) -> TautClass:
    """The double ramification cycle: degree-g part of Omega_{g,A,0}."""
    if sum(A) != 0:
        raise ValueError("DR cycle needs sum(A) = 0")
    n = len(A)
    dim = 3 * g - 3 + n
    if g > dim:
        return TautClass.zero(g, n)
    return pixton_class(PixtonInput(g, A, 0, g), **kw).graded_part(g)


# ----------------------------------------------------------------------------
# compact type


def hain_class(g: int, A: Sequence[int], max_codim: int | None = None) -> TautClass:
    """Tree part of the graph sum with the unique integer weighting."""
    inp = PixtonInput(g, A, 0, max_codim)
    if sum(A) != 0:
        raise ValueError("sum(A) must vanish")
    terms: dict = defaultdict(Fraction)
    legs = [Fraction(a * a, 2) for a in inp.A]
    for G in _graphs(g, inp.n, inp.max_codim, trees_only=True):
        cap = inp.max_codim - G.num_edges
        ws = enumerate_weightings(G, inp.A, 0, None)
        sums = local_polynomial_sum(G, ws, cap, lambda m, a, b: _edge_coefficient(m, a * b))
        part = _assemble(G, sums, cap, Fraction(0), legs, Fraction(1, automorphism_order(G)))
        for key, c in part.items():
            terms[key] += c
    return TautClass(g, inp.n, terms)


def _divisor(g: int, n: int, l: int, I: frozenset) -> TautClass:
    """Delta_{l,I} with the unstable conventions."""
    J = frozenset(range(1, n + 1)) - I
    if (l, len(I)) == (0, 0) or (g - l, len(J)) == (0, 0):
        return TautClass.zero(g, n)
    if (l, len(I)) == (0, 1):
        (i,) = I
        return TautClass.from_generator(trivial_graph(g, n), psi={i: 1}).scale(-1)
    if (g - l, len(J)) == (0, 1):
        (i,) = J
        return TautClass.from_generator(trivial_graph(g, n), psi={i: 1}).scale(-1)
    h, h2 = n + 1, n + 2
    G = StableGraph((l, g - l), (tuple(sorted(I)) + (h,), tuple(sorted(J)) + (h2,)), ((h, h2),))
    G.validate()
    return TautClass.from_generator(G).scale(Fraction(1, automorphism_order(G)))


def hain_theta(g: int, A: Sequence[int]) -> TautClass:
    """-1/2 sum over ordered (l, I) of a_I^2 Delta_{l,I}."""
    n = len(A)
    total = TautClass.zero(g, n)
    for l in range(g + 1):
        for size in range(n + 1):
            for I in itertools.combinations(range(1, n + 1), size):
                aI = sum(A[i - 1] for i in I)
                if aI:
                    total = total + _divisor(g, n, l, frozenset(I)).scale(Fraction(-aI * aI, 2))
    return total


def hain_power_expansion(g: int, A: Sequence[int]) -> TautClass:
    """Theta^g / (2^g g!), the closed compact-type formula in degree g."""
    if sum(A) != 0:
        raise ValueError("sum(A) must vanish")
    n = len(A)
    if g > 3 * g - 3 + n:
        return TautClass.zero(g, n)
    theta = hain_theta(g, A)
    return theta.power(g).scale(Fraction(1, 2**g * factorial(g)))
