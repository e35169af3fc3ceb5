"""The strata algebra: formal sums of decorated stable graphs.

A generator ``[G, gamma]`` stands for the pushforward of a kappa/psi monomial
``gamma`` along the gluing map of ``G``; no automorphism factor is divided
out.  Generators are stored under their canonical key, so equality of classes
is literal equality of coefficient maps.

Products use the excess intersection formula: a sum over common
degenerations of the two graphs, weighted by ``1/|Aut|`` of the degeneration,
with ``-psi_h - psi_h'`` inserted on every edge coming from both factors.
"""
from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .arith import as_rational, format_rational, parse_rational
from .graphs import (
    StableGraph,
    canonical_form,
    enumerate_stable_graphs,
    from_key,
    graph_from_json,
    graph_to_json,
    trivial_graph,
)
from .intersect import IntegralCache, kappa_psi_integral

__all__ = [
    "TautClass",
    "WeightedTautClass",
    "DimensionMismatch",
    "generator_key",
    "generator_codim",
    "decode_generator",
    "generator_integral",
    "set_integral_cache",
    "push_glue",
    "all_generators",
    "psi_class",
    "kappa_class",
    "boundary_class",
    "Structure",
    "product_structures",
]

log = logging.getLogger(__name__)


class DimensionMismatch(ValueError):
    pass


# ----------------------------------------------------------------------------
# generators


def generator_key(graph: StableGraph, kappa=None, psi: Mapping[int, int] | None = None):
    if kappa is None:
        kappa = ((),) * graph.num_vertices
    kappa = tuple(tuple(sorted(k)) for k in kappa)
    psi = {h: e for h, e in (psi or {}).items() if e}
    return canonical_form(graph, kappa, psi, 0)


def decode_generator(key) -> tuple[StableGraph, tuple, dict[int, int]]:
    graph, kappa, hl = from_key(key)
    return graph, kappa, {h: e for h, e in hl.items() if e}


def generator_codim(key) -> int:
    _, vpart, epart = key
    c = len(epart)
    for _, kap, marks in vpart:
        c += sum(kap) + sum(_psi_part(l) for _, l in marks)
    for _, _, la, lb in epart:
        c += _psi_part(la) + _psi_part(lb)
    return c


def _psi_part(label) -> int:
    return label[0] if isinstance(label, tuple) else label


_cache: IntegralCache | None = None


def set_integral_cache(cache: IntegralCache | None) -> None:
    global _cache
    _cache = cache


def _vertex_integral(g: int, kappa, psis) -> Fraction:
    if _cache is not None:
        return _cache.get(g, psis, kappa)
    return kappa_psi_integral(g, len(psis), kappa, psis)


def generator_integral(key) -> Fraction:
    """Integral of a top-codimension generator: product of vertex integrals."""
    graph, kappa, hl = from_key(key)
    total = Fraction(1)
    for v, gv in enumerate(graph.genera):
        psis = [_psi_part(hl.get(h, 0)) for h in graph.legs[v]]
        total *= _vertex_integral(gv, kappa[v], psis)
        if total == 0:
            break
    return total


# ----------------------------------------------------------------------------
# product structures


class Structure:
    """A generic (A, B)-structure on a common degeneration ``G``."""

    __slots__ = ("G", "fA", "preA", "fB", "preB", "shared", "weight")

    def __init__(self, G, fA, preA, fB, preB, shared, weight):
        self.G = G
        self.fA = fA
        self.preA = preA
        self.fB = fB
        self.preB = preB
        self.shared = shared
        self.weight = weight


def _isomorphisms(H: StableGraph, A: StableGraph) -> list[dict[int, int]]:
    """All isomorphisms H -> A as half-edge maps (markings fixed)."""
    if (
        H.num_vertices != A.num_vertices
        or H.num_edges != A.num_edges
        or sorted(H.genera) != sorted(A.genera)
    ):
        return []
    nv = H.num_vertices

    def sig(G, v):
        return (G.genera[v], G.val(v), tuple(sorted(G.markings_at(v))))

    hs = [sig(H, v) for v in range(nv)]
    as_ = [sig(A, v) for v in range(nv)]
    cands = [[u for u in range(nv) if as_[u] == hs[v]] for v in range(nv)]
    out = []

    def edges_by_pair(G, vmap=None):
        groups = defaultdict(list)
        for h, h2 in G.edges:
            a, b = G.vertex_of[h], G.vertex_of[h2]
            if vmap is not None:
                a, b = vmap[a], vmap[b]
            if a > b:
                a, b, h, h2 = b, a, h2, h
            groups[(a, b)].append((h, h2))
        return groups

    agroups = edges_by_pair(A)

    def finish(vmap):
        hgroups = edges_by_pair(H, vmap)
        if {k: len(v) for k, v in hgroups.items()} != {k: len(v) for k, v in agroups.items()}:
            return
        base = {m: m for m in H.markings}
        per_group = []
        for pair, hedges in hgroups.items():
            aedges = agroups[pair]
            options = []
            for perm in itertools.permutations(aedges):
                if pair[0] == pair[1]:
                    for flips in itertools.product((False, True), repeat=len(perm)):
                        m = {}
                        for (h, h2), (k, k2), f in zip(hedges, perm, flips):
                            if f:
                                k, k2 = k2, k
                            m[h] = k
                            m[h2] = k2
                        options.append(m)
                else:
                    m = {}
                    for (h, h2), (k, k2) in zip(hedges, perm):
                        m[h] = k
                        m[h2] = k2
                    options.append(m)
            per_group.append(options)
        for combo in itertools.product(*per_group):
            m = dict(base)
            for part in combo:
                m.update(part)
            out.append(m)

    def backtrack(v, vmap, used):
        if v == nv:
            finish(vmap)
            return
        for u in cands[v]:
            if u not in used:
                vmap[v] = u
                used.add(u)
                backtrack(v + 1, vmap, used)
                used.discard(u)
        vmap.pop(v, None)

    backtrack(0, {}, set())
    return out


@lru_cache(maxsize=200_000)
def _graph_structures(G: StableGraph, A: StableGraph):
    """A-structures on G: (kept edge indices, A->G half-edge map, A-vertex preimages)."""
    out = []
    e = G.num_edges
    for kept in itertools.combinations(range(e), A.num_edges):
        contracted = [i for i in range(e) if i not in kept]
        H, vmap = G.contract(contracted)
        for iso in _isomorphisms(H, A):
            f = {a: h for h, a in iso.items()}
            # H vertex -> A vertex through any half-edge; isolated H vertices
            # cannot occur since every vertex carries a half-edge
            hv_to_av = {}
            for h, a in iso.items():
                hv_to_av[H.vertex_of[h]] = A.vertex_of[a]
            pre = [[] for _ in range(A.num_vertices)]
            for v in range(G.num_vertices):
                pre[hv_to_av[vmap[v]]].append(v)
            out.append((frozenset(kept), f, tuple(tuple(p) for p in pre)))
    return tuple(out)


@lru_cache(maxsize=100_000)
def product_structures(A: StableGraph, B: StableGraph, max_edges: int) -> tuple[Structure, ...]:
    """Generic (A, B)-structures on all common degenerations with at most
    ``max_edges`` edges."""
    g, n = A.genus, A.n
    if A.num_edges == 0:
        ident = {h: h for hs in B.legs for h in hs}
        return (
            Structure(B, {m: m for m in A.markings}, (tuple(range(B.num_vertices)),),
                      ident, tuple((v,) for v in range(B.num_vertices)), (), Fraction(1)),
        )
    if B.num_edges == 0:
        ident = {h: h for hs in A.legs for h in hs}
        return (
            Structure(A, ident, tuple((v,) for v in range(A.num_vertices)),
                      {m: m for m in B.markings}, (tuple(range(A.num_vertices)),), (), Fraction(1)),
        )
    from .graphs import automorphism_order

    lo = max(A.num_edges, B.num_edges)
    hi = min(A.num_edges + B.num_edges, max_edges)
    out = []
    for G in enumerate_stable_graphs(g, n, max_edges=hi):
        if G.num_edges < lo:
            continue
        sa = _graph_structures(G, A)
        if not sa:
            continue
        sb = _graph_structures(G, B)
        if not sb:
            continue
        allE = frozenset(range(G.num_edges))
        weight = Fraction(1, automorphism_order(G))
        for keptA, fA, preA in sa:
            for keptB, fB, preB in sb:
                if keptA | keptB != allE:
                    continue
                shared = tuple(G.edges[i] for i in sorted(keptA & keptB))
                out.append(Structure(G, fA, preA, fB, preB, shared, weight))
    return tuple(out)


def _kappa_pullbacks(kappa, pre) -> list[dict[int, list[int]]]:
    """Distribute each kappa factor of each source vertex over its preimages."""
    slots = []
    for v, ks in enumerate(kappa):
        for a in ks:
            slots.append((a, pre[v]))
    if not slots:
        return [{}]
    out = []
    for choice in itertools.product(*(p for _, p in slots)):
        d: dict[int, list[int]] = defaultdict(list)
        for (a, _), w in zip(slots, choice):
            d[w].append(a)
        out.append(d)
    return out


def _excess_terms(shared) -> list[tuple[int, dict[int, int]]]:
    terms = [(1, {})]
    for h, h2 in shared:
        new = []
        for sign, ps in terms:
            for x in (h, h2):
                p = dict(ps)
                p[x] = p.get(x, 0) + 1
                new.append((-sign, p))
        terms = new
    return terms


def multiply_raw(dataA, dataB, max_codim: int, weights_ok: Callable | None = None):
    """Yield (G, kappa, psi, weights, coefficient) for the product of two
    decoded generators.  ``data = (graph, kappa, psi, weights-or-None)``."""
    A, kA, pA, wA = dataA
    B, kB, pB, wB = dataB
    for st in product_structures(A, B, max_codim):
        G = st.G
        base_codim = G.num_edges
        if base_codim > max_codim:
            continue
        psi = defaultdict(int)
        for h, e in pA.items():
            psi[st.fA[h]] += e
        for h, e in pB.items():
            psi[st.fB[h]] += e
        wt = None
        if wA is not None:
            wt = {}
            ok = True
            for src, f in ((wA, st.fA), (wB, st.fB)):
                for h, x in src.items():
                    gh = f[h]
                    if wt.setdefault(gh, x) != x:
                        ok = False
                        break
                if not ok:
                    break
            if not ok or not weights_ok(G, wt):
                continue
        psi_deg = sum(psi.values())
        kap_deg = sum(map(sum, kA)) + sum(map(sum, kB))
        for sign, ex in _excess_terms(st.shared):
            if base_codim + psi_deg + kap_deg + len(st.shared) > max_codim:
                break
            p2 = dict(psi)
            for h, e in ex.items():
                p2[h] = p2.get(h, 0) + e
            for da in _kappa_pullbacks(kA, st.preA):
                for db in _kappa_pullbacks(kB, st.preB):
                    kap = tuple(
                        tuple(sorted(da.get(v, []) + db.get(v, [])))
                        for v in range(G.num_vertices)
                    )
                    yield G, kap, p2, wt, st.weight * sign


# ----------------------------------------------------------------------------
# classes


class TautClass:
    """Element of the strata algebra of M_{g,n}-bar."""

    weighted = False

    def __init__(self, g: int, n: int, terms: Mapping | None = None):
        if 2 * g - 2 + n <= 0:
            raise ValueError(f"(g, n) = ({g}, {n}) is unstable")
        self.g = g
        self.n = n
        self.terms: dict = {}
        for k, v in (terms or {}).items():
            v = as_rational(v)
            if v != 0:
                self.terms[k] = v

    # -- construction ---------------------------------------------------------
    def _new(self, terms) -> TautClass:
        return type(self)(self.g, self.n, terms)

    @classmethod
    def fundamental(cls, g: int, n: int) -> TautClass:
        return cls(g, n, {generator_key(trivial_graph(g, n)): 1})

    @classmethod
    def zero(cls, g: int, n: int) -> TautClass:
        return cls(g, n)

    @classmethod
    def from_generator(cls, graph: StableGraph, kappa=None, psi=None, coeff=1) -> TautClass:
        return cls(graph.genus, graph.n, {generator_key(graph, kappa, psi): coeff})

    # -- basic properties -----------------------------------------------------
    @property
    def dim(self) -> int:
        return 3 * self.g - 3 + self.n

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def codim_of(self, key) -> int:
        return generator_codim(key)

    def degrees(self) -> list[int]:
        return sorted({self.codim_of(k) for k in self.terms})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) and other == 0:
            return not self.terms
        return (
            isinstance(other, TautClass)
            and (self.g, self.n, self.weighted) == (other.g, other.n, other.weighted)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.g, self.n, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(g={self.g}, n={self.n}, {len(self.terms)} terms)"

    # -- linear structure -----------------------------------------------------
    def _check(self, other):
        if (self.g, self.n) != (other.g, other.n) or type(self) is not type(other):
            raise DimensionMismatch("classes live on different spaces")

    def __add__(self, other) -> TautClass:
        if isinstance(other, (int, Fraction)) and other == 0:
            return self
        self._check(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return self._new(t)

    __radd__ = __add__

    def __neg__(self) -> TautClass:
        return self._new({k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> TautClass:
        return self + (-other)

    def scale(self, c) -> TautClass:
        c = as_rational(c)
        return self._new({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other) -> TautClass:
        if isinstance(other, TautClass):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other) -> TautClass:
        return self.scale(other)

    # -- grading --------------------------------------------------------------
    def graded_part(self, d: int) -> TautClass:
        return self._new({k: v for k, v in self.terms.items() if self.codim_of(k) == d})

    def truncate(self, max_codim: int) -> TautClass:
        return self._new({k: v for k, v in self.terms.items() if self.codim_of(k) <= max_codim})

    def restrict_compact_type(self) -> TautClass:
        return self._new({k: v for k, v in self.terms.items() if from_key(k)[0].h1 == 0})

    def restrict_smooth(self) -> TautClass:
        """Terms supported on the one-vertex graph without edges."""
        return self._new({k: v for k, v in self.terms.items() if not k[2]})

    # -- products -------------------------------------------------------------
    def _decode(self, key):
        graph, kappa, psi = decode_generator(key)
        return graph, kappa, psi, None

    def _encode(self, graph, kappa, psi, weights):
        return generator_key(graph, kappa, psi)

    def _weights_ok(self, graph, weights) -> bool:
        return True

    def mul(self, other: TautClass, max_codim: int | None = None) -> TautClass:
        """Excess-intersection product, truncated above ``max_codim``
        (default: the dimension)."""
        self._check(other)
        if max_codim is None:
            max_codim = self.dim
        max_codim = min(max_codim, self.dim)
        out: dict = defaultdict(Fraction)
        da = [(self._decode(k), v, self.codim_of(k)) for k, v in self.terms.items()]
        db = [(other._decode(k), v, other.codim_of(k)) for k, v in other.terms.items()]
        for dataA, ca, cdA in da:
            for dataB, cb, cdB in db:
                if cdA + cdB > max_codim:
                    continue
                coeff = ca * cb
                for G, kap, psi, wt, c in multiply_raw(dataA, dataB, max_codim, self._weights_ok):
                    out[self._encode(G, kap, psi, wt)] += coeff * c
        return self._new(out)

    def power(self, m: int, max_codim: int | None = None) -> TautClass:
        result = self.fundamental_like()
        for _ in range(m):
            result = result.mul(self, max_codim)
        return result

    def fundamental_like(self) -> TautClass:
        return type(self).fundamental(self.g, self.n)

    def exp(self, max_codim: int | None = None) -> TautClass:
        """exp of a class without degree-0 part, truncated at ``max_codim``."""
        if max_codim is None:
            max_codim = self.dim
        if any(self.codim_of(k) == 0 for k in self.terms):
            raise ValueError("exp needs a class with vanishing degree-0 part")
        result = self.fundamental_like()
        term = self.fundamental_like()
        for m in range(1, max_codim + 1):
            term = term.mul(self, max_codim).scale(Fraction(1, m))
            if term.is_zero():
                break
            result = result + term
        return result

    # -- evaluation -----------------------------------------------------------
    def integrate(self) -> Fraction:
        """Evaluate against the fundamental class.  Parts below top degree
        are ignored with a warning."""
        total = Fraction(0)
        lower = False
        for k, v in self.terms.items():
            c = self.codim_of(k)
            if c == self.dim:
                total += v * generator_integral(k)
            elif c < self.dim:
                lower = True
        if lower:
            log.debug("integrate: ignoring parts below top degree")
        return total

    def pair(self, other: TautClass) -> Fraction:
        return self.mul(other).integrate()

    # -- serialisation --------------------------------------------------------
    def to_json(self) -> list[dict]:
        out = []
        for key, coeff in sorted(self.terms.items()):
            graph, kappa, psi = decode_generator(key)
            out.append(
                {
                    "graph": graph_to_json(graph),
                    "decoration": {
                        "kappa": [list(k) for k in kappa],
                        "psi": [[h, e] for h, e in sorted(psi.items())],
                    },
                    "coefficient": format_rational(coeff),
                }
            )
        return out

    @classmethod
    def from_json(cls, g: int, n: int, data: Iterable[Mapping]) -> TautClass:
        terms: dict = defaultdict(Fraction)
        for item in data:
            graph = graph_from_json(item["graph"])
            dec = item["decoration"]
            psi = {h: e for h, e in dec["psi"]}
            terms[generator_key(graph, dec["kappa"], psi)] += parse_rational(item["coefficient"])
        return cls(g, n, terms)

    def pretty(self) -> str:
        lines = []
        for key, coeff in sorted(self.terms.items()):
            graph, kappa, psi = decode_generator(key)
            lines.append(
                f"{coeff}  genera={list(graph.genera)} legs={[list(l) for l in graph.legs]} "
                f"edges={list(graph.edges)} kappa={[list(k) for k in kappa]} psi={psi}"
            )
        return "\n".join(lines)


# ----------------------------------------------------------------------------
# constructors


def psi_class(g: int, n: int, i: int, power: int = 1) -> TautClass:
    return TautClass.from_generator(trivial_graph(g, n), psi={i: power})


def kappa_class(g: int, n: int, d: int) -> TautClass:
    if d == 0:
        return TautClass.fundamental(g, n).scale(2 * g - 2 + n)
    return TautClass.from_generator(trivial_graph(g, n), kappa=((d,),))


def boundary_class(g: int, n: int, graph: StableGraph) -> TautClass:
    """The generator [graph, 1], i.e. the pushforward of the fundamental class."""
    if (graph.genus, graph.n) != (g, n):
        raise DimensionMismatch("graph does not live on this space")
    return TautClass.from_generator(graph)


def push_glue(graph: StableGraph, vertex_classes: Sequence[TautClass]) -> TautClass:
    """Pushforward along the gluing map of ``graph`` of the external product
    of classes on the vertex moduli spaces.  The markings ``1..val(v)`` of the
    class at ``v`` are identified with ``graph.legs[v]`` in order."""
    if len(vertex_classes) != graph.num_vertices:
        raise DimensionMismatch("one class per vertex expected")
    for v, cl in enumerate(vertex_classes):
        if (cl.g, cl.n) != (graph.genera[v], graph.val(v)):
            raise DimensionMismatch(
                f"vertex {v} needs a class on M_{graph.genera[v]},{graph.val(v)}"
            )
    g, n = graph.genus, graph.n
    out: dict = defaultdict(Fraction)
    top = max([h for hs in graph.legs for h in hs], default=0)
    per_vertex = [list(cl.terms.items()) for cl in vertex_classes]
    for combo in itertools.product(*per_vertex):
        genera: list[int] = []
        legs: list[list[int]] = []
        edges = list(graph.edges)
        kappa: list[tuple] = []
        psi: dict[int, int] = {}
        coeff = Fraction(1)
        nxt = top + 1
        for v, (key, c) in enumerate(combo):
            coeff *= c
            sub, skap, spsi = decode_generator(key)
            ren = {}
            for i, h in enumerate(graph.legs[v], start=1):
                ren[i] = h
            for hs in sub.legs:
                for h in hs:
                    if h not in ren:
                        ren[h] = nxt
                        nxt += 1
            for u, gu in enumerate(sub.genera):
                genera.append(gu)
                legs.append([ren[h] for h in sub.legs[u]])
                kappa.append(skap[u])
            edges.extend((ren[a], ren[b]) for a, b in sub.edges)
            for h, e in spsi.items():
                psi[ren[h]] = psi.get(ren[h], 0) + e
        G = StableGraph(tuple(genera), tuple(tuple(l) for l in legs), tuple(edges))
        out[generator_key(G, kappa, psi)] += coeff
    return TautClass(g, n, out)


def _partitions(d: int, max_part: int | None = None) -> Iterable[tuple[int, ...]]:
    if max_part is None:
        max_part = d
    if d == 0:
        yield ()
        return
    for p in range(min(d, max_part), 0, -1):
        for rest in _partitions(d - p, p):
            yield (p,) + rest


def _compositions(d: int, k: int) -> Iterable[tuple[int, ...]]:
    if k == 0:
        if d == 0:
            yield ()
        return
    for first in range(d + 1):
        for rest in _compositions(d - first, k - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def all_generators(g: int, n: int, codim: int) -> tuple:
    """Every generator key of the given codimension whose vertex decorations
    do not exceed the vertex dimensions (others are zero classes)."""
    keys = set()
    for G in enumerate_stable_graphs(g, n, max_edges=codim):
        budget = codim - G.num_edges
        nv = G.num_vertices
        for split in _compositions(budget, nv):
            per_vertex = []
            for v, dv in enumerate(split):
                if dv > 3 * G.genera[v] - 3 + G.val(v):
                    per_vertex = None
                    break
                opts = []
                for j in range(dv + 1):
                    for part in _partitions(j):
                        for comp in _compositions(dv - j, G.val(v)):
                            opts.append((tuple(sorted(part)), dict(zip(G.legs[v], comp))))
                per_vertex.append(opts)
            if per_vertex is None:
                continue
            for choice in itertools.product(*per_vertex):
                kappa = tuple(c[0] for c in choice)
                psi = {}
                for c in choice:
                    psi.update(c[1])
                keys.add(generator_key(G, kappa, psi))
    return tuple(sorted(keys))


# ----------------------------------------------------------------------------
# classes on the space of r-th roots, kept as weighted graphs


class WeightedTautClass(TautClass):
    """Strata classes for curves with an r-th root of
    ``omega_log^k(-sum a_i x_i)``.

    Generators are graphs whose half-edges carry residues mod r satisfying
    the leg, edge and vertex congruences.  Products are the excess
    intersection product on common degenerations with compatible residues.
    :meth:`pushdown` sends a weighted generator to ``r^{-h1}`` times the
    underlying generator.
    """

    weighted = True

    def __init__(self, g: int, n: int, r: int, k: int, A: Sequence[int], terms: Mapping | None = None):
        if len(A) != n:
            raise ValueError("one residue per marking expected")
        self.r = r
        self.k = k % r
        self.A = tuple(a % r for a in A)
        super().__init__(g, n, terms)

    def _new(self, terms) -> WeightedTautClass:
        return WeightedTautClass(self.g, self.n, self.r, self.k, self.A, terms)

    def _check(self, other):
        super()._check(other)
        if (self.r, self.k, self.A) != (other.r, other.k, other.A):
            raise DimensionMismatch("weighted classes with different residue data")

    def congruent(self) -> bool:
        return (sum(self.A) - self.k * (2 * self.g - 2 + self.n)) % self.r == 0

    def fundamental_like(self) -> WeightedTautClass:
        if not self.congruent():
            return self._new({})
        return self._new({self.weighted_key(trivial_graph(self.g, self.n), None, None, {}): 1})

    def weighted_key(self, graph: StableGraph, kappa, psi, weights: Mapping[int, int]):
        w = {m: self.A[m - 1] for m in graph.markings}
        w.update({h: x % self.r for h, x in weights.items()})
        if kappa is None:
            kappa = ((),) * graph.num_vertices
        kappa = tuple(tuple(sorted(k)) for k in kappa)
        psi = psi or {}
        labels = {h: (psi.get(h, 0), w[h]) for hs in graph.legs for h in hs}
        return canonical_form(graph, kappa, labels, None)

    def generator(self, graph: StableGraph, weights: Mapping[int, int], kappa=None, psi=None,
                  coeff=1) -> WeightedTautClass:
        w = {m: self.A[m - 1] for m in graph.markings}
        w.update({h: x % self.r for h, x in weights.items()})
        if not self._weights_ok(graph, w):
            raise ValueError("weighting violates the residue conditions")
        return self._new({self.weighted_key(graph, kappa, psi, w): coeff})

    def _decode(self, key):
        graph, kappa, hl = from_key(key)
        psi = {h: l[0] for h, l in hl.items() if l[0]}
        w = {h: l[1] for h, l in hl.items()}
        return graph, kappa, psi, w

    def _encode(self, graph, kappa, psi, weights):
        return self.weighted_key(graph, kappa, psi, weights)

    def _weights_ok(self, graph: StableGraph, weights: Mapping[int, int]) -> bool:
        r = self.r
        for h, h2 in graph.edges:
            if (weights[h] + weights[h2]) % r:
                return False
        for v, gv in enumerate(graph.genera):
            s = sum(weights[h] for h in graph.legs[v])
            if (s - self.k * (2 * gv - 2 + graph.val(v))) % r:
                return False
        return True

    def pushdown(self) -> TautClass:
        out: dict = defaultdict(Fraction)
        for key, c in self.terms.items():
            graph, kappa, psi, _ = self._decode(key)
            out[generator_key(graph, kappa, psi)] += c / Fraction(self.r) ** graph.h1
        return TautClass(self.g, self.n, out)

    def integrate(self) -> Fraction:
        return self.pushdown().integrate()

    def to_json(self) -> list[dict]:
        out = []
        for key, coeff in sorted(self.terms.items()):
            graph, kappa, psi, w = self._decode(key)
            out.append(
                {
                    "graph": graph_to_json(graph),
                    "decoration": {
                        "kappa": [list(k) for k in kappa],
                        "psi": [[h, e] for h, e in sorted(psi.items())],
                        "weights": [[h, x] for h, x in sorted(w.items())],
                    },
                    "coefficient": format_rational(coeff),
                }
            )
        return out
