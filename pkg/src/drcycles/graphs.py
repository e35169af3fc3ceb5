"""Stable graphs: validation, canonical forms, automorphisms, enumeration and
mod-r weightings.

A graph stores, for every vertex, its genus and the tuple of half-edge labels
attached to it.  Labels ``1..n`` are the markings; every other label appears
in exactly one edge.  Decorations (psi exponents, kappa monomials, weights)
are carried as per-half-edge and per-vertex *labels*, which lets the same
canonicalisation serve plain graphs and decorated strata generators.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Hashable, Iterator, Mapping, Sequence

__all__ = [
    "StableGraph",
    "UnstablePair",
    "InvalidGraph",
    "canonical_form",
    "canonical_key",
    "from_key",
    "key_automorphism_count",
    "isomorphic",
    "automorphism_order",
    "enumerate_stable_graphs",
    "trivial_graph",
    "enumerate_weightings",
    "graph_to_json",
    "graph_from_json",
]


class UnstablePair(ValueError):
    """(g, n) with 2g - 2 + n <= 0."""


class InvalidGraph(ValueError):
    pass


@dataclass(frozen=True)
class StableGraph:
    genera: tuple[int, ...]
    legs: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "genera", tuple(self.genera))
        object.__setattr__(self, "legs", tuple(tuple(l) for l in self.legs))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @cached_property
    def vertex_of(self) -> dict[int, int]:
        return {h: v for v, hs in enumerate(self.legs) for h in hs}

    @cached_property
    def partner(self) -> dict[int, int]:
        p = {}
        for h, h2 in self.edges:
            p[h] = h2
            p[h2] = h
        return p

    @cached_property
    def markings(self) -> tuple[int, ...]:
        internal = self.partner
        return tuple(sorted(h for hs in self.legs for h in hs if h not in internal))

    @property
    def n(self) -> int:
        return len(self.markings)

    @property
    def num_vertices(self) -> int:
        return len(self.genera)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def h1(self) -> int:
        return len(self.edges) - len(self.genera) + 1

    @property
    def genus(self) -> int:
        return sum(self.genera) + self.h1

    def val(self, v: int) -> int:
        return len(self.legs[v])

    def markings_at(self, v: int) -> tuple[int, ...]:
        return tuple(h for h in self.legs[v] if h not in self.partner)

    def is_tree(self) -> bool:
        return self.h1 == 0

    def validate(self) -> StableGraph:
        hs = [h for l in self.legs for h in l]
        if len(hs) != len(set(hs)):
            raise InvalidGraph("repeated half-edge label")
        if len(self.legs) != len(self.genera) or not self.genera:
            raise InvalidGraph("vertex data mismatch")
        seen = set()
        for h, h2 in self.edges:
            if h == h2 or h in seen or h2 in seen:
                raise InvalidGraph("malformed edge list")
            seen.update((h, h2))
        if not seen <= set(hs):
            raise InvalidGraph("edge uses an unknown half-edge")
        n = self.n
        if self.markings != tuple(range(1, n + 1)):
            raise InvalidGraph("markings must be exactly 1..n")
        if any(g < 0 for g in self.genera):
            raise InvalidGraph("negative genus")
        for v, g in enumerate(self.genera):
            if 2 * g - 2 + self.val(v) <= 0:
                raise InvalidGraph(f"vertex {v} is unstable")
        if not self.is_connected():
            raise InvalidGraph("graph is disconnected")
        return self

    def is_connected(self) -> bool:
        adj = {v: set() for v in range(self.num_vertices)}
        for h, h2 in self.edges:
            a, b = self.vertex_of[h], self.vertex_of[h2]
            adj[a].add(b)
            adj[b].add(a)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.num_vertices

    def contract(self, edge_indices: Sequence[int]) -> tuple[StableGraph, list[int]]:
        """Contract the given edges.  Returns the new graph and the vertex map
        old vertex -> new vertex.  Half-edge labels of surviving edges are kept."""
        parent = list(range(self.num_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        contracted = set(edge_indices)
        for i in contracted:
            h, h2 = self.edges[i]
            a, b = find(self.vertex_of[h]), find(self.vertex_of[h2])
            if a != b:
                parent[a] = b
        roots = sorted({find(v) for v in range(self.num_vertices)})
        index = {r: i for i, r in enumerate(roots)}
        vmap = [index[find(v)] for v in range(self.num_vertices)]
        genera = [0] * len(roots)
        nverts = [0] * len(roots)
        nedges = [0] * len(roots)
        for v, g in enumerate(self.genera):
            genera[vmap[v]] += g
            nverts[vmap[v]] += 1
        dead = set()
        for i in contracted:
            h, h2 = self.edges[i]
            nedges[vmap[self.vertex_of[h]]] += 1
            dead.update((h, h2))
        for c in range(len(roots)):
            genera[c] += nedges[c] - nverts[c] + 1
        legs = [[] for _ in roots]
        for v, hs in enumerate(self.legs):
            legs[vmap[v]].extend(h for h in hs if h not in dead)
        edges = tuple(e for i, e in enumerate(self.edges) if i not in contracted)
        return StableGraph(tuple(genera), tuple(tuple(l) for l in legs), edges), vmap


def trivial_graph(g: int, n: int) -> StableGraph:
    return StableGraph((g,), (tuple(range(1, n + 1)),), ())


# ----------------------------------------------------------------------------
# canonical forms

Key = tuple


def _refine(graph: StableGraph, base: list, lab) -> list[int]:
    nv = graph.num_vertices
    nbrs = [[] for _ in range(nv)]
    for h, h2 in graph.edges:
        a, b = graph.vertex_of[h], graph.vertex_of[h2]
        nbrs[a].append((b, lab(h), lab(h2)))
        nbrs[b].append((a, lab(h2), lab(h)))

    def rank(sigs):
        order = sorted(set(sigs))
        r = {s: i for i, s in enumerate(order)}
        return [r[s] for s in sigs]

    colors = rank(base)
    while True:
        sigs = [
            (colors[v], tuple(sorted((colors[u], la, lb) for u, la, lb in nbrs[v])))
            for v in range(nv)
        ]
        new = rank(sigs)
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


@lru_cache(maxsize=500_000)
def _canonical(graph: StableGraph, kappa: tuple, hlabels: tuple, default) -> tuple[Key, int]:
    hl = dict(hlabels)

    def lab(h):
        return hl.get(h, default)

    nv = graph.num_vertices
    base = []
    for v in range(nv):
        marks = tuple(sorted((m, lab(m)) for m in graph.markings_at(v)))
        base.append((graph.genera[v], kappa[v], marks))
    colors = _refine(graph, base, lab) if nv > 1 else [0]
    cells: dict[int, list[int]] = {}
    for v in range(nv):
        cells.setdefault(colors[v], []).append(v)
    cell_list = [cells[c] for c in sorted(cells)]
    edge_data = [
        (graph.vertex_of[h], graph.vertex_of[h2], lab(h), lab(h2)) for h, h2 in graph.edges
    ]
    best = None
    count = 0
    for perms in itertools.product(*(itertools.permutations(c) for c in cell_list)):
        order = [v for p in perms for v in p]
        pos = [0] * nv
        for i, v in enumerate(order):
            pos[v] = i
        vpart = tuple(base[v] for v in order)
        eds = []
        for a, b, la, lb in edge_data:
            pa, pb = pos[a], pos[b]
            if pa > pb or (pa == pb and lb < la):
                pa, pb, la, lb = pb, pa, lb, la
            eds.append((pa, pb, la, lb))
        ser = (len(edge_data), vpart, tuple(sorted(eds)))
        if best is None or ser < best:
            best = ser
            count = 1
        elif ser == best:
            count += 1
    return best, count


def canonical_form(
    graph: StableGraph,
    kappa: Sequence[tuple[int, ...]] | None = None,
    hlabels: Mapping[int, Hashable] | None = None,
    default: Hashable = 0,
) -> Key:
    """Isomorphism-invariant key of a decorated graph.

    ``kappa`` gives a sorted tuple per vertex; ``hlabels`` maps half-edges
    (markings included) to comparable labels, missing ones get ``default``.
    """
    if kappa is None:
        kappa = ((),) * graph.num_vertices
    items = tuple(sorted((h, l) for h, l in (hlabels or {}).items() if l != default))
    return _canonical(graph, tuple(tuple(k) for k in kappa), items, default)[0]


def canonical_key(graph: StableGraph) -> Key:
    return canonical_form(graph)


def isomorphic(g1: StableGraph, g2: StableGraph) -> bool:
    return canonical_key(g1) == canonical_key(g2)


@lru_cache(maxsize=500_000)
def from_key(key: Key) -> tuple[StableGraph, tuple, dict]:
    """Rebuild (graph, kappa, hlabels) in the canonical frame of ``key``."""
    _, vpart, epart = key
    n = sum(len(marks) for _, _, marks in vpart)
    legs = [[m for m, _ in marks] for _, _, marks in vpart]
    hl = {m: l for _, _, marks in vpart for m, l in marks}
    edges = []
    nxt = n + 1
    for a, b, la, lb in epart:
        legs[a].append(nxt)
        legs[b].append(nxt + 1)
        hl[nxt] = la
        hl[nxt + 1] = lb
        edges.append((nxt, nxt + 1))
        nxt += 2
    graph = StableGraph(
        tuple(g for g, _, _ in vpart), tuple(tuple(l) for l in legs), tuple(edges)
    )
    kappa = tuple(k for _, k, _ in vpart)
    return graph, kappa, hl


@lru_cache(maxsize=500_000)
def key_automorphism_count(key: Key) -> int:
    """Order of the automorphism group of the decorated graph encoded by ``key``
    (vertex permutations, edge permutations and half-edge swaps; legs fixed)."""
    graph, kappa, hl = from_key(key)
    items = tuple(sorted(hl.items()))
    # default never matches a real label here: all labels are explicit
    _, vertex_count = _canonical(graph, kappa, items, object())
    mult = 1
    for _, m in Counter(key[2]).items():
        for i in range(2, m + 1):
            mult *= i
    for a, b, la, lb in key[2]:
        if a == b and la == lb:
            mult *= 2
    return vertex_count * mult


def automorphism_order(graph: StableGraph) -> int:
    return key_automorphism_count(canonical_key(graph))


# ----------------------------------------------------------------------------
# enumeration


def _degenerations(graph: StableGraph) -> Iterator[StableGraph]:
    top = max([h for hs in graph.legs for h in hs], default=0)
    h, h2 = top + 1, top + 2
    for v, gv in enumerate(graph.genera):
        hs = graph.legs[v]
        others_g = graph.genera[:v] + graph.genera[v + 1 :]
        others_l = graph.legs[:v] + graph.legs[v + 1 :]
        if gv >= 1:
            yield StableGraph(
                others_g + (gv - 1,), others_l + (hs + (h, h2),), graph.edges + ((h, h2),)
            )
        for g1 in range(gv + 1):
            g2 = gv - g1
            for mask in range(1 << len(hs)):
                s1 = tuple(x for i, x in enumerate(hs) if mask >> i & 1)
                s2 = tuple(x for i, x in enumerate(hs) if not mask >> i & 1)
                if 2 * g1 - 2 + len(s1) + 1 <= 0 or 2 * g2 - 2 + len(s2) + 1 <= 0:
                    continue
                yield StableGraph(
                    others_g + (g1, g2),
                    others_l + (s1 + (h,), s2 + (h2,)),
                    graph.edges + ((h, h2),),
                )


@lru_cache(maxsize=None)
def _graphs_by_edges(g: int, n: int) -> tuple[tuple[StableGraph, ...], ...]:
    if 2 * g - 2 + n <= 0 or g < 0 or n < 0:
        raise UnstablePair(f"(g, n) = ({g}, {n}) is not stable")
    levels = []
    current = {canonical_key(trivial_graph(g, n)): None}
    for _ in range(3 * g - 3 + n + 1):
        if not current:
            break
        level = tuple(from_key(k)[0] for k in sorted(current))
        levels.append(level)
        nxt = {}
        for G in level:
            for D in _degenerations(G):
                nxt.setdefault(canonical_key(D), None)
        current = nxt
    return tuple(levels)


def enumerate_stable_graphs(g: int, n: int, max_edges: int | None = None) -> list[StableGraph]:
    """One canonical representative per isomorphism class of stable graphs of
    genus ``g`` with ``n`` markings, sorted by canonical key."""
    levels = _graphs_by_edges(g, n)
    out = []
    for e, level in enumerate(levels):
        if max_edges is not None and e > max_edges:
            break
        out.extend(level)
    return out


# ----------------------------------------------------------------------------
# weightings


def enumerate_weightings(
    graph: StableGraph, A: Sequence[int], k: int = 0, r: int | None = None
) -> list[dict[int, int]]:
    """All weightings of half-edges (markings included).

    With ``r`` given, residues in ``0..r-1`` with ``w(i) = a_i mod r``,
    ``w(h) + w(h') = 0`` and vertex sums ``k(2g(v) - 2 + val(v))`` mod r.
    With ``r=None`` the unique integer weighting of a tree is returned.
    """
    n = graph.n
    if len(A) != n:
        raise ValueError(f"expected {n} marking weights, got {len(A)}")
    if r is not None and r < 1:
        raise ValueError("r must be >= 1")
    g = graph.genus
    red = (lambda x: x % r) if r is not None else (lambda x: x)
    total = sum(A) - k * (2 * g - 2 + n)
    if red(total) != 0:
        return []
    if r is None and graph.h1 > 0:
        raise ValueError("integer weightings are unique only on trees")
    nv = graph.num_vertices
    target = [red(k * (2 * graph.genera[v] - 2 + graph.val(v))) for v in range(nv)]
    # spanning tree by BFS from vertex 0
    parent_edge: dict[int, tuple[int, int]] = {}
    order = [0]
    seen = {0}
    tree_edges = set()
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(nv)}
    for i, (h, h2) in enumerate(graph.edges):
        a, b = graph.vertex_of[h], graph.vertex_of[h2]
        adj[a].append((i, h, h2))
        adj[b].append((i, h2, h))
    for v in order:
        for i, hv, hu in adj[v]:
            u = graph.vertex_of[hu]
            if u not in seen:
                seen.add(u)
                order.append(u)
                tree_edges.add(i)
                parent_edge[u] = (hu, hv)  # half-edge at u, half-edge at parent
    free = [graph.edges[i] for i in range(len(graph.edges)) if i not in tree_edges]
    base = {m: red(A[m - 1]) for m in graph.markings}
    results = []
    ranges = [range(r)] * len(free) if r is not None else []
    for choice in itertools.product(*ranges):
        w = dict(base)
        for (h, h2), q in zip(free, choice):
            w[h] = q
            w[h2] = red(-q)
        for u in reversed(order[1:]):
            hu, hp = parent_edge[u]
            s = sum(w[h] for h in graph.legs[u] if h != hu)
            w[hu] = red(target[u] - s)
            w[hp] = red(-w[hu])
        results.append(w)
    return results


# ----------------------------------------------------------------------------
# JSON


def graph_to_json(graph: StableGraph) -> dict:
    vo = graph.vertex_of
    return {
        "vertices": list(graph.genera),
        "legs": [[m, vo[m]] for m in graph.markings],
        "edges": [[[vo[h], h], [vo[h2], h2]] for h, h2 in graph.edges],
    }


def graph_from_json(data: Mapping) -> StableGraph:
    legs = [[] for _ in data["vertices"]]
    for m, v in data["legs"]:
        legs[v].append(m)
    edges = []
    for (v, h), (v2, h2) in data["edges"]:
        legs[v].append(h)
        legs[v2].append(h2)
        edges.append((h, h2))
    return StableGraph(tuple(data["vertices"]), tuple(tuple(l) for l in legs), tuple(edges))
