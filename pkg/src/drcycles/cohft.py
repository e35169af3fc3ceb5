"""Cohomological field theories built from the rank-r Frobenius algebra with
basis zeta_0..zeta_{r-1}, acted on by diagonal Bernoulli R-matrices, and the
matching Chiodo-class constructions on the space of r-th roots."""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

from .arith import TruncSeries, UniPoly, bernoulli_polynomial
from .graphs import (
    StableGraph,
    automorphism_order,
    enumerate_stable_graphs,
    enumerate_weightings,
    trivial_graph,
)
from .strata import TautClass, WeightedTautClass, generator_key

__all__ = [
    "RMatrixSpec",
    "TruncationTooSmall",
    "MismatchBetweenConstructions",
    "tft_value",
    "quantum_product",
    "multiplication_matrix",
    "characteristic_polynomial",
    "has_distinct_roots",
    "rmatrix_zvonkine",
    "rmatrix_chern",
    "translation_kappa_coefficients",
    "literal_translation_integral",
    "rmatrix_action",
    "smooth_part_expansion",
    "chiodo_character_weighted",
    "chiodo_chern_character",
    "zvonkine_class",
    "chern_class_weighted",
    "localization_vertex_class",
]


class TruncationTooSmall(ValueError):
    pass


class MismatchBetweenConstructions(AssertionError):
    """The two constructions of a class disagree; this is a bug."""


def _bern(m: int, x: Fraction) -> Fraction:
    return bernoulli_polynomial(m)(x)


# ----------------------------------------------------------------------------
# the topological field theory


def tft_value(r: int, g: int, residues: Sequence[int], k: int = 0) -> Fraction:
    """r^g if sum(residues) = k(2g - 2 + n) mod r, else 0."""
    n = len(residues)
    if (sum(residues) - k * (2 * g - 2 + n)) % r:
        return Fraction(0)
    return Fraction(r) ** g


def quantum_product(r: int, i: int, j: int, k: int = 0) -> dict[int, Fraction]:
    """zeta_i * zeta_j from the three-point values and the pairing."""
    out = {}
    for m in range(r):
        # eta^{-1} pairs zeta_m with zeta_{-m}
        c = tft_value(r, 0, (i, j, (-m) % r), k)
        if c:
            out[m] = c
    return out


def multiplication_matrix(r: int, i: int, k: int = 0) -> list[list[Fraction]]:
    """Matrix of multiplication by zeta_i; column j is zeta_i * zeta_j."""
    M = [[Fraction(0)] * r for _ in range(r)]
    for j in range(r):
        for m, c in quantum_product(r, i, j, k).items():
            M[m][j] += c
    return M


def characteristic_polynomial(M: Sequence[Sequence[Fraction]]) -> UniPoly:
    """det(x - M) by the Faddeev-LeVerrier recursion."""
    n = len(M)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for step in range(1, n + 1):
        # Mk = M (Mk_prev + c_prev I)
        prev = [[Mk[a][b] + (c if a == b else 0) for b in range(n)] for a in range(n)]
        Mk = [[sum(M[a][t] * prev[t][b] for t in range(n)) for b in range(n)] for a in range(n)]
        c = -sum(Mk[a][a] for a in range(n)) / step
        coeffs[n - step] = c
    return UniPoly(coeffs)


def _poly_divmod(a: UniPoly, b: UniPoly) -> tuple[UniPoly, UniPoly]:
    q = [Fraction(0)] * max(a.degree - b.degree + 1, 1)
    rem = list(a.coeffs)
    while len(rem) - 1 >= b.degree and any(rem):
        shift = len(rem) - 1 - b.degree
        f = rem[-1] / b.coeffs[-1]
        q[shift] = f
        for i, c in enumerate(b.coeffs):
            rem[i + shift] -= f * c
        while rem and rem[-1] == 0:
            rem.pop()
    return UniPoly(q), UniPoly(rem)


def has_distinct_roots(p: UniPoly) -> bool:
    """gcd(p, p') is constant."""
    dp = UniPoly([i * c for i, c in enumerate(p.coeffs)][1:])
    a, b = p, dp
    while b.degree >= 0:
        a, b = b, _poly_divmod(a, b)[1]
    return a.degree == 0


# ----------------------------------------------------------------------------
# R-matrices


@dataclass(frozen=True)
class RMatrixSpec:
    """Diagonal R-matrix R = exp(diag(L_0, ..., L_{r-1})) on the rank-r
    algebra with unit zeta_u and the TFT twisted by k."""

    r: int
    order: int
    log_entries: tuple  # TruncSeries per basis index
    k: int = 0
    name: str = ""

    @property
    def unit(self) -> int:
        return self.k % self.r

    def log_entry(self, i: int) -> TruncSeries:
        return self.log_entries[i % self.r]

    def entry(self, i: int) -> TruncSeries:
        return self.log_entry(i).exp()

    def inverse_entry(self, i: int) -> TruncSeries:
        return (-self.log_entry(i)).exp()

    def symplectic_defect(self) -> list[TruncSeries]:
        """R_i(z) R_{-i}(-z) - 1 for every i; all zero iff symplectic."""
        out = []
        for i in range(self.r):
            prod = self.entry(i) * self.entry(-i).substitute_scalar(-1)
            out.append(prod - TruncSeries.one(self.order))
        return out

    def is_symplectic(self) -> bool:
        zero = TruncSeries.zero(self.order)
        return all(d == zero for d in self.symplectic_defect())

    def tft(self, g: int, residues: Sequence[int]) -> Fraction:
        return tft_value(self.r, g, residues, self.k)


def rmatrix_zvonkine(r: int, order: int, k: int = 0) -> RMatrixSpec:
    """L_i(z) = -(r^2/2) B_2(i/r) z."""
    entries = tuple(
        TruncSeries([0, -Fraction(r * r, 2) * _bern(2, Fraction(i, r))], order) for i in range(r)
    )
    return RMatrixSpec(r, order, entries, k, "zvonkine")


def rmatrix_chern(r: int, order: int, k: int = 0) -> RMatrixSpec:
    """L_i(z) = sum_{d>=1} B_{d+1}(i/r) / (d(d+1)) (-r^2 z)^d."""
    entries = []
    for i in range(r):
        c = [Fraction(0)]
        for d in range(1, order + 1):
            c.append(_bern(d + 1, Fraction(i, r)) / (d * (d + 1)) * Fraction(-r * r) ** d)
        entries.append(TruncSeries(c, order))
    return RMatrixSpec(r, order, tuple(entries), k, "chern")


# ----------------------------------------------------------------------------
# local series arithmetic with weighted degrees


def _mul(p: dict, q: dict, deg: Sequence[int], cap: int) -> dict:
    out: dict = defaultdict(Fraction)
    for e1, c1 in p.items():
        d1 = sum(a * w for a, w in zip(e1, deg))
        for e2, c2 in q.items():
            if d1 + sum(a * w for a, w in zip(e2, deg)) > cap:
                continue
            out[tuple(a + b for a, b in zip(e1, e2))] += c1 * c2
    return {e: c for e, c in out.items() if c}


def _univariate(series: TruncSeries, nvars: int, idx: int, cap: int) -> dict:
    out = {}
    for m in range(min(cap, series.order) + 1):
        if series[m]:
            e = [0] * nvars
            e[idx] = m
            out[tuple(e)] = series[m]
    return out


def translation_kappa_coefficients(spec: RMatrixSpec) -> list[Fraction]:
    """s_D with (T omega) = omega * exp(sum_D s_D kappa_D) on the TFT.

    T(z) = z X(z) zeta_u with X = 1 - R_u^{-1}; the pushforward of the
    translation series gives exp(sum_D [z^D](-log(1 - X)) kappa_D).
    """
    X = TruncSeries.one(spec.order) - spec.inverse_entry(spec.unit)
    s = (TruncSeries.one(spec.order) - X).log().scale(-1)
    return [s[D] for D in range(spec.order + 1)]


def literal_translation_integral(spec: RMatrixSpec, g: int, psi: Sequence[int], max_extra: int) -> Fraction:
    """sum_m 1/m! int_{M_{g,n+m}} prod psi_i^{b_i} prod_j psi_{n+j} X(psi_{n+j}).

    Independent evaluation of the translation action through psi integrals
    only; agrees with integrating the kappa exponential against psi^b.
    """
    from .intersect import psi_integral

    n = len(psi)
    dim = 3 * g - 3 + n
    X = TruncSeries.one(spec.order) - spec.inverse_entry(spec.unit)
    total = Fraction(0)
    budget = dim - sum(psi)
    for m in range(0, max_extra + 1):
        # each extra point carries psi^{1 + d} X_d with d >= 1; the extra
        # dimension m must be absorbed: sum (1 + d_j) = budget + m
        target = budget + m
        acc = Fraction(0)
        for ds in itertools.product(range(1, spec.order + 1), repeat=m):
            if sum(1 + d for d in ds) != target:
                continue
            c = Fraction(1)
            for d in ds:
                c *= X[d]
            if c:
                acc += c * psi_integral(g, list(psi) + [1 + d for d in ds])
        total += acc / factorial(m)
    return total


def _edge_series(spec: RMatrixSpec, a: int, b: int, cap: int) -> dict:
    """(1 - exp(-L_a(x) - L_b(y))) / (x + y) as {(i, j): coeff}, total degree <= cap."""
    order = cap + 1
    la = spec.log_entry(a)
    lb = spec.log_entry(b)
    # bivariate exp of f(x) + g(y) = exp(f(x)) exp(g(y))
    ea = (-TruncSeries(la.coeffs, order)).exp()
    eb = (-TruncSeries(lb.coeffs, order)).exp()
    num: dict = {}
    for i in range(order + 1):
        for j in range(order + 1 - i):
            c = -ea[i] * eb[j]
            if i == 0 and j == 0:
                c += 1
            if c:
                num[(i, j)] = c
    out: dict = {}
    for d in range(1, order + 1):
        p = [num.get((d - j, j), Fraction(0)) for j in range(d + 1)]
        # p(x, y) = (x + y) q(x, y), q homogeneous of degree d - 1
        q = []
        prev = Fraction(0)
        for j in range(d):
            cur = p[j] - prev
            q.append(cur)
            prev = cur
        if p[d] != prev:
            raise ArithmeticError(f"edge numerator not divisible by psi + psi' in degree {d}")
        for j, c in enumerate(q):
            if c:
                out[(d - 1 - j, j)] = c
    return out


def rmatrix_action(spec: RMatrixSpec, g: int, residues: Sequence[int], max_codim: int | None = None) -> TautClass:
    """(R.T.omega)_{g,n}(zeta_{a_1}, ..., zeta_{a_n}) as a strata class."""
    n = len(residues)
    dim = 3 * g - 3 + n
    if max_codim is None:
        max_codim = dim
    if spec.order < max_codim + 1:
        # the edge numerator is needed one degree beyond max_codim
        raise TruncationTooSmall(f"R-matrix truncated at {spec.order}, need {max_codim + 1}")
    r = spec.r
    res = [a % r for a in residues]
    s = translation_kappa_coefficients(spec)
    terms: dict = defaultdict(Fraction)
    for G in enumerate_stable_graphs(g, n, max_edges=max_codim):
        cap = max_codim - G.num_edges
        ws = enumerate_weightings(G, res, spec.k, r)
        if not ws:
            continue
        nv = G.num_vertices
        halves = [h for hs in G.legs for h in hs]
        # variables: kappa_{v,D} for D = 1..cap, then psi_h
        kvars = [(v, D) for v in range(nv) for D in range(1, cap + 1)]
        nvars = len(kvars) + len(halves)
        deg = [D for _, D in kvars] + [1] * len(halves)
        hidx = {h: len(kvars) + i for i, h in enumerate(halves)}
        one = {(0,) * nvars: Fraction(1)}
        # vertex translations: exp(sum_D s_D kappa_{v,D})
        base = one
        for vi, (v, D) in enumerate(kvars):
            if s[D]:
                ser = TruncSeries([s[D] ** m / factorial(m) for m in range(cap // D + 1)], cap // D)
                e_poly = {}
                for m in range(ser.order + 1):
                    e = [0] * nvars
                    e[vi] = m
                    e_poly[tuple(e)] = ser[m]
                base = _mul(base, e_poly, deg, cap)
        for i, a in enumerate(res, start=1):
            leg = spec.inverse_entry(a)
            base = _mul(base, _univariate(TruncSeries(leg.coeffs, cap), nvars, hidx[i], cap), deg, cap)
        # edges: sum over weightings, TFT at each vertex is r^{g(v)}
        tft = Fraction(r) ** (g - G.h1)
        edge_total: dict = defaultdict(Fraction)
        cache: dict = {}
        for w in ws:
            p = one
            for h, h2 in G.edges:
                ck = (w[h], w[h2])
                if ck not in cache:
                    cache[ck] = _edge_series(spec, w[h], w[h2], cap)
                ep = {}
                for (i, j), c in cache[ck].items():
                    e = [0] * nvars
                    e[hidx[h]] += i
                    e[hidx[h2]] += j
                    ep[tuple(e)] = c
                p = _mul(p, ep, deg, cap)
            for e, c in p.items():
                edge_total[e] += c
        full = _mul(dict(edge_total), base, deg, cap)
        scale = tft / automorphism_order(G)
        for e, c in full.items():
            kappa = [[] for _ in range(nv)]
            for vi, (v, D) in enumerate(kvars):
                kappa[v].extend([D] * e[vi])
            psi = {h: e[hidx[h]] for h in halves if e[hidx[h]]}
            terms[generator_key(G, kappa, psi)] += scale * c
    return TautClass(g, n, terms)


def smooth_part_expansion(spec: RMatrixSpec, g: int, residues: Sequence[int], max_codim: int) -> TautClass:
    """exp(sum_d [z^d] L_u kappa_d - sum_i sum_d [z^d] L_{a_i} psi_i^d) on the
    one-vertex graph, normalised to degree-0 part 1."""
    n = len(residues)
    G = trivial_graph(g, n)
    s = translation_kappa_coefficients(spec)
    cl = TautClass.zero(g, n)
    for d in range(1, max_codim + 1):
        if s[d]:
            cl = cl + TautClass.from_generator(G, kappa=((d,),), coeff=s[d])
        for i, a in enumerate(residues, start=1):
            c = spec.log_entry(a)[d]
            if c:
                cl = cl + TautClass.from_generator(G, psi={i: d}, coeff=-c)
    return cl.exp(max_codim)


# ----------------------------------------------------------------------------
# Chiodo classes


def _gamma(d: int, h: int, h2: int) -> list[tuple[dict[int, int], int]]:
    """sum_{i+j=d} (-psi_h)^i psi_h2^j; empty for d < 0."""
    out = []
    for i in range(d + 1):
        j = d - i
        psi = {}
        if i:
            psi[h] = i
        if j:
            psi[h2] = psi.get(h2, 0) + j
        out.append((psi, (-1) ** i))
    return out


def chiodo_character_weighted(g: int, A: Sequence[int], k: int, r: int, d: int) -> WeightedTautClass:
    """ch_d of R pi_* of the universal r-th root, as a weighted class.

    Boundary terms: each pushforward from a branch-ordered one-edge stratum
    with twist q at the chosen branch enters as (1/r) times the weighted
    generator, which turns the prefactor r/2 into 1/2.
    """
    n = len(A)
    W = WeightedTautClass(g, n, r, k, A)
    if not W.congruent():
        return W
    res = W.A
    kk = W.k
    fact = factorial(d + 1)
    T = trivial_graph(g, n)
    out = W._new({})
    # kappa and psi terms
    if d == 0:
        scalar = _bern(1, Fraction(kk, r)) * (2 * g - 2 + n) - sum(_bern(1, Fraction(a, r)) for a in res)
        return W.fundamental_like().scale(scalar)
    out = out + W.generator(T, {}, kappa=((d,),), coeff=_bern(d + 1, Fraction(kk, r)) / fact)
    for i, a in enumerate(res, start=1):
        out = out + W.generator(T, {}, psi={i: d}, coeff=-_bern(d + 1, Fraction(a, r)) / fact)
    half = Fraction(1, 2)
    h, h2 = n + 1, n + 2
    # separating nodes, ordered (l, I); the branch h sits on the (l, I) side
    for l in range(g + 1):
        for size in range(n + 1):
            for I in itertools.combinations(range(1, n + 1), size):
                J = tuple(m for m in range(1, n + 1) if m not in I)
                if 2 * l - 2 + len(I) + 1 <= 0 or 2 * (g - l) - 2 + len(J) + 1 <= 0:
                    continue
                q = (kk * (2 * l - 1 + len(I)) - sum(res[i - 1] for i in I)) % r
                G = StableGraph((l, g - l), (I + (h,), J + (h2,)), ((h, h2),))
                c = half * _bern(d + 1, Fraction(q, r)) / fact
                for psi, sign in _gamma(d - 1, h2, h):
                    out = out + W.generator(G, {h: q, h2: -q}, psi=psi, coeff=c * sign)
    # non-separating node with branch h carrying q
    if g >= 1:
        G = StableGraph((g - 1,), (tuple(range(1, n + 1)) + (h, h2),), ((h, h2),))
        for q in range(r):
            c = half * _bern(d + 1, Fraction(q, r)) / fact
            for psi, sign in _gamma(d - 1, h2, h):
                out = out + W.generator(G, {h: q, h2: -q}, psi=psi, coeff=c * sign)
    return out


def chiodo_chern_character(g: int, A: Sequence[int], k: int, r: int, d: int) -> TautClass:
    """ch_d pushed down to the moduli of curves (weighted generators become
    r^{-h1} times ordinary generators)."""
    return chiodo_character_weighted(g, A, k, r, d).pushdown()


def _exp_of_characters(g, A, k, r, max_codim, coeff: Callable[[int], Fraction]) -> TautClass:
    n = len(A)
    W = WeightedTautClass(g, n, r, k, A)
    if not W.congruent():
        return TautClass.zero(g, n)
    X = W._new({})
    for d in range(1, max_codim + 1):
        c = coeff(d)
        if c:
            X = X + chiodo_character_weighted(g, A, k, r, d).scale(c)
    return X.exp(max_codim).pushdown()


def _compare(a: TautClass, b: TautClass, what: str) -> TautClass:
    if a != b:
        diff = a - b
        raise MismatchBetweenConstructions(f"{what}: constructions differ in {len(diff)} generators")
    return a


def zvonkine_class(g: int, A: Sequence[int], k: int, r: int, max_codim: int | None = None,
                   path: str = "both") -> TautClass:
    """r^{-g} times the R-matrix action with L_i = -(r^2/2) B_2(i/r) z, or
    equivalently exp(-r^2 ch_1) pushed down.  ``path`` is "rmatrix",
    "chiodo" or "both" (computes both and checks equality)."""
    n = len(A)
    if max_codim is None:
        max_codim = 3 * g - 3 + n
    out = {}
    if path in ("rmatrix", "both"):
        spec = rmatrix_zvonkine(r, max_codim + 1, k)
        out["rmatrix"] = rmatrix_action(spec, g, A, max_codim).scale(Fraction(1, r**g))
    if path in ("chiodo", "both"):
        out["chiodo"] = _exp_of_characters(g, A, k, r, max_codim, lambda d: Fraction(-r * r) if d == 1 else 0)
    if path == "both":
        return _compare(out["rmatrix"], out["chiodo"], "zvonkine_class")
    if path not in out:
        raise ValueError(f"unknown path {path!r}")
    return out[path]


def chern_class_weighted(g: int, A: Sequence[int], k: int, r: int, max_codim: int | None = None,
                         path: str = "both") -> TautClass:
    """sum_i r^{2i} c_i(-R pi_* L) pushed down: r^{-g} times the R-matrix
    action with L_i = sum_d B_{d+1}(i/r)/(d(d+1)) (-r^2 z)^d, or
    exp(sum_d (-r^2)^d (d-1)! ch_d)."""
    n = len(A)
    if max_codim is None:
        max_codim = 3 * g - 3 + n
    out = {}
    if path in ("rmatrix", "both"):
        spec = rmatrix_chern(r, max_codim + 1, k)
        out["rmatrix"] = rmatrix_action(spec, g, A, max_codim).scale(Fraction(1, r**g))
    if path in ("chiodo", "both"):
        out["chiodo"] = _exp_of_characters(
            g, A, k, r, max_codim, lambda d: Fraction(-r * r) ** d * factorial(d - 1)
        )
    if path == "both":
        return _compare(out["rmatrix"], out["chiodo"], "chern_class_weighted")
    if path not in out:
        raise ValueError(f"unknown path {path!r}")
    return out[path]


def localization_vertex_class(g: int, A: Sequence[int], r: int, k: int = 0,
                              max_codim: int | None = None, path: str = "rmatrix") -> dict[int, TautClass]:
    """Coefficients of lambda^{g-i} in sum_i (lambda/r)^{g-i} phi_*(c_i(-R pi_* L)),
    normalised by the degree r^{2g-1} of phi: the codim-i part of
    :func:`chern_class_weighted` times r^{g-1-i}."""
    n = len(A)
    if max_codim is None:
        max_codim = 3 * g - 3 + n
    C = chern_class_weighted(g, A, k, r, max_codim, path)
    out = {}
    for i in range(max_codim + 1):
        part = C.graded_part(i)
        if not part.is_zero():
            out[g - i] = part.scale(Fraction(r) ** (g - 1 - i))
    return out
