"""Certification of tautological relations by intersection pairings, and
cross-checks between the different constructions of Pixton's class."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .arith import format_rational
from .cohft import zvonkine_class
from .pixton import (
    PixtonInput,
    hain_class,
    hain_power_expansion,
    interpolate_classes,
    pixton_class,
    sample_range,
)
from .strata import TautClass, all_generators

__all__ = [
    "RelationCertificate",
    "verify_relation",
    "verify_dr_vanishing",
    "compare_pixton_zvonkine",
    "compare_hain",
    "Comparison",
]


@dataclass
class RelationCertificate:
    g: int
    n: int
    d: int
    A: tuple = ()
    k: int = 0
    pairings: list = field(default_factory=list)  # (generator key, value)
    seconds: float = 0.0

    @property
    def holds(self) -> bool:
        return all(v == 0 for _, v in self.pairings)

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "fails"

    def nonzero(self) -> list:
        return [(k, v) for k, v in self.pairings if v != 0]

    def to_json(self) -> dict:
        rows = []
        for key, value in self.pairings:
            item = TautClass(self.g, self.n, {key: 1}).to_json()[0]
            del item["coefficient"]
            item["pairing"] = format_rational(value)
            rows.append(item)
        return {
            "g": self.g,
            "n": self.n,
            "A": list(self.A),
            "k": self.k,
            "degree": self.d,
            "verdict": self.verdict,
            "pairings": rows,
            "seconds": round(self.seconds, 3),
        }


def verify_relation(T: TautClass, d: int, A: Sequence[int] = (), k: int = 0) -> RelationCertificate:
    """Pair the codim-d class T with every generator of complementary codimension."""
    t0 = time.perf_counter()
    dim = T.dim
    if not 0 <= d <= dim:
        raise ValueError(f"degree must lie in 0..{dim}")
    stray = [c for c in T.degrees() if c != d]
    if stray:
        raise ValueError(f"class is not homogeneous of degree {d} (found {stray})")
    cert = RelationCertificate(T.g, T.n, d, tuple(A), k)
    for key in all_generators(T.g, T.n, dim - d):
        G = TautClass(T.g, T.n, {key: 1})
        cert.pairings.append((key, T.mul(G).integrate()))
    cert.seconds = time.perf_counter() - t0
    return cert


def verify_dr_vanishing(g: int, A: Sequence[int], k: int = 0, d_range: Sequence[int] | None = None,
                        **kw) -> list[RelationCertificate]:
    """Certificates that [Omega_{g,A,k}]_d pairs to zero for each d > g."""
    n = len(A)
    dim = 3 * g - 3 + n
    if d_range is None:
        d_range = range(g + 1, dim + 1)
    d_range = sorted(d_range)
    if not d_range:
        return []
    if any(d <= g or d > dim for d in d_range):
        raise ValueError(f"degrees must lie in ({g}, {dim}]")
    omega = pixton_class(PixtonInput(g, A, k, max(d_range)), **kw)
    return [verify_relation(omega.graded_part(d), d, A, k) for d in d_range]


@dataclass
class Comparison:
    equal: bool
    report: dict

    def to_json(self) -> dict:
        return {"equal": self.equal, **self.report}


def _diff_report(a: TautClass, b: TautClass, label_a: str, label_b: str) -> dict:
    diff = a - b
    rows = []
    for key, c in sorted(diff.terms.items()):
        item = TautClass(a.g, a.n, {key: 1}).to_json()[0]
        item[label_a] = format_rational(a.terms.get(key, Fraction(0)))
        item[label_b] = format_rational(b.terms.get(key, Fraction(0)))
        del item["coefficient"]
        rows.append(item)
    return {"generators": len(set(a.terms) | set(b.terms)), "differences": rows}


def compare_pixton_zvonkine(g: int, A: Sequence[int], k: int = 0, max_codim: int | None = None,
                            oversample: int = 3) -> Comparison:
    """Omega_{g,A,k} against the r = 0 value of r^{-g} times the R-matrix
    action with the B_2 R-matrix."""
    inp = PixtonInput(g, A, k, max_codim)
    rs = sample_range(inp, oversample=oversample)
    samples = [(r, zvonkine_class(g, A, k, r, inp.max_codim, path="rmatrix")) for r in rs]
    Z = interpolate_classes(g, inp.n, samples).constant_term()
    P = pixton_class(inp, oversample=oversample)
    rep = _diff_report(P, Z, "pixton", "zvonkine")
    rep["r_samples"] = rs
    return Comparison(P == Z, rep)


def compare_hain(g: int, A: Sequence[int], max_codim: int | None = None) -> Comparison:
    """Compact-type parts of Omega_{g,A}, the tree graph sum and (in degree g)
    the power Theta^g / (2^g g!)."""
    inp = PixtonInput(g, A, 0, max_codim)
    P = pixton_class(inp).restrict_compact_type()
    H = hain_class(g, A, inp.max_codim)
    ok = P == H
    rep = {"pixton_vs_tree_sum": _diff_report(P, H, "pixton", "tree_sum")}
    if g <= inp.max_codim:
        E = hain_power_expansion(g, A).restrict_compact_type()
        ok_pow = E == H.graded_part(g)
        rep["power_vs_tree_sum_degree_g"] = _diff_report(E, H.graded_part(g), "power", "tree_sum")
        ok = ok and ok_pow
    return Comparison(ok, rep)
