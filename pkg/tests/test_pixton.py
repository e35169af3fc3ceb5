from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from drcycles.arith import TruncSeries
from drcycles.graphs import StableGraph
from drcycles.pixton import (
    PixtonInput,
    dr_cycle,
    hain_class,
    hain_power_expansion,
    pixton_class,
    pixton_fixed_r,
    pixton_rpoly,
    r_threshold,
    sample_range,
)
from drcycles.strata import TautClass, decode_generator, generator_key, psi_class

LOOP_11 = StableGraph((0,), ((1, 2, 3),), ((2, 3),))
LOOP_12 = StableGraph((0,), ((1, 2, 3, 4),), ((3, 4),))


def _relabel_markings(cl: TautClass, perm: dict) -> TautClass:
    out = {}
    for key, c in cl.terms.items():
        G, kappa, psi = decode_generator(key)
        ren = lambda h: perm.get(h, h) if h <= cl.n else h
        H = StableGraph(G.genera, tuple(tuple(ren(h) for h in hs) for hs in G.legs),
                        tuple((ren(a), ren(b)) for a, b in G.edges))
        out[generator_key(H, kappa, {ren(h): e for h, e in psi.items()})] = c
    return TautClass(cl.g, cl.n, out)


def _one_point_series(g: int, a: int) -> Fraction:
    """[z^{2g}] S(a z) / S(z) with S(z) = sinh(z/2) / (z/2)."""
    order = 2 * g
    S = lambda t: TruncSeries([Fraction(t**m, 2**m * factorial(m + 1)) if m % 2 == 0 else 0
                               for m in range(order + 1)], order)
    return (S(a) * S(1).inverse())[order]


def test_degree_zero_part_is_one():
    for g, A, k in [(1, (1, -1), 0), (1, (3, -1), 1), (2, (0,), 0)]:
        P = pixton_class(PixtonInput(g, A, k, 1))
        assert P.graded_part(0) == TautClass.fundamental(g, len(A))


def test_fixed_r_global_congruence():
    assert pixton_fixed_r(PixtonInput(1, (1, 1), 0, 2), 3).is_zero()
    assert not pixton_fixed_r(PixtonInput(1, (1, 2), 0, 2), 3).is_zero()


def test_loop_coefficient_on_m11_is_positive_quadratic():
    rp = pixton_rpoly(PixtonInput(1, (0,), 0, 1))
    (key,) = TautClass.from_generator(LOOP_11).terms
    poly = rp.polys[key]
    for r in range(2, 30):
        assert poly(r) == Fraction(r * r - 1, 24)


def test_interpolant_predicts_unsampled_r():
    inp = PixtonInput(1, (2, 1, -3), 0, 2)
    rp = pixton_rpoly(inp)
    for r in (40, 41):
        assert rp.evaluate(r) == pixton_fixed_r(inp, r)


def test_samples_must_exceed_threshold():
    inp = PixtonInput(1, (2, -2), 0, 1)
    assert r_threshold(inp) == 4
    assert min(sample_range(inp)) == 5
    with pytest.raises(ValueError):
        pixton_rpoly(inp, [3, 4, 5, 6, 7, 8])


def test_thread_pool_is_deterministic():
    inp = PixtonInput(1, (2, 1, -3), 0, 2)
    a = pixton_rpoly(inp, jobs=1).to_json()
    b = pixton_rpoly(inp, jobs=4).to_json()
    assert a == b


def test_unbalanced_input_rejected():
    with pytest.raises(ValueError):
        pixton_class(PixtonInput(1, (1, 0), 0, 1))
    with pytest.raises(ValueError):
        PixtonInput(0, (1, -1), 0)


@pytest.mark.parametrize("a", [0, 1, 2, 3])
def test_genus_one_dr_closed_form(a):
    # DR_1(a, -a) = a^2/2 (psi_1 + psi_2) - lambda_1, lambda_1 = [loop]/24
    expected = (psi_class(1, 2, 1) + psi_class(1, 2, 2)).scale(Fraction(a * a, 2)) \
        - TautClass.from_generator(LOOP_12).scale(Fraction(1, 24))
    assert dr_cycle(1, (a, -a)) == expected


def test_dr_of_zero_weights_is_minus_lambda():
    assert dr_cycle(1, (0,)).integrate() == Fraction(-1, 24)


@pytest.mark.parametrize("g,a", [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (2, 2)])
def test_one_point_dr_integrals(g, a):
    D = dr_cycle(g, (a, -a))
    val = D.mul(psi_class(g, 2, 1, 2 * g - 1)).integrate()
    assert val == _one_point_series(g, a)


@settings(max_examples=6, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=2), st.permutations([1, 2, 3]))
def test_symmetric_under_permuting_weights(A, perm):
    A = A + [-sum(A)]
    P = pixton_class(PixtonInput(1, A, 0, 2))
    B = [0, 0, 0]
    for i, p in enumerate(perm):
        B[p - 1] = A[i]
    Q = pixton_class(PixtonInput(1, B, 0, 2))
    assert _relabel_markings(P, {i + 1: p for i, p in enumerate(perm)}) == Q


def test_hain_genus_one_matches_closed_form():
    H = hain_class(1, (2, -2), 1)
    assert H.graded_part(1) == (psi_class(1, 2, 1) + psi_class(1, 2, 2)).scale(2)
    assert hain_power_expansion(1, (2, -2)).restrict_compact_type() == H.graded_part(1)
