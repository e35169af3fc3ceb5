from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial

import pytest

from drcycles.intersect import (
    IntegralCache,
    genus0_psi_integral,
    kappa_psi_integral,
    psi_integral,
    set_partitions,
)


def _compositions(total, parts):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cut + (total + parts - 1,):
            out.append(c - prev - 1)
            prev = c
        yield out


def _filled_cache(tmp_path) -> IntegralCache:
    cache = IntegralCache(tmp_path / "ints.txt")
    for g in range(0, 4):
        for n in range(0, 5):
            if 2 * g - 2 + n <= 0 or 3 * g - 3 + n > 7:
                continue
            for b in _compositions(3 * g - 3 + n, n) if n else [[]]:
                cache.get(g, b)
    return cache


def test_string_and_dilaton_on_cached_entries(tmp_path):
    cache = _filled_cache(tmp_path)
    assert len(cache) > 30
    for (g, b, kappa), value in cache.items():
        assert value == psi_integral(g, b)
        n = len(b)
        # string: <tau_0 prod tau_b> = sum_i <... tau_{b_i - 1} ...>
        rhs = sum(psi_integral(g, b[:i] + (x - 1,) + b[i + 1:]) for i, x in enumerate(b) if x > 0)
        if 2 * g - 2 + n > 0 and n > 0:
            assert psi_integral(g, b + (0,)) == rhs
        # dilaton: <tau_1 prod tau_b> = (2g - 2 + n) <prod tau_b>
        assert psi_integral(g, b + (1,)) == (2 * g - 2 + n) * value


@pytest.mark.parametrize("n", range(3, 9))
def test_genus_zero_closed_formula(n):
    for b in _compositions(n - 3, n):
        expected = Fraction(factorial(n - 3))
        for x in b:
            expected /= factorial(x)
        assert psi_integral(0, b) == expected == genus0_psi_integral(b)


@pytest.mark.parametrize("g", range(1, 6))
def test_one_point_closed_formula(g):
    assert psi_integral(g, [3 * g - 2]) == Fraction(1, 24**g * factorial(g))


def test_known_values():
    assert psi_integral(1, [1]) == Fraction(1, 24)
    assert psi_integral(2, [4]) == Fraction(1, 1152)
    assert psi_integral(2, [2, 3]) == Fraction(29, 5760)
    assert psi_integral(2, [2, 2, 2]) == Fraction(7, 240)
    assert psi_integral(3, [7]) == Fraction(1, 82944)
    assert psi_integral(1, [1, 1, 1, 1]) == Fraction(factorial(3), 24)


def test_psi_and_kappa_on_m11():
    psi = psi_integral(1, [1])
    kappa = kappa_psi_integral(1, 1, [1], [0])
    assert psi == kappa == Fraction(1, 24)


def test_kappa_cube_genus_two_by_hand():
    # pi_*(psi^2 psi^2 psi^2) = k1^3 + 3 k1 k2 + 2 k3 and pi_*(psi^2 psi^3) = k1 k2 + k3
    k3 = psi_integral(2, [4])
    k1k2 = psi_integral(2, [2, 3]) - k3
    k1cube = psi_integral(2, [2, 2, 2]) - 3 * k1k2 - 2 * k3
    assert kappa_psi_integral(2, 0, [3], []) == k3
    assert kappa_psi_integral(2, 0, [1, 2], []) == k1k2
    assert kappa_psi_integral(2, 0, [1, 1, 1], []) == k1cube == Fraction(43, 2880)


def test_kappa_zero_and_genus_zero_kappa():
    assert kappa_psi_integral(0, 4, [1], [0] * 4) == 1
    assert kappa_psi_integral(0, 5, [1, 1], [0] * 5) == 5
    assert kappa_psi_integral(1, 1, [0, 1], [0]) == Fraction(1, 24)
    assert kappa_psi_integral(1, 1, [1], [1]) == 0  # wrong dimension


def test_set_partitions_counts():
    bell = [1, 1, 2, 5, 15, 52]
    for m, b in enumerate(bell):
        assert sum(1 for _ in set_partitions(range(m))) == b


def test_cache_round_trip(tmp_path):
    cache = _filled_cache(tmp_path)
    again = IntegralCache(tmp_path / "ints.txt")
    assert sorted(again.items()) == sorted(cache.items())
    lines = (tmp_path / "ints.txt").read_text().splitlines()
    assert "2;4; -> 1/1152" in lines
    assert len(lines) == len(cache)
    # a second lookup does not append
    again.get(2, [4])
    assert len((tmp_path / "ints.txt").read_text().splitlines()) == len(lines)


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        psi_integral(1, [-1, 2])
