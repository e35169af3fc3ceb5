"""Top intersection numbers of psi and kappa classes on moduli of stable curves.

``psi_integral`` reduces by the string and dilaton equations and otherwise
applies the DVV (Virasoro) recursion.  Kappa classes are converted into psi
classes on spaces with extra markings.
"""
from __future__ import annotations

import os
import threading
from fractions import Fraction
from functools import lru_cache
from math import factorial
from pathlib import Path
from typing import Iterable, Sequence

from .arith import format_rational, parse_rational

__all__ = [
    "psi_integral",
    "kappa_psi_integral",
    "genus0_psi_integral",
    "set_partitions",
    "IntegralCache",
]


def _dfact(m: int) -> int:
    """Double factorial with (-1)!! = 1."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def psi_integral(g: int, b: Sequence[int]) -> Fraction:
    """<tau_{b_1} ... tau_{b_n}>_g; zero unless sum(b) = 3g - 3 + n."""
    if any(x < 0 for x in b):
        raise ValueError("psi exponents must be non-negative")
    return _psi(g, tuple(sorted(b, reverse=True)))


@lru_cache(maxsize=None)
def _psi(g: int, b: tuple[int, ...]) -> Fraction:
    n = len(b)
    if g < 0 or 2 * g - 2 + n <= 0 or sum(b) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and n == 3:
        return Fraction(1)
    if g == 1 and n == 1:
        return Fraction(1, 24)
    if b[-1] == 0:
        rest = list(b[:-1])
        total = Fraction(0)
        for i, x in enumerate(rest):
            if x > 0:
                c = rest.copy()
                c[i] -= 1
                total += psi_integral(g, c)
        return total
    if b[-1] == 1:
        return (2 * g - 2 + n - 1) * psi_integral(g, b[:-1])
    # DVV with tau_{k+1} = tau_{b[0]}
    k = b[0] - 1
    ds = list(b[1:])
    total = Fraction(0)
    for j, d in enumerate(ds):
        c = ds.copy()
        c[j] = d + k
        total += Fraction(_dfact(2 * k + 2 * d + 1), _dfact(2 * d - 1)) * psi_integral(g, c)
    for a in range(k):
        s = k - 1 - a
        w = Fraction(_dfact(2 * a + 1) * _dfact(2 * s + 1), 2)
        total += w * psi_integral(g - 1, [a, s] + ds)
        m = len(ds)
        for mask in range(1 << m):
            I = [ds[i] for i in range(m) if mask >> i & 1]
            J = [ds[i] for i in range(m) if not mask >> i & 1]
            for g1 in range(g + 1):
                left = psi_integral(g1, [a] + I)
                if left:
                    total += w * left * psi_integral(g - g1, [s] + J)
    return total / _dfact(2 * k + 3)


def genus0_psi_integral(b: Sequence[int]) -> Fraction:
    """Closed genus-0 formula (n-3)!/prod(b_i!)."""
    n = len(b)
    if n < 3 or sum(b) != n - 3:
        return Fraction(0)
    den = 1
    for x in b:
        den *= factorial(x)
    return Fraction(factorial(n - 3), den)


def set_partitions(items: Sequence) -> Iterable[list[list]]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def kappa_psi_integral(g: int, n: int, kappa: Sequence[int], psi: Sequence[int]) -> Fraction:
    """Integral of prod kappa_{kappa_j} * prod psi_i^{psi_i} over M_{g,n}-bar.

    Kappa classes follow the Arbarello-Cornalba convention
    kappa_d = pi_*(psi_{n+1}^{d+1}).
    """
    if len(psi) != n:
        raise ValueError("one psi exponent per marking expected")
    if any(a < 0 for a in kappa):
        raise ValueError("kappa indices must be non-negative")
    scalar = Fraction(1)
    ks = []
    for a in kappa:
        if a == 0:
            scalar *= 2 * g - 2 + n
        else:
            ks.append(a)
    if sum(ks) + sum(psi) != 3 * g - 3 + n:
        return Fraction(0)
    return scalar * _kappa_psi(g, tuple(sorted(ks)), tuple(sorted(psi, reverse=True)))


@lru_cache(maxsize=None)
def _kappa_psi(g: int, ks: tuple[int, ...], psi: tuple[int, ...]) -> Fraction:
    if not ks:
        return psi_integral(g, psi)
    # pi_*(prod psi_{n+j}^{a_j+1}) = sum over permutations of prod over cycles
    # of kappa_{sum over cycle}; a block of size s carries (s-1)! cyclic orders.
    m = len(ks)
    total = psi_integral(g, psi + tuple(a + 1 for a in ks))
    for part in set_partitions(range(m)):
        if len(part) == m:
            continue
        weight = 1
        for block in part:
            weight *= factorial(len(block) - 1)
        merged = tuple(sorted(sum(ks[i] for i in block) for block in part))
        total -= weight * _kappa_psi(g, merged, psi)
    return total


class IntegralCache:
    """Append-only on-disk store of intersection numbers.

    Lines have the form ``g;b_1,..,b_n;k_1,..,k_m -> p/q``.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self._data: dict[tuple, Fraction] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self.load()

    @staticmethod
    def encode(g: int, psi: Sequence[int], kappa: Sequence[int]) -> str:
        return f"{g};{','.join(map(str, psi))};{','.join(map(str, kappa))}"

    @staticmethod
    def _canon(g, psi, kappa) -> tuple:
        return (g, tuple(sorted(psi, reverse=True)), tuple(sorted(kappa)))

    def load(self) -> None:
        with self._lock, open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                lhs, rhs = line.split("->")
                g, b, k = lhs.strip().split(";")
                psi = tuple(int(x) for x in b.split(",") if x)
                kap = tuple(int(x) for x in k.split(",") if x)
                self._data[self._canon(int(g), psi, kap)] = parse_rational(rhs)

    def __len__(self) -> int:
        return len(self._data)

    def items(self):
        return list(self._data.items())

    def get(self, g: int, psi: Sequence[int], kappa: Sequence[int] = ()) -> Fraction:
        key = self._canon(g, psi, kappa)
        with self._lock:
            hit = self._data.get(key)
        if hit is not None:
            return hit
        value = kappa_psi_integral(g, len(psi), key[2], key[1])
        with self._lock:
            if key not in self._data:
                self._data[key] = value
                if self.path is not None:
                    with open(self.path, "a", encoding="utf-8") as fh:
                        fh.write(f"{self.encode(*key)} -> {format_rational(value)}\n")
        return value
