"""Exact scalar machinery: univariate polynomials, truncated power series,
Bernoulli polynomials and exact interpolation.

All arithmetic is over :class:`fractions.Fraction`; nothing here ever rounds.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

__all__ = [
    "Rational",
    "UniPoly",
    "TruncSeries",
    "InconsistentSamples",
    "bernoulli_numbers",
    "bernoulli_polynomial",
    "interpolate_polynomial",
    "as_rational",
    "format_rational",
    "parse_rational",
]

Rational = Fraction


class InconsistentSamples(ValueError):
    """A surplus sample does not lie on the interpolating polynomial."""


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return Fraction(x)


def format_rational(x: Fraction) -> str:
    x = as_rational(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if "/" in s:
        p, q = s.split("/")
        return Fraction(int(p), int(q))
    return Fraction(int(s))


def _trim(coeffs: Iterable[Fraction]) -> tuple[Fraction, ...]:
    c = [as_rational(a) for a in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class UniPoly:
    """Dense univariate polynomial; ``coeffs[i]`` multiplies ``var**i``."""

    coeffs: tuple[Fraction, ...] = ()
    var: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def constant(cls, c, var: str = "x") -> UniPoly:
        return cls((as_rational(c),), var)

    @classmethod
    def monomial(cls, d: int, c=1, var: str = "x") -> UniPoly:
        return cls((Fraction(0),) * d + (as_rational(c),), var)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def __call__(self, x) -> Fraction:
        x = as_rational(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def _coerce(self, other) -> UniPoly:
        if isinstance(other, UniPoly):
            return other
        return UniPoly.constant(other, self.var)

    def __add__(self, other) -> UniPoly:
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([self[i] + other[i] for i in range(n)], self.var)

    __radd__ = __add__

    def __neg__(self) -> UniPoly:
        return UniPoly([-c for c in self.coeffs], self.var)

    def __sub__(self, other) -> UniPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> UniPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> UniPoly:
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return UniPoly((), self.var)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out, self.var)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        return self.coeffs == UniPoly.constant(other).coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def compose_affine(self, a, b) -> UniPoly:
        """Return ``p(a*x + b)``."""
        lin = UniPoly((as_rational(b), as_rational(a)), self.var)
        acc = UniPoly((), self.var)
        for c in reversed(self.coeffs):
            acc = acc * lin + c
        return acc

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else (self.var if i == 1 else f"{self.var}^{i}")
            if mono and c == 1:
                terms.append(mono)
            elif mono and c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}" + ("*" + mono if mono else ""))
        return " + ".join(terms).replace("+ -", "- ")


class TruncSeries:
    """Power series in one variable truncated after ``z**order``."""

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs: Sequence, order: int):
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        c = [as_rational(a) for a in list(coeffs)[: order + 1]]
        c += [Fraction(0)] * (order + 1 - len(c))
        self.order = order
        self.coeffs = tuple(c)

    @classmethod
    def zero(cls, order: int) -> TruncSeries:
        return cls((), order)

    @classmethod
    def one(cls, order: int) -> TruncSeries:
        return cls((1,), order)

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i <= self.order:
            return self.coeffs[i]
        return Fraction(0)

    def _check(self, other: TruncSeries) -> int:
        return min(self.order, other.order)

    def __add__(self, other: TruncSeries) -> TruncSeries:
        n = self._check(other)
        return TruncSeries([self[i] + other[i] for i in range(n + 1)], n)

    def __neg__(self) -> TruncSeries:
        return TruncSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other: TruncSeries) -> TruncSeries:
        return self + (-other)

    def scale(self, c) -> TruncSeries:
        c = as_rational(c)
        return TruncSeries([c * a for a in self.coeffs], self.order)

    def __mul__(self, other) -> TruncSeries:
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        n = self._check(other)
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            a = self.coeffs[i]
            if a:
                for j in range(n + 1 - i):
                    out[i + j] += a * other.coeffs[j]
        return TruncSeries(out, n)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruncSeries)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        return f"TruncSeries({[str(c) for c in self.coeffs]}, order={self.order})"

    def substitute_scalar(self, c) -> TruncSeries:
        """Return ``f(c*z)``."""
        c = as_rational(c)
        return TruncSeries([a * c**i for i, a in enumerate(self.coeffs)], self.order)

    def exp(self) -> TruncSeries:
        if self.coeffs[0] != 0:
            raise ValueError("exp needs a series with zero constant term")
        n = self.order
        # f' = f * g'  =>  k f_k = sum_{j=1..k} j g_j f_{k-j}
        f = [Fraction(0)] * (n + 1)
        f[0] = Fraction(1)
        for k in range(1, n + 1):
            s = Fraction(0)
            for j in range(1, k + 1):
                if self.coeffs[j]:
                    s += j * self.coeffs[j] * f[k - j]
            f[k] = s / k
        return TruncSeries(f, n)

    def log(self) -> TruncSeries:
        if self.coeffs[0] != 1:
            raise ValueError("log needs a series with constant term one")
        n = self.order
        # f = log(a):  a f' = a'  =>  k f_k = k a_k - sum_{j=1..k-1} j f_j a_{k-j}
        f = [Fraction(0)] * (n + 1)
        for k in range(1, n + 1):
            s = k * self.coeffs[k]
            for j in range(1, k):
                s -= j * f[j] * self.coeffs[k - j]
            f[k] = s / k
        return TruncSeries(f, n)

    def inverse(self) -> TruncSeries:
        a0 = self.coeffs[0]
        if a0 == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        n = self.order
        b = [Fraction(0)] * (n + 1)
        b[0] = 1 / a0
        for m in range(1, n + 1):
            s = Fraction(0)
            for k in range(1, m + 1):
                s += self.coeffs[k] * b[m - k]
            b[m] = -s / a0
        return TruncSeries(b, n)


_bern_lock = threading.Lock()
_bern_numbers: list[Fraction] = []
_bern_polys: dict[int, UniPoly] = {}


def bernoulli_numbers(m: int) -> list[Fraction]:
    """B_0..B_m from t/(e^t - 1), so B_1 = -1/2."""
    if m < 0:
        raise ValueError("m must be >= 0")
    with _bern_lock:
        if len(_bern_numbers) <= m:
            n = max(m, 2 * len(_bern_numbers), 8)
            # (e^t - 1)/t = sum t^k/(k+1)!, invert, rescale by k!
            denom = TruncSeries([Fraction(1, factorial(k + 1)) for k in range(n + 1)], n)
            inv = denom.inverse()
            _bern_numbers[:] = [inv[k] * factorial(k) for k in range(n + 1)]
        return _bern_numbers[: m + 1]


def bernoulli_polynomial(m: int) -> UniPoly:
    """B_m(x), defined by t e^{xt}/(e^t - 1) = sum B_m(x) t^m/m!."""
    if m < 0:
        raise ValueError("m must be >= 0")
    with _bern_lock:
        cached = _bern_polys.get(m)
    if cached is not None:
        return cached
    B = bernoulli_numbers(m)
    poly = UniPoly([comb(m, j) * B[m - j] for j in range(m + 1)])
    with _bern_lock:
        _bern_polys[m] = poly
    return poly


def interpolate_polynomial(samples: Sequence[tuple], degree_bound: int, var: str = "x") -> UniPoly:
    """Interpolate through the first ``degree_bound + 1`` samples and verify
    that every surplus sample lies on the result.

    Raises :class:`InconsistentSamples` if one does not.
    """
    pts = [(as_rational(x), as_rational(y)) for x, y in samples]
    if degree_bound < 0:
        if any(y != 0 for _, y in pts):
            raise InconsistentSamples("nonzero sample for the zero polynomial")
        return UniPoly((), var)
    if len(pts) < degree_bound + 1:
        raise ValueError(f"need {degree_bound + 1} samples, got {len(pts)}")
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError("sample abscissae must be distinct")
    base = pts[: degree_bound + 1]
    # Newton divided differences
    n = len(base)
    dd = [y for _, y in base]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (base[i][0] - base[i - j][0])
    poly = UniPoly.constant(dd[-1], var)
    for i in range(n - 2, -1, -1):
        poly = poly * UniPoly((-base[i][0], Fraction(1)), var) + dd[i]
    for x, y in pts[degree_bound + 1 :]:
        if poly(x) != y:
            raise InconsistentSamples(
                f"sample at {x} deviates from the degree-{degree_bound} interpolant "
                f"({poly(x)} != {y})"
            )
    return poly
