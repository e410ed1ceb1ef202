"""Exact coefficient ring for the replica flow.

Elements are finite sums of terms ``coeff * n**a * N**(b/2)`` with rational
coefficients, integer replica power ``a >= 0`` and integer half-power ``b``
of the matrix size (``b`` may be negative).  All arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping


class RingElement:
    """Immutable element of Q[n, N^(1/2), N^(-1/2)] in canonical form."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Fraction] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, int], Fraction] = {}
        for (a, b), coeff in items:
            if a < 0:
                raise ValueError("replica power must be non-negative")
            coeff = Fraction(coeff)
            if coeff:
                key = (int(a), int(b))
                acc[key] = acc.get(key, Fraction(0)) + coeff
                if not acc[key]:
                    del acc[key]
        self._terms = tuple(sorted(acc.items()))

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls) -> "RingElement":
        return cls()

    @classmethod
    def one(cls) -> "RingElement":
        return cls({(0, 0): Fraction(1)})

    @classmethod
    def scalar(cls, value) -> "RingElement":
        return cls({(0, 0): Fraction(value)})

    @classmethod
    def n(cls) -> "RingElement":
        return cls({(1, 0): Fraction(1)})

    @classmethod
    def N_half(cls, b: int = 1, coeff=1) -> "RingElement":
        """The monomial ``coeff * N**(b/2)``."""
        return cls({(0, b): Fraction(coeff)})

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "RingElement") -> "RingElement":
        merged = dict(self._terms)
        for key, coeff in other._terms:
            merged[key] = merged.get(key, Fraction(0)) + coeff
        return RingElement(merged)

    def __sub__(self, other: "RingElement") -> "RingElement":
        merged = dict(self._terms)
        for key, coeff in other._terms:
            merged[key] = merged.get(key, Fraction(0)) - coeff
        return RingElement(merged)

    def __neg__(self) -> "RingElement":
        return RingElement({key: -coeff for key, coeff in self._terms})

    def __mul__(self, other):
        if isinstance(other, RingElement):
            acc: dict[tuple[int, int], Fraction] = {}
            for (a1, b1), c1 in self._terms:
                for (a2, b2), c2 in other._terms:
                    key = (a1 + a2, b1 + b2)
                    acc[key] = acc.get(key, Fraction(0)) + c1 * c2
            return RingElement(acc)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, value) -> "RingElement":
        value = Fraction(value)
        return RingElement({key: coeff * value for key, coeff in self._terms})

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, RingElement) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    # -- grading ----------------------------------------------------------

    @property
    def terms(self) -> tuple:
        return self._terms

    def n_grade(self, a: int) -> "RingElement":
        """Part with replica power exactly ``a``, kept at that power."""
        return RingElement({key: c for key, c in self._terms if key[0] == a})

    def max_n_power(self) -> int | None:
        return max((a for (a, _), _ in self._terms), default=None)

    def max_N_grade(self) -> Fraction | None:
        """Largest power of N present, in units of N**1 (so b/2)."""
        if not self._terms:
            return None
        return Fraction(max(b for (_, b), _ in self._terms), 2)

    def large_N_limit(self) -> Fraction:
        """Coefficient surviving N -> infinity; requires no positive grade."""
        for (a, b), _ in self._terms:
            if b > 0:
                raise ValueError("positive N grade has no large-N limit")
        out = Fraction(0)
        for (a, b), coeff in self._terms:
            if b == 0:
                if a != 0:
                    raise ValueError("large-N limit of an n-graded part")
                out += coeff
        return out

    def shift_N(self, b: int) -> "RingElement":
        """Multiply by N**(b/2)."""
        return RingElement({(a, bb + b): c for (a, bb), c in self._terms})

    # -- serialization ----------------------------------------------------

    def to_triples(self) -> list[list[int]]:
        """JSON form: one ``[num, den, a, b]`` quadruple per term."""
        return [[c.numerator, c.denominator, a, b] for (a, b), c in self._terms]

    @classmethod
    def from_triples(cls, triples) -> "RingElement":
        return cls({(a, b): Fraction(num, den) for num, den, a, b in triples})

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        bits = []
        for (a, b), c in self._terms:
            piece = str(c)
            if a:
                piece += f"*n^{a}" if a > 1 else "*n"
            if b:
                piece += f"*N^{Fraction(b, 2)}"
            bits.append(piece)
        return " + ".join(bits)
