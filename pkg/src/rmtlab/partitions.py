"""Set-partition calculus linking moments and joint cumulants.

Moments are sums over set partitions of products of block cumulants; the
inverse direction carries the Moebius weight (-1)^(p-1) (p-1)!.  Everything
here runs in exact arithmetic so the finite-N trace moments and their
large-N extrapolations can be checked with zero tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

from .graphs import CapacityError, CumulantGraph, graph_from_monomial

MAX_PARTITION_GROUND = 10
MAX_MOMENT_ENTRIES = 8
MAX_CUMULANT_ENTRIES = 6
MAX_TRACE_TUPLES = 10**7


@dataclass(frozen=True)
class SetPartition:
    ground_size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = sorted(i for b in self.blocks for i in b)
        if flat != list(range(self.ground_size)) or any(not b for b in self.blocks):
            raise ValueError("blocks must be disjoint, non-empty and cover the ground set")

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def moebius_weight(self) -> int:
        p = self.num_blocks
        return (-1) ** (p - 1) * factorial(p - 1)


def set_partitions(k: int) -> list[SetPartition]:
    """All Bell(k) partitions of {0..k-1}, in restricted-growth-string order."""
    if k > MAX_PARTITION_GROUND:
        raise CapacityError(f"partition enumeration limited to {MAX_PARTITION_GROUND} elements")
    if k < 1:
        raise ValueError("ground set must be non-empty")
    out: list[SetPartition] = []

    def grow(rgs: list[int]):
        if len(rgs) == k:
            nblocks = max(rgs) + 1
            blocks = [[] for _ in range(nblocks)]
            for i, b in enumerate(rgs):
                blocks[b].append(i)
            out.append(SetPartition(k, tuple(tuple(b) for b in blocks)))
            return
        top = max(rgs) if rgs else -1
        for b in range(top + 2):
            rgs.append(b)
            grow(rgs)
            rgs.pop()

    grow([])
    return out


@dataclass(frozen=True)
class CumulantFunction:
    """Exact joint-cumulant evaluator for matrix-entry monomials.

    ``evaluator`` maps (graph, vertex -> matrix index assignment, N) to an
    exact value; ``description`` is a human-readable tag.
    """

    evaluator: Callable[[CumulantGraph, tuple, int], object]
    description: str = ""

    def on_pairs(self, pairs: Sequence[tuple], N: int):
        graph = graph_from_monomial(pairs)
        assignment = []
        for i, j in pairs:
            for idx in (i, j):
                if idx not in assignment:
                    assignment.append(idx)
        return self.evaluator(graph, tuple(assignment), N)


def gaussian_cumulant_function(sigma_sq=Fraction(1)) -> CumulantFunction:
    """Cumulants of the Gaussian unitary-invariant law <M_ij M_kl>_c = s^2 d_il d_jk."""
    sigma_sq = Fraction(sigma_sq)

    def evaluate(graph: CumulantGraph, assignment: tuple, N: int):
        if graph.num_edges != 2:
            return Fraction(0)
        (s1, t1), (s2, t2) = graph.edges
        if s1 == t2 and t1 == s2:
            return sigma_sq
        return Fraction(0)

    return CumulantFunction(evaluate, "gaussian")


def moments_from_cumulants(c: CumulantFunction, pairs: Sequence[tuple], N: int):
    """Moment of the entry monomial as a partition sum of block cumulants."""
    if len(pairs) > MAX_MOMENT_ENTRIES:
        raise CapacityError(f"moment expansion limited to {MAX_MOMENT_ENTRIES} entries")
    total = Fraction(0)
    for part in set_partitions(len(pairs)):
        prod = Fraction(1)
        for block in part.blocks:
            prod *= c.on_pairs([pairs[i] for i in block], N)
            if not prod:
                break
        total += prod
    return total


def cumulants_from_moments(m: Callable[[Sequence[tuple]], object], pairs: Sequence[tuple]):
    """Joint cumulant from a moment function, by Moebius inversion."""
    if len(pairs) > MAX_CUMULANT_ENTRIES:
        raise CapacityError(f"cumulant inversion limited to {MAX_CUMULANT_ENTRIES} entries")
    total = 0
    for part in set_partitions(len(pairs)):
        prod = part.moebius_weight()
        for block in part.blocks:
            prod = prod * m(tuple(pairs[i] for i in block))
        total = total + prod
    return total


def trace_moment_expectation(N: int, k: int, c: CumulantFunction):
    """Exact (1/N^(k/2+1)) <Tr M^k> by brute force over all index tuples."""
    if N**k > MAX_TRACE_TUPLES:
        raise CapacityError("index sum too large for brute-force evaluation")
    total = Fraction(0)
    for tup in itertools.product(range(N), repeat=k):
        pairs = [(tup[i], tup[(i + 1) % k]) for i in range(k)]
        total += moments_from_cumulants(c, pairs, N)
    if k % 2 == 0:
        return total / Fraction(N) ** (k // 2 + 1)
    if total == 0:
        return Fraction(0)
    return float(total) / float(N) ** (k / 2 + 1)


def catalan(l: int) -> int:
    """Catalan number (2l)! / ((l!)^2 (l+1)) as an exact integer."""
    if l > 30:
        raise CapacityError("catalan numbers computed up to l = 30")
    if l < 0:
        raise ValueError("l must be non-negative")
    return factorial(2 * l) // (factorial(l) ** 2 * (l + 1))


@dataclass(frozen=True)
class ExtrapolationResult:
    value: object
    degenerate: bool = False

    def __float__(self) -> float:
        return float(self.value)


def extrapolate_limit(values: Sequence[tuple[int, object]]) -> ExtrapolationResult:
    """Richardson limit assuming value(N) = a + b/N + c/N^2.

    Solves the model through the three largest N points; exact inputs give
    an exact ``a``.  A singular system falls back to the last value with the
    degenerate flag set.
    """
    if len(values) < 3:
        raise ValueError("need at least three points")
    ns = [n for n, _ in values]
    if ns != sorted(ns):
        raise ValueError("N values must be ascending")
    pts = values[-3:]
    exact = all(isinstance(v, (int, Fraction)) for _, v in pts)
    conv = Fraction if exact else float
    rows = [(conv(1), conv(1) / n, conv(1) / (n * n)) for n, _ in pts]
    rhs = [conv(v) for _, v in pts]

    def det3(m):
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))

    d = det3(rows)
    if not d:
        return ExtrapolationResult(values[-1][1], degenerate=True)
    replaced = [(rhs[i], rows[i][1], rows[i][2]) for i in range(3)]
    return ExtrapolationResult(det3(replaced) / d)
