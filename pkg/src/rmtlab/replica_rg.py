"""Exact symbolic flow for the replica effective potential.

The potential is a graph-indexed polynomial: each directed multigraph G
stands for the monomial S_G(X) = sum over free vertex indices of
prod_edges (X X^dagger)_{i_source, i_target}, with coefficients that are
formal power series in t over the exact ring Q[n, N^(1/2), N^(-1/2)].

One derivative step rewrites graphs locally: the loop term contracts an
ordered (outgoing, incoming) half-edge pair inside one graph, the tree term
contracts across two graphs.  Contracting both halves of a single edge
closes a replica loop (factor n); a vertex left bare by a contraction is
summed freely (factor N).  Everything is exact, so the Catalan resolvent
series comes out with zero tolerance.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .graphs import CapacityError, CumulantGraph, aut_order, canonical_graph
from .partitions import set_partitions
from .ring import RingElement

DEFAULT_MAX_EDGES = 6
MAX_FLOW_ORDER = 8
MAX_WICK_ORDER = 3

TADPOLE = CumulantGraph(1, ((0, 0),))
TWO_CYCLE = CumulantGraph(2, ((0, 1), (1, 0)))
DOUBLE_SELF_LOOP = CumulantGraph(1, ((0, 0), (0, 0)))

FREE_SUM = "free_sum"
DISTINCT_INDEX = "distinct_index"


class FlowInvariantError(ArithmeticError):
    """A grading invariant failed; signals a rewrite bug, not bad input."""


_canon_memo: dict[tuple[int, tuple], CumulantGraph] = {}


def _canon(nv: int, edges: tuple) -> CumulantGraph:
    key = (nv, edges)
    hit = _canon_memo.get(key)
    if hit is None:
        hit = canonical_graph(CumulantGraph(nv, edges))
        _canon_memo[key] = hit
    return hit


# ---------------------------------------------------------------------------
# cumulant specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CumulantSpec:
    """Initial cumulant data per graph class, split into Gaussian part and
    perturbation.  Values are the bare cumulants; the 1/(|Aut| N^(e/2))
    symmetry weights are attached when the potential is built."""

    gaussian: tuple[tuple[CumulantGraph, RingElement], ...] = ()
    perturbation: tuple[tuple[CumulantGraph, RingElement], ...] = ()

    def __post_init__(self):
        for g, _ in self.gaussian:
            if canonical_graph(g) not in (TWO_CYCLE, DOUBLE_SELF_LOOP):
                raise ValueError("gaussian part lives on the 2-cycle and paired self-loops only")

    @classmethod
    def gaussian_spec(cls, sigma_sq=Fraction(1)) -> "CumulantSpec":
        value = RingElement.scalar(Fraction(sigma_sq))
        return cls(gaussian=((TWO_CYCLE, value), (DOUBLE_SELF_LOOP, value)))

    def with_perturbation(self, graph: CumulantGraph, value: RingElement) -> "CumulantSpec":
        return CumulantSpec(self.gaussian,
                            self.perturbation + ((canonical_graph(graph), value),))

    def gaussian_only(self) -> "CumulantSpec":
        return CumulantSpec(self.gaussian, ())

    def items(self):
        return list(self.gaussian) + list(self.perturbation)


# ---------------------------------------------------------------------------
# flow state
# ---------------------------------------------------------------------------


@dataclass
class FlowState:
    order_t: int
    basis: str
    table: dict[CumulantGraph, list[RingElement]]
    vacuum: list[RingElement]
    max_edges: int = DEFAULT_MAX_EDGES
    truncation_events: list[tuple[int, int]] = field(default_factory=list)

    @property
    def truncated(self) -> bool:
        return any(order <= self.order_t for order, _ in self.truncation_events)

    def coefficient(self, graph: CumulantGraph, k: int) -> RingElement:
        series = self.table.get(canonical_graph(graph))
        if series is None or k > self.order_t:
            return RingElement.zero()
        return series[k]

    def _normalized_table(self):
        out = {}
        for g, series in self.table.items():
            if any(series):
                out[g] = tuple(series)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, FlowState):
            return NotImplemented
        return (self.order_t == other.order_t and self.basis == other.basis
                and self._normalized_table() == other._normalized_table()
                and tuple(self.vacuum) == tuple(other.vacuum))

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "order": self.order_t,
            "basis": self.basis,
            "max_edges": self.max_edges,
            "truncated": self.truncated,
            "truncation_events": [list(ev) for ev in self.truncation_events],
            "graphs": {g.to_text(): [c.to_triples() for c in series]
                       for g, series in sorted(self.table.items(), key=lambda kv: kv[0].to_text())
                       if any(series)},
            "vacuum": [c.to_triples() for c in self.vacuum],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FlowState":
        table = {CumulantGraph.from_text(label): [RingElement.from_triples(t) for t in series]
                 for label, series in doc["graphs"].items()}
        return cls(doc["order"], doc["basis"], table,
                   [RingElement.from_triples(t) for t in doc["vacuum"]],
                   doc.get("max_edges", DEFAULT_MAX_EDGES),
                   [tuple(ev) for ev in doc.get("truncation_events", [])])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def _zero_series(k: int) -> list[RingElement]:
    return [RingElement.zero() for _ in range(k + 1)]


# ---------------------------------------------------------------------------
# basis conversion (distinct-index sums <-> free sums)
# ---------------------------------------------------------------------------


def _vertex_quotient(g: CumulantGraph, blocks) -> CumulantGraph:
    block_of = {}
    for b_idx, block in enumerate(blocks):
        for v in block:
            block_of[v] = b_idx
    edges = tuple((block_of[s], block_of[t]) for s, t in g.edges)
    return _canon(len(blocks), tuple(sorted(edges)))


def _block_moebius(blocks) -> int:
    weight = 1
    for block in blocks:
        size = len(block)
        weight *= (-1) ** (size - 1) * factorial(size - 1)
    return weight


def _convert_basis(state: FlowState, to_basis: str) -> FlowState:
    if state.basis == to_basis:
        return state
    signed = to_basis == FREE_SUM  # distinct -> free carries Moebius signs
    table: dict[CumulantGraph, list[RingElement]] = {}
    for g, series in state.table.items():
        for part in set_partitions(g.num_vertices):
            gq = _vertex_quotient(g, part.blocks)
            weight = _block_moebius(part.blocks) if signed else 1
            dst = table.setdefault(gq, _zero_series(state.order_t))
            for k, coeff in enumerate(series):
                if coeff:
                    dst[k] = dst[k] + coeff.scale(weight)
    return FlowState(state.order_t, to_basis, table, list(state.vacuum),
                     state.max_edges, list(state.truncation_events))


def to_free_basis(state: FlowState) -> FlowState:
    return _convert_basis(state, FREE_SUM)


def to_distinct_basis(state: FlowState) -> FlowState:
    return _convert_basis(state, DISTINCT_INDEX)


# ---------------------------------------------------------------------------
# initial potential
# ---------------------------------------------------------------------------


def initial_potential(spec: CumulantSpec, max_edges: int = DEFAULT_MAX_EDGES) -> FlowState:
    """Flow state at t = 0: bare cumulants with their 1/(|Aut(G)| N^(e/2))
    symmetry weights attached, converted to the free-sum basis."""
    table: dict[CumulantGraph, list[RingElement]] = {}
    for graph, value in spec.items():
        g = canonical_graph(graph)
        if g.num_edges > max_edges:
            raise CapacityError(f"initial graph exceeds max_edges={max_edges}")
        weighted = value.scale(Fraction(1, aut_order(g))).shift_N(-g.num_edges)
        series = table.setdefault(g, _zero_series(0))
        series[0] = series[0] + weighted
    distinct = FlowState(0, DISTINCT_INDEX, table, _zero_series(0), max_edges)
    return to_free_basis(distinct)


# ---------------------------------------------------------------------------
# the rewrite underlying both flow terms
# ---------------------------------------------------------------------------


def _contract(nv: int, edges: list[tuple[int, int]], e1: int, e2: int):
    """Contract the out-half of edge e1 with the in-half of edge e2.

    Returns (graph or None, n_factor, num_free_vertices); None means all
    edges were consumed (vacuum term).
    """
    u = edges[e1][0]
    w = edges[e2][1]
    if e1 == e2:
        rest = [e for i, e in enumerate(edges) if i != e1]
        n_factor = True
    else:
        new_edge = (edges[e2][0], edges[e1][1])
        rest = [e for i, e in enumerate(edges) if i not in (e1, e2)] + [new_edge]
        n_factor = False
    merge = {w: u} if w != u else {}
    mapped = [(merge.get(s, s), merge.get(t, t)) for s, t in rest]
    if not mapped:
        return None, n_factor, 1
    used = sorted({v for e in mapped for v in e})
    # after mapping, the merged class is labelled u; it is the only vertex
    # that can lose all its half-edges in a single rewrite
    free = 0 if u in used else 1
    relabel = {v: i for i, v in enumerate(used)}
    final = tuple(sorted((relabel[s], relabel[t]) for s, t in mapped))
    return _canon(len(used), final), n_factor, free


def _accumulate(bucket: dict, vacuum: list, k: int, graph, coeff: RingElement,
                n_factor: bool, free_vertices: int, max_edges: int, trunc: list):
    if n_factor:
        coeff = coeff * RingElement.n()
    if free_vertices:
        coeff = coeff.shift_N(2 * free_vertices)
    if graph is None:
        vacuum[k] = vacuum[k] + coeff
        return
    if graph.num_edges > max_edges:
        trunc.append((k + 1, graph.num_edges))
        return
    series = bucket.setdefault(graph, {})
    series[k] = series.get(k, RingElement.zero()) + coeff


def _derivative_order(state_table: dict, k: int, max_edges: int, trunc: list):
    """t^k coefficient of loop(V) + tree(V, V) given V's coefficients."""
    bucket: dict[CumulantGraph, dict[int, RingElement]] = {}
    vacuum = [RingElement.zero()] * (k + 1)

    def coeff_at(g: CumulantGraph, order: int) -> RingElement:
        series = state_table.get(g)
        if series is None or order >= len(series):
            return RingElement.zero()
        return series[order]

    # loop term
    for g, series in state_table.items():
        if k >= len(series) or not series[k]:
            continue
        w = series[k]
        edges = list(g.edges)
        for e1 in range(len(edges)):
            for e2 in range(len(edges)):
                new_g, n_fac, free = _contract(g.num_vertices, edges, e1, e2)
                _accumulate(bucket, vacuum, k, new_g, w, n_fac, free, max_edges, trunc)

    # tree term: ordered pairs of graphs with t-orders summing to k
    graphs = list(state_table.keys())
    for j in range(k + 1):
        for ga in graphs:
            wa = coeff_at(ga, j)
            if not wa:
                continue
            for gb in graphs:
                wb = coeff_at(gb, k - j)
                if not wb:
                    continue
                nva = ga.num_vertices
                union_edges = list(ga.edges) + [(s + nva, t + nva) for s, t in gb.edges]
                if len(union_edges) - 1 > max_edges:
                    trunc.append((k + 1, len(union_edges) - 1))
                    continue
                coeff = wa * wb
                ea = len(ga.edges)
                for e1 in range(ea):
                    for e2 in range(ea, len(union_edges)):
                        new_g, n_fac, free = _contract(nva + gb.num_vertices,
                                                       union_edges, e1, e2)
                        _accumulate(bucket, vacuum, k, new_g, coeff, n_fac, free,
                                    max_edges, trunc)

    out = {g: orders.get(k, RingElement.zero()) for g, orders in bucket.items()}
    return out, vacuum[k]


def rg_derivative(state: FlowState) -> FlowState:
    """dV/dt of a free-sum state, order by order up to state.order_t."""
    if state.basis != FREE_SUM:
        raise ValueError("rg_derivative requires the free-sum basis")
    trunc: list[tuple[int, int]] = []
    table: dict[CumulantGraph, list[RingElement]] = {}
    vacuum = _zero_series(state.order_t)
    for k in range(state.order_t + 1):
        contrib, vac = _derivative_order(state.table, k, state.max_edges, trunc)
        vacuum[k] = vac
        for g, coeff in contrib.items():
            if coeff:
                table.setdefault(g, _zero_series(state.order_t))[k] = coeff
    return FlowState(state.order_t, FREE_SUM, table, vacuum, state.max_edges, trunc)


def integrate_flow(state0: FlowState, order: int) -> FlowState:
    """Polynomial Picard integration of the flow to t^order; exact."""
    if order > MAX_FLOW_ORDER:
        raise CapacityError(f"flow order limited to {MAX_FLOW_ORDER}")
    if state0.basis != FREE_SUM:
        raise ValueError("integrate_flow requires the free-sum basis")
    if order < state0.order_t:
        raise ValueError("cannot integrate below the state's current order")
    table = {g: series + [RingElement.zero()] * (order - state0.order_t)
             for g, series in state0.table.items()}
    vacuum = list(state0.vacuum) + [RingElement.zero()] * (order - state0.order_t)
    trunc = list(state0.truncation_events)
    for k in range(order):
        contrib, vac = _derivative_order(table, k, state0.max_edges, trunc)
        inv = Fraction(1, k + 1)
        for g, coeff in contrib.items():
            if coeff:
                series = table.setdefault(g, _zero_series(order))
                series[k + 1] = series[k + 1] + coeff.scale(inv)
        vacuum[k + 1] = vacuum[k + 1] + vac.scale(inv)
    return FlowState(order, FREE_SUM, table, vacuum, state0.max_edges, trunc)


# ---------------------------------------------------------------------------
# resolvent extraction
# ---------------------------------------------------------------------------


def extract_resolvent(state: FlowState, order: int) -> list[Fraction]:
    """Coefficients of 1/z, 1/z^2, ..., 1/z^order of the resolvent.

    The coefficient of 1/z^(k+2) is the large-N limit of the n^0 grade of
    the tadpole series at t^k; a surviving positive N grade is a rewrite
    bug and raises FlowInvariantError.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if state.order_t < order - 2:
        raise ValueError("state not integrated far enough for this order")
    free = to_free_basis(state)
    coeffs = [Fraction(1)]
    for k in range(order - 1):
        w = free.coefficient(TADPOLE, k).n_grade(0)
        try:
            coeffs.append(w.large_N_limit())
        except ValueError as exc:
            raise FlowInvariantError(f"tadpole t^{k}: {exc}") from exc
    return coeffs


# ---------------------------------------------------------------------------
# independent Wick-integration oracle
# ---------------------------------------------------------------------------


def wick_oracle(spec: CumulantSpec, order: int,
                max_edges: int = DEFAULT_MAX_EDGES) -> FlowState:
    """Perturbative evaluation of the partially integrated potential.

    Expands exp(V0(X+Y)) around the Gaussian Y measure with propagator
    t * delta, keeps connected terms, and reassembles graphs from the
    uncontracted halves.  Independent of the flow rewrite; used to test it.
    """
    if order > MAX_WICK_ORDER:
        raise CapacityError(f"wick oracle limited to order {MAX_WICK_ORDER}")
    base = initial_potential(spec, max_edges)
    classes = [(g, series[0]) for g, series in base.table.items() if series[0]]
    table: dict[CumulantGraph, list[RingElement]] = {
        g: series + [RingElement.zero()] * order for g, series in base.table.items()}
    vacuum = _zero_series(order)
    trunc: list[tuple[int, int]] = []

    for k in range(1, order + 1):
        for m in range(1, k + 2):
            pref_base = Fraction(1, factorial(m))
            for combo in itertools.product(range(len(classes)), repeat=m):
                pref = RingElement.scalar(pref_base)
                edges: list[tuple[int, int]] = []
                insertion_of: list[int] = []
                offset = 0
                for slot, ci in enumerate(combo):
                    g, w = classes[ci]
                    pref = pref * w
                    edges.extend((s + offset, t + offset) for s, t in g.edges)
                    insertion_of.extend([slot] * g.num_edges)
                    offset += g.num_vertices
                total_edges = len(edges)
                if total_edges < k or (m > 1 and k < m - 1):
                    continue
                for outs in itertools.combinations(range(total_edges), k):
                    for ins in itertools.permutations(range(total_edges), k):
                        contrib = _wick_pattern(edges, insertion_of, m, offset,
                                                outs, ins)
                        if contrib is None:
                            continue
                        graph, n_loops, free_vertices = contrib
                        coeff = pref
                        for _ in range(n_loops):
                            coeff = coeff * RingElement.n()
                        if free_vertices:
                            coeff = coeff.shift_N(2 * free_vertices)
                        if graph is None:
                            vacuum[k] = vacuum[k] + coeff
                        elif graph.num_edges > max_edges:
                            trunc.append((k, graph.num_edges))
                        else:
                            series = table.setdefault(graph, _zero_series(order))
                            series[k] = series[k] + coeff
    return FlowState(order, FREE_SUM, table, vacuum, max_edges, trunc)


def _wick_pattern(edges, insertion_of, m, num_vertices, outs, ins):
    """Evaluate one contraction pattern; None if it is disconnected."""
    nxt = dict(zip(outs, ins))
    if m > 1:
        parent = list(range(m))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e1, e2 in nxt.items():
            a, b = find(insertion_of[e1]), find(insertion_of[e2])
            if a != b:
                parent[a] = b
        if len({find(i) for i in range(m)}) != 1:
            return None

    vparent = list(range(num_vertices))

    def vfind(x):
        while vparent[x] != x:
            vparent[x] = vparent[vparent[x]]
            x = vparent[x]
        return x

    for e1, e2 in nxt.items():
        a, b = vfind(edges[e1][0]), vfind(edges[e2][1])
        if a != b:
            vparent[a] = b

    in_matched = set(ins)
    composite = []
    visited = set()
    for start in range(len(edges)):
        if start in in_matched or start in visited:
            continue
        cur = start
        visited.add(cur)
        while cur in nxt:
            cur = nxt[cur]
            visited.add(cur)
        composite.append((vfind(edges[cur][0]), vfind(edges[start][1])))
    n_loops = 0
    for e in range(len(edges)):
        if e in visited:
            continue
        n_loops += 1
        cur = e
        while cur not in visited:
            visited.add(cur)
            cur = nxt[cur]

    classes = {vfind(v) for v in range(num_vertices)}
    used = {v for edge in composite for v in edge}
    free_vertices = len(classes - used)
    if not composite:
        return None, n_loops, free_vertices
    relabel = {v: i for i, v in enumerate(sorted(used))}
    final = tuple(sorted((relabel[s], relabel[t]) for s, t in composite))
    return _canon(len(used), final), n_loops, free_vertices


# ---------------------------------------------------------------------------
# scaling-bound tracking along the flow
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundEntry:
    graph: str
    t_order: int
    part: str  # "gaussian" or "perturbation"
    eulerian: bool
    half_grade: Fraction | None  # grade of N^(v-c-e/2) C at n^0, in units of N^(1/2)
    ok: bool


@dataclass(frozen=True)
class FlowBoundsReport:
    entries: tuple[BoundEntry, ...]
    higher_n_terms: tuple[tuple[str, int, str], ...]

    @property
    def all_ok(self) -> bool:
        return all(e.ok for e in self.entries)



def check_bounds_flow(state: FlowState, spec: CumulantSpec) -> FlowBoundsReport:
    """Grade check of the flown cumulants against the scaling bounds.

    The Gaussian part is re-flown alone and subtracted to isolate the
    perturbation.  For each graph and t-order the n^0 grade of
    N^(v-c-e/2) C_G(t) must be non-positive (strictly negative for Eulerian
    perturbations); terms at higher replica power that overshoot are listed
    separately, as the grading argument predicts them.
    """
    from .graphs import connected_components, is_eulerian

    gauss_state = integrate_flow(initial_potential(spec.gaussian_only(), state.max_edges),
                                 state.order_t)
    full_d = to_distinct_basis(state)
    gauss_d = to_distinct_basis(gauss_state)
    entries: list[BoundEntry] = []
    higher: list[tuple[str, int, str]] = []
    graphs = sorted(set(full_d.table) | set(gauss_d.table), key=lambda g: g.to_text())
    for g in graphs:
        vc2 = 2 * (g.num_vertices - len(connected_components(g)))
        euler = is_eulerian(g)
        for k in range(state.order_t + 1):
            gauss_c = gauss_d.coefficient(g, k)
            pert_c = full_d.coefficient(g, k) - gauss_c
            for part, coeff in (("gaussian", gauss_c), ("perturbation", pert_c)):
                if not coeff:
                    continue
                strict = part == "perturbation" and euler
                n0 = coeff.n_grade(0)
                grade = None
                ok = True
                if n0:
                    grade = Fraction(max(b for (_, b), _ in n0.terms) + vc2, 2)
                    ok = grade < 0 if strict else grade <= 0
                entries.append(BoundEntry(g.to_text(), k, part, euler, grade, ok))
                for (a, b), _ in coeff.terms:
                    if a >= 1:
                        high = Fraction(b + vc2, 2)
                        if (high >= 0) if strict else (high > 0):
                            higher.append((g.to_text(), k, part))
                            break
    return FlowBoundsReport(tuple(entries), tuple(higher))
