from fractions import Fraction

import pytest

from rmtlab.graphs import CapacityError, CumulantGraph, canonical_graph
from rmtlab.replica_rg import (DOUBLE_SELF_LOOP, TADPOLE, TWO_CYCLE, CumulantSpec,
                               FlowInvariantError, FlowState, check_bounds_flow,
                               extract_resolvent, initial_potential, integrate_flow,
                               rg_derivative, to_distinct_basis, to_free_basis,
                               wick_oracle, FREE_SUM)
from rmtlab.ring import RingElement

SIGMA1 = CumulantSpec.gaussian_spec(Fraction(1))
DOUBLE_EDGE = CumulantGraph(2, ((0, 1), (0, 1)))
TWO_TWO_CYCLES = CumulantGraph(4, ((0, 1), (1, 0), (2, 3), (3, 2)))


def ring(**kw):
    """Shorthand: ring(c00=..., c1_m2=...) -> RingElement terms (a, b)."""
    terms = {}
    for key, val in kw.items():
        a, b = key[1:].split("_") if "_" in key else (key[1:], "0")
        b = b.replace("m", "-")
        terms[(int(a), int(b))] = Fraction(val)
    return RingElement(terms)


def state_add(x: FlowState, y: FlowState) -> FlowState:
    assert x.order_t == y.order_t and x.basis == y.basis
    table = {}
    for g in set(x.table) | set(y.table):
        table[g] = [x.coefficient(g, k) + y.coefficient(g, k)
                    for k in range(x.order_t + 1)]
    vac = [a + b for a, b in zip(x.vacuum, y.vacuum)]
    return FlowState(x.order_t, x.basis, table, vac, x.max_edges)


def state_scale(x: FlowState, c) -> FlowState:
    table = {g: [coeff.scale(c) for coeff in series] for g, series in x.table.items()}
    return FlowState(x.order_t, x.basis, table, [v.scale(c) for v in x.vacuum], x.max_edges)


# --- initial potential ----------------------------------------------------------

def test_initial_gaussian_free_basis_merges_diagonal():
    state = initial_potential(SIGMA1)
    # distinct-index 2-cycle and paired self-loops fuse into one free-sum term
    assert state.coefficient(TWO_CYCLE, 0) == ring(c0_m2=Fraction(1, 2))
    assert not state.coefficient(DOUBLE_SELF_LOOP, 0)
    assert state.basis == FREE_SUM


def test_initial_gaussian_distinct_basis_weights():
    state = to_distinct_basis(initial_potential(SIGMA1))
    # both graphs carry sigma^2 / (|Aut| N^(e/2)) = sigma^2 / (2N)
    assert state.coefficient(TWO_CYCLE, 0) == ring(c0_m2=Fraction(1, 2))
    assert state.coefficient(DOUBLE_SELF_LOOP, 0) == ring(c0_m2=Fraction(1, 2))


def test_initial_empty_spec():
    state = initial_potential(CumulantSpec())
    assert not state.table
    assert not state.vacuum[0]


def test_initial_perturbation_weight():
    eps = Fraction(3, 7)
    spec = CumulantSpec().with_perturbation(DOUBLE_EDGE, RingElement.scalar(eps))
    state = to_distinct_basis(initial_potential(spec))
    # |Aut| = 2 (parallel pair), e = 2
    assert state.coefficient(DOUBLE_EDGE, 0) == ring(c0_m2=eps / 2)


def test_initial_rejects_oversized_graph():
    big = CumulantGraph(2, tuple((0, 1) for _ in range(7)))
    with pytest.raises(CapacityError):
        initial_potential(CumulantSpec().with_perturbation(big, RingElement.one()))


def test_gaussian_spec_guard():
    with pytest.raises(ValueError):
        CumulantSpec(gaussian=((DOUBLE_EDGE, RingElement.one()),))


def test_basis_conversion_roundtrip():
    spec = SIGMA1.with_perturbation(TWO_TWO_CYCLES, RingElement.N_half(-1))
    state = integrate_flow(initial_potential(spec), 2)
    assert to_free_basis(to_distinct_basis(state)) == state


# --- derivative rewrites ----------------------------------------------------------

def test_loop_term_on_gaussian_quartic_monomial():
    state = initial_potential(SIGMA1)
    deriv = rg_derivative(state)
    # sum over the four half-edge pairs of the 2-cycle: 2(N + n) * sigma^2/(2N)
    assert deriv.coefficient(TADPOLE, 0) == ring(c0=1, c1_m2=1)


def test_tree_of_two_self_loop_terms_returns_self_loop():
    # d/dX of c Tr(XX+) leaves c X bar; the tree product re-forms one edge,
    # so two linear terms contract to c^2 Tr(XX+), not to a constant
    c = Fraction(5, 3)
    table = {TADPOLE: [RingElement.scalar(c)]}
    state = FlowState(0, FREE_SUM, table, [RingElement.zero()])
    deriv = rg_derivative(state)
    assert deriv.coefficient(TADPOLE, 0) == RingElement.scalar(c * c)
    # while the loop term on the same state empties the graph: n N c vacuum
    assert deriv.vacuum[0] == ring(c1_2=c)


def test_derivative_of_empty_state_is_empty():
    empty = FlowState(0, FREE_SUM, {}, [RingElement.zero()])
    deriv = rg_derivative(empty)
    assert not deriv.table
    assert not deriv.vacuum[0]


def test_integration_preserves_boundary():
    state0 = initial_potential(SIGMA1)
    state = integrate_flow(state0, 4)
    for g, series in state0.table.items():
        assert state.coefficient(g, 0) == series[0]
    for g, series in state.table.items():
        if g not in state0.table:
            assert not series[0]


def test_first_order_tadpole():
    state = integrate_flow(initial_potential(SIGMA1), 1)
    assert state.coefficient(TADPOLE, 1) == ring(c0=1, c1_m2=1)


def test_integrate_empty():
    empty = FlowState(0, FREE_SUM, {}, [RingElement.zero()])
    out = integrate_flow(empty, 5)
    assert not out.table


def test_vacuum_series_from_gaussian_flow():
    state = integrate_flow(initial_potential(SIGMA1), 2)
    # loop contraction of the t^1 tadpole: (n N + n^2) sigma^2 t^2 / 2
    assert state.vacuum[2] == ring(c1_2=Fraction(1, 2), c2=Fraction(1, 2))
    assert not state.vacuum[0] and not state.vacuum[1]


def test_flow_ode_holds_on_series():
    state = integrate_flow(initial_potential(SIGMA1), 4)
    deriv = rg_derivative(state)
    for g in set(state.table) | set(deriv.table):
        for k in range(state.order_t):
            assert deriv.coefficient(g, k) == state.coefficient(g, k + 1).scale(k + 1), \
                (g.to_text(), k)


def test_second_order_semigroup_by_polarization():
    """d^2V/dt^2 from the series equals the differentiated flow equation.

    With R(X) = loop(X) + tree(X, X), linear loop and bilinear tree give
    loop(D) + tree(V, D) + tree(D, V) = R(V+D) - R(V) + R(D) - R(2D)/2.
    """
    order = 3
    state = integrate_flow(initial_potential(SIGMA1), order)
    d1 = rg_derivative(state)
    rhs = state_add(
        state_add(rg_derivative(state_add(state, d1)), state_scale(rg_derivative(state), -1)),
        state_add(rg_derivative(d1), state_scale(rg_derivative(state_scale(d1, 2)), Fraction(-1, 2))))
    for g in set(state.table) | set(rhs.table):
        for k in range(order - 1):
            want = state.coefficient(g, k + 2).scale((k + 1) * (k + 2))
            assert rhs.coefficient(g, k) == want, (g.to_text(), k)


# --- flow vs wick oracle -----------------------------------------------------------

def test_wick_order_zero_is_initial_potential():
    spec = SIGMA1.with_perturbation(DOUBLE_EDGE, RingElement.one())
    assert wick_oracle(spec, 0) == initial_potential(spec)


def test_wick_matches_flow_first_order_tadpole():
    wick = wick_oracle(SIGMA1, 1)
    flow = integrate_flow(initial_potential(SIGMA1), 1)
    assert wick.coefficient(TADPOLE, 1) == flow.coefficient(TADPOLE, 1) == ring(c0=1, c1_m2=1)


def test_wick_equals_flow_order_two_with_sigma_variation():
    spec = CumulantSpec.gaussian_spec(Fraction(1, 4))
    assert integrate_flow(initial_potential(spec), 2) == wick_oracle(spec, 2)


def test_wick_equals_flow_perturbation_only():
    spec = CumulantSpec().with_perturbation(DOUBLE_EDGE, RingElement.scalar(Fraction(2, 3)))
    assert integrate_flow(initial_potential(spec), 2) == wick_oracle(spec, 2)


def test_wick_capacity():
    with pytest.raises(CapacityError):
        wick_oracle(SIGMA1, 4)


# --- resolvent extraction -----------------------------------------------------------

def test_resolvent_catalan_series():
    state = integrate_flow(initial_potential(SIGMA1), 7)
    assert extract_resolvent(state, 7) == [1, 0, 1, 0, 2, 0, 5]


def test_resolvent_sigma_scaling():
    spec = CumulantSpec.gaussian_spec(Fraction(4))  # sigma = 2
    state = integrate_flow(initial_potential(spec), 5)
    assert extract_resolvent(state, 5) == [1, 0, 4, 0, 32]


def test_resolvent_truncated_low_order():
    state = integrate_flow(initial_potential(SIGMA1), 3)
    assert extract_resolvent(state, 3) == [1, 0, 1]


def test_resolvent_of_empty_potential_is_free():
    state = integrate_flow(initial_potential(CumulantSpec()), 5)
    assert extract_resolvent(state, 5) == [1, 0, 0, 0, 0]


def test_resolvent_leading_coefficient_always_one():
    spec = SIGMA1.with_perturbation(TWO_TWO_CYCLES, RingElement.N_half(-1))
    state = integrate_flow(initial_potential(spec), 3)
    assert extract_resolvent(state, 3)[0] == 1


def test_resolvent_needs_enough_orders():
    state = integrate_flow(initial_potential(SIGMA1), 2)
    with pytest.raises(ValueError):
        extract_resolvent(state, 7)


def test_resolvent_flags_positive_grade():
    bad = FlowState(1, FREE_SUM, {TADPOLE: [RingElement.zero(), RingElement.N_half(1)]},
                    [RingElement.zero(), RingElement.zero()])
    with pytest.raises(FlowInvariantError):
        extract_resolvent(bad, 3)


def test_truncation_flag():
    assert not integrate_flow(initial_potential(SIGMA1), 3).truncated
    assert integrate_flow(initial_potential(SIGMA1), 7).truncated


def test_flow_order_capacity():
    with pytest.raises(CapacityError):
        integrate_flow(initial_potential(SIGMA1), 9)


# --- scaling bounds ------------------------------------------------------------------

def test_pure_gaussian_bounds_hold_to_order_five():
    state = integrate_flow(initial_potential(SIGMA1), 5)
    report = check_bounds_flow(state, SIGMA1)
    assert report.entries
    assert all(e.part == "gaussian" for e in report.entries)
    assert report.all_ok
    # the tadpole n^0 series is exactly the Catalan data used by the resolvent
    assert extract_resolvent(state, 5) == [1, 0, 1, 0, 2]


def test_eulerian_perturbation_grade_stays_negative():
    pert_value = RingElement.N_half(-1)  # strictly negative initial grade
    spec = SIGMA1.with_perturbation(TWO_TWO_CYCLES, pert_value)
    state = integrate_flow(initial_potential(spec), 3)
    report = check_bounds_flow(state, spec)
    pert_entries = [e for e in report.entries if e.part == "perturbation"]
    assert pert_entries
    for entry in pert_entries:
        assert entry.ok
        if entry.eulerian and entry.half_grade is not None:
            assert entry.half_grade < 0
    assert report.all_ok


def test_empty_perturbation_report_has_no_perturbation_rows():
    state = integrate_flow(initial_potential(SIGMA1), 2)
    report = check_bounds_flow(state, SIGMA1)
    assert not [e for e in report.entries if e.part == "perturbation"]


# --- serialization --------------------------------------------------------------------

def test_flow_state_json_roundtrip():
    spec = SIGMA1.with_perturbation(DOUBLE_EDGE, RingElement.one())
    state = integrate_flow(initial_potential(spec), 2)
    again = FlowState.from_json(state.to_json())
    assert again == state
    assert again.dumps() == state.dumps()
