import pytest

from rmtlab.cumulant_scan import estimate_entry_cumulant, scan_graph
from rmtlab.ensembles import EnsembleSpec
from rmtlab.graphs import BoundVerdict, CumulantGraph
from rmtlab.linalg import RngHandle

TWO_TWO_CYCLES = CumulantGraph(4, ((0, 1), (1, 0), (2, 3), (3, 2)))
TWO_CYCLE = CumulantGraph(2, ((0, 1), (1, 0)))


def test_two_cycle_estimate_recovers_sigma_sq():
    est = estimate_entry_cumulant(EnsembleSpec("gue", sigma=2.0), TWO_CYCLE,
                                  32, 600, RngHandle(1, 0))
    assert abs(est.estimate - 4.0) <= 5 * est.stderr + 0.1


def test_gue_fourth_cumulant_consistent_with_zero():
    est = estimate_entry_cumulant(EnsembleSpec("gue"), TWO_TWO_CYCLES,
                                  32, 2000, RngHandle(2, 0))
    assert abs(est.estimate) <= 5 * est.stderr


def test_common_factor_estimate_near_quarter():
    est = estimate_entry_cumulant(EnsembleSpec("common_factor"), TWO_TWO_CYCLES,
                                  32, 4000, RngHandle(3, 0))
    assert abs(est.estimate - 0.25) <= 5 * est.stderr


def test_scan_verdicts_three_ensembles():
    grid = (8, 32, 128)
    violating = scan_graph(EnsembleSpec("common_factor"), TWO_TWO_CYCLES, grid,
                           6000, RngHandle(4, 0))
    assert violating.verdict is BoundVerdict.VIOLATING
    vanishing = scan_graph(EnsembleSpec("damped_common_factor", damping_alpha=1.0),
                           TWO_TWO_CYCLES, grid, 6000, RngHandle(5, 0))
    assert vanishing.verdict is BoundVerdict.CONSISTENT_VANISHING
    noise = scan_graph(EnsembleSpec("gue"), TWO_TWO_CYCLES, grid, 3000, RngHandle(6, 0))
    assert noise.verdict is BoundVerdict.CONSISTENT_VANISHING


def test_estimator_guards():
    with pytest.raises(ValueError):
        estimate_entry_cumulant(EnsembleSpec("gue"), TWO_TWO_CYCLES, 3, 100, RngHandle(7, 0))
    with pytest.raises(ValueError):
        estimate_entry_cumulant(EnsembleSpec("gue"), TWO_CYCLE, 8, 2, RngHandle(7, 0))
