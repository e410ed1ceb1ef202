"""Empirical joint cumulants of matrix entries across an N grid.

For a cumulant graph the estimator reads one entry per edge at disjoint
index tuples, averages the subset products per sample, inverts sample
moments into a cumulant (k-statistics via the partition Moebius formula)
and attaches a delete-one jackknife standard error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ensembles import EnsembleSpec, sample_stream
from .graphs import BoundVerdict, CumulantGraph, classify_bound
from .linalg import RngHandle
from .partitions import cumulants_from_moments


def subset_keys(edges) -> dict[tuple[int, ...], tuple]:
    """Non-empty subsets of edge positions, keyed by their pair multiset."""
    out = {}
    for r in range(1, len(edges) + 1):
        for subset in itertools.combinations(range(len(edges)), r):
            out[subset] = tuple(sorted(edges[i] for i in subset))
    return out


@dataclass(frozen=True)
class CumulantEstimate:
    n: int
    estimate: float
    stderr: float


@dataclass(frozen=True)
class ScanResult:
    graph: CumulantGraph
    estimates: tuple[CumulantEstimate, ...]
    verdict: BoundVerdict


def estimate_entry_cumulant(spec: EnsembleSpec, graph: CumulantGraph, n: int,
                            samples: int, rng: RngHandle) -> CumulantEstimate:
    """Monte Carlo estimate of the joint cumulant attached to ``graph``."""
    v = graph.num_vertices
    tuples = n // v
    if tuples < 1:
        raise ValueError(f"matrix size {n} too small for a {v}-vertex graph")
    if samples < 3:
        raise ValueError("need at least three samples for a jackknife error")
    keys = subset_keys(graph.edges)
    per_sample = {key: np.empty(samples, dtype=complex) for key in keys.values()}
    rows = np.arange(tuples) * v
    for s_idx, matrix in enumerate(sample_stream(spec, n, samples, rng)):
        entries = np.stack([matrix.data[rows + s, rows + t] for s, t in graph.edges], axis=1)
        for subset, key in keys.items():
            prod = np.prod(entries[:, list(subset)], axis=1)
            per_sample[key][s_idx] = prod.mean()

    sums = {key: arr.sum() for key, arr in per_sample.items()}

    def kappa(moment_of):
        return cumulants_from_moments(moment_of, graph.edges)

    full = kappa(lambda block: sums[tuple(sorted(block))] / samples)
    jack = np.empty(samples)
    for s_idx in range(samples):
        jack[s_idx] = kappa(
            lambda block: (sums[tuple(sorted(block))] - per_sample[tuple(sorted(block))][s_idx])
            / (samples - 1)).real
    stderr = math.sqrt((samples - 1) / samples * np.sum((jack - jack.mean()) ** 2))
    return CumulantEstimate(n, float(full.real), stderr)


def scan_graph(spec: EnsembleSpec, graph: CumulantGraph, n_grid: Sequence[int],
               samples_per_n: int, rng: RngHandle) -> ScanResult:
    """Estimate across the N grid and classify against the scaling bounds."""
    estimates = []
    for idx, n in enumerate(n_grid):
        estimates.append(estimate_entry_cumulant(spec, graph, n, samples_per_n,
                                                 rng.substream(idx)))
    cls = classify_bound(graph, [(e.n, e.estimate) for e in estimates],
                         [e.stderr for e in estimates])
    return ScanResult(graph, tuple(estimates), cls.verdict)
