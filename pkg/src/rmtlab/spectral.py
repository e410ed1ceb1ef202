"""Empirical spectral distribution statistics for M / sqrt(N)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .ensembles import EnsembleSpec, sample_stream
from .linalg import RngHandle, eigenvalues_hermitian
from .semicircle import SemicircleParams, cdf as semicircle_cdf, moment as semicircle_moment

MAX_MOMENT_ORDER = 12


@dataclass(frozen=True)
class SpectrumSample:
    n: int
    eigs_scaled: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.eigs_scaled) != self.n:
            raise ValueError("eigenvalue count does not match n")


def scale_spectrum(eigs: Sequence[float], n: int, meta: dict | None = None) -> SpectrumSample:
    """Eigenvalues of M mapped to the spectrum of M / sqrt(n), ascending."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.shape != (n,):
        raise ValueError(f"expected {n} eigenvalues, got shape {eigs.shape}")
    return SpectrumSample(n, np.sort(eigs / math.sqrt(n)), meta or {})


def esd_moment(s: SpectrumSample, k: int) -> float:
    """Single-sample estimator (1/N) sum lambda^k of the scaled spectrum."""
    if not (0 <= k <= MAX_MOMENT_ORDER):
        raise ValueError(f"moment order must be in [0, {MAX_MOMENT_ORDER}]")
    return float(np.mean(pooled_eigs(s) ** k))


def pooled_eigs(s) -> np.ndarray:
    if isinstance(s, SpectrumSample):
        return s.eigs_scaled
    return np.sort(np.concatenate([x.eigs_scaled for x in s]))


def histogram(s, bins: int, value_range: tuple[float, float]) -> list[tuple[float, float]]:
    """(bin_center, density) pairs, normalized against the full sample count."""
    a, b = value_range
    if bins < 1 or not a < b:
        raise ValueError("need bins >= 1 and a < b")
    values = pooled_eigs(s)
    if values.size == 0:
        raise ValueError("empty spectrum")
    counts, edges = np.histogram(values, bins=bins, range=(a, b))
    width = (b - a) / bins
    centers = (edges[:-1] + edges[1:]) / 2.0
    density = counts / (values.size * width)
    return list(zip(centers.tolist(), density.tolist()))


def ks_distance_to_semicircle(s, sigma: float) -> float:
    """sup_x |empirical CDF - semicircle CDF| over all jump points."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    values = pooled_eigs(s)
    m = values.size
    params = SemicircleParams(sigma)
    ref = np.array([semicircle_cdf(x, params) for x in values])
    upper = np.arange(1, m + 1) / m
    lower = np.arange(0, m) / m
    return float(max(np.max(np.abs(upper - ref)), np.max(np.abs(lower - ref))))


@dataclass(frozen=True)
class MomentRow:
    n: int
    k: int
    mean: float
    stderr: float
    gap: float


def convergence_scan(spec: EnsembleSpec, n_grid: Sequence[int], k_list: Sequence[int],
                     samples_per_n: int, rng: RngHandle) -> list[MomentRow]:
    """Per (N, k): sample-averaged scaled moment, standard error, and the
    absolute gap to the semicircle moment at the ensemble's sigma."""
    if list(n_grid) != sorted(n_grid):
        raise ValueError("N grid must be ascending")
    if samples_per_n < 1:
        raise ValueError("need at least one sample per N")
    params = SemicircleParams(spec.sigma)
    rows: list[MomentRow] = []
    for n_index, n in enumerate(n_grid):
        per_k: dict[int, list[float]] = {k: [] for k in k_list}
        stream = sample_stream(spec, n, samples_per_n, rng.substream(n_index))
        for matrix in stream:
            samp = scale_spectrum(eigenvalues_hermitian(matrix), n)
            for k in k_list:
                per_k[k].append(esd_moment(samp, k))
        for k in k_list:
            vals = np.array(per_k[k])
            mean = float(vals.mean())
            stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
            rows.append(MomentRow(n, k, mean, stderr, abs(mean - semicircle_moment(k, params))))
    return rows


def pooled_samples(spec: EnsembleSpec, n: int, count: int, rng: RngHandle) -> list[SpectrumSample]:
    out = []
    for idx, matrix in enumerate(sample_stream(spec, n, count, rng)):
        out.append(scale_spectrum(eigenvalues_hermitian(matrix), n, {"sample": idx}))
    return out
