"""Dense Hermitian matrices, deterministic seeded randomness, eigensolve.

Randomness comes from numpy's Philox counter-based generator keyed by a
(seed, stream) pair, so identical keys reproduce identical sequences on any
platform.  Sub-streams are derived with a splitmix64 finalizer (constants
0x9e3779b97f4a7c15, 0xbf58476d1ce4e5b9, 0x94d049bb133111eb), which keeps
independently derived streams decorrelated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MAX_MATRIX_SIZE = 2048

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class RngHandle:
    """Deterministic random stream identified by (seed, stream).

    The handle owns its draw position; derive a fresh handle per concurrent
    task with :meth:`substream` instead of sharing one.
    """

    __slots__ = ("seed", "stream", "_gen")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed & _MASK64
        self.stream = stream & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))

    def substream(self, *ids: int) -> "RngHandle":
        """Child handle with a stream id mixed from this stream and ``ids``."""
        s = self.stream
        for i in ids:
            s = _splitmix64(s ^ ((i + 1) & _MASK64))
        return RngHandle(self.seed, s)

    def normals(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)

    def uniform(self, size=None):
        return self._gen.random(size)

    def choice_index(self, weights: Sequence[float]) -> int:
        u = self._gen.random()
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        return len(weights) - 1

    def __repr__(self) -> str:
        return f"RngHandle(seed={self.seed}, stream={self.stream})"


def gaussian_complex(rng: RngHandle, stddev: float) -> complex:
    """One complex Gaussian draw with E|z|^2 = stddev^2 (halved per part)."""
    arr = standard_complex_normals(rng, 1, stddev)
    return complex(arr[0])


def standard_complex_normals(rng: RngHandle, size, stddev: float = 1.0) -> np.ndarray:
    """Vectorized complex Gaussians; real/imag independent, variance stddev^2/2."""
    if stddev <= 0:
        raise ValueError("stddev must be positive")
    re = rng.normals(size)
    im = rng.normals(size)
    return (re + 1j * im) * (stddev / np.sqrt(2.0))


@dataclass(frozen=True)
class HermitianMatrix:
    """Dense N x N complex Hermitian matrix with sampling provenance."""

    n: int
    data: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.n > MAX_MATRIX_SIZE:
            raise ValueError(f"matrix size must be in [1, {MAX_MATRIX_SIZE}]")
        if self.data.shape != (self.n, self.n):
            raise ValueError("data shape does not match n")

    @classmethod
    def from_upper(cls, upper: np.ndarray, meta: dict | None = None) -> "HermitianMatrix":
        """Build from the upper triangle; enforces conjugate symmetry exactly."""
        n = upper.shape[0]
        arr = np.triu(upper, k=1)
        full = arr + arr.conj().T
        full[np.diag_indices(n)] = np.real(np.diagonal(upper))
        full.flags.writeable = False
        return cls(n, full, meta or {})

    @classmethod
    def from_array(cls, arr: np.ndarray, meta: dict | None = None) -> "HermitianMatrix":
        arr = np.asarray(arr, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("expected a square matrix")
        if not np.array_equal(arr, arr.conj().T):
            raise ValueError("matrix is not exactly Hermitian")
        return cls.from_upper(arr, meta)

    def maxabs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.n else 0.0

    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def trace_square(self) -> float:
        return float(np.real(np.sum(self.data * self.data.T)))


def eigenvalues_hermitian(h: HermitianMatrix) -> np.ndarray:
    """Ascending spectrum of ``h``.

    Backed by LAPACK through numpy; the contract (sorted output, residual
    norm below 1e-10 * N * maxabs) is what the tests pin down.
    """
    if not np.all(np.isfinite(h.data)):
        raise ValueError("matrix entries must be finite")
    return np.linalg.eigvalsh(h.data)
