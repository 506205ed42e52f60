"""Seeded Gaussian sampling and Monte-Carlo cone measures.

The stream is counter-based: vector k of a stream is a pure function of
(seed, k), so estimates are bit-identical across runs and across worker
counts. Normal variates come from inverse-CDF transforms of 64-bit uniforms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.special import ndtri

from .cones import cone_contains
from .errors import InvalidInputError
from .geometry import GEOM_TOL, Cone

#: Vectors per work block; fixed so the stream layout never depends on N.
BLOCK = 1 << 16

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class MCEstimate:
    """A Monte-Carlo probability estimate with a Wilson 95% interval."""

    p_hat: float
    n_samples: int
    ci_low: float
    ci_high: float
    seed: int

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)

    @property
    def std_error(self) -> float:
        return math.sqrt(max(self.p_hat * (1.0 - self.p_hat), 1.0 / self.n_samples)
                         / self.n_samples)


def wilson_interval(successes: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval; remains valid near p = 0 where failure
    probabilities live."""
    if n <= 0:
        raise InvalidInputError("Wilson interval needs a positive sample count")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def normal_vectors(seed: int, dim: int, start: int, count: int) -> np.ndarray:
    """Rows [start, start+count) of the stream for (seed, dim).

    Vector k occupies its own aligned run of counter blocks, so any batch
    decomposition reproduces the same rows.
    """
    if dim < 1:
        raise InvalidInputError("stream dimension must be >= 1")
    if count <= 0:
        return np.zeros((0, dim))
    words_per_vec = 4 * ((dim + 3) // 4)  # Philox emits 4 words per counter
    counter0 = start * (words_per_vec // 4)
    bg = np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, 0],
                          counter=[counter0, 0, 0, 0])
    raw = bg.random_raw(count * words_per_vec).reshape(count, words_per_vec)[:, :dim]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(u)


def gaussian_stream(seed: int, dim: int) -> Iterator[np.ndarray]:
    """Infinite iterator over the stream vectors, in index order."""
    k = 0
    while True:
        block = normal_vectors(seed, dim, k, BLOCK)
        for row in block:
            yield row
        k += BLOCK


def _count_stream(seed: int, dim: int, n_samples: int,
                  counter: Callable[[np.ndarray], int], threads: int) -> int:
    starts = range(0, n_samples, BLOCK)

    def work(start: int) -> int:
        cnt = min(BLOCK, n_samples - start)
        return counter(normal_vectors(seed, dim, start, cnt))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return sum(pool.map(work, starts))
    return sum(work(s) for s in starts)


def _estimate(seed: int, dim: int, n_samples: int,
              counter: Callable[[np.ndarray], int], threads: int) -> MCEstimate:
    hits = _count_stream(seed, dim, n_samples, counter, threads)
    lo, hi = wilson_interval(hits, n_samples)
    return MCEstimate(hits / n_samples, n_samples, lo, hi, seed)


def mc_cone_measure(C: Cone, w: np.ndarray, n_samples: int, seed: int,
                    threads: int = 1, tol: float = GEOM_TOL) -> MCEstimate:
    """Gaussian measure of the shifted cone C + w (w = 0 gives the cone itself)."""
    if n_samples < 1000:
        raise InvalidInputError("use at least 1000 samples for cone measures")
    w = np.asarray(w, dtype=float)
    St = C.normals.T
    thresh = C.normals @ w - tol

    def counter(X: np.ndarray) -> int:
        return int(np.all(X @ St >= thresh, axis=1).sum())

    return _estimate(seed, C.ambient_dim, n_samples, counter, threads)


def mc_facet_relative_measure(C: Cone, facet_index: int, n_samples: int, seed: int,
                              threads: int = 1, tol: float = GEOM_TOL) -> MCEstimate:
    """Relative Gaussian measure of facet i: project the sample onto the
    hyperplane orthogonal to s_i, then test cone membership."""
    if not (0 <= facet_index < C.n_facets):
        raise InvalidInputError(f"facet index {facet_index} out of range")
    s = C.normals[facet_index]
    St = C.normals.T

    def counter(X: np.ndarray) -> int:
        Xp = X - np.outer(X @ s, s)
        return int(np.all(Xp @ St >= -tol, axis=1).sum())

    return _estimate(seed, C.ambient_dim, n_samples, counter, threads)


def mc_margin_measure(C: Cone, w: np.ndarray, n_samples: int, seed: int,
                      threads: int = 1, tol: float = GEOM_TOL) -> MCEstimate:
    """Gaussian measure of the margin C \\ [C + w]: samples inside the cone
    that exit it under the backward shift."""
    if n_samples < 1000:
        raise InvalidInputError("use at least 1000 samples for margin measures")
    w = np.asarray(w, dtype=float)
    St = C.normals.T
    shift = C.normals @ w

    def counter(X: np.ndarray) -> int:
        M = X @ St
        inside = np.all(M >= -tol, axis=1)
        still = np.all(M >= shift - tol, axis=1)
        return int((inside & ~still).sum())

    return _estimate(seed, C.ambient_dim, n_samples, counter, threads)


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed derived from integer parts (keyed blake2b)."""
    import hashlib

    h = hashlib.blake2b(b"exactreg-stream", digest_size=8)
    for p in parts:
        h.update(int(p).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


def shard_seed(master: int, shard_index: int) -> int:
    """Derived seed for stratified worker shards."""
    return derive_seed(master, 0x5A5A, shard_index)
