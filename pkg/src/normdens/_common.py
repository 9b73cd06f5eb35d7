"""Shared plumbing: the input-error type, seeded stream derivation and block-parallel MC."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# Trials are cut into fixed-size blocks; block b of a run seeded with s draws
# from SeedSequence(s, spawn_key=(b,)).  A trial that needs a fresh draw uses
# SeedSequence(s, spawn_key=(REDRAW_KEY, trial, attempt)).  Neither depends on
# how blocks are scheduled, so results do not depend on the worker count.
BLOCK_SIZE = 4096
REDRAW_KEY = 0x7EDA

_max_workers = 1


class InputError(ValueError):
    """Raised for malformed arguments (dimension mismatch, bad counts, ...)."""


def set_max_workers(n: int) -> None:
    global _max_workers
    if n < 1:
        raise InputError(f"thread count must be >= 1, got {n}")
    _max_workers = int(n)


def get_max_workers() -> int:
    return _max_workers


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


def redraw_rng(seed: int, trial: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=(REDRAW_KEY, int(trial), int(attempt)))
    )


def blocks(trials: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int, int]]:
    """Return ``(block index, first trial, size)`` triples covering ``trials``."""
    out = []
    start = 0
    b = 0
    while start < trials:
        size = min(block_size, trials - start)
        out.append((b, start, size))
        start += size
        b += 1
    return out


def map_blocks(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    """Ordered map over ``items``; uses a thread pool when more than one worker is allowed."""
    workers = _max_workers if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error."""

    value: float
    std_error: float
    samples: int
    redraws: int = 0

    def __iter__(self):
        yield self.value
        yield self.std_error


def estimate_from_sums(total: float, total_sq: float, n: int, redraws: int = 0) -> Estimate:
    if n <= 0:
        raise InputError("no samples")
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    se = math.sqrt(var / (n - 1)) if n > 1 else 0.0
    return Estimate(float(mean), float(se), int(n), int(redraws))


def as_vector(x, dim: int | None = None, name: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise InputError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


MAX_REDRAWS = 50


def count_mc(
    seed: int,
    trials: int,
    draw: Callable[[np.random.Generator, int], object],
    evaluate: Callable[[object], tuple[np.ndarray, np.ndarray]],
) -> Estimate:
    """Mean of per-trial counts over ``trials`` seeded draws.

    ``draw(rng, size)`` produces a batch of random configurations and
    ``evaluate(batch)`` returns ``(counts, ok)``.  Trials with ``ok`` false
    (non-transversal configurations) are replaced by fresh draws from their
    own redraw streams, so the replacement depends only on ``(seed, trial)``.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")

    def run(block):
        b, start, size = block
        counts, ok = evaluate(draw(block_rng(seed, b), size))
        counts = np.asarray(counts, dtype=float).copy()
        redraws = 0
        for j in np.flatnonzero(~np.asarray(ok)):
            for attempt in range(MAX_REDRAWS):
                redraws += 1
                c, good = evaluate(draw(redraw_rng(seed, start + j, attempt), 1))
                if good[0]:
                    counts[j] = c[0]
                    break
            else:
                raise RuntimeError(f"trial {start + j}: no transversal draw after {MAX_REDRAWS} attempts")
        return math.fsum(counts.tolist()), math.fsum((counts * counts).tolist()), redraws

    parts = map_blocks(run, blocks(trials))
    return estimate_from_sums(
        math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts), trials, sum(p[2] for p in parts)
    )


def uniform_sphere(rng: np.random.Generator, size: int, d: int) -> np.ndarray:
    """``size`` points uniform on the unit sphere of R^d (``+-1`` for d = 1)."""
    g = rng.standard_normal((size, d))
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    return g / norm
