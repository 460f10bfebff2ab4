"""Reproducible random streams.

A :class:`SeededRng` names a stream by a master seed and a tuple of stream
indices; the numpy generator behind it is a counter-based Philox keyed by
``SeedSequence(seed, spawn_key=stream)``, so any (seed, stream) pair can be
regenerated independently of every other stream.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

CHUNK = 8192
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SeededRng:
    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", tuple(int(s) for s in self.stream))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))

    def spawn(self, i: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream + (i,))


RngLike = Union[SeededRng, np.random.Generator, int]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return SeededRng(int(rng)).generator()
    raise TypeError(f"cannot make a generator from {rng!r}")


def as_seeded(rng: RngLike) -> SeededRng:
    if isinstance(rng, SeededRng):
        return rng
    if isinstance(rng, (int, np.integer)):
        return SeededRng(int(rng))
    if isinstance(rng, np.random.Generator):
        return SeededRng(int(rng.integers(0, 2**63)))
    raise TypeError(f"cannot make a seeded stream from {rng!r}")


def replicate(draw: Callable[[np.random.Generator, int], np.ndarray], n: int,
              rng: RngLike, threads: int = 1, chunk: int = CHUNK) -> np.ndarray:
    """Stack ``n`` replicate rows produced by ``draw(generator, size)``.

    Rows are produced in fixed-size chunks, chunk ``i`` on stream
    ``rng.spawn(i)``, and concatenated in chunk order, so the result does not
    depend on ``threads``.
    """
    root = as_seeded(rng)
    sizes = [min(chunk, n - start) for start in range(0, n, chunk)]

    def run(i):
        return draw(root.spawn(i).generator(), sizes[i])

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    return np.concatenate(parts, axis=0)
