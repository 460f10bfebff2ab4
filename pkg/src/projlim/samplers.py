"""Random draws of simplex points, singly or along refinement chains.

Every sampler takes ``size=None`` for a single :class:`SimplexPoint` (or a
float for :func:`sample_ig`) and an integer ``size`` for an ``(size, n)``
array of replicate rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from projlim import kernels
from projlim.errors import DegenerateFamilyError, NotARefinementError, NumericError
from projlim.families import (
    NIG,
    Dirichlet,
    MarginalFamily,
    PolyaTree,
    TabulatedDirichlet,
    family_params,
    polya_level,
)
from projlim.intervals import Partition, SimplexPoint, apply_fJI, coarsening_of
from projlim.measures import BaseMeasure
from projlim.rng import RngLike, as_generator

STICK_CHUNK_ELEMS = 2**21


def _rows(size):
    return 1 if size is None else int(size)


def _finish(x: np.ndarray, size, partition=None):
    if size is None:
        return SimplexPoint(x[0], partition)
    return x


def _check_params(params) -> np.ndarray:
    a = np.asarray(params, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise ValueError(f"parameters must be a non-empty vector, got shape {a.shape}")
    if np.any(np.isnan(a)) or np.any(a < 0):
        raise ValueError(f"parameters must be non-negative: {a}")
    if not np.any(a > 0):
        raise DegenerateFamilyError("all parameters are zero")
    return a


def _uniform_open_left(gen, shape):
    # (0, 1], so logs stay finite
    return 1.0 - gen.random(shape)


def log_gamma_variates(shapes: np.ndarray, gen: np.random.Generator, m: int) -> np.ndarray:
    """Logs of independent unit-scale gamma variates, one column per shape.

    Zero shapes give ``-inf``. Shapes below 1 are boosted: a draw at
    ``shape + 1`` times ``U**(1/shape)``, kept in log space so tiny shapes do
    not underflow.
    """
    out = np.full((m, shapes.size), -np.inf)
    big = np.flatnonzero(shapes >= 1.0)
    small = np.flatnonzero((shapes > 0) & (shapes < 1.0))
    if big.size:
        out[:, big] = np.log(gen.standard_gamma(shapes[big], size=(m, big.size)))
    if small.size:
        a = shapes[small]
        g = gen.standard_gamma(a + 1.0, size=(m, small.size))
        out[:, small] = np.log(g) + np.log(_uniform_open_left(gen, (m, small.size))) / a
    return out


def _normalize_logs(logs: np.ndarray) -> np.ndarray:
    w = np.exp(logs - logs.max(axis=1, keepdims=True))
    return w / w.sum(axis=1, keepdims=True)


def sample_dirichlet_marginal(params, rng: RngLike, size=None):
    """Dirichlet draw by normalizing independent gamma variables."""
    a = _check_params(params)
    gen = as_generator(rng)
    x = _normalize_logs(log_gamma_variates(a, gen, _rows(size)))
    return _finish(x, size)


def sample_ig(alpha, gamma, rng: RngLike, size=None):
    """Inverse Gaussian draws with density proportional to
    ``z**-1.5 * exp(-(alpha**2 / z + gamma**2 * z) / 2)``.

    Equivalent to the (mean, shape) = (alpha / gamma, alpha**2) family; draws
    use the two-root transformation of a squared normal with one uniform
    acceptance step.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(alpha <= 0) or np.any(gamma <= 0):
        raise ValueError("alpha and gamma must be positive")
    gen = as_generator(rng)
    shape = np.broadcast_shapes(alpha.shape, gamma.shape)
    if size is not None:
        shape = (int(size),) + shape
    nu = gen.standard_normal(shape)
    u = gen.random(shape)
    z = kernels.ig_two_root(alpha / gamma, alpha * alpha, nu, u)
    return float(z) if np.ndim(z) == 0 else z


def sample_nig_marginal(params, rng: RngLike, size=None):
    """Normalized vector of independent IG(params_i, gamma=1) variables."""
    a = _check_params(params)
    gen = as_generator(rng)
    m = _rows(size)
    pos = np.flatnonzero(a > 0)
    z = np.zeros((m, a.size))
    z[:, pos] = sample_ig(a[pos], 1.0, gen, size=m)
    total = z.sum(axis=1, keepdims=True)
    if np.any(total <= 0) or not np.all(np.isfinite(total)):
        raise NumericError("inverse Gaussian components underflowed")
    return _finish(z / total, size)


def polya_tree_levels(F: PolyaTree, n: int, rng: RngLike, size=None) -> list[np.ndarray]:
    """All levels 1..n of one Polya tree draw, each of shape (rows, 2**j).

    At every node the larger child mass is the product with the larger beta
    branch and the smaller child is the exact remainder, so siblings sum to
    their parent without rounding.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    gen = as_generator(rng)
    m = _rows(size)
    x = np.ones((m, 1))
    levels = []
    for j in range(1, n + 1):
        ab = F.level_params(j)
        y = gen.beta(ab[0::2], ab[1::2], size=(m, 2 ** (j - 1)))
        left_big = y >= 0.5
        big = x * np.where(left_big, y, 1.0 - y)
        small = x - big
        nxt = np.empty((m, 2**j))
        nxt[:, 0::2] = np.where(left_big, big, small)
        nxt[:, 1::2] = np.where(left_big, small, big)
        levels.append(nxt)
        x = nxt
    return levels


def sample_polya_tree_level(F: PolyaTree, n: int, rng: RngLike, size=None):
    """The 2**n cell masses of a Polya tree draw on the level-n quantile cells."""
    x = polya_tree_levels(F, n, rng, size)[-1]
    return _finish(x, size)


def sample_marginal(F: MarginalFamily, I: Partition, rng: RngLike, size=None):
    """Draw X_I from the family's marginal law on partition I."""
    if isinstance(F, PolyaTree):
        x = polya_tree_levels(F, polya_level(F, I), rng, _rows(size))[-1]
        return _finish(x, size, I)
    vals = family_params(F, I).values
    if isinstance(F, NIG):
        x = sample_nig_marginal(vals, rng, _rows(size))
    elif isinstance(F, (Dirichlet, TabulatedDirichlet)):
        x = sample_dirichlet_marginal(vals, rng, _rows(size))
    else:
        raise TypeError(f"unknown family {F!r}")
    return _finish(x, size, I)


@dataclass(frozen=True, eq=False)
class ChainDraw:
    """Coherent draws along a chain I_1 ⊑ ... ⊑ I_k."""

    chain: tuple[Partition, ...]
    points: tuple
    groupings: tuple


def chain_groupings(chain: Sequence[Partition]):
    out = []
    for coarse, fine in zip(chain, chain[1:]):
        g = coarsening_of(coarse, fine)
        if g is None:
            raise NotARefinementError(f"{fine!r} does not refine {coarse!r}")
        out.append(g)
    return tuple(out)


def sample_chain(F: MarginalFamily, chain: Sequence[Partition], rng: RngLike, size=None) -> ChainDraw:
    """Draw once on the finest partition, then block-sum down the chain."""
    chain = tuple(chain)
    if not chain:
        raise ValueError("empty chain")
    groupings = chain_groupings(chain)
    if isinstance(F, PolyaTree):
        for I in chain:
            polya_level(F, I)
    finest = sample_marginal(F, chain[-1], rng, _rows(size))
    points = [finest]
    for g in reversed(groupings):
        points.append(apply_fJI(g, points[-1]))
    points.reverse()
    if size is None:
        points = [SimplexPoint(p[0], I) for p, I in zip(points, chain)]
    return ChainDraw(chain, tuple(points), groupings)


def stick_breaking_weights(alpha: float, K: int, rng: RngLike, size=None) -> np.ndarray:
    """First K stick-breaking weights with Beta(1, alpha) fractions."""
    v = _stick_fractions(alpha, K, as_generator(rng), _rows(size))
    rem = np.cumprod(1.0 - v, axis=1)
    w = v.copy()
    w[:, 1:] *= rem[:, :-1]
    return w[0] if size is None else w


def _stick_fractions(alpha, K, gen, m):
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if K < 1:
        raise ValueError(f"truncation must be >= 1, got {K}")
    # inverse cdf of Beta(1, alpha): 1 - U**(1/alpha)
    return -np.expm1(np.log(_uniform_open_left(gen, (m, K))) / alpha)


def stick_breaking_sample(alpha: float, G0: BaseMeasure, K: int, rng: RngLike,
                          I: Partition, size=None):
    """Truncated stick-breaking draw aggregated onto the cells of ``I``.

    The K weights go to atoms drawn from G0 by inversion; the leftover stick
    goes to one extra atom, so every row is an exact simplex point.
    """
    gen = as_generator(rng)
    m = _rows(size)
    n = len(I)
    rows_per = max(1, STICK_CHUNK_ELEMS // (K + 1))
    parts = []
    for start in range(0, m, rows_per):
        r = min(rows_per, m - start)
        v = _stick_fractions(alpha, K, gen, r)
        atoms = np.asarray(G0.quantile(gen.random((r, K + 1))), dtype=np.float64)
        cells = I.locate(atoms)
        parts.append(kernels.stick_aggregate(v, cells, n))
    x = np.concatenate(parts, axis=0)
    x /= x.sum(axis=1, keepdims=True)
    return _finish(x, size, I)
