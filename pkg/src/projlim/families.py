"""Projective families of simplex laws: Dirichlet, normalized inverse
Gaussian and Polya tree marginals, with their closed-form means."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np
from scipy.special import gammaln

from projlim.errors import ConfigError, DomainError, UnsupportedPartitionError
from projlim.intervals import Partition, SimplexPoint
from projlim.measures import BaseMeasure, base_measure_from_spec, dyadic_level, phi_I

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class ZeroParameterWarning(UserWarning):
    """Some cell has zero base mass, so its coordinate is identically 0."""


@dataclass(frozen=True)
class Dirichlet:
    alpha: float
    base: BaseMeasure
    variant = "dirichlet"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class NIG:
    """Normalized inverse Gaussian family; every IG component uses gamma = 1."""

    alpha: float
    base: BaseMeasure
    variant = "nig"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class PolyaTree:
    """Polya tree on the dyadic quantile partitions of ``base``.

    Every node at depth n gets beta parameter ``c * n**2`` unless
    ``level_alphas`` (one value per depth) or ``branch_alpha(n, k)`` override it.
    """

    base: BaseMeasure
    c: float = 1.0
    level_alphas: tuple[float, ...] | None = None
    branch_alpha: Callable[[int, int], float] | None = field(default=None, compare=False)
    variant = "polya_tree"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.level_alphas is not None:
            object.__setattr__(self, "level_alphas", tuple(float(a) for a in self.level_alphas))
            if any(not a > 0 for a in self.level_alphas):
                raise ValueError("level_alphas must be positive")

    def level_params(self, n: int) -> np.ndarray:
        """Beta parameters of the 2**n nodes at depth n, left to right."""
        if self.branch_alpha is not None:
            return np.array([self.branch_alpha(n, k) for k in range(1, 2**n + 1)], dtype=np.float64)
        if self.level_alphas is not None and n <= len(self.level_alphas):
            a = self.level_alphas[n - 1]
        else:
            a = self.c * n * n
        return np.full(2**n, a, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class TabulatedDirichlet:
    """Dirichlet marginals given by an explicit parameter table per partition.

    Nothing forces the table to be block additive, which makes this the
    adversarial fixture for projectivity checks.
    """

    table: Mapping[Partition, tuple[float, ...]]
    variant = "tabulated_dirichlet"

    @property
    def base(self):
        return None


MarginalFamily = Union[Dirichlet, NIG, PolyaTree, TabulatedDirichlet]


@dataclass(frozen=True, eq=False)
class FamilyParams:
    """Parameters of a family restricted to one partition.

    ``values`` holds the per-cell vector for Dirichlet/NIG; for Polya trees
    ``levels[j]`` holds the beta parameters of the 2**(j+1) nodes at depth j+1.
    """

    partition: Partition
    values: np.ndarray | None = None
    levels: tuple[np.ndarray, ...] | None = None
    zero_cells: tuple[int, ...] = ()


def polya_level(F: PolyaTree, I: Partition) -> int:
    n = dyadic_level(F.base, I)
    if n is None:
        raise UnsupportedPartitionError(
            f"Polya tree marginals exist only on dyadic quantile partitions, got {I!r}")
    return n


def family_params(F: MarginalFamily, I: Partition) -> FamilyParams:
    if isinstance(F, PolyaTree):
        n = polya_level(F, I)
        return FamilyParams(I, levels=tuple(F.level_params(j) for j in range(1, n + 1)))
    if isinstance(F, TabulatedDirichlet):
        try:
            vals = np.asarray(F.table[I], dtype=np.float64)
        except KeyError:
            raise UnsupportedPartitionError(f"no tabulated parameters for {I!r}") from None
    else:
        vals = F.alpha * phi_I(F.base, I).masses
    zero = tuple(int(i) for i in np.flatnonzero(vals == 0))
    if zero:
        warnings.warn(f"cells {zero} have zero parameter; their coordinates are 0",
                      ZeroParameterWarning, stacklevel=2)
    return FamilyParams(I, values=vals, zero_cells=zero)


def family_mean(F: MarginalFamily, I: Partition) -> SimplexPoint:
    """Expected simplex point E[X_I]; for the base-measure families this is
    the vector of base-measure cell masses."""
    if isinstance(F, PolyaTree):
        polya_level(F, I)
        return phi_I(F.base, I)
    if isinstance(F, TabulatedDirichlet):
        vals = family_params(F, I).values
        return SimplexPoint(vals / vals.sum(), I)
    return phi_I(F.base, I)


def dirichlet_log_density(params, x) -> float:
    """Log Dirichlet density with respect to Lebesgue measure on the simplex
    (parametrized by its first n - 1 coordinates)."""
    a = np.asarray(params, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.shape != x.shape or a.ndim != 1:
        raise DomainError("params and x must be vectors of equal length")
    if np.any(a <= 0):
        raise DomainError(f"Dirichlet parameters must be positive: {a}")
    if np.any(x <= 0) or np.any(x >= 1) or abs(x.sum() - 1.0) > 1e-12:
        raise DomainError(f"x must lie strictly inside the simplex: {x}")
    return float(gammaln(a.sum()) - gammaln(a).sum() + np.sum((a - 1.0) * np.log(x)))


def ig_log_density(z, alpha: float, gamma: float):
    """Log density of the inverse Gaussian law with parameters (alpha, gamma):

        alpha / sqrt(2 pi) * z**-1.5 * exp(-(alpha**2 / z + gamma**2 * z) / 2 + gamma * alpha)

    This is IG with mean alpha / gamma and shape alpha**2.
    """
    if not (alpha > 0 and gamma > 0):
        raise DomainError(f"alpha and gamma must be positive, got {alpha}, {gamma}")
    z_arr = np.asarray(z, dtype=np.float64)
    if np.any(z_arr <= 0):
        raise DomainError("inverse Gaussian density is supported on z > 0")
    out = (math.log(alpha) - _LOG_SQRT_2PI - 1.5 * np.log(z_arr)
           - 0.5 * (alpha * alpha / z_arr + gamma * gamma * z_arr) + gamma * alpha)
    return float(out) if np.ndim(out) == 0 else out


def family_from_spec(spec: Mapping, base: BaseMeasure | dict | None = None) -> MarginalFamily:
    """Build a family from ``{"variant": ..., "alpha" | "c": ..., "base_measure": ...}``."""
    variant = str(spec.get("variant", "")).lower().replace("-", "_")
    if base is None:
        base = spec.get("base_measure")
    if isinstance(base, Mapping):
        base = base_measure_from_spec(base)
    if base is None:
        raise ConfigError("family needs a base measure")
    try:
        if variant in ("dirichlet", "dp"):
            return Dirichlet(float(spec["alpha"]), base)
        if variant in ("nig", "normalized_inverse_gaussian"):
            return NIG(float(spec["alpha"]), base)
        if variant in ("polya_tree", "polyatree", "pt"):
            levels = spec.get("level_alphas")
            return PolyaTree(base, float(spec.get("c", 1.0)),
                             tuple(levels) if levels is not None else None)
    except KeyError as exc:
        raise ConfigError(f"family {variant!r} is missing {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown family variant {spec.get('variant')!r}")


def family_to_spec(F: MarginalFamily) -> dict:
    if isinstance(F, PolyaTree):
        out = {"variant": F.variant, "c": F.c}
        if F.level_alphas is not None:
            out["level_alphas"] = list(F.level_alphas)
    elif isinstance(F, TabulatedDirichlet):
        return {"variant": F.variant,
                "table": [[p.to_text(), list(map(float, v))] for p, v in F.table.items()]}
    else:
        out = {"variant": F.variant, "alpha": F.alpha}
    out["base_measure"] = F.base.to_spec()
    return out
