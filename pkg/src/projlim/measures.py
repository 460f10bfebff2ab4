"""Base probability measures on the line, charges, and the evaluation map
sending a charge to its vector of cell masses on a partition."""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from projlim.errors import ConfigError, NumericError, UnsupportedBaseMeasureError
from projlim.intervals import INF, Partition, QSet, SimplexPoint

PHI_SUM_TOL = 1e-9


class Charge(ABC):
    """A finitely additive set function on the interval algebra with total mass 1."""

    @abstractmethod
    def __call__(self, A: QSet) -> float:
        ...

    @property
    def deterministic(self) -> bool:
        return True


class EscapeCharge(Charge):
    """Puts all its mass "at +infinity": c(A) = 1 iff A contains a tail [t, inf).

    Finitely additive on the algebra but not countably additive, since
    [n, inf) decreases to the empty set while keeping charge 1.
    """

    def __call__(self, A: QSet) -> float:
        return 1.0 if A.intervals and A.intervals[-1][1] == INF else 0.0

    def __repr__(self) -> str:
        return "EscapeCharge()"

    def __eq__(self, other) -> bool:
        return isinstance(other, EscapeCharge)

    def __hash__(self) -> int:
        return hash(EscapeCharge)


def escape_charge() -> EscapeCharge:
    return EscapeCharge()


class BaseMeasure(Charge):
    """A probability measure on the Borel line given by its distribution function.

    Subclasses provide ``below(x) = G(X < x)``, ``above(x) = G(X >= x)``,
    the right-continuous ``cdf`` and a generalized inverse ``quantile``.
    """

    kind: str = ""
    invertible: bool = True

    @abstractmethod
    def below(self, x: float) -> float:
        ...

    def above(self, x: float) -> float:
        return 1.0 - self.below(x)

    @abstractmethod
    def cdf(self, x: float) -> float:
        ...

    @abstractmethod
    def quantile(self, p):
        ...

    def mass(self, a: float, b: float) -> float:
        """G([a, b)); the upper tail is taken from ``above`` to keep precision."""
        lo = self.below(a)
        if lo > 0.5:
            return self.above(a) - self.above(b)
        return self.below(b) - lo

    def __call__(self, A: QSet) -> float:
        return math.fsum(self.mass(a, b) for a, b in A.intervals)

    @abstractmethod
    def params(self) -> dict:
        ...

    def to_spec(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


@dataclass(frozen=True)
class Exponential(BaseMeasure):
    rate: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def below(self, x):
        return 0.0 if x <= 0 else -math.expm1(-self.rate * x)

    def above(self, x):
        return 1.0 if x <= 0 else math.exp(-self.rate * x)

    def cdf(self, x):
        return self.below(x)

    def quantile(self, p):
        return -np.log1p(-np.asarray(p, dtype=np.float64)) / self.rate

    def params(self):
        return {"rate": self.rate}


@dataclass(frozen=True)
class Gaussian(BaseMeasure):
    mean: float = 0.0
    sd: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError(f"sd must be positive, got {self.sd}")

    def below(self, x):
        return float(special.ndtr((x - self.mean) / self.sd))

    def above(self, x):
        return float(special.ndtr((self.mean - x) / self.sd))

    def cdf(self, x):
        return self.below(x)

    def quantile(self, p):
        return self.mean + self.sd * special.ndtri(np.asarray(p, dtype=np.float64))

    def params(self):
        return {"mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class Uniform(BaseMeasure):
    a: float = 0.0
    b: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b})")

    def below(self, x):
        return min(max((x - self.a) / (self.b - self.a), 0.0), 1.0)

    def above(self, x):
        return min(max((self.b - x) / (self.b - self.a), 0.0), 1.0)

    def cdf(self, x):
        return self.below(x)

    def quantile(self, p):
        return self.a + (self.b - self.a) * np.asarray(p, dtype=np.float64)

    def params(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class EmpiricalStep(BaseMeasure):
    """Finitely many atoms with weights. A point at a cell boundary belongs to
    the cell it is the left endpoint of."""

    atoms: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    kind = "empirical"
    invertible = False
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if atoms.ndim != 1 or atoms.size == 0 or atoms.shape != w.shape:
            raise ValueError("atoms and weights must be equal-length non-empty vectors")
        if np.any(w < 0) or abs(w.sum() - 1.0) > PHI_SUM_TOL:
            raise ValueError("weights must be non-negative and sum to 1")
        order = np.argsort(atoms, kind="stable")
        object.__setattr__(self, "atoms", tuple(atoms[order].tolist()))
        object.__setattr__(self, "weights", tuple(w[order].tolist()))
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(w[order])]))

    def below(self, x):
        return float(self._cum[np.searchsorted(self.atoms, x, side="left")])

    def above(self, x):
        i = np.searchsorted(self.atoms, x, side="left")
        return math.fsum(self.weights[i:])

    def cdf(self, x):
        return float(self._cum[np.searchsorted(self.atoms, x, side="right")])

    def quantile(self, p):
        p = np.asarray(p, dtype=np.float64)
        idx = np.searchsorted(self._cum[1:], p, side="left")
        return np.asarray(self.atoms)[np.minimum(idx, len(self.atoms) - 1)]

    def params(self):
        return {"atoms": list(self.atoms), "weights": list(self.weights)}


_KINDS = {
    "exponential": Exponential,
    "gaussian": Gaussian,
    "normal": Gaussian,
    "uniform": Uniform,
    "empirical": EmpiricalStep,
}


def base_measure_from_spec(spec: dict) -> BaseMeasure:
    """Build a base measure from ``{"kind": ..., "params": {...}}``."""
    try:
        cls = _KINDS[str(spec["kind"]).lower()]
    except KeyError:
        raise ConfigError(f"unknown base measure {spec.get('kind')!r}") from None
    params = dict(spec.get("params", {}))
    if cls is EmpiricalStep:
        params = {k: tuple(v) for k, v in params.items()}
    try:
        return cls(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for {spec['kind']}: {exc}") from None


def phi_I(mu: Charge, I: Partition) -> SimplexPoint:
    """Vector of cell masses of a charge on a partition."""
    masses = np.array([mu(cell) for cell in I], dtype=np.float64)
    if np.any(np.isnan(masses)):
        raise NumericError(f"evaluation of {mu!r} produced NaN on {I!r}")
    total = masses.sum()
    if abs(total - 1.0) > PHI_SUM_TOL:
        raise NumericError(f"cell masses sum to {total!r}, not 1")
    masses = np.clip(masses, 0.0, None) / total
    return SimplexPoint(masses, I)


@lru_cache(maxsize=256)
def dyadic_quantile_partition(G0: BaseMeasure, n: int) -> Partition:
    """Partition into the 2**n cells between consecutive quantiles k / 2**n.

    The outermost cells are extended to -inf and +inf, so cells carry
    G0-mass 2**-n each even when G0 has bounded support.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if not G0.invertible:
        raise UnsupportedBaseMeasureError(
            f"{G0.kind} base measure has no continuous strictly increasing cdf")
    cuts = np.asarray(G0.quantile(np.arange(1, 2**n) / 2**n), dtype=np.float64)
    if not np.all(np.isfinite(cuts)) or np.any(np.diff(cuts) <= 0):
        raise NumericError(f"quantiles of {G0!r} at level {n} are not strictly increasing")
    return Partition.from_cuts(cuts)


def dyadic_level(G0: BaseMeasure, I: Partition, rtol: float = 1e-12) -> int | None:
    """Level n if ``I`` is the dyadic quantile partition of ``G0`` at level n."""
    size = len(I)
    n = size.bit_length() - 1
    if n < 1 or size != 2**n or not G0.invertible:
        return None
    ref = dyadic_quantile_partition(G0, n)
    for c, r in zip(I, ref):
        if len(c.intervals) != 1:
            return None
        (a, b), (ra, rb) = c.intervals[0], r.intervals[0]
        for u, v in ((a, ra), (b, rb)):
            if u != v and not (math.isfinite(u) and math.isclose(u, v, rel_tol=rtol, abs_tol=rtol)):
                return None
    return n
