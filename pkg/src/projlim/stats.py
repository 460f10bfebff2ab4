"""Statistical helpers: two-sample KS test and moment standard errors."""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from projlim import kernels
from projlim.errors import EmptySampleError


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    The p-value is the Kolmogorov survival function at ``sqrt(n1 n2 / (n1 + n2)) * D``.
    """
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("both samples must be non-empty")
    d = kernels.ks_statistic(a, b)
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    p = 1.0 if d == 0.0 else float(special.kolmogorov(en * d))
    return d, min(max(p, 0.0), 1.0)


def mean_and_se(x: np.ndarray):
    """Column means and standard errors (sample sd / sqrt(N))."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    return x.mean(axis=0), x.std(axis=0, ddof=1) / math.sqrt(n)


def variance_and_se(x: np.ndarray):
    """Column sample variances and their asymptotic standard errors,
    ``sqrt((m4 - s**4) / N)`` with ``m4`` the fourth central moment."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    c = x - x.mean(axis=0)
    var = (c * c).sum(axis=0) / (n - 1)
    m4 = (c**4).mean(axis=0)
    return var, np.sqrt(np.maximum(m4 - var * var, 0.0) / n)
