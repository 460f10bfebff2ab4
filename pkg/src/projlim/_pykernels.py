"""Pure numpy implementations of the hot kernels.

Every routine here performs its floating-point operations in the same order
as its counterpart in ``_ckernels.pyx`` so the two backends agree bit for bit.
"""
import numpy as np

BACKEND = "python"


def block_sum(x, labels, m):
    """Sum the columns of ``x`` into ``m`` groups, column by column in order."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    out = np.zeros((x.shape[0], m), dtype=np.float64)
    for j in range(x.shape[1]):
        out[:, labels[j]] += x[:, j]
    return out


def stick_aggregate(v, cells, n):
    """Aggregate truncated stick-breaking weights into partition cells.

    ``v`` holds the (N, K) stick fractions and ``cells`` the (N, K + 1) cell
    index of each atom; the leftover stick goes to atom K + 1.
    """
    v = np.ascontiguousarray(v, dtype=np.float64)
    cells = np.ascontiguousarray(cells, dtype=np.intp)
    rows, k = v.shape
    rem = np.cumprod(1.0 - v, axis=1)
    weights = np.empty((rows, k + 1), dtype=np.float64)
    weights[:, 0] = v[:, 0]
    weights[:, 1:k] = v[:, 1:] * rem[:, :-1]
    weights[:, k] = rem[:, -1]
    flat = (cells + (np.arange(rows, dtype=np.intp) * n)[:, None]).ravel()
    out = np.bincount(flat, weights=weights.ravel(), minlength=rows * n)
    return out.reshape(rows, n)


def ig_two_root(mu, lam, nu, u):
    """Transformation-with-rejection step for inverse Gaussian variates.

    Computes the larger root of the quadratic without cancellation and
    recovers the smaller one from the product of roots, ``mu**2``.
    """
    mu = np.asarray(mu, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    y = nu * nu
    mu_y = mu * y
    half = mu / (2.0 * lam)
    big = mu + half * mu_y + half * np.sqrt(4.0 * lam * mu_y + mu_y * mu_y)
    small = (mu * mu) / big
    return np.where(u <= mu / (mu + small), small, big)


def ks_statistic(a, b):
    """Two-sample KS distance between two already sorted samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    pts = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pts, side="right") / a.size
    cdf_b = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))
