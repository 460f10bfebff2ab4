import numpy as np
import pytest
from scipy import stats

from projlim.errors import EmptySampleError
from projlim.stats import ks_two_sample, mean_and_se, variance_and_se


def test_identical_samples():
    x = np.random.default_rng(0).normal(size=1000)
    assert ks_two_sample(x, x) == (0.0, 1.0)


def test_shifted_uniforms():
    rng = np.random.default_rng(1)
    d, p = ks_two_sample(rng.uniform(0, 1, 10_000), rng.uniform(0.5, 1.5, 10_000))
    assert d == pytest.approx(0.5, abs=0.02)
    assert p < 1e-12


def test_null_calibration():
    rng = np.random.default_rng(2)
    passes = sum(ks_two_sample(rng.normal(size=1000), rng.normal(size=1000))[1] > 0.01 for _ in range(100))
    assert passes >= 95


def test_agrees_with_scipy():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=4000), rng.normal(0.05, 1, size=3000)
    d, p = ks_two_sample(a, b)
    ref = stats.ks_2samp(a, b, method="asymp")
    assert d == pytest.approx(ref.statistic, abs=1e-15)
    # scipy's asymptotic branch uses a finite-n corrected distribution; agree loosely
    assert abs(p - ref.pvalue) < 0.1


def test_empty():
    with pytest.raises(EmptySampleError):
        ks_two_sample([], [1.0])


def test_moment_errors():
    x = np.random.default_rng(4).uniform(size=(200_000, 1))
    mean, se = mean_and_se(x)
    assert abs(mean[0] - 0.5) <= 3 * se[0]
    var, vse = variance_and_se(x)
    assert abs(var[0] - 1 / 12) <= 3 * vse[0]
