import math

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from projlim.errors import DegenerateFamilyError, NotARefinementError, UnsupportedPartitionError
from projlim.families import NIG, Dirichlet, PolyaTree, ig_log_density
from projlim.intervals import Partition, SimplexPoint, apply_fJI, coarsening_of
from projlim.measures import Exponential, Gaussian, dyadic_quantile_partition
from projlim.rng import SeededRng, replicate
from projlim.samplers import (
    polya_tree_levels,
    sample_chain,
    sample_dirichlet_marginal,
    sample_ig,
    sample_marginal,
    sample_nig_marginal,
    sample_polya_tree_level,
    stick_breaking_sample,
    stick_breaking_weights,
)
from projlim.stats import mean_and_se

EXP1 = Exponential(1.0)


def within_3se(x, expected):
    mean, se = mean_and_se(np.atleast_2d(np.asarray(x).T).T)
    return np.all(np.abs(mean - expected) <= 3 * se), mean, se


class TestDirichlet:
    def test_concentrated(self):
        x = sample_dirichlet_marginal([1e9, 1e9], SeededRng(1))
        assert isinstance(x, SimplexPoint)
        assert np.allclose(x.masses, 0.5, atol=1e-3)

    def test_degenerate_coordinate(self):
        x = sample_dirichlet_marginal([1.0, 0.0], SeededRng(2), size=50)
        assert np.all(x[:, 0] == 1.0) and np.all(x[:, 1] == 0.0)

    def test_mean(self):
        ok, mean, se = within_3se(sample_dirichlet_marginal([1, 1, 1], SeededRng(3), size=100_000), 1 / 3)
        assert ok, (mean, se)

    @pytest.mark.parametrize("params", [[0.3, 0.5, 2.0], [0.02, 4.0], [1.0, 1.0, 1.0, 1.0]])
    def test_marginals_are_beta(self, params):
        # oracle: the i-th coordinate of Dir(a) is Beta(a_i, sum(a) - a_i)
        x = sample_dirichlet_marginal(params, SeededRng(4), size=20_000)
        s = sum(params)
        for i, a in enumerate(params):
            if a / s > 0.9:
                continue  # mass piles up within an ulp of 1, beyond double resolution
            p = stats.kstest(x[:, i], stats.beta(a, s - a).cdf).pvalue
            assert p > 0.01 / len(params)

    def test_all_zero(self):
        with pytest.raises(DegenerateFamilyError):
            sample_dirichlet_marginal([0.0, 0.0], SeededRng(0))
        with pytest.raises(ValueError):
            sample_dirichlet_marginal([1.0, -1.0], SeededRng(0))

    def test_tiny_shapes_stay_on_simplex(self):
        x = sample_dirichlet_marginal([1e-3] * 6, SeededRng(5), size=1000)
        assert np.all(x >= 0) and np.allclose(x.sum(axis=1), 1.0, rtol=0, atol=1e-12)


class TestIG:
    def test_mean(self):
        z = sample_ig(2.0, 1.0, SeededRng(10), size=100_000)
        ok, mean, se = within_3se(z, 2.0)
        assert ok, (mean, se)

    def test_chi_square_against_density(self):
        # oracle: equiprobable bins from quadrature of the closed-form density
        f = lambda z: math.exp(ig_log_density(z, 1.0, 1.0))
        cdf = lambda t: integrate.quad(f, 0, t, limit=200)[0]
        k = 20
        edges = [0.0] + [optimize.brentq(lambda t: cdf(t) - j / k, 1e-6, 100) for j in range(1, k)] + [np.inf]
        z = sample_ig(1.0, 1.0, SeededRng(11), size=100_000)
        counts = np.histogram(z, bins=edges)[0]
        p = stats.chisquare(counts).pvalue
        assert p > 0.01

    def test_tiny_alpha(self):
        # Markov bound: P(Z > 1e-6) <= E[Z] / 1e-6 = 1e-6
        z = sample_ig(1e-12, 1.0, SeededRng(12), size=1000)
        assert np.all(z >= 0) and np.all(z < 1e-6)

    def test_scalar(self):
        assert isinstance(sample_ig(1.0, 1.0, SeededRng(1)), float)


class TestNIG:
    def test_mean(self):
        ok, mean, se = within_3se(sample_nig_marginal([1, 1], SeededRng(20), size=100_000), 0.5)
        assert ok, (mean, se)

    def test_zero_coordinate(self):
        x = sample_nig_marginal([5, 0, 5], SeededRng(21), size=100)
        assert np.all(x[:, 1] == 0.0)

    def test_aggregation(self):
        # oracle: IG(a, 1) + IG(b, 1) is IG(a + b, 1)
        a, b, c = 0.7, 1.3, 2.0
        x = sample_nig_marginal([a, b, c], SeededRng(22), size=100_000)
        y = sample_nig_marginal([a + b, c], SeededRng(23), size=100_000)
        p = stats.ks_2samp(x[:, 0] + x[:, 1], y[:, 0]).pvalue
        assert p > 0.01

    def test_all_zero(self):
        with pytest.raises(DegenerateFamilyError):
            sample_nig_marginal([0.0], SeededRng(0))


class TestPolyaTree:
    def test_level1_symmetric(self):
        F = PolyaTree(EXP1, 1.0)
        x = sample_polya_tree_level(F, 1, SeededRng(30), size=100_000)
        ok, mean, se = within_3se(x[:, 0], 0.5)
        assert ok, (mean, se)

    def test_level3_mean(self):
        F = PolyaTree(EXP1, 1.0)
        ok, mean, se = within_3se(sample_polya_tree_level(F, 3, SeededRng(31), size=100_000), 1 / 8)
        assert ok, (mean, se)

    def test_levels_telescope_exactly(self):
        levels = polya_tree_levels(PolyaTree(EXP1, 1.0), 5, SeededRng(32), size=2000)
        for coarse, fine in zip(levels, levels[1:]):
            assert np.array_equal(fine[:, 0::2] + fine[:, 1::2], coarse)
        assert np.array_equal(levels[0].sum(axis=1), np.ones(2000))
        assert np.allclose(levels[-1].sum(axis=1), 1.0, rtol=0, atol=1e-12)

    def test_level1_is_beta(self):
        x = sample_polya_tree_level(PolyaTree(EXP1, 2.0), 1, SeededRng(33), size=20_000)
        assert stats.kstest(x[:, 0], stats.beta(2.0, 2.0).cdf).pvalue > 0.01

    def test_single_draw(self):
        x = sample_polya_tree_level(PolyaTree(EXP1, 1.0), 2, SeededRng(34))
        assert isinstance(x, SimplexPoint) and len(x) == 4


class TestChain:
    def levels(self, G0, k):
        return [dyadic_quantile_partition(G0, n) for n in range(1, k + 1)]

    def test_exact_coherence(self):
        chain = self.levels(EXP1, 2)
        d = sample_chain(Dirichlet(1.0, EXP1), chain, SeededRng(40))
        assert apply_fJI(coarsening_of(chain[0], chain[1]), d.points[1]) == SimplexPoint(d.points[0].masses)

    def test_single(self):
        I = Partition.from_cuts([0.5])
        d = sample_chain(Dirichlet(1.0, EXP1), [I], SeededRng(41))
        assert len(d.points) == 1 and len(d.points[0]) == 2

    def test_broken_chain(self):
        with pytest.raises(NotARefinementError):
            sample_chain(Dirichlet(1.0, EXP1), [Partition.from_cuts([0.5]), Partition.from_cuts([1.0])],
                         SeededRng(0))

    def test_polya_requires_dyadic(self):
        with pytest.raises(UnsupportedPartitionError):
            sample_chain(PolyaTree(EXP1, 1.0), [Partition.from_cuts([0.5]), Partition.from_cuts([0.5, 1.0])],
                         SeededRng(0))

    @pytest.mark.parametrize("F", [Dirichlet(1.0, EXP1), NIG(2.0, EXP1), PolyaTree(EXP1, 1.0)],
                             ids=["dirichlet", "nig", "polya"])
    def test_batch_coherence(self, F):
        chain = self.levels(EXP1, 4)
        d = sample_chain(F, chain, SeededRng(42), size=500)
        for g, coarse, fine in zip(d.groupings, d.points, d.points[1:]):
            assert np.array_equal(apply_fJI(g, fine), coarse)
        for p in d.points:
            assert np.all(p >= 0) and np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12)

    def test_long_chain_marginal(self):
        # oracle: gamma additivity, so the level-1 marginal of Dir(alpha=4) is Dir(2, 2)
        chain = self.levels(Exponential(1.0), 6)
        F = Dirichlet(4.0, Exponential(1.0))
        coarse = sample_chain(F, chain, SeededRng(43), size=100_000).points[0]
        direct = sample_dirichlet_marginal([2.0, 2.0], SeededRng(44), size=100_000)
        assert stats.ks_2samp(coarse[:, 0], direct[:, 0]).pvalue > 0.01
        assert stats.kstest(coarse[:, 0], stats.beta(2, 2).cdf).pvalue > 0.01


class TestStickBreaking:
    def test_expected_mass(self):
        # E[sum of first K weights] = 1 - (alpha / (alpha + 1))**K
        w = stick_breaking_weights(1.0, 10, SeededRng(50), size=100_000).sum(axis=1)
        expected = 1 - 0.5**10
        assert expected == pytest.approx(0.999023, abs=1e-6)
        ok, mean, se = within_3se(w, expected)
        assert ok, (mean, se)

    def test_single_atom_limit(self):
        w = stick_breaking_weights(1e-9, 1, SeededRng(51), size=100)
        assert np.all(w[:, 0] > 1 - 1e-6)

    def test_simplex(self):
        G0 = Gaussian(0.0, 1.0)
        x = stick_breaking_sample(2.0, G0, 50, SeededRng(52), dyadic_quantile_partition(G0, 3), size=300)
        assert x.shape == (300, 8)
        assert np.all(x >= 0) and np.allclose(x.sum(axis=1), 1.0, rtol=0, atol=1e-12)


class TestDeterminism:
    def test_same_stream_same_bits(self):
        I = dyadic_quantile_partition(EXP1, 3)
        for F in (Dirichlet(3.0, EXP1), NIG(3.0, EXP1), PolyaTree(EXP1, 1.0)):
            a = sample_marginal(F, I, SeededRng(7, (1, 2)), size=100)
            b = sample_marginal(F, I, SeededRng(7, (1, 2)), size=100)
            c = sample_marginal(F, I, SeededRng(7, (1, 3)), size=100)
            assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_replicate_independent_of_threads(self):
        F = Dirichlet(3.0, EXP1)
        I = dyadic_quantile_partition(EXP1, 2)
        draw = lambda gen, m: sample_marginal(F, I, gen, m)
        one = replicate(draw, 20_000, SeededRng(9), threads=1, chunk=3000)
        four = replicate(draw, 20_000, SeededRng(9), threads=4, chunk=3000)
        assert one.shape == (20_000, 4) and np.array_equal(one, four)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            SeededRng(-1)
        with pytest.raises(ValueError):
            SeededRng(2**64)
        SeededRng(2**64 - 1).generator().random()
