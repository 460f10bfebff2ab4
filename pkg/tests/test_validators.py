import json
import math

import numpy as np
import pytest

from projlim.errors import NotARefinementError, UnsupportedBaseMeasureError
from projlim.families import NIG, Dirichlet, PolyaTree, TabulatedDirichlet
from projlim.intervals import Partition, QSet
from projlim.measures import EmpiricalStep, Exponential, Gaussian, Uniform, dyadic_quantile_partition, escape_charge
from projlim.rng import SeededRng
from projlim.validators import (
    HarrisSequence,
    TestReport,
    harris_test,
    make_harris_sequences,
    mean_condition_test,
    projectivity_test,
)

EXP1 = Exponential(1.0)
L2, L3 = dyadic_quantile_partition(EXP1, 2), dyadic_quantile_partition(EXP1, 3)


def adversarial():
    I = Partition.from_cuts([1.0])
    J = Partition.from_cuts([0.5, 1.0])
    return TabulatedDirichlet({I: (1.0, 1.0), J: (0.2, 0.2, 1.0)}), J, I


class TestProjectivity:
    @pytest.mark.parametrize("F", [Dirichlet(5.0, EXP1), NIG(3.0, EXP1)], ids=["dirichlet", "nig"])
    def test_additive_families_pass(self, F):
        rep = projectivity_test(F, L3, L2, 100_000, SeededRng(1))
        assert rep.passed, rep.statistics
        assert rep.thresholds["p_value_min"] == pytest.approx(0.01 / 4)
        assert len(rep.details) == 4

    def test_polya_tree_passes(self):
        rep = projectivity_test(PolyaTree(EXP1, 1.0), L3, L2, 50_000, SeededRng(2))
        assert rep.passed, rep.statistics

    def test_adversarial_fails(self):
        F, J, I = adversarial()
        rep = projectivity_test(F, J, I, 100_000, SeededRng(3))
        assert not rep.passed
        assert rep.statistics["min_p_value"] < 1e-10

    def test_not_refinement(self):
        with pytest.raises(NotARefinementError):
            projectivity_test(Dirichlet(1.0, EXP1), L2, L3, 10, SeededRng(0))


class TestMeanCondition:
    def test_dirichlet_with_variances(self):
        G0 = Uniform(0.0, 1.0)
        I = Partition([QSet.of((-math.inf, 0.5)), QSet.of((0.5, 0.8)), QSet.of((0.8, math.inf))])
        rep = mean_condition_test(Dirichlet(2.0, G0), I, 100_000, SeededRng(10))
        assert rep.passed, rep.details
        assert rep.details[0]["expected_var"] == pytest.approx(0.25 / 3)
        assert [d["expected_mean"] for d in rep.details] == pytest.approx([0.5, 0.3, 0.2])

    def test_polya_tree(self):
        G0 = Gaussian(0.0, 1.0)
        rep = mean_condition_test(PolyaTree(G0, 1.0), dyadic_quantile_partition(G0, 3), 100_000, SeededRng(11))
        assert rep.passed, rep.details
        assert "max_abs_z_var" not in rep.statistics

    def test_nig_quartiles(self):
        G0 = Uniform(0.0, 1.0)
        rep = mean_condition_test(NIG(4.0, G0), dyadic_quantile_partition(G0, 2), 100_000, SeededRng(12))
        assert rep.passed, rep.details
        assert [d["expected_mean"] for d in rep.details] == pytest.approx([0.25] * 4)

    def test_swapped_base_is_detected(self):
        # Exp(1.25) vs Exp(1) on L2 differs by about 0.07 in total variation
        other = Exponential(1.25)
        tv = 0.5 * sum(abs(other(c) - EXP1(c)) for c in L2)
        assert tv >= 0.05
        rep = mean_condition_test(Dirichlet(5.0, EXP1), L2, 100_000, SeededRng(13), reference_base=other)
        assert not rep.passed


class TestHarrisSequences:
    def test_tail_masses(self):
        seqs = make_harris_sequences(EXP1, 5, 8)
        tail = seqs.sequences[0]
        assert tail.escape == math.inf
        masses = [EXP1(A) for A in tail.sets]
        assert np.allclose(masses, 2.0 ** -np.arange(1, 9), rtol=1e-12, atol=0)

    def test_interval_sequences_shrink(self):
        seqs = make_harris_sequences(EXP1, 5, 12)
        assert len(seqs.sequences) == 5 and seqs.depth == 12
        for s in seqs.sequences[1:]:
            m = np.array([EXP1(A) for A in s.sets])
            # sets reaching below the support of Exp(1) may keep equal mass early on
            assert np.all(np.diff(m) <= 0) and m[-1] < m[0]
            # every set excludes its right end, and the left ends converge to it
            e = s.escape
            assert all(e not in A for A in s.sets)
            assert s.sets[-1].intervals[0][0] == e - 2.0**-12

    def test_generated_partition(self):
        s = make_harris_sequences(EXP1, 2, 4).sequences[1]
        P = s.partition()
        assert len(P) == 5
        member = s.membership(P)
        assert member.shape == (4, 5) and member.sum(axis=1).tolist() == [4, 3, 2, 1]

    def test_structure_checked(self):
        with pytest.raises(ValueError):
            HarrisSequence("bad", (QSet.of((0, 1)), QSet.of((0.5, 2))))
        with pytest.raises(ValueError):
            HarrisSequence("bad", (QSet.of((0, 1)), QSet.of((0, 1))))

    def test_needs_invertible_base(self):
        with pytest.raises(UnsupportedBaseMeasureError):
            make_harris_sequences(EmpiricalStep((0.0,), (1.0,)), 2, 3)


class TestHarris:
    def test_dirichlet_passes(self):
        seqs = make_harris_sequences(EXP1, 5, 8)
        rep = harris_test(Dirichlet(5.0, EXP1), seqs, 10_000, SeededRng(20))
        assert rep.passed and rep.statistics["sequences_passed"] == 5

    def test_nig_passes(self):
        rep = harris_test(NIG(2.0, EXP1), make_harris_sequences(EXP1, 3, 6), 5_000, SeededRng(21))
        assert rep.passed

    def test_escape_charge_fails_deterministically(self):
        seqs = make_harris_sequences(EXP1, 5, 8)
        rep = harris_test(escape_charge(), seqs)
        assert not rep.passed
        tail = [d for d in rep.details if d["sequence"] == "tail"]
        assert [d["value"] for d in tail] == [1.0] * 8
        assert rep.statistics["sequences_passed"] == 4
        assert rep.to_json(False) == harris_test(escape_charge(), seqs).to_json(False)

    def test_base_measure_as_charge_passes(self):
        G0 = Gaussian(1.0, 2.0)
        assert harris_test(G0, make_harris_sequences(G0, 4, 10)).passed

    def test_polya_tree_rejected(self):
        with pytest.raises(TypeError):
            harris_test(PolyaTree(EXP1, 1.0), make_harris_sequences(EXP1, 2, 2), 10, SeededRng(0))


class TestReportSerialization:
    def test_reproducible(self):
        run = lambda: projectivity_test(Dirichlet(2.0, EXP1), L3, L2, 5000, SeededRng(7, (0, 1))).to_json(False)
        assert run() == run()

    def test_json_round_trip(self):
        rep = mean_condition_test(Dirichlet(2.0, EXP1), L2, 1000, SeededRng(8))
        d = json.loads(rep.to_json())
        assert d["test"] == "mean_condition" and d["seed"] == 8
        assert TestReport.from_dict(d).to_json() == rep.to_json()

    def test_csv_rows(self):
        rep = harris_test(escape_charge(), make_harris_sequences(EXP1, 2, 3))
        lines = rep.to_csv().strip().splitlines()
        assert len(lines) == 1 + 6
        assert "inf" in rep.to_json()
