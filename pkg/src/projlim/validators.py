"""Monte Carlo checks of projectivity, the mean-measure condition and the
Harris criterion for countable additivity."""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from projlim.errors import NotARefinementError, UnsupportedBaseMeasureError
from projlim.families import (
    Dirichlet,
    ZeroParameterWarning,
    MarginalFamily,
    NIG,
    PolyaTree,
    TabulatedDirichlet,
    family_mean,
    family_to_spec,
)
from projlim.intervals import INF, Partition, QSet, _fmt, apply_fJI, coarsening_of
from projlim.measures import BaseMeasure, Charge, phi_I
from projlim.rng import RngLike, SeededRng, as_seeded, replicate
from projlim.samplers import sample_marginal
from projlim.stats import ks_two_sample, mean_and_se, variance_and_se

KS_LEVEL = 0.01
MEAN_K_SE = 3.0
MONOTONE_K_SE = 2.0
CHARGE_LIMIT_TOL = 0.05


def _py(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_py(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _py(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_py(x) for x in v]
    return v


@dataclass
class TestReport:
    """Outcome of one validator run.

    ``metadata`` holds run-dependent fields such as timestamps and is the only
    part excluded from reproducibility comparisons.
    """

    __test__ = False

    name: str
    passed: bool
    statistics: dict[str, Any]
    thresholds: dict[str, Any]
    sample_sizes: dict[str, int]
    details: list[dict[str, Any]]
    seed: int | None = None
    stream: tuple[int, ...] = ()
    config: dict[str, Any] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_metadata: bool = True) -> dict:
        out = {
            "test": self.name,
            "passed": bool(self.passed),
            "statistics": _py(self.statistics),
            "thresholds": _py(self.thresholds),
            "sample_sizes": _py(self.sample_sizes),
            "seed": self.seed,
            "stream": list(self.stream),
            "config": _py(self.config),
            "details": _py(self.details),
        }
        if include_metadata:
            out["metadata"] = _py(self.metadata)
        return out

    def to_json(self, include_metadata: bool = True) -> str:
        return json.dumps(self.to_dict(include_metadata), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        keys = list(self.details[0]) if self.details else []
        w = csv.DictWriter(buf, fieldnames=["test", *keys], lineterminator="\n")
        w.writeheader()
        for row in self.details:
            w.writerow({"test": self.name, **_py(row)})
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        return cls(
            name=d["test"], passed=bool(d["passed"]), statistics=d.get("statistics", {}),
            thresholds=d.get("thresholds", {}), sample_sizes=d.get("sample_sizes", {}),
            details=d.get("details", []), seed=d.get("seed"), stream=tuple(d.get("stream", ())),
            config=d.get("config", {}), metadata=d.get("metadata", {}),
        )


def _family_config(F) -> dict:
    try:
        return family_to_spec(F)
    except AttributeError:
        return {"variant": type(F).__name__}


def _draws(F, I, n, rng, threads):
    return replicate(lambda gen, m: sample_marginal(F, I, gen, m), n, rng, threads)


def projectivity_test(F: MarginalFamily, J: Partition, I: Partition, N: int, rng: RngLike,
                      threads: int = 1, level: float = KS_LEVEL) -> TestReport:
    """Compare fine draws pushed onto I against direct draws on I, coordinate
    by coordinate, with Bonferroni-corrected two-sample KS tests."""
    g = coarsening_of(I, J)
    if g is None:
        raise NotARefinementError(f"{J!r} does not refine {I!r}")
    root = as_seeded(rng)
    pushed = apply_fJI(g, _draws(F, J, N, root.spawn(0), threads))
    direct = _draws(F, I, N, root.spawn(1), threads)
    threshold = level / len(I)
    details = []
    for i in range(len(I)):
        d, p = ks_two_sample(pushed[:, i], direct[:, i])
        details.append({"coordinate": i, "ks_statistic": d, "p_value": p,
                        "pushed_mean": pushed[:, i].mean(), "direct_mean": direct[:, i].mean(),
                        "pass": p > threshold})
    min_p = min(r["p_value"] for r in details)
    return TestReport(
        name="projectivity",
        passed=all(r["pass"] for r in details),
        statistics={"min_p_value": min_p, "max_ks_statistic": max(r["ks_statistic"] for r in details)},
        thresholds={"p_value_min": threshold, "level": level, "bonferroni_m": len(I)},
        sample_sizes={"pushed": N, "direct": N},
        details=details, seed=root.seed, stream=root.stream,
        config={"family": _family_config(F), "fine": J.to_text(), "coarse": I.to_text()},
    )


def mean_condition_test(F: MarginalFamily, I: Partition, N: int, rng: RngLike, threads: int = 1,
                        reference_base: BaseMeasure | None = None,
                        k_se: float = MEAN_K_SE) -> TestReport:
    """Empirical mean of X_I against the base-measure cell masses.

    ``reference_base`` replaces the family's base measure in the expected
    value, which is how the power of the check is measured. Dirichlet
    families also have their coordinate variances checked against
    ``p (1 - p) / (alpha + 1)``.
    """
    root = as_seeded(rng)
    x = _draws(F, I, N, root, threads)
    expected = (phi_I(reference_base, I) if reference_base is not None else family_mean(F, I)).masses
    mean, se = mean_and_se(x)
    check_var = isinstance(F, Dirichlet)
    if check_var:
        var, var_se = variance_and_se(x)
        var_target = expected * (1.0 - expected) / (F.alpha + 1.0)
    details = []
    for i in range(len(I)):
        row = {"coordinate": i, "expected_mean": expected[i], "empirical_mean": mean[i],
               "se": se[i], "mean_pass": abs(mean[i] - expected[i]) <= k_se * se[i]}
        if check_var:
            row.update({"expected_var": var_target[i], "empirical_var": var[i], "var_se": var_se[i],
                        "var_pass": abs(var[i] - var_target[i]) <= k_se * var_se[i]})
        row["pass"] = row["mean_pass"] and row.get("var_pass", True)
        details.append(row)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, np.abs(mean - expected) / se, np.where(mean == expected, 0.0, np.inf))
    stats = {"max_abs_z_mean": float(z.max())}
    if check_var:
        with np.errstate(divide="ignore", invalid="ignore"):
            zv = np.where(var_se > 0, np.abs(var - var_target) / var_se, 0.0)
        stats["max_abs_z_var"] = float(zv.max())
    cfg = {"family": _family_config(F), "partition": I.to_text()}
    if reference_base is not None:
        cfg["reference_base"] = reference_base.to_spec()
    return TestReport(
        name="mean_condition", passed=all(r["pass"] for r in details), statistics=stats,
        thresholds={"k_se": k_se}, sample_sizes={"draws": N}, details=details,
        seed=root.seed, stream=root.stream, config=cfg,
    )


@dataclass(frozen=True)
class HarrisSequence:
    """A decreasing run A_1 ⊇ ... ⊇ A_N of single intervals [a_n, e) sharing
    an excluded right end ``e`` (+inf for tails) with strictly increasing
    left ends.

    The generating rule pushes a_n to e, so the full sequence has empty
    intersection; the finite prefix is checked for these properties.
    """

    label: str
    sets: tuple[QSet, ...]

    def __post_init__(self):
        if not self.sets:
            raise ValueError("empty Harris sequence")
        ends = set()
        lefts = []
        for A in self.sets:
            if len(A.intervals) != 1:
                raise ValueError(f"{self.label}: sets must be single intervals")
            a, b = A.intervals[0]
            lefts.append(a)
            ends.add(b)
        if len(ends) != 1:
            raise ValueError(f"{self.label}: sets must share their right end")
        if any(b <= a for a, b in zip(lefts, lefts[1:])):
            raise ValueError(f"{self.label}: left ends must increase strictly")
        for A, B in zip(self.sets, self.sets[1:]):
            if not B.issubset(A):
                raise ValueError(f"{self.label}: sequence is not decreasing")

    @property
    def escape(self) -> float:
        return self.sets[0].intervals[0][1]

    def partition(self) -> Partition:
        """The partition generated by the sets: the complement of A_1, the
        successive differences, and A_N."""
        cells = [~self.sets[0]]
        cells += [A - B for A, B in zip(self.sets, self.sets[1:])]
        cells.append(self.sets[-1])
        return Partition(c for c in cells if not c.is_empty)

    def membership(self, P: Partition) -> np.ndarray:
        """Boolean (depth, cell) matrix: cell k of P lies inside A_n."""
        return np.array([[cell.issubset(A) for cell in P] for A in self.sets])


@dataclass(frozen=True)
class HarrisSequenceSet:
    base: BaseMeasure
    sequences: tuple[HarrisSequence, ...]

    @property
    def depth(self) -> int:
        return len(self.sequences[0].sets)


def make_harris_sequences(G0: BaseMeasure, M: int, N: int) -> HarrisSequenceSet:
    """One tail sequence [q(1 - 2**-n), inf) and M - 1 sequences
    [q_p - 2**-n, q_p) shrinking onto the quantiles q_p, p = m / M."""
    if not G0.invertible:
        raise UnsupportedBaseMeasureError(f"{G0.kind} base measure has no continuous cdf")
    if M < 1 or N < 1:
        raise ValueError("need at least one sequence of depth at least one")
    depths = np.arange(1, N + 1)
    tails = np.asarray(G0.quantile(1.0 - 2.0 ** -depths), dtype=np.float64)
    seqs = [HarrisSequence("tail", tuple(QSet(((float(t), INF),)) for t in tails))]
    for m in range(1, M):
        q = float(G0.quantile(m / M))
        seqs.append(HarrisSequence(
            f"left_of_q{m}/{M}", tuple(QSet(((q - 2.0**-n, q),)) for n in depths)))
    return HarrisSequenceSet(G0, tuple(seqs))


def harris_test(source: MarginalFamily | Charge, seqs: HarrisSequenceSet, N_draws: int = 0,
                rng: RngLike | None = None, threads: int = 1,
                k_se: float = MEAN_K_SE, limit_tol: float = CHARGE_LIMIT_TOL) -> TestReport:
    """Check that the (expected) charge of each decreasing sequence vanishes.

    Random families: X(A_n) is evaluated coherently per draw on the partition
    generated by the sequence; each mean curve must be non-increasing within
    2 SE and end no higher than G0(A_N) + 3 SE. Deterministic charges are
    evaluated exactly; they pass iff every curve is non-increasing and ends
    at or below ``limit_tol``, the finite-depth stand-in for a zero limit.
    """
    details = []
    seq_pass = []
    is_charge = isinstance(source, Charge)
    root = None if is_charge else as_seeded(rng)
    if not is_charge and isinstance(source, (PolyaTree, TabulatedDirichlet)):
        raise TypeError("harris_test needs a family defined on every partition (Dirichlet or NIG)")
    if not is_charge and N_draws < 2:
        raise ValueError("random families need N_draws >= 2")
    ref_base = seqs.base if is_charge else source.base
    for m, s in enumerate(seqs.sequences):
        ref = np.array([ref_base(A) for A in s.sets])
        if is_charge:
            vals = np.array([source(A) for A in s.sets])
            se = np.zeros_like(vals)
            ok_mono = bool(np.all(np.diff(vals) <= 0))
            ok_limit = bool(vals[-1] <= limit_tol)
            track = np.ones(vals.shape, dtype=bool)
        else:
            P = s.partition()
            member = s.membership(P)
            # cells outside the support of G0 are expected here
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ZeroParameterWarning)
                x = replicate(lambda gen, k: sample_marginal(source, P, gen, k),
                              N_draws, root.spawn(m), threads)
            per_depth = np.stack([x[:, row].sum(axis=1) for row in member], axis=1)
            vals, se = mean_and_se(per_depth)
            ok_mono = bool(np.all(vals[1:] <= vals[:-1] + MONOTONE_K_SE * se[1:]))
            ok_limit = bool(vals[-1] <= ref[-1] + k_se * se[-1])
            track = np.abs(vals - ref) <= k_se * se
        for n in range(len(s.sets)):
            details.append({"sequence": s.label, "depth": n + 1, "value": vals[n], "se": se[n],
                            "base_mass": ref[n], "tracking_pass": bool(track[n])})
        seq_pass.append(ok_mono and ok_limit)
        details[-1]["sequence_pass"] = seq_pass[-1]
    for row in details:
        row.setdefault("sequence_pass", "")
    if is_charge:
        src_cfg = {"charge": repr(source)}
        if isinstance(source, BaseMeasure):
            src_cfg = {"charge": source.to_spec()}
    else:
        src_cfg = {"family": _family_config(source)}
    return TestReport(
        name="harris",
        passed=all(seq_pass),
        statistics={"sequences_passed": int(sum(seq_pass)), "sequences": len(seq_pass),
                    "tracking_all": all(r["tracking_pass"] for r in details),
                    "deepest_values": [r["value"] for r in details if r["depth"] == seqs.depth]},
        thresholds={"k_se": k_se, "monotone_k_se": MONOTONE_K_SE}
        | ({"limit_tol": limit_tol} if is_charge else {}),
        sample_sizes={"draws": 0 if is_charge else N_draws, "depth": seqs.depth},
        details=details,
        seed=None if root is None else root.seed,
        stream=() if root is None else root.stream,
        config={**src_cfg, "base_measure": seqs.base.to_spec(),
                "sequences": {s.label: [f"[{_fmt(a)}, {_fmt(b)})" for A in s.sets for a, b in A.intervals]
                              for s in seqs.sequences}},
    )
