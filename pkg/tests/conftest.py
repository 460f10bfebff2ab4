import math

import numpy as np
import pytest
from hypothesis import strategies as st

from projlim.intervals import Partition, QSet, qset_normalize

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    def record(number, title, passed, detail=""):
        line = f"[acceptance {number}] {'PASS' if passed else 'FAIL'}  {title}  {detail}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


endpoints = st.integers(-20, 20).map(float)


@st.composite
def raw_intervals(draw, max_size=6):
    out = []
    for _ in range(draw(st.integers(0, max_size))):
        a, b = sorted(draw(st.lists(endpoints, min_size=2, max_size=2, unique=True)))
        if draw(st.integers(0, 9)) == 0:
            a = -math.inf
        if draw(st.integers(0, 9)) == 0:
            b = math.inf
        out.append((a, b))
    return out


qsets = raw_intervals().map(qset_normalize)


def random_partition(rng: np.random.Generator, n_cuts: int = 8, n_labels: int = 4) -> Partition:
    """Random partition whose cells may be unions of several intervals."""
    cuts = np.unique(np.round(rng.normal(0.0, 3.0, n_cuts), 3))
    edges = [-math.inf, *cuts.tolist(), math.inf]
    labels = rng.integers(0, n_labels, len(edges) - 1)
    labels[: min(n_labels, len(labels))] = np.arange(min(n_labels, len(labels)))
    rng.shuffle(labels)
    cells = {}
    for lab, a, b in zip(labels, edges, edges[1:]):
        cells.setdefault(lab, []).append((a, b))
    return Partition(qset_normalize(v) for v in cells.values())


def random_coarsening(rng: np.random.Generator, J: Partition, n_blocks: int) -> Partition:
    """Merge the cells of J into at most n_blocks random groups."""
    labels = rng.integers(0, n_blocks, len(J))
    groups = {}
    for lab, cell in zip(labels, J):
        groups.setdefault(lab, []).extend(cell.intervals)
    return Partition(qset_normalize(v) for v in groups.values())


def membership_grid(qs: QSet, pts: np.ndarray) -> np.ndarray:
    """Brute-force membership oracle working from raw interval bounds."""
    return np.array([any(a <= x < b for a, b in qs.intervals) for x in pts])
