"""Shared fixtures: frozen hand-checked grids and a brute-force matcher."""

import itertools
import math

import numpy as np
import pytest

from cubicalmp.metrics import DIAGONAL, matching_cost

# 5x5 moat fixture, checked by hand: sublevel at 1 is the outer ring (one
# component with one hole), the center pixel joins alone at 2, and at 4 the
# moat floods, merging the center and filling the hole.
RING5 = np.array(
    [
        [1, 1, 1, 1, 1],
        [1, 4, 4, 4, 1],
        [1, 4, 2, 4, 1],
        [1, 4, 4, 4, 1],
        [1, 1, 1, 1, 1],
    ],
    dtype=np.float64,
)
RING5_DIM0 = [(1.0, math.inf), (2.0, 4.0)]
RING5_DIM1 = [(1.0, 4.0)]

# L-shaped mask with its exact Manhattan distance field, worked by hand
LSHAPE_MASK = np.array(
    [
        [1, 0, 0, 0],
        [1, 0, 0, 0],
        [1, 1, 1, 0],
        [0, 0, 0, 0],
    ],
    dtype=bool,
)
LSHAPE_DIST = np.array(
    [
        [0, 1, 2, 3],
        [0, 1, 1, 2],
        [0, 0, 0, 1],
        [1, 1, 1, 2],
    ],
    dtype=np.int64,
)

# 3x3 two-channel toy: 3 thresholds per channel give 9 binary images
TOY_CH1 = np.array([[0, 1, 2], [1, 2, 0], [2, 0, 1]], dtype=np.float64)
TOY_CH2 = np.array([[2, 1, 0], [0, 2, 1], [1, 0, 2]], dtype=np.float64)
TOY_THRESHOLDS = [0.0, 1.0, 2.0]


def value_multiset(diagram, dim):
    """Sorted (birth, death) list of one dimension, for multiset equality."""
    return sorted((p.birth, p.death) for p in diagram.pairs(dim))


def brute_force_wasserstein(points_a: np.ndarray, points_b: np.ndarray, p: float) -> float:
    """Minimum matching cost by full enumeration (diagonal-augmented)."""
    na, nb = len(points_a), len(points_b)
    if na + nb == 0:
        return 0.0
    best = math.inf
    for k in range(min(na, nb) + 1):
        for chosen_a in itertools.combinations(range(na), k):
            for chosen_b in itertools.permutations(range(nb), k):
                matching = list(zip(chosen_a, chosen_b))
                matching += [(i, DIAGONAL) for i in range(na) if i not in chosen_a]
                matching += [(DIAGONAL, j) for j in range(nb) if j not in chosen_b]
                best = min(best, matching_cost(points_a, points_b, tuple(matching), p))
    return best


def random_valid_stack(rng, num_slices, height, width, num_levels) -> np.ndarray:
    """Integer stack, pixelwise non-increasing along the slice axis."""
    raw = rng.integers(0, num_levels + 1, (num_slices, height, width))
    return np.ascontiguousarray(np.sort(raw, axis=0)[::-1])


def random_diagram(rng, max_pairs=6, span=10.0, integer=False):
    """(n, 2) random finite bars with positive persistence."""
    n = int(rng.integers(0, max_pairs + 1))
    if n == 0:
        return np.empty((0, 2))
    if integer:
        b = rng.integers(0, int(span) - 1, n)
        d = b + rng.integers(1, int(span) - b)
        return np.column_stack((b, d)).astype(np.float64)
    b = rng.random(n) * span * 0.8
    d = b + rng.random(n) * span * 0.2 + 1e-3
    return np.column_stack((b, d))


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
