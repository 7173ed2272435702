"""Distances between diagrams and vectorizations, and the stability harness.

Wasserstein distances are exact optima over diagonal-augmented matchings,
solved by assignment on the (n_a + n_b) square cost matrix. Costs are always
recomputed from the returned matching through one shared accumulation
routine, so reported costs are reproducible and exactly symmetric.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .filtrations import (
    CompactMultiFiltration,
    DEFAULT_EROSION_LEVELS,
    erosion_bifiltration,
    expand_bifiltration,
    staircase,
)
from .grids import ValueGrid
from .multipers import SlicedDiagrams, slice_rows
from .vectorize import (
    VectorizationParams,
    finite_bars,
    induced_mp_vectorization,
    MPVectorization,
)

# stands in for the diagonal in matching tuples
DIAGONAL = None

ESSENTIAL_MODES = ("exclude", "clip")


@dataclass(frozen=True)
class MatchingResult:
    """Optimal matching between two diagrams and its cost.

    ``matching`` is a perfect matching on the diagonal-augmented point sets:
    entries are (index into a's points, index into b's points) with None for
    the diagonal on either side. Indices refer to the canonicalized point
    arrays produced by ``matching_points`` with the same essential policy.
    """

    cost: float
    matching: tuple[tuple[int | None, int | None], ...]
    p: float


def matching_points(pairs, essential: str = "exclude", essential_clip: float | None = None) -> np.ndarray:
    """Finite (n, 2) point array a matching's indices refer to."""
    if essential not in ESSENTIAL_MODES:
        raise ValueError(f"essential must be one of {ESSENTIAL_MODES}")
    if essential == "clip":
        if essential_clip is None:
            raise ValueError("essential='clip' requires essential_clip")
        return finite_bars(pairs, float(essential_clip))
    return finite_bars(pairs, None)


def matching_cost(points_a: np.ndarray, points_b: np.ndarray, matching, p: float) -> float:
    """Cost of a given matching under the shared accumulation rule.

    Terms are L-infinity ground distances, diagonal partners costing half the
    bar length. Finite p sums p-th powers in ascending order before the root,
    making the result independent of matching entry order.
    """
    terms = []
    for ia, ib in matching:
        if ia is DIAGONAL and ib is DIAGONAL:
            continue
        if ib is DIAGONAL:
            b, d = points_a[ia]
            terms.append(0.5 * (d - b))
        elif ia is DIAGONAL:
            b, d = points_b[ib]
            terms.append(0.5 * (d - b))
        else:
            terms.append(
                max(
                    abs(points_a[ia][0] - points_b[ib][0]),
                    abs(points_a[ia][1] - points_b[ib][1]),
                )
            )
    if not terms:
        return 0.0
    if math.isinf(p):
        return float(max(terms))
    powered = sorted(float(t) ** p for t in terms)
    return float(math.fsum(powered) ** (1.0 / p))


def _augmented_matrix(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Real ground costs on the diagonal-augmented square matrix.

    Layout: rows = a-points then b-diagonal slots, columns = b-points then
    a-diagonal slots. Off-slot diagonal entries are forbidden (inf); the
    diagonal-to-diagonal block costs 0.
    """
    na, nb = pa.shape[0], pb.shape[0]
    n = na + nb
    mat = np.full((n, n), np.inf)
    if na and nb:
        mat[:na, :nb] = np.maximum(
            np.abs(pa[:, 0][:, None] - pb[:, 0][None, :]),
            np.abs(pa[:, 1][:, None] - pb[:, 1][None, :]),
        )
    if na:
        mat[np.arange(na), nb + np.arange(na)] = 0.5 * (pa[:, 1] - pa[:, 0])
    if nb:
        mat[na + np.arange(nb), np.arange(nb)] = 0.5 * (pb[:, 1] - pb[:, 0])
    mat[na:, nb:] = 0.0
    return mat


def _translate(rows, cols, na: int, nb: int):
    out = []
    for i, j in zip(rows, cols):
        out.append((int(i) if i < na else DIAGONAL, int(j) if j < nb else DIAGONAL))
    return tuple(out)


def _solve(pa: np.ndarray, pb: np.ndarray, p: float):
    na, nb = pa.shape[0], pb.shape[0]
    if na + nb == 0:
        return ()
    mat = _augmented_matrix(pa, pb)
    if math.isinf(p):
        candidates = np.unique(mat[np.isfinite(mat)])
        lo, hi = 0, candidates.size - 1
        best = None
        while lo <= hi:
            midx = (lo + hi) // 2
            forbidden = (mat > candidates[midx]).astype(np.float64)
            rows, cols = linear_sum_assignment(forbidden)
            if forbidden[rows, cols].sum() == 0.0:
                best = (rows, cols)
                hi = midx - 1
            else:
                lo = midx + 1
        rows, cols = best
    else:
        rows, cols = linear_sum_assignment(mat**p)
    return _translate(rows, cols, na, nb)


def _canonical_key(points: np.ndarray):
    return (points.shape[0], tuple(map(tuple, points)))


def wasserstein(
    pd_a,
    pd_b,
    p: float = 1.0,
    essential: str = "exclude",
    essential_clip: float | None = None,
) -> MatchingResult:
    """Exact p-Wasserstein distance between two one-dimension diagrams.

    Unmatched points pair with their L-infinity diagonal projection; p = inf
    gives the bottleneck distance (max term instead of the p-sum). Essential
    pairs are excluded by default or clipped to a finite death when
    ``essential='clip'``; the policy must be identical on both sides, which
    this function enforces by construction.
    """
    p = float(p)
    if not (p > 0.0 or math.isinf(p)):
        raise ValueError("p must be a positive real or inf")
    pa = matching_points(pd_a, essential, essential_clip)
    pb = matching_points(pd_b, essential, essential_clip)
    # solving in one canonical orientation keeps the distance exactly symmetric
    if _canonical_key(pb) < _canonical_key(pa):
        matching = tuple((ia, ib) for ib, ia in _solve(pb, pa, p))
    else:
        matching = _solve(pa, pb, p)
    return MatchingResult(matching_cost(pa, pb, matching, p), matching, p)


def _slice_cost(diag_a, diag_b, p, essential, essential_clip) -> float:
    """Distance between two full slice diagrams: dims solved separately and
    combined by the p-norm (max for p = inf)."""
    costs = [
        wasserstein(diag_a.pairs(k), diag_b.pairs(k), p, essential, essential_clip).cost
        for k in (0, 1)
    ]
    if math.isinf(p):
        return max(costs)
    return float(math.fsum(sorted(c**p for c in costs)) ** (1.0 / p))


def _slice_cost_task(args) -> float:
    return _slice_cost(*args)


def mp_diagram_distance(
    sliced_a: SlicedDiagrams,
    sliced_b: SlicedDiagrams,
    p: float = 1.0,
    essential: str = "exclude",
    essential_clip: float | None = None,
    workers: int = 1,
) -> float:
    """Sum over slices of the per-slice diagram distance."""
    if sliced_a.num_slices != sliced_b.num_slices:
        raise ValueError(
            f"slice counts differ: {sliced_a.num_slices} vs {sliced_b.num_slices}"
        )
    tasks = [
        (sliced_a[s], sliced_b[s], p, essential, essential_clip)
        for s in range(sliced_a.num_slices)
    ]
    if workers <= 1:
        costs = [_slice_cost_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            costs = list(pool.map(_slice_cost_task, tasks))
    return float(math.fsum(costs))


def _rows_of(v) -> np.ndarray:
    if isinstance(v, MPVectorization):
        arr = v.values
    else:
        arr = np.asarray(v, dtype=np.float64)
    if arr.ndim < 2:
        raise ValueError("expected at least a (rows, features) array")
    return arr.reshape(arr.shape[0], -1)


def mp_vectorization_distance(va, vb) -> float:
    """Sum over rows of the l2 distance between corresponding rows."""
    a = _rows_of(va)
    b = _rows_of(vb)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(math.fsum(np.sqrt(((a - b) ** 2).sum(axis=1)).tolist()))


def bottleneck_distance(diagram_a, diagram_b, dim: int, include_essential: bool = True) -> float:
    """Bottleneck distance of one dimension, essential births included.

    Essential pairs are matched to each other by sorted birth order; unequal
    essential counts make the distance infinite.
    """
    fa = finite_bars(diagram_a.pairs(dim), None)
    fb = finite_bars(diagram_b.pairs(dim), None)
    finite_part = wasserstein(fa, fb, math.inf).cost
    if not include_essential:
        return finite_part
    ea = sorted(p.birth for p in diagram_a.pairs(dim) if p.is_essential)
    eb = sorted(p.birth for p in diagram_b.pairs(dim) if p.is_essential)
    if len(ea) != len(eb):
        return math.inf
    ess_part = max((abs(x - y) for x, y in zip(ea, eb)), default=0.0)
    return max(finite_part, ess_part)


def lipschitz_bound(base: str, params: VectorizationParams, persistence_cap: float) -> float:
    """Certified stability constant: l2 change of one slice vector per unit
    of p=1 matching cost.

    Valid for diagrams whose values and bar lengths stay within
    ``persistence_cap``; the silhouette bound additionally needs every bar
    weight at least 1, which holds for integer-valued diagrams (persistence
    >= 1) with nonnegative exponents.
    """
    cap = float(persistence_cap)
    if cap < 1.0:
        raise ValueError("persistence_cap must be >= 1")
    w = params.weight_exponent
    wmax = max(w) if isinstance(w, tuple) else w
    q = params.num_samples
    if base == "perslay":
        return math.sqrt(q) * (2.0 + wmax) * cap**wmax
    if base == "silhouette":
        return math.sqrt(q) * cap**wmax * ((2.0 + wmax) + cap * (1.0 + wmax))
    raise ValueError(f"no certified constant for base {base!r}")


@dataclass(frozen=True)
class StabilityConfig:
    """How to build comparable bifiltrations from two input images."""

    kind: str = "cmf"  # "cmf" | "staircase" | "erosion"
    num_levels: int = 16  # staircase quantization levels
    thresholds: tuple = ()  # erosion column thresholds
    erosion_levels: tuple = DEFAULT_EROSION_LEVELS
    strict_erosion: bool = True
    base: str = "perslay"
    p: float = 1.0
    constant: float | None = None  # None derives the certified bound


@dataclass(frozen=True)
class StabilityReport:
    """Empirical check of the vectorization stability inequality."""

    vectorization_distance: float  # distance between induced vectorizations
    diagram_distance: float  # summed sliced diagram distance at p
    sup_difference: float  # pixelwise sup gap of the filtration functions
    ratio_vect_to_diagram: float
    ratio_vect_to_sup: float
    constant: float  # bound for vectorization vs diagram distance
    constant_sup: float  # bound for vectorization vs sup difference
    slice_bottlenecks: tuple[float, ...]
    bottleneck_within_sup: bool
    violation: bool
    base: str
    p: float


def _build_bifiltration(image, config: StabilityConfig):
    if config.kind == "cmf":
        cmf = image
        if not isinstance(cmf, CompactMultiFiltration):
            cmf = CompactMultiFiltration(np.asarray(image), config.num_levels)
        return expand_bifiltration(cmf)
    if config.kind == "staircase":
        stack = staircase(np.asarray(image, dtype=np.float64), config.num_levels)
        return expand_bifiltration(CompactMultiFiltration(stack, config.num_levels))
    if config.kind == "erosion":
        grid = image if isinstance(image, ValueGrid) else ValueGrid(np.asarray(image))
        return erosion_bifiltration(
            grid, config.thresholds, config.erosion_levels, config.strict_erosion
        )
    raise ValueError(f"unknown filtration kind {config.kind!r}")


def _stacked_vectorization(sliced: SlicedDiagrams, base: str, params: VectorizationParams) -> np.ndarray:
    v0 = induced_mp_vectorization(sliced, base, params, 0)
    v1 = induced_mp_vectorization(sliced, base, params, 1)
    return np.stack([v0, v1], axis=1)


def stability_report(
    image_a,
    image_b,
    config: StabilityConfig,
    params: VectorizationParams,
) -> StabilityReport:
    """Compare the full pipeline on two images against its stability bounds.

    Computes the induced-vectorization distance, the sliced diagram distance
    (essential pairs clipped like vectorization does), and the sup difference
    of the slice filtration functions, then checks the distance ratios against
    certified constants. The sup-side constant folds in the total matched
    point count; for p > 1 a Holder factor converts the p-cost bound.
    """
    bif_a = _build_bifiltration(image_a, config)
    bif_b = _build_bifiltration(image_b, config)
    if bif_a.membership.shape != bif_b.membership.shape:
        raise ValueError("bifiltration shapes differ; images not comparable")
    sliced_a = slice_rows(bif_a)
    sliced_b = slice_rows(bif_b)
    sup = float(np.abs(bif_a.first_activation() - bif_b.first_activation()).max())
    clip = params.clip_value()
    d_p = mp_diagram_distance(sliced_a, sliced_b, config.p, "clip", clip)
    vec_a = _stacked_vectorization(sliced_a, config.base, params)
    vec_b = _stacked_vectorization(sliced_b, config.base, params)
    d_vec = mp_vectorization_distance(vec_a, vec_b)

    cap = bif_a.grid_cols + 1.0
    if config.constant is not None:
        base_constant = float(config.constant)
    else:
        base_constant = lipschitz_bound(config.base, params, cap)
    counts = []
    for s in range(sliced_a.num_slices):
        total = 0
        for k in (0, 1):
            na = matching_points(sliced_a[s].pairs(k), "clip", clip).shape[0]
            nb = matching_points(sliced_b[s].pairs(k), "clip", clip).shape[0]
            total += na + nb
        counts.append(total)
    max_count = max(counts) if counts else 0
    if math.isinf(config.p):
        holder = float(max_count)
    else:
        holder = float(max_count) ** (1.0 - 1.0 / config.p) if max_count else 0.0
    constant = base_constant * max(1.0, holder)
    constant_sup = base_constant * float(sum(counts))

    bottlenecks = tuple(
        _slice_cost(sliced_a[s], sliced_b[s], math.inf, "clip", clip)
        for s in range(sliced_a.num_slices)
    )
    within = all(bn <= sup + 1e-12 for bn in bottlenecks)
    ratio_d = d_vec / d_p if d_p > 0 else 0.0
    ratio_sup = d_vec / sup if sup > 0 else 0.0
    tol = 1e-9
    violation = (d_vec > constant * d_p + tol) or (d_vec > constant_sup * sup + tol)
    return StabilityReport(
        vectorization_distance=d_vec,
        diagram_distance=d_p,
        sup_difference=sup,
        ratio_vect_to_diagram=ratio_d,
        ratio_vect_to_sup=ratio_sup,
        constant=constant,
        constant_sup=constant_sup,
        slice_bottlenecks=bottlenecks,
        bottleneck_within_sup=within,
        violation=violation,
        base=config.base,
        p=config.p,
    )
