"""Matching distances, axioms, bottleneck, sliced sums, stability harness."""

import math

import numpy as np
import pytest

from cubicalmp import (
    CompactMultiFiltration,
    MatchingResult,
    StabilityConfig,
    ValueGrid,
    VectorizationParams,
    bottleneck_distance,
    compute_pd,
    expand_bifiltration,
    lipschitz_bound,
    matching_cost,
    matching_points,
    mp_diagram_distance,
    mp_vectorization_distance,
    slice_rows,
    stability_report,
    wasserstein,
)

from conftest import brute_force_wasserstein, random_diagram, random_valid_stack

INF = math.inf


# ----------------------------------------------------------- matching costs

def test_matching_points_policies():
    pairs = [(0.0, 2.0), (1.0, INF)]
    assert matching_points(pairs).tolist() == [[0.0, 2.0]]
    clipped = matching_points(pairs, "clip", 5.0)
    assert clipped.tolist() == [[0.0, 2.0], [1.0, 5.0]]
    with pytest.raises(ValueError):
        matching_points(pairs, "clip")
    with pytest.raises(ValueError):
        matching_points(pairs, "keep")


def test_matching_cost_hand_values():
    a = np.array([[0.0, 2.0]])
    b = np.array([[0.5, 2.5]])
    direct = ((0, 0),)
    both_diag = ((0, None), (None, 0))
    assert matching_cost(a, b, direct, 1.0) == 0.5
    assert matching_cost(a, b, both_diag, 1.0) == 2.0  # 1.0 + 1.0
    assert matching_cost(a, b, direct, INF) == 0.5
    assert matching_cost(a, b, both_diag, INF) == 1.0


def test_matching_cost_order_independent(rng):
    a = random_diagram(rng, max_pairs=5)
    b = random_diagram(rng, max_pairs=5)
    n = min(len(a), len(b))
    matching = tuple((i, i) for i in range(n))
    matching += tuple((i, None) for i in range(n, len(a)))
    matching += tuple((None, j) for j in range(n, len(b)))
    for p in (1.0, 2.0, 3.0):
        c1 = matching_cost(a, b, matching, p)
        c2 = matching_cost(a, b, tuple(reversed(matching)), p)
        assert c1 == c2  # bitwise, thanks to sorted accumulation


# -------------------------------------------------------------- wasserstein

def test_wasserstein_identical_is_zero(rng):
    bars = random_diagram(rng, max_pairs=8)
    for p in (1.0, 2.0, INF):
        assert wasserstein(bars, bars, p).cost == 0.0


def _real(matching):
    """Drop the zero-cost diagonal-to-diagonal slots."""
    return {m for m in matching if m != (None, None)}


def test_wasserstein_single_point_vs_empty():
    res = wasserstein([(1.0, 5.0)], [], 1.0)
    assert res.cost == 2.0  # half the bar length to the diagonal
    assert _real(res.matching) == {(0, None)}
    assert wasserstein([], [(1.0, 5.0)], INF).cost == 2.0


def test_wasserstein_prefers_cheaper_route():
    # direct match (0.1) beats two diagonal hops (1.0 + 1.05)
    a = [(0.0, 2.0)]
    b = [(0.1, 2.1)]
    res = wasserstein(a, b, 1.0)
    assert res.cost == pytest.approx(0.1)
    assert _real(res.matching) == {(0, 0)}
    # far-apart bars fall back to the diagonal
    far = wasserstein([(0.0, 2.0)], [(10.0, 12.0)], 1.0)
    assert far.cost == pytest.approx(2.0)
    assert _real(far.matching) == {(0, None), (None, 0)}


def test_wasserstein_matches_brute_force(rng):
    mismatches = 0
    for trial in range(40):
        p = [1.0, 2.0, INF][trial % 3]
        a = random_diagram(rng, max_pairs=4, integer=bool(trial % 2))
        b = random_diagram(rng, max_pairs=4, integer=bool(trial % 2))
        got = wasserstein(a, b, p).cost
        want = brute_force_wasserstein(a, b, p)
        if got != want:
            mismatches += 1
    assert mismatches == 0


def test_wasserstein_cost_equals_matching_recompute(rng):
    # the reported cost is literally the cost of the reported matching,
    # evaluated on the canonicalized point arrays its indices refer to
    for trial in range(30):
        p = [1.0, 2.0, INF][trial % 3]
        a = random_diagram(rng, max_pairs=6)
        b = random_diagram(rng, max_pairs=6)
        res = wasserstein(a, b, p)
        pa, pb = matching_points(a), matching_points(b)
        assert res.cost == matching_cost(pa, pb, res.matching, p)


def test_wasserstein_axioms(rng):
    for trial in range(60):
        p = [1.0, 2.0, INF][trial % 3]
        a = random_diagram(rng, max_pairs=5)
        b = random_diagram(rng, max_pairs=5)
        c = random_diagram(rng, max_pairs=5)
        dab = wasserstein(a, b, p).cost
        dba = wasserstein(b, a, p).cost
        dac = wasserstein(a, c, p).cost
        dcb = wasserstein(c, b, p).cost
        assert dab == dba  # exact, canonical orientation
        assert dab >= 0.0
        assert dab <= dac + dcb + 1e-9
    assert wasserstein([], [], 2.0).cost == 0.0


def test_wasserstein_monotone_under_far_addition(rng):
    # appending a far-away bar to both sides adds exactly nothing
    a = random_diagram(rng, max_pairs=5)
    b = random_diagram(rng, max_pairs=5)
    base = wasserstein(a, b, 1.0).cost
    far = [(100.0, 104.0)]
    a2 = np.vstack([a, far]) if len(a) else np.array(far)
    b2 = np.vstack([b, far]) if len(b) else np.array(far)
    assert wasserstein(a2, b2, 1.0).cost == pytest.approx(base, abs=1e-12)


def test_wasserstein_essential_clip_policy():
    a = [(0.0, INF)]
    b = [(0.0, 6.0)]
    assert wasserstein(a, b, 1.0).cost == 3.0  # essential excluded
    assert wasserstein(a, b, 1.0, "clip", 6.0).cost == 0.0
    with pytest.raises(ValueError):
        wasserstein(a, b, 0.0)


# --------------------------------------------------------------- bottleneck

def _pd(values):
    return compute_pd(ValueGrid(np.asarray(values, dtype=np.float64)))


def test_bottleneck_identical_zero():
    pd = _pd([[0, 1], [2, 3]])
    assert bottleneck_distance(pd, pd, 0) == 0.0
    assert bottleneck_distance(pd, pd, 1) == 0.0


def test_bottleneck_tracks_perturbation():
    a = _pd([[0, 5], [5, 0]])
    b = _pd([[0.25, 5], [5, 0]])
    assert bottleneck_distance(a, b, 0) == pytest.approx(0.25)


def test_bottleneck_unequal_essentials_infinite():
    from cubicalmp import PersistenceDiagram, PersistencePair

    def diag(*bars):
        return PersistenceDiagram(
            pairs_dim0=tuple(PersistencePair(0, b, d) for b, d in bars)
        )

    one = diag((0.0, INF), (1.0, 2.0))
    two = diag((0.0, INF), (0.5, INF), (1.0, 2.0))
    assert bottleneck_distance(one, two, 0) == INF
    assert bottleneck_distance(one, two, 0, include_essential=False) == 0.0
    # equal counts: matched by sorted birth order
    shifted = diag((0.25, INF), (1.0, 2.0))
    assert bottleneck_distance(one, shifted, 0) == pytest.approx(0.25)


def test_bottleneck_essential_birth_gap():
    a = _pd([[1.0, 2.0]])
    b = _pd([[3.0, 4.0]])
    # essential births 1 vs 3 dominate; finite parts are tiny bars
    got = bottleneck_distance(a, b, 0)
    assert got == pytest.approx(2.0)


# ----------------------------------------------------------- sliced metrics

def _sliced_pair(rng, m=3, n=5, h=4, w=4):
    out = []
    for _ in range(2):
        stack = random_valid_stack(rng, m, h, w, n)
        bif = expand_bifiltration(CompactMultiFiltration(stack, num_levels=n))
        out.append(slice_rows(bif))
    return out


def test_mp_diagram_distance_properties(rng):
    sa, sb = _sliced_pair(rng)
    d = mp_diagram_distance(sa, sb, 1.0)
    assert d >= 0.0
    assert mp_diagram_distance(sa, sa, 1.0) == 0.0
    assert mp_diagram_distance(sb, sa, 1.0) == d  # symmetric
    par = mp_diagram_distance(sa, sb, 1.0, workers=2)
    assert par == d


def test_mp_diagram_distance_slice_count_mismatch(rng):
    sa, _ = _sliced_pair(rng, m=3)
    sb, _ = _sliced_pair(rng, m=4)
    with pytest.raises(ValueError):
        mp_diagram_distance(sa, sb)


def test_mp_diagram_distance_is_sum_of_slice_costs(rng):
    from cubicalmp.metrics import _slice_cost

    sa, sb = _sliced_pair(rng, m=4)
    for p in (1.0, 2.0, INF):
        total = mp_diagram_distance(sa, sb, p)
        manual = math.fsum(
            _slice_cost(sa[s], sb[s], p, "exclude", None) for s in range(4)
        )
        assert total == pytest.approx(manual, rel=0, abs=1e-12)


def test_mp_vectorization_distance_examples():
    a = np.array([[0.0, 0.0], [3.0, 4.0]])
    b = np.zeros((2, 2))
    assert mp_vectorization_distance(a, b) == 5.0  # row norms 0 and 5
    with pytest.raises(ValueError):
        mp_vectorization_distance(np.zeros((2, 2)), np.zeros((3, 2)))


def test_mp_vectorization_distance_stacked_rows(rng):
    # a slice's row concatenates both dimension vectors before the norm
    a = rng.random((3, 2, 7))
    b = rng.random((3, 2, 7))
    got = mp_vectorization_distance(a, b)
    manual = math.fsum(
        float(np.linalg.norm((a[s] - b[s]).ravel())) for s in range(3)
    )
    assert got == pytest.approx(manual, rel=0, abs=1e-12)


# -------------------------------------------------------- lipschitz / bounds

def test_lipschitz_bound_values():
    params = VectorizationParams.default(16, 10.0)
    c_p = lipschitz_bound("perslay", params, 10.0)
    c_s = lipschitz_bound("silhouette", params, 10.0)
    assert c_p == pytest.approx(4.0 * (2.0 + 1.0) * 10.0)
    assert c_s == pytest.approx(4.0 * 10.0 * ((2.0 + 1.0) + 10.0 * 2.0))
    assert c_s > c_p
    with pytest.raises(ValueError):
        lipschitz_bound("betti", params, 10.0)


# ---------------------------------------------------------------- stability

def test_stability_identical_inputs_all_zero(rng):
    stack = random_valid_stack(rng, 3, 5, 5, 6)
    cmf = CompactMultiFiltration(stack, num_levels=6)
    params = VectorizationParams.default(20, 7.0)
    rep = stability_report(cmf, cmf, StabilityConfig(kind="cmf"), params)
    assert rep.vectorization_distance == 0.0
    assert rep.diagram_distance == 0.0
    assert rep.sup_difference == 0.0
    assert rep.slice_bottlenecks == (0.0, 0.0, 0.0)
    assert not rep.violation
    assert rep.bottleneck_within_sup


def test_stability_perturbation_within_bounds(rng):
    params = VectorizationParams.default(24, 7.0)
    for base in ("perslay", "silhouette"):
        config = StabilityConfig(kind="cmf", base=base)
        for _ in range(10):
            a = random_valid_stack(rng, 3, 5, 5, 6)
            b = a.copy()
            # pixelwise bounded integer perturbation that keeps validity
            noise = rng.integers(-1, 2, a.shape)
            b = np.clip(a + noise, 0, 6)
            b = np.ascontiguousarray(np.sort(b, axis=0)[::-1])
            rep = stability_report(
                CompactMultiFiltration(a, 6), CompactMultiFiltration(b, 6),
                config, params,
            )
            assert not rep.violation, rep
            assert rep.vectorization_distance <= rep.constant * rep.diagram_distance + 1e-9
            assert rep.bottleneck_within_sup
            assert max(rep.slice_bottlenecks) <= rep.sup_difference + 1e-12


def test_stability_shape_mismatch(rng):
    a = CompactMultiFiltration(random_valid_stack(rng, 2, 4, 4, 5), 5)
    b = CompactMultiFiltration(random_valid_stack(rng, 3, 4, 4, 5), 5)
    with pytest.raises(ValueError):
        stability_report(a, b, StabilityConfig(), VectorizationParams.default(8, 6.0))


def test_stability_erosion_kind(rng):
    img_a = rng.integers(0, 20, (8, 8)).astype(np.float64)
    img_b = np.clip(img_a + rng.normal(0, 0.5, img_a.shape), 0, 20)
    config = StabilityConfig(
        kind="erosion", thresholds=(5.0, 10.0, 15.0), erosion_levels=(0, 1, 2, 4)
    )
    params = VectorizationParams.default(16, 4.0)
    rep = stability_report(ValueGrid(img_a), ValueGrid(img_b), config, params)
    assert not rep.violation
    assert rep.base == "perslay" and rep.p == 1.0


def test_stability_unknown_kind(rng):
    a = CompactMultiFiltration(random_valid_stack(rng, 2, 3, 3, 4), 4)
    with pytest.raises(ValueError):
        stability_report(a, a, StabilityConfig(kind="mystery"),
                         VectorizationParams.default(8, 5.0))
