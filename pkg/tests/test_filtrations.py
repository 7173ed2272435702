"""Quantization, stacks, expansion, erosion fields, and channel bifiltrations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cubicalmp import (
    BiFiltration,
    BinaryGrid,
    CompactMultiFiltration,
    DEFAULT_EROSION_LEVELS,
    EmptyMaskError,
    MonotonicityError,
    MultiChannelImage,
    ValueGrid,
    channel_bifiltration,
    color_multifiltration,
    erosion_bifiltration,
    erosion_field,
    expand_bifiltration,
    reg_penalty,
    staircase,
    sublevel_set,
)

from conftest import LSHAPE_DIST, LSHAPE_MASK, TOY_CH1, TOY_CH2, TOY_THRESHOLDS


# ---------------------------------------------------------------- staircase

def test_staircase_examples():
    z = np.array([0.0, 0.1, 0.32, 0.5, 0.99, 1.0])
    assert staircase(z, 3).tolist() == [0, 0, 0, 1, 2, 3]
    assert staircase(z, 10).tolist() == [0, 1, 3, 5, 9, 10]


def test_staircase_right_endpoint_clamped():
    assert staircase(np.array([1.0]), 7).tolist() == [7]


def test_staircase_rejects_out_of_range():
    with pytest.raises(ValueError):
        staircase(np.array([-0.01]), 4)
    with pytest.raises(ValueError):
        staircase(np.array([1.01]), 4)
    with pytest.raises(ValueError):
        staircase(np.array([0.5]), 0)


@given(
    arrays(np.float64, st.integers(1, 30),
           elements=st.floats(0.0, 1.0, width=32)),
    st.integers(1, 12),
)
@settings(max_examples=60, deadline=None)
def test_staircase_monotone_and_in_range(z, n):
    out = staircase(z, n)
    assert out.min() >= 0 and out.max() <= n
    order = np.argsort(z)
    assert np.all(np.diff(out[order]) >= 0)


# ----------------------------------------------------- compact stacks / reg

def _stack(arr):
    a = np.asarray(arr, dtype=np.int64)
    return CompactMultiFiltration(a, num_levels=int(a.max()))


def test_reg_penalty_matches_naive_double_loop(rng):
    for _ in range(25):
        m, h, w = rng.integers(1, 5), rng.integers(1, 5), rng.integers(1, 5)
        n = 6
        slices = rng.integers(0, n + 1, (m, h, w))
        cmf = CompactMultiFiltration(slices, num_levels=n)
        naive = 0
        for s in range(m - 1):
            for i in range(h):
                for j in range(w):
                    naive += max(0, int(slices[s + 1, i, j]) - int(slices[s, i, j]))
        assert reg_penalty(cmf) == naive


def test_reg_penalty_zero_for_single_slice():
    assert reg_penalty(_stack([[[3, 1], [0, 2]]])) == 0


def test_validate_sets_flag():
    good = _stack([[[2, 2]], [[1, 0]]])
    bad = _stack([[[1, 0]], [[2, 2]]])
    assert good.validate().valid_bifiltration is True
    assert bad.validate().valid_bifiltration is False


def test_stack_rejects_out_of_range_levels():
    with pytest.raises(ValueError):
        CompactMultiFiltration(np.array([[[5]]], dtype=np.int64), num_levels=4)
    with pytest.raises(ValueError):
        CompactMultiFiltration(np.array([[[-1]]], dtype=np.int64), num_levels=4)


def test_first_activation_sentinel():
    cmf = CompactMultiFiltration(np.array([[[0, 3]]], dtype=np.int64), num_levels=3)
    fa = cmf.first_activation()
    # level value v activates at column v+1; never-active gets N+1... except
    # v = N activates at column N+1 exactly, which equals the sentinel
    assert fa.tolist() == [[[1, 4]]]


def test_expand_raises_with_violation_count():
    bad = _stack([[[0, 0], [0, 0]], [[1, 0], [0, 2]]])
    with pytest.raises(MonotonicityError) as exc:
        expand_bifiltration(bad)
    assert exc.value.violations == 2


def test_expand_membership_audit(rng):
    for _ in range(20):
        m, h, w, n = 3, 3, 4, 5
        raw = rng.integers(0, n + 1, (m, h, w))
        slices = np.sort(raw, axis=0)[::-1]  # enforce non-increasing
        cmf = CompactMultiFiltration(np.ascontiguousarray(slices), num_levels=n)
        bif = expand_bifiltration(cmf)
        assert bif.grid_rows == m and bif.grid_cols == n
        for s in range(m):
            for t in range(n):  # column t holds the sublevel at value t+1
                expect = slices[s] <= t
                assert np.array_equal(bif.entry(s, t).active, expect)


def test_expanded_bifiltration_is_nested(rng):
    raw = rng.integers(0, 7, (4, 5, 5))
    cmf = CompactMultiFiltration(
        np.ascontiguousarray(np.sort(raw, axis=0)[::-1]), num_levels=6
    )
    bif = expand_bifiltration(cmf)
    rows_bad, cols_bad = bif.monotonicity_violations()
    assert rows_bad == 0 and cols_bad == 0


def test_bifiltration_transpose_roundtrip(rng):
    member = rng.random((2, 3, 4, 5)) < 0.5
    # make nested along both axes so the constructor accepts it
    member = np.logical_or.accumulate(np.logical_or.accumulate(member, 0), 1)
    bif = BiFiltration(member)
    t = bif.transpose()
    assert t.grid_rows == 3 and t.grid_cols == 2
    assert np.array_equal(t.membership, member.swapaxes(0, 1))
    assert np.array_equal(t.transpose().membership, member)


# ------------------------------------------------------------ erosion field

def test_erosion_field_lshape_frozen():
    assert np.array_equal(erosion_field(BinaryGrid(LSHAPE_MASK)).distances,
                          LSHAPE_DIST)


def test_erosion_field_empty_mask_raises():
    with pytest.raises(EmptyMaskError):
        erosion_field(BinaryGrid(np.zeros((3, 3), dtype=bool)))


def _brute_l1(mask):
    pts = np.argwhere(mask)
    h, w = mask.shape
    out = np.empty((h, w), dtype=np.int64)
    for i in range(h):
        for j in range(w):
            out[i, j] = np.abs(pts - [i, j]).sum(axis=1).min()
    return out


def test_erosion_field_matches_brute_force(rng):
    for _ in range(40):
        h, w = rng.integers(1, 8), rng.integers(1, 8)
        mask = rng.random((h, w)) < 0.3
        if not mask.any():
            mask[rng.integers(h), rng.integers(w)] = True
        got = erosion_field(BinaryGrid(mask)).distances
        assert np.array_equal(got, _brute_l1(mask))


def test_erosion_field_one_lipschitz_four_adjacency(rng):
    mask = rng.random((10, 12)) < 0.15
    mask[0, 0] = True
    d = erosion_field(BinaryGrid(mask)).distances
    assert np.abs(np.diff(d, axis=0)).max() <= 1
    assert np.abs(np.diff(d, axis=1)).max() <= 1
    assert d[mask].max() == 0


# ----------------------------------------------------- erosion bifiltration

def test_erosion_bifiltration_shapes_and_nesting():
    gray = ValueGrid(np.arange(64, dtype=np.float64).reshape(8, 8) % 17)
    bif = erosion_bifiltration(gray, [4.0, 9.0, 16.0])
    assert bif.grid_rows == len(DEFAULT_EROSION_LEVELS)
    assert bif.grid_cols == 3
    rows_bad, cols_bad = bif.monotonicity_violations()
    assert rows_bad == 0 and cols_bad == 0


def test_erosion_bifiltration_strict_vs_inclusive():
    gray = ValueGrid(np.array([[0.0, 5.0], [5.0, 5.0]]))
    strict = erosion_bifiltration(gray, [1.0], erosion_levels=[0, 1])
    # strict: level 0 means distance < 0, impossible
    assert strict.entry(0, 0).count() == 0
    assert np.array_equal(strict.entry(1, 0).active, gray.values <= 1.0)
    loose = erosion_bifiltration(gray, [1.0], erosion_levels=[0, 1], strict=False)
    # inclusive: level 0 is the reference region itself
    assert np.array_equal(loose.entry(0, 0).active, gray.values <= 1.0)


def test_erosion_bifiltration_columns_are_distance_sublevels(rng):
    gray = ValueGrid(rng.integers(0, 20, (6, 7)).astype(np.float64))
    levels = [0, 2, 4]
    bif = erosion_bifiltration(gray, [5.0, 12.0], erosion_levels=levels)
    for n, tau in enumerate([5.0, 12.0]):
        omega = sublevel_set(gray, tau)
        dist = erosion_field(omega).distances
        for m, lev in enumerate(levels):
            assert np.array_equal(bif.entry(m, n).active, dist < lev)


def test_erosion_bifiltration_empty_column_warns():
    gray = ValueGrid(np.full((3, 3), 9.0))
    with pytest.warns(UserWarning, match="empty reference"):
        bif = erosion_bifiltration(gray, [1.0, 10.0], erosion_levels=[0, 1, 5])
    assert bif.entry(2, 0).count() == 0  # empty column stays empty
    assert bif.entry(2, 1).count() == 9
    assert any("empty_reference_columns=[0]" in note for note in bif.notes)


def test_erosion_bifiltration_rejects_bad_levels():
    gray = ValueGrid(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        erosion_bifiltration(gray, [1.0], erosion_levels=[3, 1])
    with pytest.raises(ValueError):
        erosion_bifiltration(gray, [1.0], erosion_levels=[-1, 2])
    with pytest.raises(ValueError):
        erosion_bifiltration(gray, [2.0, 1.0])


# ------------------------------------------------------------------- color

def test_color_multifiltration_requires_three_channels():
    two = MultiChannelImage(np.zeros((2, 3, 3)))
    with pytest.raises(ValueError):
        color_multifiltration(two, [1.0], [1.0], [1.0])


def test_color_multifiltration_monotone_and_full(rng):
    img = MultiChannelImage(rng.integers(0, 256, (3, 4, 4)).astype(np.float64))
    ts = [63.0, 127.0, 255.0]
    cmf3 = color_multifiltration(img, ts, ts, ts)
    assert cmf3.membership.shape == (3, 3, 3, 4, 4)
    # top corner includes every pixel (all channels <= 255)
    assert cmf3.entry(2, 2, 2).count() == 16
    # monotone along each axis
    mem = cmf3.membership
    for axis in range(3):
        diff = np.diff(mem.astype(np.int8), axis=axis)
        assert diff.min() >= 0


def test_color_entry_is_conjunction(rng):
    img = MultiChannelImage(rng.integers(0, 10, (3, 3, 3)).astype(np.float64))
    cmf3 = color_multifiltration(img, [2.0, 6.0], [4.0], [1.0, 8.0])
    c1, c2, c3 = (ch.values for ch in img.channels)
    expect = (c1 <= 6.0) & (c2 <= 4.0) & (c3 <= 1.0)
    assert np.array_equal(cmf3.entry(1, 0, 0).active, expect)


# --------------------------------------------------------- channel pairing

def test_channel_bifiltration_toy_transcription():
    bif = channel_bifiltration(
        ValueGrid(TOY_CH1), ValueGrid(TOY_CH2), TOY_THRESHOLDS, TOY_THRESHOLDS
    )
    assert bif.grid_rows == 3 and bif.grid_cols == 3
    for m, ta in enumerate(TOY_THRESHOLDS):
        for n, tb in enumerate(TOY_THRESHOLDS):
            expect = (TOY_CH1 <= ta) & (TOY_CH2 <= tb)
            assert np.array_equal(bif.entry(m, n).active, expect)
    # top-right corner has every pixel
    assert bif.entry(2, 2).count() == 9


def test_channel_bifiltration_shape_mismatch():
    with pytest.raises(ValueError):
        channel_bifiltration(
            ValueGrid(np.zeros((2, 2))), ValueGrid(np.zeros((3, 3))), [1.0], [1.0]
        )
