"""Constructions of single- and two-parameter filtrations from images.

Includes the quantized compact stack representation with its monotonicity
penalty, bifiltrations built from erosion distance fields, three-channel
color multifiltrations, and a generic two-channel threshold bifiltration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .grids import BinaryGrid, MultiChannelImage, ValueGrid, sublevel_set

# erosion level ladder used by the baseline grayscale recipe
DEFAULT_EROSION_LEVELS = (0, 1, 2, 3, 5, 7, 9, 12, 15, 20)


class MonotonicityError(ValueError):
    """Raised when a compact stack cannot be expanded into nested masks."""

    def __init__(self, message: str, violations: int):
        super().__init__(message)
        self.violations = violations


class EmptyMaskError(ValueError):
    pass


@dataclass(frozen=True)
class CompactMultiFiltration:
    """Stack of M integer grids with entries in {0..N}.

    Each slice grid gives, per pixel, the quantized level just below the
    pixel's first activation along the level axis. The stack encodes a
    bifiltration exactly when slices are pixelwise non-increasing; call
    ``validate()`` to compute that flag, it is never assumed.
    """

    slices: np.ndarray
    num_levels: int
    valid_bifiltration: bool = False

    def __post_init__(self):
        arr = np.asarray(self.slices)
        if arr.ndim != 3:
            raise ValueError(f"slices must be a 3-D stack, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise ValueError("slice entries must be integers")
            arr = arr.astype(np.int64)
        else:
            arr = arr.astype(np.int64)
        if arr.shape[0] < 1:
            raise ValueError("need at least one slice")
        if self.num_levels < 1:
            raise ValueError("num_levels must be positive")
        if arr.size and (arr.min() < 0 or arr.max() > self.num_levels):
            raise ValueError(
                f"slice entries must lie in [0, {self.num_levels}], "
                f"got range [{arr.min()}, {arr.max()}]"
            )
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "slices", arr)

    @property
    def num_slices(self) -> int:
        return self.slices.shape[0]

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.slices.shape[1], self.slices.shape[2]

    def first_activation(self) -> np.ndarray:
        """Per slice, the 1-based level at which each pixel first activates.

        Pixels that never activate within the level range carry the sentinel
        N + 1.
        """
        return self.slices + 1

    def validate(self) -> "CompactMultiFiltration":
        flag = reg_penalty(self) == 0
        return replace(self, valid_bifiltration=flag)


@dataclass(frozen=True)
class BiFiltration:
    """M x N grid of binary images, nested along both axes.

    ``membership[s, t]`` is the mask of row s at column t. Builders in this
    module guarantee monotonicity; ``monotonicity_violations`` audits it.
    """

    membership: np.ndarray
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.membership)
        if arr.dtype != np.bool_:
            arr = arr.astype(np.bool_)
        if arr.ndim != 4:
            raise ValueError(
                f"membership must be (rows, cols, height, width), got {arr.shape}"
            )
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "membership", arr)

    @property
    def grid_rows(self) -> int:
        return self.membership.shape[0]

    @property
    def grid_cols(self) -> int:
        return self.membership.shape[1]

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.membership.shape[2], self.membership.shape[3]

    def entry(self, s: int, t: int) -> BinaryGrid:
        return BinaryGrid(self.membership[s, t])

    def transpose(self) -> "BiFiltration":
        return BiFiltration(self.membership.swapaxes(0, 1), self.notes)

    def monotonicity_violations(self) -> tuple[int, int]:
        """(row-axis, column-axis) counts of pixels breaking nestedness."""
        m = self.membership
        row_bad = int(np.sum(m[:-1] & ~m[1:])) if self.grid_rows > 1 else 0
        col_bad = int(np.sum(m[:, :-1] & ~m[:, 1:])) if self.grid_cols > 1 else 0
        return row_bad, col_bad

    def first_activation(self) -> np.ndarray:
        """(rows, height, width) array of 1-based first active column per
        pixel, sentinel N + 1 for pixels never active in that row."""
        m = self.membership
        any_active = m.any(axis=1)
        first = m.argmax(axis=1).astype(np.int64) + 1
        first[~any_active] = self.grid_cols + 1
        return first


@dataclass(frozen=True)
class ErosionField:
    """Exact Manhattan distances to the nearest active pixel."""

    distances: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.distances, dtype=np.int64))
        arr.flags.writeable = False
        object.__setattr__(self, "distances", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.distances.shape


@dataclass(frozen=True)
class ColorMultiFiltration:
    """Three-parameter membership array from channelwise thresholds."""

    membership: np.ndarray  # (N1, N2, N3, H, W) bool
    thresholds: tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]

    def __post_init__(self):
        arr = np.asarray(self.membership)
        if arr.dtype != np.bool_:
            arr = arr.astype(np.bool_)
        if arr.ndim != 5:
            raise ValueError(f"membership must be 5-D, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "membership", arr)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.membership.shape[:3]

    def entry(self, m: int, n: int, r: int) -> BinaryGrid:
        return BinaryGrid(self.membership[m, n, r])


def staircase(z, num_levels: int) -> np.ndarray:
    """Quantize values in [0, 1] to integer levels {0..N} by floor(N*z).

    The right endpoint z = 1 lands on N (clamped) so the codomain really is
    {0, ..., N}.
    """
    arr = np.asarray(z, dtype=np.float64)
    if num_levels < 1:
        raise ValueError("num_levels must be positive")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(
            f"staircase input must lie in [0, 1], got range [{arr.min()}, {arr.max()}]"
        )
    out = np.floor(num_levels * arr).astype(np.int64)
    return np.minimum(out, num_levels)


def reg_penalty(cmf: CompactMultiFiltration) -> int:
    """Total positive increase between consecutive slices.

    Zero exactly when the stack is pixelwise non-increasing, i.e. when it
    expands to a valid bifiltration.
    """
    if cmf.num_slices < 2:
        return 0
    diff = cmf.slices[1:] - cmf.slices[:-1]
    return int(np.maximum(diff, 0).sum())


def expand_bifiltration(cmf: CompactMultiFiltration) -> BiFiltration:
    """Expand a compact stack into its M x N grid of binary masks.

    Pixel active in entry (s, t) iff slice value <= t - 1, for columns
    t = 1..N.
    """
    diff = cmf.slices[1:] - cmf.slices[:-1] if cmf.num_slices > 1 else None
    if diff is not None:
        violations = int(np.count_nonzero(diff > 0))
        if violations:
            raise MonotonicityError(
                f"stack is not pixelwise non-increasing: {violations} violating "
                "entries; expansion would not be nested",
                violations,
            )
    levels = np.arange(1, cmf.num_levels + 1, dtype=np.int64)
    membership = cmf.slices[:, None, :, :] <= (levels[None, :, None, None] - 1)
    return BiFiltration(membership)


def erosion_field(mask: BinaryGrid) -> ErosionField:
    """Exact L1 distance transform via a forward and a backward sweep."""
    act = mask.active
    if not act.any():
        raise EmptyMaskError("distance to an empty region is undefined")
    height, width = act.shape
    big = height + width  # exceeds any achievable L1 distance
    dist = np.where(act, 0, big).astype(np.int64)
    cols = np.arange(width, dtype=np.int64)
    for r in range(height):
        if r > 0:
            np.minimum(dist[r], dist[r - 1] + 1, out=dist[r])
        run = np.minimum.accumulate(dist[r] - cols) + cols
        np.minimum(dist[r], run, out=dist[r])
    for r in range(height - 1, -1, -1):
        if r < height - 1:
            np.minimum(dist[r], dist[r + 1] + 1, out=dist[r])
        run = np.minimum.accumulate((dist[r] + cols)[::-1])[::-1] - cols
        np.minimum(dist[r], run, out=dist[r])
    return ErosionField(dist)


def _check_strictly_increasing(seq, name):
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D sequence")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return arr


def erosion_bifiltration(
    gray: ValueGrid,
    gray_thresholds: Sequence[float],
    erosion_levels: Sequence[int] = DEFAULT_EROSION_LEVELS,
    strict: bool = True,
) -> BiFiltration:
    """Bifiltration with erosion levels as rows and gray thresholds as columns.

    Column n takes the sublevel mask at gray_thresholds[n] as the reference
    region; entry (m, n) activates pixels whose L1 distance to that region is
    below erosion_levels[m] (strictly below by default, so level 0 gives an
    empty mask; ``strict=False`` uses <= and level 0 then gives the region
    itself). Columns whose reference region is empty stay entirely empty and
    are flagged in ``notes``.
    """
    thresholds = _check_strictly_increasing(gray_thresholds, "gray_thresholds")
    levels = np.asarray(erosion_levels, dtype=np.int64)
    if levels.ndim != 1 or levels.size < 1:
        raise ValueError("erosion_levels must be a nonempty 1-D sequence")
    if levels.size > 1 and not np.all(np.diff(levels) > 0):
        raise ValueError("erosion_levels must be strictly increasing")
    if levels[0] < 0:
        raise ValueError("erosion_levels must be nonnegative")

    height, width = gray.shape
    unreachable = int(height + width + levels.max() + 1)
    fields = np.empty((thresholds.size, height, width), dtype=np.int64)
    empty_cols = []
    for n, tau in enumerate(thresholds):
        omega = sublevel_set(gray, tau)
        if omega.count() == 0:
            fields[n] = unreachable
            empty_cols.append(n)
        else:
            fields[n] = erosion_field(omega).distances
    if strict:
        membership = fields[None, :, :, :] < levels[:, None, None, None]
    else:
        membership = fields[None, :, :, :] <= levels[:, None, None, None]
    notes: tuple[str, ...] = ()
    if empty_cols:
        notes = (f"empty_reference_columns={empty_cols}",)
        warnings.warn(
            f"{len(empty_cols)} threshold column(s) have an empty reference "
            "region; their bifiltration entries are empty",
            stacklevel=2,
        )
    # rows ordered by level, columns by threshold; nested along both axes
    return BiFiltration(membership, notes)


def color_multifiltration(
    img: MultiChannelImage,
    thresholds_c1: Sequence[float],
    thresholds_c2: Sequence[float],
    thresholds_c3: Sequence[float],
) -> ColorMultiFiltration:
    """Three-parameter sublevel multifiltration of a 3-channel image.

    Entry (m, n, r) activates pixels with channel values at or below the
    m-th, n-th, r-th thresholds of the respective channels; monotone along
    each axis.
    """
    if img.num_channels != 3:
        raise ValueError(f"need exactly 3 channels, got {img.num_channels}")
    t1 = _check_strictly_increasing(thresholds_c1, "thresholds_c1")
    t2 = _check_strictly_increasing(thresholds_c2, "thresholds_c2")
    t3 = _check_strictly_increasing(thresholds_c3, "thresholds_c3")
    c1, c2, c3 = (ch.values for ch in img.channels)
    a = c1[None, :, :] <= t1[:, None, None]
    b = c2[None, :, :] <= t2[:, None, None]
    c = c3[None, :, :] <= t3[:, None, None]
    membership = (
        a[:, None, None, :, :] & b[None, :, None, :, :] & c[None, None, :, :, :]
    )
    return ColorMultiFiltration(
        membership, (tuple(map(float, t1)), tuple(map(float, t2)), tuple(map(float, t3)))
    )


def channel_bifiltration(
    chan_a: ValueGrid,
    chan_b: ValueGrid,
    thresholds_a: Sequence[float],
    thresholds_b: Sequence[float],
) -> BiFiltration:
    """Two-parameter sublevel bifiltration from two channels of one image."""
    if chan_a.shape != chan_b.shape:
        raise ValueError("channels must share height and width")
    ta = _check_strictly_increasing(thresholds_a, "thresholds_a")
    tb = _check_strictly_increasing(thresholds_b, "thresholds_b")
    a = chan_a.values[None, :, :] <= ta[:, None, None]
    b = chan_b.values[None, :, :] <= tb[:, None, None]
    return BiFiltration(a[:, None, :, :] & b[None, :, :, :])
