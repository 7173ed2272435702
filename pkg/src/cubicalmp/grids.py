"""Grid containers and level-set primitives shared by every other module.

Conventions used throughout the package: arrays are row-major with coordinate
(row, col) and the origin at the top-left pixel, matching image file order.
Values are stored as float64 even for 8-bit inputs; integer filtrations embed
losslessly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np


class PixelCoord(NamedTuple):
    row: int
    col: int


def _as_float_grid(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"grid values must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"grid must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grid values must be finite (no NaN or infinity)")
    return arr


@dataclass(frozen=True)
class ValueGrid:
    """Rectangular grid of finite real filtration values, one per pixel."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_float_grid(self.values)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def negate(self) -> "ValueGrid":
        return ValueGrid(-self.values)

    def is_integer_valued(self) -> bool:
        return bool(np.all(self.values == np.floor(self.values)))


@dataclass(frozen=True)
class BinaryGrid:
    """Boolean pixel membership mask, e.g. one level set of a filtration."""

    active: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.active)
        if arr.dtype != np.bool_:
            arr = arr.astype(np.bool_)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask must be a nonempty 2-D array, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "active", arr)

    @property
    def height(self) -> int:
        return self.active.shape[0]

    @property
    def width(self) -> int:
        return self.active.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.active.shape

    def count(self) -> int:
        return int(self.active.sum())

    def is_subset_of(self, other: "BinaryGrid") -> bool:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return bool(np.all(other.active | ~self.active))


@dataclass(frozen=True)
class MultiChannelImage:
    """Ordered channels (e.g. R, G, B) of identical shape."""

    channels: tuple[ValueGrid, ...]

    def __post_init__(self):
        chans = tuple(
            c if isinstance(c, ValueGrid) else ValueGrid(c) for c in self.channels
        )
        if len(chans) < 1:
            raise ValueError("need at least one channel")
        shape = chans[0].shape
        for c in chans[1:]:
            if c.shape != shape:
                raise ValueError("all channels must share height and width")
        object.__setattr__(self, "channels", chans)

    @property
    def num_channels(self) -> int:
        return len(self.channels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.channels[0].shape


def sublevel_set(grid: ValueGrid, tau: float) -> BinaryGrid:
    """Pixels with value <= tau. Monotone in tau."""
    return BinaryGrid(grid.values <= tau)


def superlevel_set(grid: ValueGrid, tau: float) -> BinaryGrid:
    """Pixels with value >= tau. Antitone in tau."""
    return BinaryGrid(grid.values >= tau)
