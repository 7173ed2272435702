"""Two- and three-parameter persistence summaries built on the 1-D engine.

Row slicing turns each row of a bifiltration into an ordinary sublevel
filtration (via per-pixel first activation columns) and runs the pairing
engine on it; Betti counting over all grid entries yields Hilbert functions
and color Betti tensors.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import PersistenceDiagram, _batch_task, compute_pd
from .filtrations import BiFiltration, ColorMultiFiltration
from .grids import BinaryGrid, ValueGrid


@dataclass(frozen=True)
class SlicedDiagrams:
    """One persistence diagram per bifiltration row.

    ``num_cols`` is the column count N of the source grid; finite pair
    values live in {1..N+1} where N + 1 marks features killed only by the
    never-active sentinel.
    """

    diagrams: tuple[PersistenceDiagram, ...]
    num_cols: int

    @property
    def num_slices(self) -> int:
        return len(self.diagrams)

    def __getitem__(self, s: int) -> PersistenceDiagram:
        return self.diagrams[s]

    def __iter__(self):
        return iter(self.diagrams)


@dataclass(frozen=True, eq=False)
class HilbertGrid:
    """Betti numbers of a fixed dimension over every bifiltration entry."""

    values: np.ndarray  # (rows, cols) int64
    dim: int

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.int64))
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __eq__(self, other):
        if not isinstance(other, HilbertGrid):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.values, other.values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class BettiTensor:
    """Betti numbers of a fixed dimension over a three-parameter grid."""

    values: np.ndarray  # (N1, N2, N3) int64
    dim: int

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.int64))
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __eq__(self, other):
        if not isinstance(other, BettiTensor):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.values, other.values)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape


def slice_rows(bif: BiFiltration, workers: int = 1) -> SlicedDiagrams:
    """Persistence of each row of a bifiltration along the column axis.

    Row s becomes the grid of first activation columns (1-based, sentinel
    N + 1 for pixels never active in that row), whose sublevel filtration at
    integer thresholds reproduces the row's masks. Rows are independent
    tasks; with ``workers > 1`` they run on a process pool, with identical
    output for every worker count.
    """
    first = bif.first_activation()
    sentinel = float(bif.grid_cols + 2)  # strictly above every grid value
    tasks = [
        (np.asarray(first[s], dtype=np.float64), (0, 1), sentinel, s)
        for s in range(bif.grid_rows)
    ]
    if workers <= 1:
        diagrams = [_batch_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            diagrams = list(
                pool.map(_batch_task, tasks, chunksize=max(1, len(tasks) // (4 * workers) or 1))
            )
    return SlicedDiagrams(tuple(diagrams), bif.grid_cols)


def betti_numbers(mask: BinaryGrid) -> tuple[int, int]:
    """(components, independent holes) of a binary image.

    Uses the pairing engine on the indicator grid (active pixels at value 0,
    inactive at 1) and counts classes alive at level 0. The empty mask has
    no cells at all, so (0, 0).
    """
    if mask.count() == 0:
        return 0, 0
    indicator = np.where(mask.active, 0.0, 1.0)
    diagram = compute_pd(ValueGrid(indicator), dims=(0, 1), infinity_sentinel=2.0)
    b0 = sum(1 for p in diagram.pairs_dim0 if p.birth == 0.0)
    b1 = sum(1 for p in diagram.pairs_dim1 if p.birth == 0.0)
    return b0, b1


def hilbert_function(bif: BiFiltration, dim: int) -> HilbertGrid:
    """Betti number of every bifiltration entry, by direct per-entry counting."""
    if dim not in (0, 1):
        raise ValueError(f"dim must be 0 or 1, got {dim}")
    out = np.zeros((bif.grid_rows, bif.grid_cols), dtype=np.int64)
    for s in range(bif.grid_rows):
        for t in range(bif.grid_cols):
            out[s, t] = betti_numbers(bif.entry(s, t))[dim]
    return HilbertGrid(out, dim)


def color_betti_tensors(
    cmf: ColorMultiFiltration,
) -> tuple[BettiTensor, BettiTensor]:
    """Betti tensors of both dimensions over a three-parameter grid.

    One engine run per grid entry serves both dimensions.
    """
    n1, n2, n3 = cmf.shape
    out0 = np.zeros((n1, n2, n3), dtype=np.int64)
    out1 = np.zeros((n1, n2, n3), dtype=np.int64)
    for m in range(n1):
        for n in range(n2):
            for r in range(n3):
                b0, b1 = betti_numbers(cmf.entry(m, n, r))
                out0[m, n, r] = b0
                out1[m, n, r] = b1
    return BettiTensor(out0, 0), BettiTensor(out1, 1)


def color_betti_tensor(cmf: ColorMultiFiltration, dim: int) -> BettiTensor:
    if dim not in (0, 1):
        raise ValueError(f"dim must be 0 or 1, got {dim}")
    return color_betti_tensors(cmf)[dim]
