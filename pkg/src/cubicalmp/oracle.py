"""Slow ground-truth persistence by boundary-matrix reduction.

Builds the full cell complex of a grid (vertices, edges, squares; a cell's
value is the max over its vertices) and reduces the filtration-ordered
boundary matrix over GF(2) with bitmask columns. Shares nothing with the
union-find engine beyond the diagram containers, so agreement between the
two is meaningful evidence. Deliberately unoptimized; guarded to small
grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import INFINITY, PersistencePair, PersistenceDiagram
from .grids import ValueGrid

MAX_ORACLE_SIDE = 64


@dataclass(frozen=True)
class CubicalChainComplex:
    """Cells of a full grid complex in filtration order.

    ``coords[i]`` is (row, col, rowspan, colspan) of cell i, with spans in
    {0,1}; the cell dimension is rowspan + colspan. ``boundaries[i]`` lists
    the indices of the cell's faces of one dimension lower.
    """

    coords: tuple[tuple[int, int, int, int], ...]
    values: tuple[float, ...]
    dims: tuple[int, ...]
    boundaries: tuple[tuple[int, ...], ...]

    def num_cells(self) -> int:
        return len(self.coords)

    def check_boundary_of_boundary(self) -> bool:
        """True iff applying the boundary twice cancels over GF(2)."""
        for faces in self.boundaries:
            counts: dict[int, int] = {}
            for f in faces:
                for g in self.boundaries[f]:
                    counts[g] = counts.get(g, 0) + 1
            if any(c % 2 for c in counts.values()):
                return False
        return True

    def check_face_values(self) -> bool:
        """True iff no cell appears strictly before one of its faces."""
        return all(
            self.values[f] <= self.values[i]
            for i, faces in enumerate(self.boundaries)
            for f in faces
        )


def build_chain_complex(grid: ValueGrid) -> CubicalChainComplex:
    values = grid.values
    height, width = values.shape

    cells = []  # (value, dim, row, col, rowspan, colspan)
    for r in range(height):
        for c in range(width):
            cells.append((float(values[r, c]), 0, r, c, 0, 0))
    for r in range(height):
        for c in range(width - 1):
            v = float(max(values[r, c], values[r, c + 1]))
            cells.append((v, 1, r, c, 0, 1))
    for r in range(height - 1):
        for c in range(width):
            v = float(max(values[r, c], values[r + 1, c]))
            cells.append((v, 1, r, c, 1, 0))
    for r in range(height - 1):
        for c in range(width - 1):
            v = float(
                max(
                    values[r, c],
                    values[r, c + 1],
                    values[r + 1, c],
                    values[r + 1, c + 1],
                )
            )
            cells.append((v, 2, r, c, 1, 1))

    # filtration order: value, then dimension, then lexicographic coordinate
    cells.sort(key=lambda cell: (cell[0], cell[1], cell[2], cell[3], cell[4], cell[5]))

    index_of = {
        (row, col, rs, cs): i for i, (_, _, row, col, rs, cs) in enumerate(cells)
    }
    boundaries = []
    for _, dim, row, col, rs, cs in cells:
        if dim == 0:
            faces: tuple[int, ...] = ()
        elif dim == 1:
            faces = (
                index_of[(row, col, 0, 0)],
                index_of[(row + rs, col + cs, 0, 0)],
            )
        else:
            faces = (
                index_of[(row, col, 0, 1)],
                index_of[(row + 1, col, 0, 1)],
                index_of[(row, col, 1, 0)],
                index_of[(row, col + 1, 1, 0)],
            )
        boundaries.append(faces)

    return CubicalChainComplex(
        coords=tuple((row, col, rs, cs) for _, _, row, col, rs, cs in cells),
        values=tuple(cell[0] for cell in cells),
        dims=tuple(cell[1] for cell in cells),
        boundaries=tuple(boundaries),
    )


def oracle_pd(grid: ValueGrid) -> PersistenceDiagram:
    """Persistence of the sublevel filtration by straight column reduction.

    Returns (birth, death) values only; no coordinate provenance. Grids
    larger than 64 on a side are refused.
    """
    height, width = grid.shape
    if height > MAX_ORACLE_SIDE or width > MAX_ORACLE_SIDE:
        raise ValueError(
            f"oracle accepts grids up to {MAX_ORACLE_SIDE}x{MAX_ORACLE_SIDE}, "
            f"got {height}x{width}"
        )
    complex_ = build_chain_complex(grid)
    n = complex_.num_cells()

    # column j as a bitmask of face row-indices; reduce by xor until the
    # lowest set bit is unclaimed
    low_owner: dict[int, int] = {}
    reduced: list[int] = [0] * n
    pair_of: dict[int, int] = {}
    for j in range(n):
        col = 0
        for f in complex_.boundaries[j]:
            col ^= 1 << f
        while col:
            low = col.bit_length() - 1
            owner = low_owner.get(low)
            if owner is None:
                break
            col ^= reduced[owner]
        reduced[j] = col
        if col:
            low = col.bit_length() - 1
            low_owner[low] = j
            pair_of[low] = j

    pairs0: list[PersistencePair] = []
    pairs1: list[PersistencePair] = []
    essential0 = 0
    for i in range(n):
        if reduced[i]:
            continue  # i creates a class
        j = pair_of.get(i)
        if j is None:
            if complex_.dims[i] == 0:
                pairs0.append(PersistencePair(0, complex_.values[i], INFINITY))
                essential0 += 1
            else:
                raise AssertionError(
                    "unpaired creator above dimension 0 in a full grid complex"
                )
            continue
        birth = complex_.values[i]
        death = complex_.values[j]
        if birth == death:
            continue
        dim = complex_.dims[i]
        if dim == 0:
            pairs0.append(PersistencePair(0, birth, death))
        elif dim == 1:
            pairs1.append(PersistencePair(1, birth, death))
    if essential0 != 1:
        raise AssertionError(f"expected exactly one essential component, got {essential0}")

    pairs0.sort(key=lambda p: (p.birth, p.death))
    pairs1.sort(key=lambda p: (p.birth, p.death))
    return PersistenceDiagram(pairs_dim0=tuple(pairs0), pairs_dim1=tuple(pairs1))
