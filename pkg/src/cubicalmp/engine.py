"""Fast cubical persistence for 2D grids.

Dimension 0 runs union-find with the elder rule over edges of the padded
grid in ascending filtration order. Dimension 1 is computed on a dual grid:
pad with the sentinel, invert values, pad again, then run the same union-find
with 8-connectivity; finite dual pairs map back to primal (birth, death)
pairs. Every reported value is read from the grid at the reported coordinate,
never recomputed arithmetically, so integer filtrations stay integral and
monotone relabelings act exactly on the output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .grids import PixelCoord, ValueGrid

INFINITY = math.inf

# neighbor offsets (drow, dcol); dim 1 adds the diagonals
OFFSETS_DIM0 = ((1, 0), (0, 1))
OFFSETS_DIM1 = ((1, 0), (0, 1), (1, 1), (1, -1))


@dataclass(frozen=True)
class PersistencePair:
    """One homology class: birth/death values plus pixel provenance."""

    dim: int
    birth: float
    death: float
    birth_coord: PixelCoord | None = None
    death_coord: PixelCoord | None = None
    slice_index: int = 0

    @property
    def is_essential(self) -> bool:
        return math.isinf(self.death)

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs_dim0: tuple[PersistencePair, ...] = ()
    pairs_dim1: tuple[PersistencePair, ...] = ()

    def pairs(self, dim: int) -> tuple[PersistencePair, ...]:
        if dim == 0:
            return self.pairs_dim0
        if dim == 1:
            return self.pairs_dim1
        raise ValueError(f"homology dimension must be 0 or 1, got {dim}")

    def finite_pairs(self, dim: int) -> tuple[PersistencePair, ...]:
        return tuple(p for p in self.pairs(dim) if not p.is_essential)

    def essential_pairs(self, dim: int) -> tuple[PersistencePair, ...]:
        return tuple(p for p in self.pairs(dim) if p.is_essential)

    def finite_array(self, dim: int) -> np.ndarray:
        """Finite (birth, death) rows as an (n, 2) float array."""
        pts = [(p.birth, p.death) for p in self.pairs(dim) if not p.is_essential]
        return np.asarray(pts, dtype=np.float64).reshape(len(pts), 2)

    def value_multiset(self, dim: int) -> tuple[tuple[float, float], ...]:
        """Sorted (birth, death) values, the coordinate-free content."""
        return tuple(sorted((p.birth, p.death) for p in self.pairs(dim)))


@dataclass(frozen=True)
class SortedEdgeList:
    """Grid edges sorted by value (max of endpoints) descending.

    Ties are broken by ascending linear edge index, where the linear index is
    offset-block * grid-size + flat index of the base endpoint. ``argmax``
    holds, per edge, the flat index of the endpoint realizing the value (the
    base endpoint when the two are equal).
    """

    grid_shape: tuple[int, int]
    dim: int
    values: np.ndarray
    u: np.ndarray
    v: np.ndarray
    argmax: np.ndarray
    linear_index: np.ndarray

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class RawPairs:
    """Union-find output in flat vertex indices of the processed grid."""

    birth_vertices: np.ndarray
    death_vertices: np.ndarray
    essential_vertex: int  # -1 when no essential class is emitted


def _edge_arrays(values: np.ndarray, dim: int):
    height, width = values.shape
    flat = values.ravel()
    offsets = OFFSETS_DIM0 if dim == 0 else OFFSETS_DIM1
    size = height * width
    us, vs, lins = [], [], []
    for block, (dr, dc) in enumerate(offsets):
        rows = np.arange(0, height - dr, dtype=np.int64)
        if dc >= 0:
            cols = np.arange(0, width - dc, dtype=np.int64)
        else:
            cols = np.arange(-dc, width, dtype=np.int64)
        if rows.size == 0 or cols.size == 0:
            continue
        u = (rows[:, None] * width + cols[None, :]).ravel()
        v = u + dr * width + dc
        us.append(u)
        vs.append(v)
        lins.append(block * size + u)
    if not us:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty, np.empty(0, dtype=np.float64)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    lin = np.concatenate(lins)
    vals = np.maximum(flat[u], flat[v])
    order = np.lexsort((lin, -vals))
    return u[order], v[order], lin[order], vals[order]


def enumerate_sorted_edges(grid: ValueGrid, dim: int) -> SortedEdgeList:
    """All neighbor edges of the grid for the given homology dimension.

    Dimension 0 uses 4-connectivity offsets {(1,0),(0,1)}; dimension 1 adds
    the diagonal offsets {(1,1),(1,-1)}. Out-of-range neighbors are skipped.
    """
    if dim not in (0, 1):
        raise ValueError(f"dim must be 0 or 1, got {dim}")
    u, v, lin, vals = _edge_arrays(grid.values, dim)
    flat = grid.values.ravel()
    amax = np.where(flat[u] >= flat[v], u, v)
    return SortedEdgeList(
        grid_shape=grid.shape,
        dim=dim,
        values=vals,
        u=u,
        v=v,
        argmax=amax,
        linear_index=lin,
    )


@njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def _elder_union_find(flat_values, edge_u, edge_v, edge_amax, emit_essential):
    """Merge components along edges in ascending value order (tail first).

    When two roots meet, the one with the larger birth dies and is paired
    with the current edge; birth ties die by larger birth-vertex index, which
    keeps the choice deterministic and, on dual grids, protects the outer
    ring. Zero-persistence pairs are dropped at emission.
    """
    n = flat_values.size
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int8)
    birth_val = flat_values.copy()
    birth_vtx = np.arange(n)
    m = edge_u.size
    out_birth = np.empty(m, dtype=np.int64)
    out_death = np.empty(m, dtype=np.int64)
    k = 0
    for i in range(m - 1, -1, -1):
        ru = _find(parent, edge_u[i])
        rv = _find(parent, edge_v[i])
        if ru == rv:
            continue
        bu = birth_val[ru]
        bv = birth_val[rv]
        if bu > bv or (bu == bv and birth_vtx[ru] > birth_vtx[rv]):
            dying, surviving = ru, rv
        else:
            dying, surviving = rv, ru
        edge_value = flat_values[edge_amax[i]]
        if birth_val[dying] < edge_value:
            out_birth[k] = birth_vtx[dying]
            out_death[k] = edge_amax[i]
            k += 1
        keep_val = birth_val[surviving]
        keep_vtx = birth_vtx[surviving]
        if rank[ru] < rank[rv]:
            parent[ru] = rv
            root = rv
        elif rank[ru] > rank[rv]:
            parent[rv] = ru
            root = ru
        else:
            parent[rv] = ru
            rank[ru] += 1
            root = ru
        birth_val[root] = keep_val
        birth_vtx[root] = keep_vtx
    essential = np.int64(-1)
    if emit_essential:
        essential = birth_vtx[_find(parent, 0)]
    return out_birth[:k], out_death[:k], essential


def joint_pairs(grid: ValueGrid, sorted_edges: SortedEdgeList, dim: int) -> RawPairs:
    """Elder-rule pairing over the sorted edge list.

    The descending list is iterated from its tail, i.e. in ascending value
    order. For dim 0 the surviving component is reported as the essential
    class; for dim 1 (the dual pass) it is not emitted.
    """
    if sorted_edges.grid_shape != grid.shape:
        raise ValueError("edge list was built for a different grid shape")
    births, deaths, essential = _elder_union_find(
        np.ascontiguousarray(grid.values.ravel()),
        np.ascontiguousarray(sorted_edges.u),
        np.ascontiguousarray(sorted_edges.v),
        np.ascontiguousarray(sorted_edges.argmax),
        dim == 0,
    )
    return RawPairs(
        birth_vertices=births, death_vertices=deaths, essential_vertex=int(essential)
    )


def _check_interior(rows, cols, height, width, what):
    ok = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
    if not np.all(ok):
        raise AssertionError(f"{what} coordinate escaped the grid interior")


def _pair_sort_key(pair: PersistencePair):
    bc = pair.birth_coord if pair.birth_coord is not None else (-1, -1)
    dc = pair.death_coord if pair.death_coord is not None else (-1, -1)
    return (pair.birth, pair.death, bc[0], bc[1], dc[0], dc[1])


def compute_pd(
    grid: ValueGrid,
    dims: Iterable[int] = (0, 1),
    infinity_sentinel: float | None = None,
) -> PersistenceDiagram:
    """Persistence diagram of the sublevel filtration of a pixel grid.

    ``infinity_sentinel`` must be strictly greater than every grid value; it
    is used as the padding value and as the inversion pivot for the dual
    pass. ``None`` selects max(grid) + 1.
    """
    dims = set(dims)
    if not dims <= {0, 1}:
        raise ValueError(f"dims must be a subset of {{0, 1}}, got {sorted(dims)}")
    values = grid.values
    height, width = values.shape
    vmax = float(values.max())
    if infinity_sentinel is None:
        sentinel = vmax + 1.0
    else:
        sentinel = float(infinity_sentinel)
        if not sentinel > vmax:
            raise ValueError(
                f"infinity sentinel {sentinel} must exceed the grid maximum {vmax}"
            )

    pairs0: list[PersistencePair] = []
    pairs1: list[PersistencePair] = []

    if 0 in dims:
        padded = np.pad(values, 1, constant_values=sentinel)
        u, v, _lin, vals = _edge_arrays(padded, 0)
        flat = padded.ravel()
        amax = np.where(flat[u] >= flat[v], u, v)
        births, deaths, essential = _elder_union_find(
            np.ascontiguousarray(flat), u, v, amax, True
        )
        pw = width + 2
        brow, bcol = births // pw - 1, births % pw - 1
        drow, dcol = deaths // pw - 1, deaths % pw - 1
        _check_interior(brow, bcol, height, width, "dim-0 birth")
        _check_interior(drow, dcol, height, width, "dim-0 death")
        for i in range(births.size):
            b = PixelCoord(int(brow[i]), int(bcol[i]))
            d = PixelCoord(int(drow[i]), int(dcol[i]))
            pairs0.append(
                PersistencePair(0, float(values[b]), float(values[d]), b, d)
            )
        erow, ecol = essential // pw - 1, essential % pw - 1
        _check_interior(np.array([erow]), np.array([ecol]), height, width, "essential")
        ec = PixelCoord(int(erow), int(ecol))
        pairs0.append(PersistencePair(0, float(values[ec]), INFINITY, ec, None))
        pairs0.sort(key=_pair_sort_key)

    if 1 in dims:
        dual = np.pad(
            sentinel - np.pad(values, 1, constant_values=sentinel),
            1,
            constant_values=sentinel,
        )
        u, v, _lin, vals = _edge_arrays(dual, 1)
        flat = dual.ravel()
        amax = np.where(flat[u] >= flat[v], u, v)
        births, deaths, _ = _elder_union_find(
            np.ascontiguousarray(flat), u, v, amax, False
        )
        # dual birth root realizes the primal death; the dual death edge's
        # arg-max endpoint realizes the primal birth
        pw = width + 4
        brow, bcol = deaths // pw - 2, deaths % pw - 2
        drow, dcol = births // pw - 2, births % pw - 2
        _check_interior(brow, bcol, height, width, "dim-1 birth")
        _check_interior(drow, dcol, height, width, "dim-1 death")
        for i in range(births.size):
            b = PixelCoord(int(brow[i]), int(bcol[i]))
            d = PixelCoord(int(drow[i]), int(dcol[i]))
            pairs1.append(
                PersistencePair(1, float(values[b]), float(values[d]), b, d)
            )
        pairs1.sort(key=_pair_sort_key)

    return PersistenceDiagram(pairs_dim0=tuple(pairs0), pairs_dim1=tuple(pairs1))


def _retag(diagram: PersistenceDiagram, slice_index: int) -> PersistenceDiagram:
    return PersistenceDiagram(
        tuple(replace(p, slice_index=slice_index) for p in diagram.pairs_dim0),
        tuple(replace(p, slice_index=slice_index) for p in diagram.pairs_dim1),
    )


def _batch_task(args) -> PersistenceDiagram:
    slice_values, dims, sentinel, slice_index = args
    diagram = compute_pd(ValueGrid(slice_values), dims, sentinel)
    return _retag(diagram, slice_index)


def compute_pd_batch(
    cmf, dims: Iterable[int] = (0, 1), workers: int = 1
) -> list[PersistenceDiagram]:
    """One diagram per slice of a compact multifiltration.

    Slices are independent tasks; with ``workers > 1`` they are distributed
    over a process pool. Results are returned in slice order and are
    identical for every worker count.
    """
    dims = tuple(sorted(set(dims)))
    sentinel = float(cmf.num_levels + 1)
    tasks = [
        (np.asarray(cmf.slices[s], dtype=np.float64), dims, sentinel, s)
        for s in range(cmf.num_slices)
    ]
    if workers <= 1:
        return [_batch_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_batch_task, tasks, chunksize=max(1, len(tasks) // (4 * workers) or 1)))


def scatter_gradients(
    pairs: Sequence[PersistencePair],
    birth_cotangents: Sequence[float],
    death_cotangents: Sequence[float],
    grid_shape: tuple[int, int],
) -> np.ndarray:
    """Route per-pair cotangents back to the pixels that realized them.

    Each pair's birth cotangent accumulates at its birth pixel and its death
    cotangent at the arg-max endpoint pixel of the killing edge. Death
    cotangents of essential pairs have no pixel and are ignored.
    """
    height, width = grid_shape
    if not (len(pairs) == len(birth_cotangents) == len(death_cotangents)):
        raise ValueError("one birth and one death cotangent required per pair")
    out = np.zeros((height, width), dtype=np.float64)
    for pair, db, dd in zip(pairs, birth_cotangents, death_cotangents):
        bc = pair.birth_coord
        if bc is None:
            raise ValueError("pair carries no birth coordinate")
        if not (0 <= bc.row < height and 0 <= bc.col < width):
            raise ValueError(f"birth coordinate {bc} outside grid {grid_shape}")
        out[bc.row, bc.col] += db
        if pair.is_essential:
            continue
        dc = pair.death_coord
        if dc is None:
            raise ValueError("finite pair carries no death coordinate")
        if not (0 <= dc.row < height and 0 <= dc.col < width):
            raise ValueError(f"death coordinate {dc} outside grid {grid_shape}")
        out[dc.row, dc.col] += dd
    return out
