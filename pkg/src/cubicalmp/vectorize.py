"""Fixed-length vector summaries of persistence diagrams and their gradients.

All tent-based operations share one bar normalization: pairs are converted
to (birth, death) bars, essential deaths are clipped to a finite horizon
(or the pair dropped when nothing of the bar survives), zero-length bars are
dropped, and bars are put in canonical sorted order so every summary is
bit-identical under permutation of the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import PersistenceDiagram, PersistencePair

AGGREGATORS = ("flatten-concatenate", "mean-over-slices")
BASES = ("betti", "perslay", "silhouette", "landscape")


@dataclass(frozen=True)
class VectorizationParams:
    """Shared knobs for diagram vectorization.

    ``weight_exponent`` is either one scalar for all slices or a tuple with
    one entry per slice. ``essential_clip`` is the finite death substituted
    for infinity; when None the largest sample time is used.
    """

    sample_times: np.ndarray
    weight_exponent: float | tuple = 1.0
    aggregator: str = "flatten-concatenate"
    landscape_level: int = 1
    essential_clip: float | None = None

    def __post_init__(self):
        t = np.ascontiguousarray(np.asarray(self.sample_times, dtype=np.float64))
        if t.ndim != 1 or t.size < 1:
            raise ValueError("sample_times must be a nonempty 1-D sequence")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample_times must be strictly increasing")
        t.flags.writeable = False
        object.__setattr__(self, "sample_times", t)
        w = self.weight_exponent
        if isinstance(w, (tuple, list, np.ndarray)):
            w = tuple(float(x) for x in w)
            if any(x < 0 for x in w):
                raise ValueError("weight exponents must be nonnegative")
            object.__setattr__(self, "weight_exponent", w)
        else:
            if float(w) < 0:
                raise ValueError("weight exponent must be nonnegative")
            object.__setattr__(self, "weight_exponent", float(w))
        if self.aggregator not in AGGREGATORS:
            raise ValueError(f"aggregator must be one of {AGGREGATORS}")
        if self.landscape_level < 1:
            raise ValueError("landscape_level must be >= 1")

    @classmethod
    def default(cls, num_samples: int, level_max: float, **kwargs) -> "VectorizationParams":
        return cls(np.linspace(0.0, float(level_max), num_samples), **kwargs)

    @property
    def num_samples(self) -> int:
        return self.sample_times.size

    def weight_for(self, slice_index: int) -> float:
        w = self.weight_exponent
        if isinstance(w, tuple):
            return w[slice_index]
        return w

    def clip_value(self) -> float:
        if self.essential_clip is not None:
            return float(self.essential_clip)
        return float(self.sample_times[-1])


def _as_pairs_array(pairs) -> np.ndarray:
    """(n, 2) float array of (birth, death); death may be +inf."""
    if isinstance(pairs, PersistenceDiagram):
        raise TypeError("pass the pairs of a single dimension, not a whole diagram")
    if isinstance(pairs, np.ndarray):
        arr = np.asarray(pairs, dtype=np.float64)
        if arr.size == 0:
            return np.empty((0, 2))
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"expected an (n, 2) array, got shape {arr.shape}")
        return arr
    rows = []
    for p in pairs:
        if isinstance(p, PersistencePair):
            rows.append((p.birth, p.death))
        else:
            b, d = p
            rows.append((float(b), float(d)))
    return np.asarray(rows, dtype=np.float64).reshape(-1, 2)


def finite_bars(pairs, essential_clip: float | None) -> np.ndarray:
    """Canonical finite bars for vectorization and matching.

    Infinite deaths become ``essential_clip`` (pairs are dropped when the
    clip is None or does not exceed the birth). Bars of zero or negative
    length are dropped; survivors are sorted by (birth, death).
    """
    arr = _as_pairs_array(pairs)
    bars, _, _ = _prepare_bars(arr, essential_clip)
    return bars


def _prepare_bars(arr: np.ndarray, essential_clip: float | None):
    """Returns (sorted bars, source row indices, essential flags)."""
    if arr.shape[0] == 0:
        return np.empty((0, 2)), np.empty(0, dtype=np.int64), np.empty(0, dtype=bool)
    births = arr[:, 0].copy()
    deaths = arr[:, 1].copy()
    ess = np.isinf(deaths)
    if essential_clip is None:
        keep = ~ess
    else:
        deaths = np.where(ess, float(essential_clip), deaths)
        keep = np.ones(arr.shape[0], dtype=bool)
    keep &= deaths > births
    idx = np.nonzero(keep)[0]
    b, d = births[idx], deaths[idx]
    order = np.lexsort((d, b))
    idx = idx[order]
    return np.column_stack((b[order], d[order])), idx, ess[idx]


def triangle(pair, t):
    """Tent function of one bar: peak of half the bar length at its midpoint."""
    if isinstance(pair, PersistencePair):
        b, d = pair.birth, pair.death
    else:
        b, d = pair
    b = float(b)
    d = float(d)
    half = 0.5 * (d - b)
    mid = 0.5 * (d + b)
    return np.maximum(0.0, half - np.abs(np.asarray(t, dtype=np.float64) - mid))


def _tents(bars: np.ndarray, t: np.ndarray) -> np.ndarray:
    """(n, q) tent evaluations."""
    if bars.shape[0] == 0:
        return np.zeros((0, t.size))
    half = 0.5 * (bars[:, 1] - bars[:, 0])
    mid = 0.5 * (bars[:, 1] + bars[:, 0])
    return np.maximum(0.0, half[:, None] - np.abs(t[None, :] - mid[:, None]))


def perslay_vector(pairs, params: VectorizationParams, weight_exponent: float | None = None) -> np.ndarray:
    """Sum of persistence-weighted tents sampled at the parameter times.

    Component j is the sum over bars of (death - birth)^w times the bar's
    tent at sample time j. Empty input gives the zero vector.
    """
    w = params.weight_for(0) if weight_exponent is None else float(weight_exponent)
    bars, _, _ = _prepare_bars(_as_pairs_array(pairs), params.clip_value())
    t = params.sample_times
    if bars.shape[0] == 0:
        return np.zeros(t.size)
    weights = (bars[:, 1] - bars[:, 0]) ** w
    return (weights[:, None] * _tents(bars, t)).sum(axis=0)


def betti_curve(pairs, thresholds) -> np.ndarray:
    """Number of bars alive at each threshold: birth <= tau < death.

    Infinite deaths count at every threshold past their birth; no clipping.
    """
    t = np.asarray(thresholds, dtype=np.float64)
    arr = _as_pairs_array(pairs)
    if arr.shape[0] == 0:
        return np.zeros(t.shape, dtype=np.int64)
    alive = (arr[:, 0][:, None] <= t[None, :]) & (t[None, :] < arr[:, 1][:, None])
    return alive.sum(axis=0).astype(np.int64)


def landscape_vector(pairs, k: int, sample_times, essential_clip: float | None = None) -> np.ndarray:
    """k-th largest tent value at each sample time (0 when fewer than k bars)."""
    if k < 1:
        raise ValueError("level k must be >= 1")
    t = np.asarray(sample_times, dtype=np.float64)
    bars, _, _ = _prepare_bars(_as_pairs_array(pairs), essential_clip)
    n = bars.shape[0]
    if n < k:
        return np.zeros(t.size)
    tents = _tents(bars, t)
    return np.partition(tents, n - k, axis=0)[n - k]


def landscape(pairs, k: int, t: float, essential_clip: float | None = None) -> float:
    return float(landscape_vector(pairs, k, [float(t)], essential_clip)[0])


def silhouette(
    pairs,
    weight_exponent: float,
    sample_times,
    normalize: bool = True,
    essential_clip: float | None = None,
) -> np.ndarray:
    """Power-weighted mean of tents (or their weighted sum when not normalized).

    Empty input gives the zero vector in both modes.
    """
    t = np.asarray(sample_times, dtype=np.float64)
    bars, _, _ = _prepare_bars(_as_pairs_array(pairs), essential_clip)
    if bars.shape[0] == 0:
        return np.zeros(t.size)
    weights = (bars[:, 1] - bars[:, 0]) ** float(weight_exponent)
    acc = (weights[:, None] * _tents(bars, t)).sum(axis=0)
    if not normalize:
        return acc
    total = weights.sum()
    if total == 0.0:
        return np.zeros(t.size)
    return acc / total


@dataclass(frozen=True)
class MPVectorization:
    """Per-slice, per-dimension vectors plus their aggregate."""

    values: np.ndarray  # (M, 2, q)
    aggregate: np.ndarray  # (2*M*q,) or (2*q,) depending on aggregator
    aggregator: str

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        a = np.ascontiguousarray(np.asarray(self.aggregate, dtype=np.float64))
        v.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "aggregate", a)

    @property
    def num_slices(self) -> int:
        return self.values.shape[0]

    @property
    def num_samples(self) -> int:
        return self.values.shape[2]


def _aggregate(values: np.ndarray, aggregator: str) -> np.ndarray:
    if aggregator == "flatten-concatenate":
        return values.reshape(-1).copy()
    return values.mean(axis=0).reshape(-1)


def psi_mp(sliced, params: VectorizationParams) -> MPVectorization:
    """Weighted-tent vectors of both dimensions for every slice diagram.

    values[s, k] is the dimension-k vector of slice s; the aggregate either
    concatenates all rows in slice-major order or averages over slices.
    """
    m = sliced.num_slices
    w = params.weight_exponent
    if isinstance(w, tuple) and len(w) != m:
        raise ValueError(
            f"per-slice weight exponents: expected {m} entries, got {len(w)}"
        )
    q = params.num_samples
    values = np.zeros((m, 2, q))
    for s in range(m):
        ws = params.weight_for(s)
        diagram = sliced[s]
        for k in (0, 1):
            values[s, k] = perslay_vector(diagram.pairs(k), params, ws)
    return MPVectorization(values, _aggregate(values, params.aggregator), params.aggregator)


def induced_mp_vectorization(sliced, base: str, params: VectorizationParams, dim: int) -> np.ndarray:
    """(num_slices, q) matrix: one base-vectorization row per slice diagram."""
    if base not in BASES:
        raise ValueError(f"base must be one of {BASES}")
    if dim not in (0, 1):
        raise ValueError(f"dim must be 0 or 1, got {dim}")
    clip = params.clip_value()
    rows = []
    for s in range(sliced.num_slices):
        pairs = sliced[s].pairs(dim)
        if base == "betti":
            rows.append(betti_curve(pairs, params.sample_times).astype(np.float64))
        elif base == "perslay":
            rows.append(perslay_vector(pairs, params, params.weight_for(s)))
        elif base == "silhouette":
            rows.append(
                silhouette(pairs, params.weight_for(s), params.sample_times, True, clip)
            )
        else:
            rows.append(
                landscape_vector(pairs, params.landscape_level, params.sample_times, clip)
            )
    return np.vstack(rows) if rows else np.zeros((0, params.num_samples))


@dataclass(frozen=True)
class PerslayGradients:
    """Partial derivatives of the weighted-tent vector.

    Rows of ``d_births``/``d_deaths`` follow the input pair order; pairs that
    were dropped (essential without a usable clip, zero-length bars) get zero
    rows, and clipped essential pairs get a zero death row since their true
    death is infinite.
    """

    d_births: np.ndarray  # (n, q)
    d_deaths: np.ndarray  # (n, q)
    d_sample_times: np.ndarray  # (q,)
    d_weight_exponent: np.ndarray  # (q,)


def perslay_gradients(
    pairs, params: VectorizationParams, weight_exponent: float | None = None
) -> PerslayGradients:
    """Symmetric-subgradient derivatives of ``perslay_vector``.

    At tent kinks (sample time hitting a bar endpoint or midpoint) the
    one-sided derivatives are averaged.
    """
    w = params.weight_for(0) if weight_exponent is None else float(weight_exponent)
    arr = _as_pairs_array(pairs)
    n = arr.shape[0]
    t = params.sample_times
    q = t.size
    bars, src, ess = _prepare_bars(arr, params.clip_value())
    d_births = np.zeros((n, q))
    d_deaths = np.zeros((n, q))
    d_times = np.zeros(q)
    d_weight = np.zeros(q)
    if bars.shape[0] == 0:
        return PerslayGradients(d_births, d_deaths, d_times, d_weight)

    b = bars[:, 0]
    d = bars[:, 1]
    pers = d - b  # > 0 by construction
    half = 0.5 * pers
    mid = 0.5 * (b + d)
    delta = t[None, :] - mid[:, None]
    absd = np.abs(delta)
    tent = np.maximum(0.0, half[:, None] - absd)
    inside = tent > 0.0
    on_edge = (~inside) & (absd == half[:, None])
    factor = np.where(inside, 1.0, np.where(on_edge, 0.5, 0.0))
    sgn = np.sign(delta)

    dl_dt = -sgn * factor
    dl_db = (-0.5 + 0.5 * sgn) * factor
    dl_dd = (0.5 + 0.5 * sgn) * factor

    weight = pers**w
    if w == 0.0:
        dw_dp = np.zeros_like(pers)
    else:
        dw_dp = w * pers ** (w - 1.0)
    grad_b = weight[:, None] * dl_db + tent * (-dw_dp)[:, None]
    grad_d = weight[:, None] * dl_dd + tent * dw_dp[:, None]
    grad_d[ess] = 0.0
    d_births[src] = grad_b
    d_deaths[src] = grad_d
    d_times[:] = (weight[:, None] * dl_dt).sum(axis=0)
    d_weight[:] = (tent * (weight * np.log(pers))[:, None]).sum(axis=0)
    return PerslayGradients(d_births, d_deaths, d_times, d_weight)
