"""Command-line surface: diagrams, vectorizations, distances, verification,
and a throughput benchmark.

Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 verification
failure. The environment variable CUMPER_THREADS overrides any --threads
flag. All randomized commands take an explicit --seed; outputs are
byte-identical across runs and worker counts.
"""

from __future__ import annotations

import argparse
import math
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .engine import compute_pd, compute_pd_batch
from .filtrations import (
    CompactMultiFiltration,
    DEFAULT_EROSION_LEVELS,
    color_multifiltration,
    erosion_bifiltration,
)
from .grids import MultiChannelImage, ValueGrid
from .io import (
    DiagramDocument,
    IOFormatError,
    VectorizationDocument,
    load_image,
    parse_diagram_document,
    parse_vectorization_document,
    serialize_diagram_document,
    serialize_vectorization_document,
)
from .metrics import (
    bottleneck_distance,
    mp_diagram_distance,
    mp_vectorization_distance,
    _slice_cost,
)
from .multipers import SlicedDiagrams, color_betti_tensors, slice_rows
from .oracle import oracle_pd
from .vectorize import VectorizationParams, induced_mp_vectorization, psi_mp

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3

CHANNEL_INDEX = {"r": 0, "g": 1, "b": 2}


class UsageError(Exception):
    pass


class VerificationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we own the codes
        raise UsageError(message)


def resolve_workers(requested: int) -> int:
    env = os.environ.get("CUMPER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"CUMPER_THREADS must be an integer, got {env!r}") from None
    return max(1, int(requested))


def _write_text(out_path: str | None, text: str) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _load_grayscale(path: str, channel: str | None):
    img = load_image(path)
    if isinstance(img, MultiChannelImage):
        if channel is None:
            raise IOFormatError(
                f"{path} is multi-channel; pick one with --channel r|g|b"
            )
        return img.channels[CHANNEL_INDEX[channel]]
    return img


def _is_eight_bit(path: str) -> bool:
    return Path(path).suffix.lower() in (".pgm", ".png")


def _parse_threshold_flag(raw: str, grid: ValueGrid, eight_bit: bool) -> np.ndarray:
    """Either an explicit comma list of reals or a count of equal steps.

    A bare integer is a count; counts span [0, 255] for 8-bit sources and
    the data range otherwise.
    """
    if "," in raw or "." in raw:
        try:
            vals = np.array([float(tok) for tok in raw.split(",") if tok != ""])
        except ValueError:
            raise UsageError(f"bad threshold list {raw!r}") from None
        if vals.size < 1 or (vals.size > 1 and not np.all(np.diff(vals) > 0)):
            raise UsageError("thresholds must be strictly increasing")
        return vals
    try:
        count = int(raw)
    except ValueError:
        raise UsageError(f"--thresholds wants a count or a comma list, got {raw!r}") from None
    if count < 1:
        raise UsageError("threshold count must be >= 1")
    if eight_bit:
        lo, hi = 0.0, 255.0
    else:
        lo, hi = float(grid.values.min()), float(grid.values.max())
    if count == 1:
        return np.array([hi])
    if lo == hi:
        raise UsageError("cannot space thresholds over a constant image; give a list")
    return np.linspace(lo, hi, count)


def _quantize(grid: ValueGrid, thresholds: np.ndarray) -> ValueGrid:
    """Map values to 1-based threshold levels; above-range gets sentinel N+1."""
    levels = np.searchsorted(thresholds, grid.values, side="left") + 1
    return ValueGrid(levels.astype(np.float64))


# ---------------------------------------------------------------------------
# pd


def cmd_pd(args) -> int:
    grid = _load_grayscale(args.image, args.channel)
    metadata: dict = {
        "source": Path(args.image).name,
        "height": grid.height,
        "width": grid.width,
        "superlevel": bool(args.superlevel),
    }
    if args.superlevel:
        # reported in the negated domain: superlevel set of v = sublevel of -v
        grid = grid.negate()
    dims = (0, 1) if args.dim == "both" else (int(args.dim),)
    if args.thresholds is not None:
        # count mode spans [0, 255] only for untouched 8-bit data; a negated
        # grid falls back to its own (negated) data range
        thresholds = _parse_threshold_flag(
            args.thresholds, grid, _is_eight_bit(args.image) and not args.superlevel
        )
        metadata["thresholds"] = [float(t) for t in thresholds]
        metadata["num_levels"] = int(thresholds.size)
        working = _quantize(grid, thresholds)
        diagram = compute_pd(working, dims, float(thresholds.size + 2))
        integer_valued = True
    else:
        working = grid
        diagram = compute_pd(working, dims)
        integer_valued = working.is_integer_valued()
    metadata["dims"] = list(dims)
    doc = DiagramDocument((diagram,), integer_valued, metadata)
    _write_text(args.out, serialize_diagram_document(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# mp


def _parse_level_list(raw: str) -> tuple[int, ...]:
    try:
        levels = tuple(int(tok) for tok in raw.split(",") if tok != "")
    except ValueError:
        raise UsageError(f"bad level list {raw!r}") from None
    if not levels:
        raise UsageError("empty level list")
    if any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 0:
        raise UsageError("row levels must be nonnegative and strictly increasing")
    return levels


def _erosion_vectorization(args, sliced: SlicedDiagrams, num_cols: int):
    q = int(args.samples)
    if q < 1:
        raise UsageError("--samples must be >= 1")
    cap = float(num_cols + 1)
    params = VectorizationParams(
        np.linspace(0.0, cap, q) if q > 1 else np.array([cap]),
        weight_exponent=float(args.weight),
        landscape_level=int(args.landscape_level),
    )
    if args.vectorize == "perslay":
        mp = psi_mp(sliced, params)
        return mp.values, mp.aggregate
    if args.vectorize == "betti":
        rows0 = induced_mp_vectorization(sliced, "betti", params, 0)
        rows1 = induced_mp_vectorization(sliced, "betti", params, 1)
    else:
        rows0 = induced_mp_vectorization(sliced, args.vectorize, params, 0)
        rows1 = induced_mp_vectorization(sliced, args.vectorize, params, 1)
    values = np.stack([rows0, rows1], axis=1)
    return values, values.reshape(-1)


def cmd_mp(args) -> int:
    if args.cols != "sublevel":
        raise UsageError(f"unsupported column axis {args.cols!r}")
    img = load_image(args.image)
    count = int(args.col_thresholds)
    if count < 1:
        raise UsageError("--col-thresholds must be >= 1")

    if args.rows == "erosion":
        if isinstance(img, MultiChannelImage):
            raise IOFormatError(
                f"{args.image} is multi-channel; erosion rows need grayscale input"
            )
        if _is_eight_bit(args.image):
            lo, hi = 0.0, 255.0
        else:
            lo, hi = float(img.values.min()), float(img.values.max())
            if lo == hi:
                hi = lo + 1.0
        thresholds = np.linspace(lo, hi, count) if count > 1 else np.array([hi])
        levels = _parse_level_list(args.row_levels)
        bif = erosion_bifiltration(img, thresholds, levels, strict=not args.nonstrict_erosion)
        workers = resolve_workers(args.threads)
        sliced = slice_rows(bif, workers)
        values, aggregate = _erosion_vectorization(args, sliced, bif.grid_cols)
        metadata = {
            "rows": "erosion",
            "row_levels": [int(x) for x in levels],
            "col_thresholds": [float(t) for t in thresholds],
            "strict_erosion": not args.nonstrict_erosion,
            "samples": int(args.samples),
            "weight": float(args.weight),
            "source": Path(args.image).name,
        }
        doc = VectorizationDocument(
            kind="mp_vectorization",
            base=args.vectorize,
            metadata=metadata,
            values=values,
            aggregate=aggregate,
            aggregator="flatten-concatenate",
        )
        _write_text(args.out, serialize_vectorization_document(doc))
        if args.diagrams_out:
            ddoc = DiagramDocument(
                tuple(sliced),
                True,
                {
                    "num_slices": sliced.num_slices,
                    "num_cols": sliced.num_cols,
                    "row_levels": [int(x) for x in levels],
                    "col_thresholds": [float(t) for t in thresholds],
                    "source": Path(args.image).name,
                },
            )
            Path(args.diagrams_out).write_text(
                serialize_diagram_document(ddoc), encoding="utf-8"
            )
        return EXIT_OK

    # channel rows: three-parameter Betti tensor path
    letter = args.rows.split(":", 1)[1]
    if not isinstance(img, MultiChannelImage):
        raise IOFormatError(f"{args.image} is grayscale; channel rows need RGB input")
    if args.vectorize != "betti":
        raise UsageError("channel rows support only --vectorize betti")
    order = {"r": (0, 1, 2), "g": (1, 0, 2), "b": (2, 0, 1)}[letter]
    channels = tuple(img.channels[i] for i in order)
    thr = np.linspace(0.0, 255.0, count) if count > 1 else np.array([255.0])
    cmf = color_multifiltration(MultiChannelImage(channels), thr, thr, thr)
    t0, t1 = color_betti_tensors(cmf)
    metadata = {
        "rows": args.rows,
        "axis_order": [["r", "g", "b"][i] for i in order],
        "col_thresholds": [float(t) for t in thr],
        "source": Path(args.image).name,
    }
    doc = VectorizationDocument(
        kind="betti_tensors",
        base="betti",
        metadata=metadata,
        tensor_dim0=t0.values,
        tensor_dim1=t1.values,
    )
    _write_text(args.out, serialize_vectorization_document(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# distance


def _parse_p(raw: str) -> float:
    if raw.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        p = float(raw)
    except ValueError:
        raise UsageError(f"--p must be a positive real or inf, got {raw!r}") from None
    if p <= 0:
        raise UsageError("--p must be positive")
    return p


def _single_slice(doc: DiagramDocument, path: str):
    if len(doc.diagrams) != 1:
        raise IOFormatError(
            f"{path} holds {len(doc.diagrams)} slices; this metric wants exactly one"
        )
    return doc.diagrams[0]


def cmd_distance(args) -> int:
    p = _parse_p(args.p)
    text_a = Path(args.a).read_text(encoding="utf-8")
    text_b = Path(args.b).read_text(encoding="utf-8")
    if args.metric == "vec":
        da = parse_vectorization_document(text_a)
        db = parse_vectorization_document(text_b)
        if da.kind != db.kind:
            raise IOFormatError(f"document kinds differ: {da.kind} vs {db.kind}")
        if da.kind == "mp_vectorization":
            value = mp_vectorization_distance(da.values, db.values)
        else:
            value = mp_vectorization_distance(
                da.tensor_dim0, db.tensor_dim0
            ) + mp_vectorization_distance(da.tensor_dim1, db.tensor_dim1)
    else:
        da = parse_diagram_document(text_a)
        db = parse_diagram_document(text_b)
        clip = float(args.clip) if args.clip is not None else None
        if args.metric == "wasserstein":
            ga, gb = _single_slice(da, args.a), _single_slice(db, args.b)
            value = _slice_cost(ga, gb, p, args.essential, clip)
        elif args.metric == "bottleneck":
            ga, gb = _single_slice(da, args.a), _single_slice(db, args.b)
            value = max(bottleneck_distance(ga, gb, dim) for dim in (0, 1))
        else:  # mp-sum
            if len(da.diagrams) != len(db.diagrams):
                raise IOFormatError(
                    f"slice counts differ: {len(da.diagrams)} vs {len(db.diagrams)}"
                )
            sa = SlicedDiagrams(da.diagrams, int(da.metadata.get("num_cols", 0)))
            sb = SlicedDiagrams(db.diagrams, int(db.metadata.get("num_cols", 0)))
            value = mp_diagram_distance(sa, sb, p, args.essential, clip)
    print(format(float(value), ".12g"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle-check


def _multiset(diagram, dim):
    return sorted((p.birth, p.death) for p in diagram.pairs(dim))


def _check_grid(values: np.ndarray) -> bool:
    grid = ValueGrid(values.astype(np.float64))
    engine = compute_pd(grid, (0, 1))
    oracle = oracle_pd(grid)
    return _multiset(engine, 0) == _multiset(oracle, 0) and _multiset(
        engine, 1
    ) == _multiset(oracle, 1)


def cmd_oracle_check(args) -> int:
    if args.trials < 0 or args.max_size < 1:
        raise UsageError("--trials must be >= 0 and --max-size >= 1")
    failures = 0
    checked = 0
    for shape in ((2, 2), (2, 3)):
        cells = shape[0] * shape[1]
        for code in range(3**cells):
            digits = []
            c = code
            for _ in range(cells):
                digits.append(c % 3)
                c //= 3
            values = np.array(digits, dtype=np.float64).reshape(shape)
            checked += 1
            if not _check_grid(values):
                failures += 1
    print(f"exhaustive: {checked} grids, {failures} mismatches")
    rng = np.random.default_rng(args.seed)
    rand_fail = 0
    for _ in range(args.trials):
        h = int(rng.integers(1, args.max_size + 1))
        w = int(rng.integers(1, args.max_size + 1))
        values = rng.integers(0, 10, (h, w)).astype(np.float64)
        if not _check_grid(values):
            rand_fail += 1
    print(f"randomized: {args.trials} grids (seed {args.seed}), {rand_fail} mismatches")
    if failures or rand_fail:
        raise VerificationError(
            f"{failures + rand_fail} engine-vs-reference mismatches"
        )
    print("all checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def _parse_size(raw: str) -> tuple[int, int]:
    parts = raw.lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"--size wants HxW, got {raw!r}")
    try:
        h, w = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--size wants HxW integers, got {raw!r}") from None
    if h < 1 or w < 1:
        raise UsageError("--size dimensions must be >= 1")
    return h, w


def cmd_bench(args) -> int:
    height, width = _parse_size(args.size)
    m, n, batch, repeat = args.slices, args.levels, args.batch, args.repeat
    if min(m, n, batch, repeat) < 1:
        raise UsageError("--slices/--levels/--batch/--repeat must be >= 1")
    threads = resolve_workers(args.threads)
    rng = np.random.default_rng(args.seed)
    stacks = []
    for _ in range(batch):
        raw = rng.integers(0, n + 1, (m, height, width))
        raw = np.ascontiguousarray(np.sort(raw, axis=0)[::-1])  # valid: non-increasing
        stacks.append(CompactMultiFiltration(raw, n))

    # warm pass also charges one-time compilation outside the timings
    pairs_total = sum(
        len(d.pairs_dim0) + len(d.pairs_dim1)
        for d in compute_pd_batch(stacks[0], (0, 1), 1)
    )

    worker_counts = [1] if threads == 1 else [1, threads]
    rows = ["workers,repeat,wall_seconds"]
    means = {}
    for workers in worker_counts:
        samples = []
        for rep in range(repeat):
            t0 = time.perf_counter()
            for cmf in stacks:
                compute_pd_batch(cmf, (0, 1), workers)
            wall = time.perf_counter() - t0
            samples.append(wall)
            rows.append(f"{workers},{rep},{wall:.9f}")
        mean = statistics.fmean(samples)
        std = statistics.pstdev(samples) if len(samples) > 1 else 0.0
        means[workers] = mean
        print(
            f"workers={workers}: mean {mean:.4f} s/batch +- {std:.4f} "
            f"({batch} stacks of {m} slices, {height}x{width}, {n} levels)",
            file=sys.stderr,
        )
    if len(worker_counts) == 2:
        speedup = means[1] / means[worker_counts[1]] if means[worker_counts[1]] > 0 else float("inf")
        print(f"speedup({worker_counts[1]}) = {speedup:.2f}x (reported, not asserted)", file=sys.stderr)
    print(f"first-stack pair count: {pairs_total}", file=sys.stderr)
    _write_text(args.out, "\n".join(rows) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="cubicalmp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pd", help="persistence diagram of one image")
    p.add_argument("image")
    p.add_argument("--dim", choices=("0", "1", "both"), default="both")
    p.add_argument("--superlevel", action="store_true",
                   help="filter by decreasing value (reported in the negated domain)")
    p.add_argument("--channel", choices=("r", "g", "b"),
                   help="channel to take from an RGB input")
    p.add_argument("--thresholds",
                   help="comma list of levels, or a bare integer for equally spaced levels")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_pd)

    p = sub.add_parser("mp", help="two- or three-parameter vectorization")
    p.add_argument("image")
    p.add_argument("--rows", choices=("erosion", "channel:r", "channel:g", "channel:b"),
                   default="erosion")
    p.add_argument("--cols", choices=("sublevel",), default="sublevel")
    p.add_argument("--row-levels", default=",".join(str(x) for x in DEFAULT_EROSION_LEVELS),
                   help="comma list of erosion levels")
    p.add_argument("--col-thresholds", type=int, default=50,
                   help="number of equally spaced column thresholds")
    p.add_argument("--vectorize", choices=("betti", "silhouette", "landscape", "perslay"),
                   default="betti")
    p.add_argument("--samples", type=int, default=100,
                   help="vector length per slice and dimension")
    p.add_argument("--weight", type=float, default=1.0,
                   help="persistence weight exponent")
    p.add_argument("--landscape-level", type=int, default=1)
    p.add_argument("--nonstrict-erosion", action="store_true",
                   help="include the reference region at erosion level 0")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.add_argument("--diagrams-out", help="also write the per-slice diagrams here")
    p.set_defaults(func=cmd_mp)

    p = sub.add_parser("distance", help="distance between two JSON documents")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", choices=("wasserstein", "bottleneck", "mp-sum", "vec"),
                   default="wasserstein")
    p.add_argument("--p", default="1")
    p.add_argument("--essential", choices=("exclude", "clip"), default="exclude")
    p.add_argument("--clip", type=float, help="death substituted for infinity in clip mode")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("oracle-check", help="engine vs reference reduction")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("bench", help="throughput benchmark")
    p.add_argument("--size", default="224x224")
    p.add_argument("--slices", type=int, default=16)
    p.add_argument("--levels", type=int, default=32)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--threads", type=int, default=8)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IOFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
