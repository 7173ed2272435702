#!/usr/bin/env python3
"""Build the two baseline feature families on a synthetic seeded image.

Generates a blobby grayscale image and its RGB companion, then produces:
  * the erosion-rows bifiltration summary (grayscale): per-slice Betti rows
    over 50 column thresholds for both homology dimensions,
  * the three-parameter color Betti tensors at 10 thresholds per channel,
  * a weighted-tent vectorization of the same slice family.
Writes the JSON documents next to --out-dir and prints every array shape so
the output can be eyeballed against the expected configuration.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from cubicalmp import (
    DEFAULT_EROSION_LEVELS,
    MultiChannelImage,
    ValueGrid,
    VectorizationDocument,
    VectorizationParams,
    color_betti_tensors,
    color_multifiltration,
    erosion_bifiltration,
    hilbert_function,
    psi_mp,
    serialize_vectorization_document,
    slice_rows,
    write_pgm,
    write_png,
)


def blobby_image(rng, side):
    """Smooth random field in [0, 255]: a few Gaussian bumps plus noise."""
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    field = np.zeros((side, side))
    for _ in range(6):
        cy, cx = rng.uniform(0, side, 2)
        s = rng.uniform(side / 10, side / 4)
        field += rng.uniform(0.4, 1.0) * np.exp(
            -((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s)
        )
    field += 0.05 * rng.random((side, side))
    field -= field.min()
    field *= 255.0 / field.max()
    return np.floor(field)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--side", type=int, default=32)
    ap.add_argument("--col-thresholds", type=int, default=50)
    ap.add_argument("--color-thresholds", type=int, default=10)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--out-dir", default="baseline_out")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    gray = blobby_image(rng, args.side)
    write_pgm(out_dir / "gray.pgm", gray)
    rgb = np.stack([blobby_image(rng, args.side) for _ in range(3)], axis=-1)
    write_png(out_dir / "rgb.png", rgb)

    # grayscale: erosion rows x sublevel columns
    thresholds = np.linspace(0.0, 255.0, args.col_thresholds)
    bif = erosion_bifiltration(ValueGrid(gray), thresholds)
    print(f"bifiltration grid: {bif.grid_rows} x {bif.grid_cols} "
          f"(levels {list(DEFAULT_EROSION_LEVELS)})")
    for dim in (0, 1):
        grid = hilbert_function(bif, dim)
        print(f"betti rows dim {dim}: {grid.values.shape}, "
              f"max {int(grid.values.max())}")

    sliced = slice_rows(bif)
    params = VectorizationParams.default(args.samples, bif.grid_cols + 1.0)
    mp = psi_mp(sliced, params)
    print(f"weighted-tent values: {mp.values.shape}, "
          f"aggregate: {mp.aggregate.shape}")
    doc = VectorizationDocument(
        kind="mp_vectorization",
        base="perslay",
        metadata={"source": "gray.pgm", "samples": args.samples},
        values=mp.values,
        aggregate=mp.aggregate,
        aggregator=mp.aggregator,
    )
    (out_dir / "gray_vectorization.json").write_text(
        serialize_vectorization_document(doc), encoding="utf-8"
    )

    # color: three sublevel axes
    chans = tuple(ValueGrid(rgb[:, :, c].astype(np.float64)) for c in range(3))
    thr = np.linspace(0.0, 255.0, args.color_thresholds)
    t0, t1 = color_betti_tensors(
        color_multifiltration(MultiChannelImage(chans), thr, thr, thr)
    )
    print(f"color betti tensors: {t0.shape} (dim 0), {t1.shape} (dim 1)")
    tensor_doc = VectorizationDocument(
        kind="betti_tensors",
        base="betti",
        metadata={"source": "rgb.png",
                  "thresholds": [float(t) for t in thr]},
        tensor_dim0=t0.values,
        tensor_dim1=t1.values,
    )
    (out_dir / "color_tensors.json").write_text(
        serialize_vectorization_document(tensor_doc), encoding="utf-8"
    )

    print(f"documents written to {out_dir}/", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
