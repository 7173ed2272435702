"""Image ingestion and versioned JSON documents for diagrams and vectors.

Formats: PGM (P2 and P5), 8-bit grayscale or RGB PNG, and plain CSV grids.
Documents serialize through one canonical emitter (fixed key order, 17
significant digits for reals, integer filtration values emitted as integers,
infinite deaths as the string "inf") so equal documents produce byte-equal
files and every file round-trips losslessly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .engine import INFINITY, PersistenceDiagram, PersistencePair
from .grids import MultiChannelImage, PixelCoord, ValueGrid

SCHEMA_VERSION = "1"


class IOFormatError(ValueError):
    """Unreadable, malformed, or unsupported input data."""


# ---------------------------------------------------------------------------
# canonical JSON emission


def dumps_canonical(obj) -> str:
    """Serialize nested dicts/lists/scalars with deterministic bytes.

    Dict keys keep insertion order; floats use 17 significant digits (enough
    to round-trip doubles exactly); non-finite floats are refused because the
    schema spells infinity as a string.
    """
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def _emit(o, out: list[str]) -> None:
    if o is None:
        out.append("null")
    elif o is True:
        out.append("true")
    elif o is False:
        out.append("false")
    elif isinstance(o, str):
        out.append(json.dumps(o))
    elif isinstance(o, (int, np.integer)):
        out.append(str(int(o)))
    elif isinstance(o, (float, np.floating)):
        x = float(o)
        if not math.isfinite(x):
            raise ValueError("non-finite reals must be encoded as strings upstream")
        out.append(format(x, ".17g"))
    elif isinstance(o, dict):
        out.append("{")
        first = True
        for k, v in o.items():
            if not isinstance(k, str):
                raise TypeError(f"document keys must be strings, got {type(k)}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(k))
            out.append(":")
            _emit(v, out)
        out.append("}")
    elif isinstance(o, (list, tuple)):
        out.append("[")
        for i, v in enumerate(o):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(o)}")


def _load_json(text: str) -> dict:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IOFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise IOFormatError("document root must be an object")
    return payload


def _require_schema(payload: dict, kind: str) -> None:
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise IOFormatError(
            f"unsupported schema_version {payload.get('schema_version')!r}"
        )
    if payload.get("kind") != kind:
        raise IOFormatError(f"expected kind {kind!r}, got {payload.get('kind')!r}")


# ---------------------------------------------------------------------------
# diagram documents


@dataclass(frozen=True)
class DiagramDocument:
    """One or more per-slice diagrams plus provenance metadata."""

    diagrams: tuple[PersistenceDiagram, ...]
    integer_valued: bool
    metadata: dict = field(default_factory=dict)


def _value_out(x: float, integer_valued: bool):
    if math.isinf(x):
        return "inf"
    if integer_valued:
        return int(x)
    return float(x)


def _pairs_payload(pairs: Sequence[PersistencePair], integer_valued: bool):
    values = []
    coords = []
    for p in pairs:
        values.append([_value_out(p.birth, integer_valued), _value_out(p.death, integer_valued)])
        bc = p.birth_coord
        dc = p.death_coord
        coords.append(
            [
                int(bc.row) if bc else -1,
                int(bc.col) if bc else -1,
                int(dc.row) if dc else -1,
                int(dc.col) if dc else -1,
            ]
        )
    return values, coords


def serialize_diagram_document(doc: DiagramDocument) -> str:
    slices = []
    for s, diagram in enumerate(doc.diagrams):
        entry: dict = {"slice_index": s}
        for dim in (0, 1):
            values, coords = _pairs_payload(diagram.pairs(dim), doc.integer_valued)
            entry[f"dim{dim}"] = values
            entry[f"coords_dim{dim}"] = coords
        slices.append(entry)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "persistence_diagram",
        "integer_valued": bool(doc.integer_valued),
        "metadata": doc.metadata,
        "slices": slices,
    }
    return dumps_canonical(payload) + "\n"


def _value_in(x) -> float:
    if x == "inf":
        return INFINITY
    if isinstance(x, (int, float)):
        return float(x)
    raise IOFormatError(f"bad diagram value {x!r}")


def _coord_in(row, col):
    if row == -1 and col == -1:
        return None
    return PixelCoord(int(row), int(col))


def parse_diagram_document(text: str) -> DiagramDocument:
    payload = _load_json(text)
    _require_schema(payload, "persistence_diagram")
    diagrams = []
    for entry in payload.get("slices", []):
        slice_index = int(entry.get("slice_index", 0))
        by_dim: dict[int, list[PersistencePair]] = {0: [], 1: []}
        for dim in (0, 1):
            values = entry.get(f"dim{dim}", [])
            coords = entry.get(f"coords_dim{dim}") or [[-1, -1, -1, -1]] * len(values)
            if len(coords) != len(values):
                raise IOFormatError("coordinate list length mismatch")
            for (b, d), (br, bc, dr, dc) in zip(values, coords):
                by_dim[dim].append(
                    PersistencePair(
                        dim=dim,
                        birth=_value_in(b),
                        death=_value_in(d),
                        birth_coord=_coord_in(br, bc),
                        death_coord=_coord_in(dr, dc),
                        slice_index=slice_index,
                    )
                )
        diagrams.append(PersistenceDiagram(tuple(by_dim[0]), tuple(by_dim[1])))
    return DiagramDocument(
        diagrams=tuple(diagrams),
        integer_valued=bool(payload.get("integer_valued", False)),
        metadata=payload.get("metadata", {}),
    )


# ---------------------------------------------------------------------------
# vectorization documents


@dataclass(frozen=True, eq=False)
class VectorizationDocument:
    """Either per-slice vectors with an aggregate, or a pair of Betti tensors."""

    kind: str  # "mp_vectorization" | "betti_tensors"
    base: str
    metadata: dict = field(default_factory=dict)
    values: np.ndarray | None = None  # (M, 2, q)
    aggregate: np.ndarray | None = None
    aggregator: str | None = None
    tensor_dim0: np.ndarray | None = None
    tensor_dim1: np.ndarray | None = None

    def __eq__(self, other):
        if not isinstance(other, VectorizationDocument):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return (a is None) == (b is None)
            return a.shape == b.shape and bool(np.array_equal(a, b))

        return (
            self.kind == other.kind
            and self.base == other.base
            and self.metadata == other.metadata
            and self.aggregator == other.aggregator
            and same(self.values, other.values)
            and same(self.aggregate, other.aggregate)
            and same(self.tensor_dim0, other.tensor_dim0)
            and same(self.tensor_dim1, other.tensor_dim1)
        )


def serialize_vectorization_document(doc: VectorizationDocument) -> str:
    payload: dict = {"schema_version": SCHEMA_VERSION, "kind": doc.kind, "base": doc.base}
    if doc.kind == "mp_vectorization":
        values = np.asarray(doc.values, dtype=np.float64)
        aggregate = np.asarray(doc.aggregate, dtype=np.float64)
        payload["aggregator"] = doc.aggregator
        payload["shape"] = [int(x) for x in values.shape]
        payload["values"] = [float(x) for x in values.reshape(-1)]
        payload["aggregate"] = [float(x) for x in aggregate.reshape(-1)]
    elif doc.kind == "betti_tensors":
        for name, arr in (("dim0", doc.tensor_dim0), ("dim1", doc.tensor_dim1)):
            tensor = np.asarray(arr, dtype=np.int64)
            payload[f"{name}_shape"] = [int(x) for x in tensor.shape]
            payload[name] = [int(x) for x in tensor.reshape(-1)]
    else:
        raise ValueError(f"unknown vectorization document kind {doc.kind!r}")
    payload["metadata"] = doc.metadata
    return dumps_canonical(payload) + "\n"


def parse_vectorization_document(text: str) -> VectorizationDocument:
    payload = _load_json(text)
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise IOFormatError(
            f"unsupported schema_version {payload.get('schema_version')!r}"
        )
    kind = payload.get("kind")
    if kind == "mp_vectorization":
        shape = tuple(int(x) for x in payload["shape"])
        values = np.asarray(payload["values"], dtype=np.float64).reshape(shape)
        aggregate = np.asarray(payload["aggregate"], dtype=np.float64)
        return VectorizationDocument(
            kind=kind,
            base=str(payload.get("base", "")),
            metadata=payload.get("metadata", {}),
            values=values,
            aggregate=aggregate,
            aggregator=payload.get("aggregator"),
        )
    if kind == "betti_tensors":
        t0 = np.asarray(payload["dim0"], dtype=np.int64).reshape(
            tuple(int(x) for x in payload["dim0_shape"])
        )
        t1 = np.asarray(payload["dim1"], dtype=np.int64).reshape(
            tuple(int(x) for x in payload["dim1_shape"])
        )
        return VectorizationDocument(
            kind=kind,
            base=str(payload.get("base", "")),
            metadata=payload.get("metadata", {}),
            tensor_dim0=t0,
            tensor_dim1=t1,
        )
    raise IOFormatError(f"unknown document kind {kind!r}")


# ---------------------------------------------------------------------------
# image loading


def load_image(path) -> ValueGrid | MultiChannelImage:
    """Read a PGM, PNG, or CSV image by extension."""
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise IOFormatError(f"cannot read {p}: {exc}") from exc
    suffix = p.suffix.lower()
    if suffix == ".pgm":
        return _parse_pgm(data)
    if suffix == ".png":
        return _load_png(p)
    if suffix == ".csv":
        return _parse_csv(data)
    raise IOFormatError(f"unsupported image format {suffix!r} (want .pgm/.png/.csv)")


def _parse_pgm(data: bytes) -> ValueGrid:
    pos = 0

    def token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            if data[pos : pos + 1] == b"#":
                break
            pos += 1
        if start == pos:
            raise IOFormatError("truncated PGM header")
        return data[start:pos]

    magic = token()
    if magic not in (b"P2", b"P5"):
        raise IOFormatError(f"not a PGM file (magic {magic!r})")
    try:
        width = int(token())
        height = int(token())
        maxval = int(token())
    except ValueError as exc:
        raise IOFormatError("malformed PGM header") from exc
    if width < 1 or height < 1 or not (1 <= maxval <= 65535):
        raise IOFormatError(f"bad PGM dimensions {width}x{height} maxval {maxval}")
    count = width * height
    if magic == b"P2":
        try:
            samples = [int(token()) for _ in range(count)]
        except IOFormatError as exc:
            raise IOFormatError("PGM P2 pixel data truncated") from exc
        arr = np.array(samples, dtype=np.float64)
    else:
        pos += 1  # single whitespace after maxval
        bytes_per = 1 if maxval < 256 else 2
        raw = data[pos : pos + count * bytes_per]
        if len(raw) != count * bytes_per:
            raise IOFormatError("PGM P5 pixel data truncated")
        dtype = np.uint8 if bytes_per == 1 else np.dtype(">u2")
        arr = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    if arr.size and arr.max() > maxval:
        raise IOFormatError("PGM sample exceeds declared maxval")
    return ValueGrid(arr.reshape(height, width))


def write_pgm(path, array, maxval: int | None = None, binary: bool = True) -> None:
    arr = np.asarray(array)
    if not np.all(arr == np.floor(arr)) or arr.min() < 0:
        raise ValueError("PGM needs nonnegative integer samples")
    arr = arr.astype(np.int64)
    if maxval is None:
        maxval = max(255, int(arr.max())) if arr.size else 255
    if arr.size and arr.max() > maxval:
        raise ValueError("sample exceeds maxval")
    h, w = arr.shape
    header = f"P5 {w} {h} {maxval}\n" if binary else f"P2\n{w} {h}\n{maxval}\n"
    if binary:
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        body = arr.astype(dtype).tobytes()
        Path(path).write_bytes(header.encode("ascii") + body)
    else:
        lines = "\n".join(" ".join(str(v) for v in row) for row in arr.tolist())
        Path(path).write_text(header + lines + "\n", encoding="ascii")


def _load_png(path: Path) -> ValueGrid | MultiChannelImage:
    try:
        with Image.open(path) as img:
            mode = img.mode
            if mode == "L":
                return ValueGrid(np.asarray(img, dtype=np.float64))
            if mode == "RGB":
                arr = np.asarray(img, dtype=np.float64)
                return MultiChannelImage(
                    tuple(ValueGrid(arr[:, :, c]) for c in range(3))
                )
            raise IOFormatError(
                f"unsupported PNG mode {mode!r}; need 8-bit grayscale (L) or RGB"
            )
    except IOFormatError:
        raise
    except Exception as exc:
        raise IOFormatError(f"cannot decode PNG {path}: {exc}") from exc


def write_png(path, array) -> None:
    arr = np.asarray(array)
    if arr.ndim == 2:
        Image.fromarray(arr.astype(np.uint8), mode="L").save(path)
    elif arr.ndim == 3 and arr.shape[2] == 3:
        Image.fromarray(arr.astype(np.uint8), mode="RGB").save(path)
    else:
        raise ValueError(f"cannot encode shape {arr.shape} as PNG")


def _parse_csv(data: bytes) -> ValueGrid:
    from io import StringIO

    try:
        text = data.decode("utf-8")
        arr = np.loadtxt(StringIO(text), delimiter=",", ndmin=2, dtype=np.float64)
    except Exception as exc:
        raise IOFormatError(f"cannot parse CSV grid: {exc}") from exc
    try:
        return ValueGrid(arr)
    except ValueError as exc:
        raise IOFormatError(str(exc)) from exc
