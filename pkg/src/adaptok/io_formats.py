"""On-disk formats: binary token/saliency files and result JSON.

Token files ("PTM1") and saliency files ("PSV1") share the same layout: a
4-byte magic, little-endian u32 dimensions, then a row-major float32 LE
payload whose byte length must match the header exactly.  Compute happens
in float64; files stay float32.

Selection results serialize as versioned JSON (``schema: 1``) with sorted
keys, so a fixed input always produces byte-identical output.  Wall-clock
timings are deliberately not part of the document.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .budget import BudgetSplit
from .errors import (
    BadMagicError,
    FormatError,
    NonFiniteValueError,
    TrailingDataError,
    TruncatedPayloadError,
    ValueRangeError,
)
from .pipeline import SelectionResult
from .prominence import EntropyReport

TOKEN_MAGIC = b"PTM1"
SALIENCY_MAGIC = b"PSV1"

_HEADER = struct.Struct("<4sII")

RESULT_SCHEMA = 1


def write_tokens(tokens, path) -> None:
    """Write an N x d matrix as a PTM1 file (float32 LE payload)."""
    arr = np.ascontiguousarray(np.asarray(tokens, dtype=np.float64), dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FormatError(f"token payload must be a nonempty 2-D matrix, got shape {arr.shape}")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(TOKEN_MAGIC, arr.shape[0], arr.shape[1]))
        f.write(arr.tobytes(order="C"))


def read_tokens(path) -> np.ndarray:
    """Read a PTM1 file into a float64 N x d matrix."""
    rows, cols, payload = _read_binary(path, TOKEN_MAGIC, "token")
    arr = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError(f"{path}: token payload contains non-finite floats")
    return arr


def write_saliency(head_scores, path) -> None:
    """Write H x N per-head scores (or a 1-D pre-reduced vector) as a PSV1 file."""
    arr = np.asarray(head_scores, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FormatError(f"saliency payload must be H x N, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError("saliency payload contains non-finite values")
    if np.any(arr < 0):
        raise ValueRangeError("saliency payload contains negative values")
    out = np.ascontiguousarray(arr, dtype=np.float32)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(SALIENCY_MAGIC, out.shape[0], out.shape[1]))
        f.write(out.tobytes(order="C"))


def read_saliency(path) -> np.ndarray:
    """Read a PSV1 file into a float64 H x N matrix of per-head scores."""
    heads, tokens, payload = _read_binary(path, SALIENCY_MAGIC, "saliency")
    arr = np.frombuffer(payload, dtype="<f4").reshape(heads, tokens).astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError(f"{path}: saliency payload contains non-finite floats")
    if np.any(arr < 0):
        raise ValueRangeError(f"{path}: saliency payload contains negative values")
    return arr


def _read_binary(path, magic: bytes, kind: str) -> tuple[int, int, bytes]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(
            f"{path}: file has {len(data)} bytes, shorter than the {_HEADER.size}-byte header"
        )
    got_magic, rows, cols = _HEADER.unpack_from(data)
    if got_magic != magic:
        raise BadMagicError(f"{path}: expected magic {magic!r}, found {got_magic!r}")
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: header declares empty {kind} matrix {rows}x{cols}")
    expected = 4 * rows * cols
    payload = data[_HEADER.size:]
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}"
        )
    if len(payload) > expected:
        raise TrailingDataError(
            f"{path}: {len(payload) - expected} trailing bytes after the payload"
        )
    return rows, cols, payload


def selection_result_to_json(result: SelectionResult) -> str:
    """Serialize a selection result to canonical (byte-stable) JSON."""
    doc = {
        "schema": RESULT_SCHEMA,
        "selected": [int(i) for i in result.selected],
        "stage_of": list(result.stage_of),
        "t_sal": result.split.t_sal,
        "t_cov": result.split.t_cov,
        "normalized_entropy": result.split.normalized_entropy,
        "coverage_ratio": result.split.coverage_ratio,
        "entropy": {
            "metric": result.entropy.metric,
            "raw_entropy": result.entropy.raw_entropy,
            "normalized_entropy": result.entropy.normalized_entropy,
            "normalizer": result.entropy.normalizer,
        },
        "coverage_pick_order": [int(i) for i in result.coverage_pick_order],
        "diagnostics": {k: float(v) for k, v in sorted(result.diagnostics.items())},
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def selection_result_from_json(text: str) -> SelectionResult:
    """Parse a serialized selection result; timings come back empty."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise FormatError(f"selection result is not valid JSON: {err}") from err
    if not isinstance(doc, dict) or doc.get("schema") != RESULT_SCHEMA:
        raise FormatError(
            f"unsupported selection result schema {doc.get('schema')!r}, expected {RESULT_SCHEMA}"
        )
    try:
        ent = doc["entropy"]
        return SelectionResult(
            selected=np.asarray(doc["selected"], dtype=np.int64),
            stage_of=[str(s) for s in doc["stage_of"]],
            split=BudgetSplit(
                t_sal=int(doc["t_sal"]),
                t_cov=int(doc["t_cov"]),
                normalized_entropy=float(doc["normalized_entropy"]),
                coverage_ratio=float(doc["coverage_ratio"]),
            ),
            entropy=EntropyReport(
                raw_entropy=float(ent["raw_entropy"]),
                normalized_entropy=float(ent["normalized_entropy"]),
                metric=str(ent["metric"]),
                normalizer=float(ent["normalizer"]),
            ),
            coverage_pick_order=np.asarray(doc["coverage_pick_order"], dtype=np.int64),
            diagnostics={str(k): float(v) for k, v in doc["diagnostics"].items()},
        )
    except (KeyError, TypeError, ValueError) as err:
        raise FormatError(f"selection result document is malformed: {err}") from err


def write_selection_result(result: SelectionResult, path) -> None:
    Path(path).write_text(selection_result_to_json(result), encoding="utf-8")


def read_selection_result(path) -> SelectionResult:
    return selection_result_from_json(Path(path).read_text(encoding="utf-8"))
