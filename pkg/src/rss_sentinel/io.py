"""File formats: trace/state/feature CSVs, model JSONs and report output.

All CSV uses ',' separators and '.' decimal points regardless of locale;
floats are written with repr so values round-trip exactly.  Readers raise
ParseError with the offending 1-based line number.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .features import FEATURE_BLOCKS, FeatureMatrix
from .fusion import FusionFeatureMatrix
from .simulate import RssTrace

__all__ = [
    "ParseError",
    "canonical_json",
    "trace_to_csv",
    "states_to_csv",
    "trace_from_csv",
    "features_to_csv",
    "features_from_csv",
    "labels_from_csv",
    "confusion_to_csv",
    "write_text",
]


class ParseError(ValueError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def canonical_json(doc) -> str:
    """Deterministic JSON rendering used for every report artifact."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def trace_to_csv(trace: RssTrace) -> str:
    """Rows are time-major: every path at second t, then second t+1."""
    lines = ["timestamp_s,path_id,rss_dbm"]
    ts = trace.timestamps
    for i in range(trace.duration_s):
        for j in range(trace.n_paths):
            lines.append(f"{ts[i]},{j},{trace.rss[i, j]!r}")
    return "\n".join(lines) + "\n"


def states_to_csv(trace: RssTrace) -> str:
    lines = ["timestamp_s,state_id"]
    ts = trace.timestamps
    for i in range(trace.duration_s):
        lines.append(f"{ts[i]},{trace.states[i]}")
    return "\n".join(lines) + "\n"


def _split_csv_line(line: str, n_fields: int, lineno: int) -> list[str]:
    parts = line.split(",")
    if len(parts) != n_fields:
        raise ParseError(lineno, f"expected {n_fields} fields, got {len(parts)}")
    return parts


def trace_from_csv(trace_csv: str, states_csv: str | None = None) -> RssTrace:
    """Rebuild a dense trace; validates the shared-timestamp grid."""
    lines = trace_csv.strip().splitlines()
    if not lines or lines[0].strip() != "timestamp_s,path_id,rss_dbm":
        raise ParseError(1, "expected header 'timestamp_s,path_id,rss_dbm'")
    records: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        t_s, p_s, r_s = _split_csv_line(line, 3, lineno)
        try:
            key = (int(t_s), int(p_s))
            value = float(r_s)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if key in records:
            raise ParseError(lineno, f"duplicate (timestamp, path) pair {key}")
        records[key] = value
    if not records:
        raise ParseError(2, "trace has no samples")
    times = sorted({t for t, _ in records})
    paths = sorted({p for _, p in records})
    if times != list(range(times[0], times[0] + len(times))):
        raise ParseError(2, "timestamps are not consecutive integers")
    if paths != list(range(len(paths))):
        raise ParseError(2, f"path ids must be 0..{len(paths) - 1}")
    rss = np.empty((len(times), len(paths)))
    for (t, p), v in records.items():
        rss[t - times[0], p] = v
    if len(records) != rss.size:
        raise ParseError(2, "paths do not share a common timestamp grid")

    if states_csv is not None:
        states = _states_from_csv(states_csv, times[0], len(times))
    else:
        states = np.zeros(len(times), dtype=np.int64)
    return RssTrace(rss=rss, states=states, start_s=times[0])


def _states_from_csv(states_csv: str, start: int, duration: int) -> np.ndarray:
    lines = states_csv.strip().splitlines()
    if not lines or lines[0].strip() != "timestamp_s,state_id":
        raise ParseError(1, "expected header 'timestamp_s,state_id'")
    states = np.full(duration, -1, dtype=np.int64)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        t_s, s_s = _split_csv_line(line, 2, lineno)
        try:
            t, s = int(t_s), int(s_s)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if not start <= t < start + duration:
            raise ParseError(lineno, f"timestamp {t} outside the trace range")
        states[t - start] = s
    if (states < 0).any():
        missing = int(np.argmax(states < 0)) + start
        raise ParseError(2, f"missing state for timestamp {missing}")
    return states


def _feature_names(width: int) -> list[str]:
    return [f"f_{i}" for i in range(width)]


def features_to_csv(matrix: FeatureMatrix | FusionFeatureMatrix) -> str:
    """Feature rows with an optional label column and a metadata comment."""
    meta: dict[str, object] = {}
    if isinstance(matrix, FeatureMatrix):
        meta = {
            "kind": "window",
            "normalized": int(matrix.normalized),
            "blocks": "|".join(FEATURE_BLOCKS),
        }
        if matrix.n_paths is not None:
            meta["n_paths"] = matrix.n_paths
        if matrix.window_len is not None:
            meta["window_len"] = matrix.window_len
    else:
        meta = {"kind": "fused"}
    header = _feature_names(matrix.values.shape[1])
    if matrix.labels is not None:
        header.append("label")
    lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items())]
    lines.append(",".join(header))
    for i, row in enumerate(matrix.values):
        cells = [repr(float(v)) for v in row]
        if matrix.labels is not None:
            cells.append(str(int(matrix.labels[i])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def features_from_csv(text: str) -> FeatureMatrix | FusionFeatureMatrix:
    lines = text.strip().splitlines()
    meta: dict[str, str] = {}
    lineno = 1
    if lines and lines[0].startswith("#"):
        for item in lines[0][1:].strip().split():
            if "=" in item:
                k, v = item.split("=", 1)
                meta[k] = v
        lines = lines[1:]
        lineno += 1
    if not lines:
        raise ParseError(lineno, "missing header row")
    header = [h.strip() for h in lines[0].split(",")]
    has_label = header and header[-1] == "label"
    width = len(header) - (1 if has_label else 0)
    if width < 1 or header[:width] != _feature_names(width):
        raise ParseError(lineno, "expected columns f_0..f_{d-1}[,label]")
    rows: list[list[float]] = []
    labels: list[int] = []
    for off, line in enumerate(lines[1:], start=lineno + 1):
        if not line.strip():
            continue
        parts = _split_csv_line(line, len(header), off)
        try:
            rows.append([float(v) for v in parts[:width]])
            if has_label:
                labels.append(int(parts[-1]))
        except ValueError as exc:
            raise ParseError(off, str(exc)) from None
    if not rows:
        raise ParseError(lineno + 1, "feature matrix has no rows")
    values = np.asarray(rows)
    label_arr = np.asarray(labels, dtype=np.int64) if has_label else None
    if meta.get("kind") == "fused":
        return FusionFeatureMatrix(values=values, labels=label_arr)
    return FeatureMatrix(
        values=values,
        normalized=bool(int(meta.get("normalized", "0"))),
        labels=label_arr,
        n_paths=int(meta["n_paths"]) if "n_paths" in meta else None,
        window_len=int(meta["window_len"]) if "window_len" in meta else None,
    )


def labels_from_csv(text: str) -> np.ndarray:
    """State-id sequence; accepts 'state_id' or 'timestamp_s,state_id' CSVs."""
    lines = text.strip().splitlines()
    if not lines:
        raise ParseError(1, "empty label file")
    header = [h.strip() for h in lines[0].split(",")]
    if "state_id" not in header:
        raise ParseError(1, "expected a 'state_id' column")
    col = header.index("state_id")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = _split_csv_line(line, len(header), lineno)
        try:
            out.append(int(parts[col]))
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
    if not out:
        raise ParseError(2, "label file has no rows")
    return np.asarray(out, dtype=np.int64)


def confusion_to_csv(confusion: np.ndarray) -> str:
    n = confusion.shape[0]
    lines = ["true_state," + ",".join(f"pred_{j}" for j in range(n))]
    for i in range(n):
        lines.append(f"{i}," + ",".join(repr(float(v)) for v in confusion[i]))
    return "\n".join(lines) + "\n"
