"""File formats: PMU snapshot CSV, generator series CSV, JSON documents.

PMU CSV columns are ``timestamp_us`` followed by magnitude/angle pairs for
``vs, vr, is, ir`` x phases ``a, b, c`` (24 value columns). Magnitudes are
p.u., angles radians, all printed with 17 significant digits so doubles
survive the round trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import ParseError
from .gen_estimator import GenTimeSeries
from .phasors import CHANNELS, MeasurementSnapshot, Phasor, ThreePhaseSet

PMU_COLUMNS = ("timestamp_us",) + tuple(
    f"{ch}_{ph}_{part}" for ch in CHANNELS for ph in "abc" for part in ("mag", "ang")
)
GEN_COLUMNS = ("time_s", "w_delta", "pe_delta")


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_rows(path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def write_pmu_csv(path, snapshots: Sequence[MeasurementSnapshot]) -> None:
    rows = []
    for s in snapshots:
        row = [str(s.timestamp)]
        for ch in CHANNELS:
            for p in s.channel(ch):
                row += [fmt(p.magnitude), fmt(p.angle)]
        rows.append(row)
    _write_rows(path, PMU_COLUMNS, rows)


def _read_rows(path, expected: Sequence[str]) -> list[tuple[int, list[str]]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise ParseError(f"{path}: empty file")
    if tuple(h.strip() for h in header) != tuple(expected):
        raise ParseError(f"{path}: line 1: unexpected header, expected {','.join(expected)}")
    return [(n, row) for n, row in enumerate(reader, start=2) if row]


def _number(text: str, path, line: int, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{path}: line {line}: {column}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"{path}: line {line}: {column}: not finite")
    return v


def read_pmu_csv(path) -> list[MeasurementSnapshot]:
    snapshots = []
    last_ts = None
    for line, row in _read_rows(path, PMU_COLUMNS):
        if len(row) != len(PMU_COLUMNS):
            raise ParseError(f"{path}: line {line}: expected {len(PMU_COLUMNS)} fields, got {len(row)}")
        try:
            ts = int(row[0])
        except ValueError:
            raise ParseError(f"{path}: line {line}: timestamp_us: not an integer") from None
        if last_ts is not None and ts <= last_ts:
            raise ParseError(f"{path}: line {line}: timestamps must strictly increase")
        last_ts = ts
        vals = [_number(v, path, line, PMU_COLUMNS[i + 1]) for i, v in enumerate(row[1:])]
        sets = []
        for c in range(4):
            phasors = []
            for ph in range(3):
                mag, ang = vals[6 * c + 2 * ph], vals[6 * c + 2 * ph + 1]
                try:
                    phasors.append(Phasor(mag, ang))
                except ValueError as exc:
                    raise ParseError(f"{path}: line {line}: {exc}") from None
            sets.append(ThreePhaseSet(*phasors))
        snapshots.append(MeasurementSnapshot(ts, *sets))
    return snapshots


def write_gen_csv(path, series: GenTimeSeries) -> None:
    t = np.arange(len(series)) * series.step_h
    rows = [[fmt(a), fmt(b), fmt(c)] for a, b, c in zip(t, series.w_delta, series.pe_delta)]
    _write_rows(path, GEN_COLUMNS, rows)


def read_gen_csv(path, step_h: float | None = None) -> GenTimeSeries:
    """Read a generator series; the step defaults to the median time increment."""
    rows = _read_rows(path, GEN_COLUMNS)
    data = np.array(
        [[_number(v, path, line, GEN_COLUMNS[i]) for i, v in enumerate(row)] for line, row in rows]
    ).reshape(-1, 3)
    if step_h is None:
        if data.shape[0] < 2:
            raise ParseError(f"{path}: need at least two samples to infer the step")
        diffs = np.diff(data[:, 0])
        if np.any(diffs <= 0):
            raise ParseError(f"{path}: time_s must strictly increase")
        step_h = float(np.median(diffs))
    return GenTimeSeries(step_h, data[:, 1], data[:, 2])


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(_jsonable(doc), indent=2) + "\n")


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
