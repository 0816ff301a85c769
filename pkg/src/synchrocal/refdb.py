"""EMS/PMS reference records and screening persistence, stored as one JSON file.

Schema::

    {
      "base_mva": 100.0,                       # optional, informational
      "lines": [{"id", "r_ems", "x_ems", "b_ems",
                 "z0_re"?, "z0_im"?, "b0"?,
                 "z_abc_re"?, "z_abc_im"?, "b_abc"?,   # optional 3x3 lists
                 "source", "updated_at"}],
      "generators": [{"id", "h", "t", "kd", "kr", "source", "updated_at"}],
      "persistence": {"<asset id>": {"capacity": n,
                                     "history": [{"window", "flags": {..}}]}}
    }

All numerics are per unit on the store's base; timestamps are ISO-8601.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DuplicateId, MissingReference, ParseError
from .phasors import LineParameters

SOURCES = ("EMS", "PMS")


@dataclass(frozen=True)
class LineReference:
    id: str
    r_ems: float
    x_ems: float
    b_ems: float
    z0: complex | None = None
    b0: float | None = None
    z_abc: np.ndarray | None = None
    b_abc: np.ndarray | None = None
    source: str = "EMS"
    updated_at: str = "1970-01-01T00:00:00"

    def __post_init__(self):
        if self.r_ems < 0:
            raise ValueError("r_ems must be >= 0")
        if self.x_ems == 0:
            raise ValueError("x_ems must be nonzero")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")

    @property
    def z1(self) -> complex:
        return complex(self.r_ems, self.x_ems)

    def __eq__(self, other):
        if not isinstance(other, LineReference):
            return NotImplemented
        return _record_dict_line(self) == _record_dict_line(other)

    __hash__ = None


@dataclass(frozen=True)
class GenReference:
    id: str
    h: float
    t: float
    kd: float
    kr: float
    source: str = "PMS"
    updated_at: str = "1970-01-01T00:00:00"

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be > 0")
        if self.kr == 0:
            raise ValueError("kr must be nonzero")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")


@dataclass
class PersistenceState:
    """Ring buffer of the last ``capacity`` screening windows for one asset."""

    capacity: int = 5
    history: list[dict[str, Any]] = field(default_factory=list)

    def record(self, window: str, flags: dict[str, bool]) -> None:
        self.history.append({"window": str(window), "flags": {k: bool(v) for k, v in flags.items()}})
        del self.history[: max(0, len(self.history) - self.capacity)]

    def count(self, parameter: str) -> int:
        return sum(1 for h in self.history if h["flags"].get(parameter, False))


@dataclass
class ReferenceStore:
    lines: dict[str, LineReference] = field(default_factory=dict)
    generators: dict[str, GenReference] = field(default_factory=dict)
    persistence: dict[str, PersistenceState] = field(default_factory=dict)
    base_mva: float | None = None

    def line(self, asset_id: str) -> LineReference:
        try:
            return self.lines[asset_id]
        except KeyError:
            raise MissingReference(f"no line reference with id {asset_id!r}") from None

    def generator(self, asset_id: str) -> GenReference:
        try:
            return self.generators[asset_id]
        except KeyError:
            raise MissingReference(f"no generator reference with id {asset_id!r}") from None

    def add(self, record: LineReference | GenReference) -> None:
        table = self.lines if isinstance(record, LineReference) else self.generators
        if record.id in self.lines or record.id in self.generators:
            raise DuplicateId(f"duplicate asset id {record.id!r}")
        table[record.id] = record

    def persistence_for(self, asset_id: str, capacity: int) -> PersistenceState:
        state = self.persistence.get(asset_id)
        if state is None or state.capacity != capacity:
            old = state.history if state else []
            state = PersistenceState(capacity, list(old[-capacity:]))
            self.persistence[asset_id] = state
        return state


def expand_reference(ref: LineReference) -> LineParameters:
    """Balanced 3-phase matrices from sequence references.

    Full 3-phase matrices on the record take precedence. Missing zero-sequence
    values default to ``z0 = 3·z1`` and ``b0 = b1``.
    """
    if ref.z_abc is not None and ref.b_abc is not None:
        return LineParameters(ref.z_abc, ref.b_abc)
    z1 = ref.z1
    z0 = ref.z0 if ref.z0 is not None else 3 * z1
    b1 = ref.b_ems
    b0 = ref.b0 if ref.b0 is not None else b1
    return LineParameters.balanced((z0 + 2 * z1) / 3, (z0 - z1) / 3, (b0 + 2 * b1) / 3, (b0 - b1) / 3)


# -- serialization ---------------------------------------------------------


def _record_dict_line(r: LineReference) -> dict[str, Any]:
    d: dict[str, Any] = {"id": r.id, "r_ems": r.r_ems, "x_ems": r.x_ems, "b_ems": r.b_ems}
    if r.z0 is not None:
        d["z0_re"], d["z0_im"] = complex(r.z0).real, complex(r.z0).imag
    if r.b0 is not None:
        d["b0"] = r.b0
    if r.z_abc is not None:
        d["z_abc_re"] = np.real(r.z_abc).tolist()
        d["z_abc_im"] = np.imag(r.z_abc).tolist()
    if r.b_abc is not None:
        d["b_abc"] = np.real(r.b_abc).tolist()
    d["source"], d["updated_at"] = r.source, r.updated_at
    return d


def _record_dict_gen(g: GenReference) -> dict[str, Any]:
    return {"id": g.id, "h": g.h, "t": g.t, "kd": g.kd, "kr": g.kr,
            "source": g.source, "updated_at": g.updated_at}


def store_to_dict(store: ReferenceStore) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if store.base_mva is not None:
        doc["base_mva"] = store.base_mva
    doc["lines"] = [_record_dict_line(r) for r in store.lines.values()]
    doc["generators"] = [_record_dict_gen(g) for g in store.generators.values()]
    doc["persistence"] = {
        k: {"capacity": s.capacity, "history": s.history} for k, s in store.persistence.items()
    }
    return doc


def _num(rec: dict, key: str, where: str, required: bool = True) -> float | None:
    if key not in rec:
        if required:
            raise ParseError(f"{where}.{key}: missing")
        return None
    v = rec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParseError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _matrix(rec: dict, key: str, where: str):
    if key not in rec:
        return None
    try:
        m = np.array(rec[key], dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{where}.{key}: expected a 3x3 numeric list") from None
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise ParseError(f"{where}.{key}: expected a finite 3x3 numeric list")
    return m


def _meta(rec: dict, where: str, default_source: str) -> tuple[str, str]:
    source = rec.get("source", default_source)
    if source not in SOURCES:
        raise ParseError(f"{where}.source: expected one of {SOURCES}, got {source!r}")
    updated = rec.get("updated_at", "1970-01-01T00:00:00")
    try:
        datetime.fromisoformat(str(updated).replace("Z", "+00:00"))
    except ValueError:
        raise ParseError(f"{where}.updated_at: not ISO-8601: {updated!r}") from None
    return source, str(updated)


def _parse_line(rec: dict, where: str) -> LineReference:
    if not isinstance(rec, dict) or not isinstance(rec.get("id"), str):
        raise ParseError(f"{where}.id: missing or not a string")
    r = _num(rec, "r_ems", where)
    x = _num(rec, "x_ems", where)
    b = _num(rec, "b_ems", where)
    if r < 0:
        raise ParseError(f"{where}.r_ems: must be >= 0, got {r}")
    if x == 0:
        raise ParseError(f"{where}.x_ems: must be nonzero")
    z0_re, z0_im = _num(rec, "z0_re", where, False), _num(rec, "z0_im", where, False)
    if (z0_re is None) != (z0_im is None):
        raise ParseError(f"{where}.z0_re/z0_im: both or neither must be given")
    z0 = complex(z0_re, z0_im) if z0_re is not None else None
    zre, zim, bm = (_matrix(rec, k, where) for k in ("z_abc_re", "z_abc_im", "b_abc"))
    if (zre is None) != (zim is None) or (zre is None) != (bm is None):
        raise ParseError(f"{where}.z_abc_re/z_abc_im/b_abc: give all three or none")
    z_abc = zre + 1j * zim if zre is not None else None
    source, updated = _meta(rec, where, "EMS")
    return LineReference(rec["id"], r, x, b, z0, _num(rec, "b0", where, False),
                         z_abc, bm, source, updated)


def _parse_gen(rec: dict, where: str) -> GenReference:
    if not isinstance(rec, dict) or not isinstance(rec.get("id"), str):
        raise ParseError(f"{where}.id: missing or not a string")
    h, t, kd, kr = (_num(rec, k, where) for k in ("h", "t", "kd", "kr"))
    if not h > 0:
        raise ParseError(f"{where}.h: must be > 0, got {h}")
    if kr == 0:
        raise ParseError(f"{where}.kr: must be nonzero")
    source, updated = _meta(rec, where, "PMS")
    return GenReference(rec["id"], h, t, kd, kr, source, updated)


def store_from_dict(doc: Any) -> ReferenceStore:
    if not isinstance(doc, dict):
        raise ParseError("store: top level must be an object")
    store = ReferenceStore(base_mva=_num(doc, "base_mva", "store", False))
    for i, rec in enumerate(doc.get("lines", [])):
        store.add(_parse_line(rec, f"lines[{i}]"))
    for i, rec in enumerate(doc.get("generators", [])):
        store.add(_parse_gen(rec, f"generators[{i}]"))
    for asset, st in doc.get("persistence", {}).items():
        try:
            store.persistence[asset] = PersistenceState(int(st["capacity"]), list(st["history"]))
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"persistence.{asset}: expected capacity and history") from None
    return store


def load_store(path) -> ReferenceStore:
    text = Path(path).read_text()
    if not text.strip():
        return ReferenceStore()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return store_from_dict(doc)


def save_store(store: ReferenceStore, path) -> None:
    Path(path).write_text(json.dumps(store_to_dict(store), indent=2) + "\n")
