"""JSON and CSV (de)serialization of configurations and results."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from typing import Any

import numpy as np

from .errors import InvalidParams
from .lattice import Closed, Configuration, DimerizedParams, Tail, Window

SCHEMA_VERSION = 1


def _tail_to_dict(tail):
    if tail is None:
        return None
    return {"W": tail.params.W, "delta": tail.params.delta, "sign": tail.sign}


def _tail_from_dict(d):
    if d is None:
        return None
    return Tail(DimerizedParams(d["W"], d["delta"]), int(d["sign"]))


def config_to_dict(config: Configuration) -> dict:
    topo = config.topology
    if isinstance(topo, Closed):
        t = {"kind": "closed", "L": topo.L, "allow_odd": topo.allow_odd}
    else:
        t = {"kind": "window", "first_index": topo.first_index, "length": topo.length,
             "left_tail": _tail_to_dict(topo.left_tail),
             "right_tail": _tail_to_dict(topo.right_tail)}
    return {"topology": t, "first_index": config.first_index,
            "values": [float(v) for v in config.values]}


def config_from_dict(d: dict) -> Configuration:
    try:
        t = d["topology"]
        if t["kind"] == "closed":
            topo = Closed(int(t["L"]), bool(t.get("allow_odd", False)))
        elif t["kind"] == "window":
            topo = Window(int(t["first_index"]), int(t["length"]),
                          _tail_from_dict(t.get("left_tail")),
                          _tail_from_dict(t.get("right_tail")))
        else:
            raise InvalidParams(f"unknown topology kind {t['kind']!r}")
        return Configuration(topo, np.asarray(d["values"], dtype=float), int(d.get("first_index", 0)))
    except (KeyError, TypeError) as exc:
        raise InvalidParams(f"malformed configuration: {exc}") from exc


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses, numpy types and configurations."""
    if isinstance(obj, Configuration):
        return config_to_dict(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.name != "history"}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def dumps(document: dict) -> str:
    """Deterministic JSON text with a schema version."""
    doc = {"schema_version": SCHEMA_VERSION, **to_jsonable(document)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()
