"""JSON serialization of state sets."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DomainError
from .states import ProductState, StateSet

__all__ = ["CONVENTION", "to_dict", "from_dict", "dumps", "loads", "write_state_set", "read_state_set"]

CONVENTION = "product vectors are kron(factor_0, factor_1, ...); the last party index varies fastest"


def _encode(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]


def _decode(raw: Any, where: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise DomainError(f"{where}: factor entries must be [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise DomainError(f"{where}: factor must be a nonempty list of [re, im] pairs")
    if not np.isfinite(arr).all():
        raise DomainError(f"{where}: non-finite coefficient")
    return arr[:, 0] + 1j * arr[:, 1]


def to_dict(s: StateSet) -> dict:
    return {
        "name": s.name,
        "dims": list(s.dims),
        "convention": CONVENTION,
        "notes": list(s.notes),
        "states": [{"label": st.label, "factors": [_encode(f) for f in st.factors]} for st in s],
    }


def from_dict(doc: Any) -> StateSet:
    if not isinstance(doc, dict):
        raise DomainError("state-set document must be a JSON object")
    for key in ("dims", "states"):
        if key not in doc:
            raise DomainError(f"state-set document lacks {key!r}")
    dims = doc["dims"]
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d >= 1 for d in dims):
        raise DomainError("dims must be a nonempty list of positive integers")
    if not isinstance(doc["states"], list):
        raise DomainError("states must be a list")
    states = []
    for n, raw in enumerate(doc["states"]):
        if not isinstance(raw, dict) or "factors" not in raw:
            raise DomainError(f"state {n} must be an object with 'factors'")
        factors = raw["factors"]
        if not isinstance(factors, list) or len(factors) != len(dims):
            raise DomainError(f"state {n} needs {len(dims)} factors")
        label = str(raw.get("label", f"s{n}"))
        states.append(ProductState(tuple(_decode(f, f"state {label}") for f in factors), label))
    notes = doc.get("notes", [])
    return StateSet(tuple(dims), states, str(doc.get("name", "")), tuple(str(x) for x in notes))


def dumps(s: StateSet) -> str:
    return json.dumps(to_dict(s), indent=1)


def loads(text: str) -> StateSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"not valid JSON: {exc}") from None
    return from_dict(doc)


def write_state_set(s: StateSet, path) -> None:
    Path(path).write_text(dumps(s))


def read_state_set(path) -> StateSet:
    return loads(Path(path).read_text())
