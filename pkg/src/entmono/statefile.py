"""State-file I/O.

A state file is a single JSON document:

    {
      "format": "entmono-state-v1",
      "kind": "density" | "pure",
      "dims": [2, 2],
      "entries": [[re, im], ...],          row-major; d*d pairs for a
                                           density matrix, d for a vector
      "decomposition": {                   optional product-mixture block
        "weights": [...],
        "a_states": [[[re, im], ...], ...],
        "b_states": [[[re, im], ...], ...]
      }
    }

Malformed documents raise StateFileError (CLI exit 2, message carries the
position); well-formed documents whose contents violate state invariants
raise StateInvariantError (CLI exit 3).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .extension import SeparableDecomposition
from .qmat import DensityMatrix, PureState

FORMAT = "entmono-state-v1"


class StateFileError(ValueError):
    """The document cannot be parsed into a state."""


@dataclass(frozen=True)
class LoadedState:
    kind: str
    state: object                 # DensityMatrix or PureState
    decomposition: SeparableDecomposition | None

    def density(self) -> DensityMatrix:
        if isinstance(self.state, PureState):
            return self.state.density()
        return self.state


def _decode_pairs(raw, where):
    if not isinstance(raw, list):
        raise StateFileError(f"{where}: expected a list of [re, im] pairs")
    out = np.empty(len(raw), dtype=complex)
    for i, item in enumerate(raw):
        if (not isinstance(item, list)) or len(item) != 2:
            raise StateFileError(f"{where}[{i}]: expected a [re, im] pair")
        re, im = item
        if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
            raise StateFileError(f"{where}[{i}]: entries must be numbers")
        out[i] = complex(re, im)
    return out


def _encode_pairs(values):
    return [[float(z.real), float(z.imag)] for z in np.asarray(values).reshape(-1)]


def _decode_decomposition(doc, d_a, d_b):
    weights = doc.get("weights")
    a_raw = doc.get("a_states")
    b_raw = doc.get("b_states")
    if not isinstance(weights, list) or not isinstance(a_raw, list) or not isinstance(b_raw, list):
        raise StateFileError("decomposition: needs weights, a_states, b_states lists")
    if not (len(weights) == len(a_raw) == len(b_raw)):
        raise StateFileError("decomposition: weights/a_states/b_states lengths differ")
    a_states = []
    b_states = []
    for i, (av, bv) in enumerate(zip(a_raw, b_raw)):
        a = _decode_pairs(av, f"decomposition.a_states[{i}]")
        b = _decode_pairs(bv, f"decomposition.b_states[{i}]")
        if a.size != d_a:
            raise StateFileError(f"decomposition.a_states[{i}]: length {a.size} != {d_a}")
        if b.size != d_b:
            raise StateFileError(f"decomposition.b_states[{i}]: length {b.size} != {d_b}")
        a_states.append(PureState(a, (d_a,)))
        b_states.append(PureState(b, (d_b,)))
    return SeparableDecomposition(weights, a_states, b_states)


def loads_state(text: str) -> LoadedState:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise StateFileError(
            f"parse error at line {e.lineno} column {e.colno}: {e.msg}"
        ) from e
    if not isinstance(doc, dict):
        raise StateFileError("top level: expected an object")
    kind = doc.get("kind")
    if kind not in ("density", "pure"):
        raise StateFileError("kind: expected \"density\" or \"pure\"")
    dims = doc.get("dims")
    if (not isinstance(dims, list) or not dims
            or any(not isinstance(d, int) or d < 1 for d in dims)):
        raise StateFileError("dims: expected a list of positive integers")
    dims = tuple(dims)
    d = 1
    for x in dims:
        d *= x
    entries = _decode_pairs(doc.get("entries"), "entries")
    if kind == "density":
        if entries.size != d * d:
            raise StateFileError(f"entries: expected {d * d} pairs, got {entries.size}")
        state = DensityMatrix(entries.reshape(d, d), dims)
    else:
        if entries.size != d:
            raise StateFileError(f"entries: expected {d} pairs, got {entries.size}")
        state = PureState(entries, dims)

    decomposition = None
    if "decomposition" in doc and doc["decomposition"] is not None:
        block = doc["decomposition"]
        if not isinstance(block, dict):
            raise StateFileError("decomposition: expected an object")
        if len(dims) != 2:
            raise StateFileError("decomposition: only bipartite states carry one")
        decomposition = _decode_decomposition(block, dims[0], dims[1])
    return LoadedState(kind, state, decomposition)


def load_state(path) -> LoadedState:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise StateFileError(f"cannot read {path}: {e.strerror}") from e
    return loads_state(text)


def state_document(state, decomposition: SeparableDecomposition | None = None) -> dict:
    if isinstance(state, PureState):
        doc = {
            "format": FORMAT,
            "kind": "pure",
            "dims": [int(x) for x in state.dims],
            "entries": _encode_pairs(state.amplitudes),
        }
    else:
        doc = {
            "format": FORMAT,
            "kind": "density",
            "dims": [int(x) for x in state.dims],
            "entries": _encode_pairs(state.matrix),
        }
    if decomposition is not None:
        doc["decomposition"] = {
            "weights": [float(w) for w in decomposition.weights],
            "a_states": [_encode_pairs(s.amplitudes) for s in decomposition.a_states],
            "b_states": [_encode_pairs(s.amplitudes) for s in decomposition.b_states],
        }
    return doc


def save_state(path, state, decomposition: SeparableDecomposition | None = None):
    doc = state_document(state, decomposition)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
