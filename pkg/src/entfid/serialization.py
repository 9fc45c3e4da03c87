"""JSON formats for matrices, states and channels.

Complex numbers are ``[re, im]`` pairs; matrices are flattened row-major::

    {"dim": n, "entries": [[re, im], ...]}           # square matrix / state
    {"dim": n, "amplitudes": [[re, im], ...]}        # pure state
    {"dim_in": n, "dim_out": m, "kraus": [matrix, ...]}

Rectangular matrices use ``"rows"``/``"cols"`` in place of ``"dim"``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import QuantumChannel, make_channel
from .numerics import ValidationError
from .states import DensityOperator, PureState, density_from_pure


def _pairs(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


def _complex(pairs, name: str) -> np.ndarray:
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"'{name}' must be a list of [re, im] pairs", field=name) from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"'{name}' must be a list of [re, im] pairs", field=name)
    return arr[:, 0] + 1j * arr[:, 1]


def _positive_int(obj: dict, key: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValidationError(f"'{key}' must be a positive integer", field=key)
    return value


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m)
    if m.shape[0] == m.shape[1]:
        return {"dim": int(m.shape[0]), "entries": _pairs(m)}
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": _pairs(m)}


def matrix_from_json(obj: dict) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ValidationError("matrix must be a JSON object", field="matrix")
    if "dim" in obj:
        rows = cols = _positive_int(obj, "dim")
    else:
        rows, cols = _positive_int(obj, "rows"), _positive_int(obj, "cols")
    if "entries" not in obj:
        raise ValidationError("missing 'entries'", field="entries")
    z = _complex(obj["entries"], "entries")
    if z.size != rows * cols:
        raise ValidationError(
            f"'entries' has {z.size} values, expected {rows * cols}", field="entries"
        )
    return z.reshape(rows, cols)


def state_to_json(state) -> dict:
    if isinstance(state, PureState):
        return {"dim": state.dim, "amplitudes": _pairs(state.amplitudes)}
    return matrix_to_json(state.matrix)


def state_from_json(obj: dict) -> DensityOperator:
    """Load a density operator; pure-state objects are turned into projectors."""
    if isinstance(obj, dict) and "amplitudes" in obj:
        dim = _positive_int(obj, "dim")
        v = _complex(obj["amplitudes"], "amplitudes")
        if v.size != dim:
            raise ValidationError(f"'amplitudes' has {v.size} values, expected {dim}", field="amplitudes")
        return density_from_pure(PureState(v))
    return DensityOperator(matrix_from_json(obj))


def channel_to_dict(e: QuantumChannel) -> dict:
    return {
        "dim_in": e.dim_in,
        "dim_out": e.dim_out,
        "kraus": [matrix_to_json(a) for a in e.kraus],
    }


def channel_from_dict(obj: dict) -> QuantumChannel:
    if not isinstance(obj, dict):
        raise ValidationError("channel must be a JSON object", field="channel")
    dim_in, dim_out = _positive_int(obj, "dim_in"), _positive_int(obj, "dim_out")
    kraus = obj.get("kraus")
    if not isinstance(kraus, list) or not kraus:
        raise ValidationError("'kraus' must be a nonempty list", field="kraus")
    ops = [matrix_from_json(k) for k in kraus]
    for a in ops:
        if a.shape != (dim_out, dim_in):
            raise ValidationError(
                f"Kraus operator shape {a.shape} != ({dim_out}, {dim_in})", field="kraus"
            )
    return make_channel(ops)


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})", field="json") from None


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
