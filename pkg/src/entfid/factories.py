"""Compact string specs for states and channels.

Grammar: ``kind`` or ``kind:key=value,key=value``. Examples::

    mixed:dim=2            random:dim=3,rank=2,seed=7     basis:dim=2,k=1
    depolarizing:p=0.25    amplitude_damping:gamma=0.5    replace_with:k=0
    random:dim=2,kraus=3,seed=1

Anything ending in ``.json`` (or naming an existing file) is read as a file.
"""

from __future__ import annotations

from pathlib import Path

from .channels import QuantumChannel, random_channel, replace_with, standard_channel
from .numerics import ValidationError, partial_trace
from .serialization import channel_from_dict, load_json, state_from_json
from .states import DensityOperator, density_from_pure, epr_state, random_density, random_pure

STATE_KINDS = ("mixed", "basis", "random", "random_pure", "epr_reduced")
CHANNEL_KINDS = ("identity", "depolarizing", "dephasing", "amplitude_damping", "replace_with", "random")

_INT_KEYS = {"dim", "k", "rank", "seed", "kraus"}
_FLOAT_KEYS = {"p", "gamma"}


def parse_spec(text: str) -> tuple[str, dict]:
    """Split ``kind:key=value,...`` into the kind and a typed parameter dict."""
    kind, _, rest = text.strip().partition(":")
    if not kind:
        raise ValidationError(f"empty spec {text!r}", field="spec")
    params: dict = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or not key or not value.strip():
                raise ValidationError(f"malformed parameter {item!r} in {text!r}", field="spec")
            try:
                if key in _INT_KEYS:
                    params[key] = int(value)
                elif key in _FLOAT_KEYS:
                    params[key] = float(value)
                else:
                    raise ValidationError(f"unknown parameter {key!r} in {text!r}", field=key)
            except ValueError:
                raise ValidationError(f"bad value for {key!r}: {value!r}", field=key) from None
    return kind, params


def _is_path(text: str) -> bool:
    return text.endswith(".json") or Path(text).is_file()


def _allow(kind: str, params: dict, allowed: set):
    extra = set(params) - allowed
    if extra:
        name = sorted(extra)[0]
        raise ValidationError(f"parameter {name!r} not accepted by {kind!r}", field=name)


def state_from_spec(text: str) -> DensityOperator:
    if _is_path(text):
        return state_from_json(load_json(text))
    kind, params = parse_spec(text)
    dim = params.get("dim", 2)
    if kind == "mixed":
        _allow(kind, params, {"dim"})
        return DensityOperator.maximally_mixed(dim)
    if kind == "basis":
        _allow(kind, params, {"dim", "k"})
        return DensityOperator.basis(dim, params.get("k", 0))
    if kind == "random":
        _allow(kind, params, {"dim", "rank", "seed"})
        return random_density(dim, params.get("rank", dim), params.get("seed", 0))
    if kind == "random_pure":
        _allow(kind, params, {"dim", "seed"})
        return density_from_pure(random_pure(dim, params.get("seed", 0)))
    if kind == "epr_reduced":
        _allow(kind, params, set())
        joint = density_from_pure(epr_state()).matrix
        return DensityOperator(partial_trace(joint, [2, 2], keep=0))
    raise ValidationError(f"unknown state kind {kind!r}; expected one of {STATE_KINDS}", field="state")


def channel_from_spec(text: str, dim: int | None = None) -> QuantumChannel:
    """Build a channel; ``dim`` is the default when the spec gives none."""
    if _is_path(text):
        return channel_from_dict(load_json(text))
    kind, params = parse_spec(text)
    d = params.get("dim", dim or 2)
    if kind == "identity":
        _allow(kind, params, {"dim"})
        return standard_channel("identity", d)
    if kind in ("depolarizing", "dephasing"):
        _allow(kind, params, {"dim", "p"})
        if "p" not in params:
            raise ValidationError(f"{kind} needs p=<value>", field="p")
        return standard_channel(kind, d, p=params["p"])
    if kind == "amplitude_damping":
        _allow(kind, params, {"dim", "gamma"})
        if "gamma" not in params:
            raise ValidationError("amplitude_damping needs gamma=<value>", field="gamma")
        return standard_channel(kind, d, gamma=params["gamma"])
    if kind == "replace_with":
        _allow(kind, params, {"dim", "k"})
        if "k" in params:
            return replace_with(DensityOperator.basis(d, params["k"]), d)
        return standard_channel("replace_with", d)
    if kind == "random":
        _allow(kind, params, {"dim", "kraus", "seed"})
        return random_channel(d, params.get("kraus", 2), params.get("seed", 0))
    raise ValidationError(f"unknown channel kind {kind!r}; expected one of {CHANNEL_KINDS}", field="channel")


FAMILY_PARAM = {
    "identity": None,
    "replace_with": None,
    "depolarizing": "p",
    "dephasing": "p",
    "amplitude_damping": "gamma",
}


def family_member(family: str, value: float, dim: int) -> QuantumChannel:
    """Member of a one-parameter channel family for ``sweep``."""
    if family not in FAMILY_PARAM:
        raise ValidationError(
            f"unknown family {family!r}; expected one of {tuple(FAMILY_PARAM)}", field="channel"
        )
    key = FAMILY_PARAM[family]
    return standard_channel(family, dim, **({key: value} if key else {}))
