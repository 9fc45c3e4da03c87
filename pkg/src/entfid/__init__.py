"""Fidelity and entanglement fidelity of finite-dimensional quantum states and channels."""

from .channels import (
    QuantumChannel,
    UnitaryRep,
    apply,
    channel_from_unitary_rep,
    extend_with_identity,
    make_channel,
    random_channel,
    standard_channel,
    stinespring_dilation,
    tensor_channels,
)
from .extremal import (
    SearchBudget,
    SearchResult,
    f1_search,
    f2_search,
    knill_laflamme_check,
    min_pure_fidelity,
    sample_extension,
    verify_definitional_fidelity,
)
from .fidelity import (
    FidelityReport,
    entanglement_fidelity_kraus,
    entanglement_fidelity_purification,
    fidelity_report,
    uhlmann_fidelity,
)
from .numerics import DimensionError, NotPSDError, ValidationError, herm_eig, kron, partial_trace, sqrt_psd
from .states import (
    DensityOperator,
    Extension,
    PureState,
    canonical_purification,
    density_from_pure,
    is_extension,
    probability_correct,
    random_density,
    random_pure,
)

__version__ = "0.1.0"

__all__ = [
    "DensityOperator",
    "DimensionError",
    "Extension",
    "FidelityReport",
    "NotPSDError",
    "PureState",
    "QuantumChannel",
    "SearchBudget",
    "SearchResult",
    "UnitaryRep",
    "ValidationError",
    "apply",
    "canonical_purification",
    "channel_from_unitary_rep",
    "density_from_pure",
    "entanglement_fidelity_kraus",
    "entanglement_fidelity_purification",
    "extend_with_identity",
    "f1_search",
    "f2_search",
    "fidelity_report",
    "herm_eig",
    "is_extension",
    "knill_laflamme_check",
    "kron",
    "make_channel",
    "min_pure_fidelity",
    "partial_trace",
    "probability_correct",
    "random_channel",
    "random_density",
    "random_pure",
    "sample_extension",
    "sqrt_psd",
    "standard_channel",
    "stinespring_dilation",
    "tensor_channels",
    "uhlmann_fidelity",
    "verify_definitional_fidelity",
]
