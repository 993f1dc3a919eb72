"""Covert communication over MIMO-AWGN channels with a passive warden."""

from .channel_model import (
    ChannelPair,
    GsvdDecomposition,
    SubchannelGains,
    classify_subspaces,
    decompose_gsvd,
)
from .errors import CovertMimoError, NumericalError

__version__ = "0.1.0"

__all__ = [
    "ChannelPair",
    "CovertMimoError",
    "GsvdDecomposition",
    "NumericalError",
    "SubchannelGains",
    "classify_subspaces",
    "decompose_gsvd",
]
