"""spinallab: a laboratory for rateless hash-chain codes.

Encoder/decoder library (exhaustive, beam and beam-with-memory decoding),
finite-block-length FER upper bounds for AWGN and BSC, transmission-scheme
optimizer, and a Monte-Carlo experiment CLI.
"""

from ._kernels import BACKEND
from .channel import ChannelModel, capacity, transmit
from .codec import (
    CodeParams,
    Message,
    SpineChain,
    Symbol,
    compute_spines,
    encode_stream,
    generate_symbols,
    map_to_channel,
    segment_message,
)
from .decode import (
    DecodingTree,
    OpLedger,
    ReceivedSet,
    bdm_ingest,
    bubble_decode,
    ledger_account,
    ml_decode,
    path_cost,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelModel",
    "CodeParams",
    "DecodingTree",
    "Message",
    "OpLedger",
    "ReceivedSet",
    "SpineChain",
    "Symbol",
    "bdm_ingest",
    "bubble_decode",
    "capacity",
    "compute_spines",
    "encode_stream",
    "generate_symbols",
    "ledger_account",
    "map_to_channel",
    "ml_decode",
    "path_cost",
    "segment_message",
    "transmit",
]
