"""Adaptive binary physical-layer network coding for a two-stage N-MIMO uplink."""

from .errors import (
    ConfigError,
    ContractViolation,
    IncompatibleStoreError,
    InvalidChannelError,
    PncError,
    SelectionFailure,
    SingularMatrixError,
    StoreParseError,
)
from .gf2 import BinaryMatrix
from .mapper import CandidateStore, SelectionResult, offline_search, online_select
from .sfs import build_sfs_table, enumerate_sfs, reduce_image_sfs
from .sim import ExperimentConfig, ResultRecord, run_ber, run_mismap

__version__ = "0.1.0"
