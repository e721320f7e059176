"""Cuts, structure trees, tree decompositions and word problems on finite graph windows."""

from .errors import (
    ConsistencyError,
    DataError,
    GroupFileError,
    InputError,
    MarginError,
    NotACutError,
    StructreeError,
    UnsupportedBackendError,
    WindowTooSmallError,
)
from .fixtures import FIXTURES, get_fixture
from .graph_core import GraphWindow, RayPair, build_window
from .group_oracle import NormalForm, load_group_file, load_group_text

__all__ = [
    "ConsistencyError",
    "DataError",
    "FIXTURES",
    "GraphWindow",
    "GroupFileError",
    "InputError",
    "MarginError",
    "NormalForm",
    "NotACutError",
    "RayPair",
    "StructreeError",
    "UnsupportedBackendError",
    "WindowTooSmallError",
    "build_window",
    "get_fixture",
    "load_group_file",
    "load_group_text",
]
