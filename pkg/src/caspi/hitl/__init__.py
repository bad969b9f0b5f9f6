"""Human-in-the-loop preference labeling service."""

from .service import JOURNAL_FILE, POOL_FILE, build_app, serve
from .store import (
    DuplicateLabel,
    LabelOutOfRange,
    LabelStore,
    TaskNotFound,
    display_swapped,
)

__all__ = [
    "DuplicateLabel",
    "JOURNAL_FILE",
    "LabelOutOfRange",
    "LabelStore",
    "POOL_FILE",
    "TaskNotFound",
    "build_app",
    "display_swapped",
    "serve",
]
