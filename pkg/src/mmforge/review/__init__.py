"""Human review loop: journal-backed decision store and its HTTP service."""

from .store import (
    DecisionRecord,
    PendingItemsError,
    ReviewStore,
    UnknownItemError,
    ValidationError,
)
from .service import create_app

__all__ = [
    "DecisionRecord",
    "ReviewStore",
    "UnknownItemError",
    "ValidationError",
    "PendingItemsError",
    "create_app",
]
