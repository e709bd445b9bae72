"""HTTP service wrapping the placement engine."""

from .app import create_app

__all__ = ["create_app"]
