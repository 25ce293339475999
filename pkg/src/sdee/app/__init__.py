"""Application surfaces: CLI entry point and HTTP service."""

from .service import AppConfig, create_app, serve

__all__ = ["AppConfig", "create_app", "serve"]
