"""Command-line adapter."""

from src.adapters.cli.app import build_parser, main

__all__ = ["build_parser", "main"]
