"""Adapters: implementations of Port interfaces (CLI, result storage)."""
