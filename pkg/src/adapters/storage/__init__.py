"""Storage adapters: file-based result persistence."""
