"""Infrastructure: cross-cutting concerns (worker pool, run ledger)."""
