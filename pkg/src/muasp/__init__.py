"""Answer-set-programming microservices with multi-context-system semantics."""

__version__ = "0.1.0"
