"""Agent-based limit-order-book market simulator with dealer strategies."""

__version__ = "0.1.0"
