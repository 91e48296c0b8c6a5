"""Auditing how analytic decisions shape LLM-simulated survey samples."""

__version__ = "0.1.0"
