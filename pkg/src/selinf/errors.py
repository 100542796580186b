"""Shared exception types."""
from __future__ import annotations


class SizeGuardError(RuntimeError):
    """A combinatorial guard would be exceeded; the message names the override."""


class DatasetParseError(ValueError):
    """A dataset file is malformed (bad JSON, bad probability string, bad key)."""


class MarginalSelectivityError(ValueError):
    """An operation requires marginal selectivity and the dataset violates it."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
