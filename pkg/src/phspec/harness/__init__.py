"""Experiment orchestration: Monte Carlo vs. closed forms vs. gap solver."""

from .config import RunConfig
from .report import ComparisonReport

__all__ = ["RunConfig", "ComparisonReport"]
