"""CLEAR evaluation harness: cost, latency, efficacy, assurance and
reliability metrics for agent run telemetry."""

from .model import (
    AgentSummary,
    ClearError,
    Dataset,
    DataError,
    DomainProfile,
    ExpertRating,
    MetricError,
    PricingTable,
    RunRecord,
    TaskSpec,
    WeightProfile,
    validate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AgentSummary",
    "ClearError",
    "Dataset",
    "DataError",
    "DomainProfile",
    "ExpertRating",
    "MetricError",
    "PricingTable",
    "RunRecord",
    "TaskSpec",
    "WeightProfile",
    "validate_dataset",
]
