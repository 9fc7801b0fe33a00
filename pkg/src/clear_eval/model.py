"""Domain types shared by ingestion, metrics, analysis and reporting.

Everything here is an immutable value. Types that cannot be meaningfully
constructed in an invalid state (weights, prices, ratings, tasks) check
themselves on construction; ``RunRecord`` does not, because invalid telemetry
has to survive long enough to be reported by :func:`validate_dataset`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

DOMAINS: tuple[str, ...] = (
    "customer_support",
    "data_analysis",
    "process_automation",
    "software_development",
    "compliance",
    "multi_stakeholder",
)

DIMENSIONS: tuple[str, ...] = ("cost", "latency", "efficacy", "assurance", "reliability")

# Relative tolerance between the phase sum and the recorded total latency.
LATENCY_PHASE_TOLERANCE = 0.05
WEIGHT_SUM_TOLERANCE = 1e-9
DEFAULT_SUBTYPE = "*"


class ClearError(Exception):
    """Base class for all domain errors raised by this package."""


class DataError(ClearError, ValueError):
    """Input data violates a contract (bad value, unknown reference, ...)."""


class MetricError(ClearError, ValueError):
    """A metric is undefined for the data it was given."""


@dataclass(frozen=True)
class SecurityProbe:
    attack_case_id: str
    attack_succeeded: bool


@dataclass(frozen=True)
class RunRecord:
    """One execution of one task trial by one agent."""

    run_id: str
    agent_id: str
    task_id: str
    trial_index: int
    success: bool
    input_tokens: int
    output_tokens: int
    latency_plan_s: float
    latency_exec_s: float
    latency_reflect_s: float
    latency_total_s: float
    policy_critical_actions: int
    policy_violations: int
    cost_usd: float | None = None
    security_probe: SecurityProbe | None = None

    @property
    def phase_sum_s(self) -> float:
        return math.fsum((self.latency_plan_s, self.latency_exec_s, self.latency_reflect_s))


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    domain: str
    subtype: str
    step_count: int
    sla_seconds: float

    def __post_init__(self) -> None:
        if self.domain not in DOMAINS:
            raise DataError(f"task {self.task_id!r}: unknown domain {self.domain!r}")
        if not 5 <= self.step_count <= 15:
            raise DataError(f"task {self.task_id!r}: step_count {self.step_count} outside [5, 15]")
        if not self.sla_seconds > 0:
            raise DataError(f"task {self.task_id!r}: sla_seconds must be positive")


@dataclass(frozen=True)
class DomainProfile:
    domain: str
    sla_map: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.domain not in DOMAINS:
            raise DataError(f"unknown domain {self.domain!r}")
        for subtype, seconds in self.sla_map.items():
            if not seconds > 0:
                raise DataError(f"{self.domain}/{subtype}: SLA must be positive, got {seconds}")

    def sla_for(self, subtype: str) -> float:
        if subtype in self.sla_map:
            return float(self.sla_map[subtype])
        if DEFAULT_SUBTYPE in self.sla_map:
            return float(self.sla_map[DEFAULT_SUBTYPE])
        raise DataError(f"{self.domain}: no SLA for subtype {subtype!r} and no '*' fallback")


@dataclass(frozen=True)
class ModelPrice:
    input_usd_per_1k: float
    output_usd_per_1k: float


@dataclass(frozen=True)
class PricingTable:
    """Per-model token prices plus the agent -> model(s) assignment.

    ``agent_model_map`` values are tuples of ``(model_id, token_share)``;
    a single-model agent is ``((model_id, 1.0),)``.
    """

    models: Mapping[str, ModelPrice] = field(default_factory=dict)
    agent_model_map: Mapping[str, tuple[tuple[str, float], ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for model_id, price in self.models.items():
            if price.input_usd_per_1k < 0 or price.output_usd_per_1k < 0:
                raise DataError(f"model {model_id!r}: negative price")
        for agent_id, shares in self.agent_model_map.items():
            if not shares:
                raise DataError(f"agent {agent_id!r}: empty model mapping")
            for model_id, share in shares:
                if model_id not in self.models:
                    raise DataError(f"agent {agent_id!r}: unknown model {model_id!r}")
                if share < 0:
                    raise DataError(f"agent {agent_id!r}: negative token share")
            total = math.fsum(share for _, share in shares)
            if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
                raise DataError(f"agent {agent_id!r}: token shares sum to {total}, expected 1")


@dataclass(frozen=True)
class WeightProfile:
    w_cost: float
    w_latency: float
    w_efficacy: float
    w_assurance: float
    w_reliability: float

    def __post_init__(self) -> None:
        for name, value in zip(DIMENSIONS, self.as_tuple()):
            if not 0.0 <= value <= 1.0:
                raise DataError(f"weight for {name} outside [0, 1]: {value}")
        total = math.fsum(self.as_tuple())
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise DataError(f"weights sum to {total}, expected 1")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.w_cost, self.w_latency, self.w_efficacy, self.w_assurance, self.w_reliability)


EQUAL_WEIGHTS = WeightProfile(0.2, 0.2, 0.2, 0.2, 0.2)


@dataclass(frozen=True)
class AgentSummary:
    """Per-agent aggregates across all CLEAR dimensions.

    ``cps_usd`` is None when the agent has no successes; ``injection_resistance``
    is None when no security probes were run.
    """

    agent_id: str
    efficacy: float
    mean_cost_usd: float
    cna: float | None
    cps_usd: float | None
    mean_latency_s: float
    scr: float
    pas: float
    pass_at: Mapping[int, float]
    injection_resistance: float | None = None
    composite: float | None = None
    total_cost_usd: float = 0.0
    successes: int = 0
    reliability_k: int = 8
    semantics: str = "window"

    @property
    def reliability(self) -> float:
        return self.pass_at[self.reliability_k]


@dataclass(frozen=True)
class ExpertRating:
    rater_id: str
    agent_id: str
    task_id: str
    score: int

    def __post_init__(self) -> None:
        if isinstance(self.score, bool) or self.score not in (1, 2, 3, 4, 5):
            raise DataError(f"rating score must be an integer 1-5, got {self.score!r}")


@dataclass(frozen=True)
class Dataset:
    records: tuple[RunRecord, ...]
    suite: tuple[TaskSpec, ...]
    profiles: tuple[DomainProfile, ...] = ()
    pricing: PricingTable = field(default_factory=PricingTable)
    weights: Mapping[str, WeightProfile] = field(default_factory=lambda: {"equal": EQUAL_WEIGHTS})
    reliability_tasks: tuple[str, ...] | None = None
    reference_frontier: frozenset[str] | None = None

    def task_index(self) -> dict[str, TaskSpec]:
        return {task.task_id: task for task in self.suite}


@dataclass(frozen=True, order=True)
class Violation:
    record_id: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.record_id}: {self.rule}" + (f" ({self.detail})" if self.detail else "")


_COUNT_FIELDS = ("trial_index", "input_tokens", "output_tokens", "policy_critical_actions", "policy_violations")
_SECONDS_FIELDS = ("latency_plan_s", "latency_exec_s", "latency_reflect_s", "latency_total_s")


def _record_violations(record: RunRecord, known_tasks: set[str]) -> list[Violation]:
    found = []
    rid = record.run_id

    negative = [name for name in _COUNT_FIELDS + _SECONDS_FIELDS if getattr(record, name) < 0]
    if record.cost_usd is not None and record.cost_usd < 0:
        negative.append("cost_usd")
    if negative:
        found.append(Violation(rid, "negative_value", ",".join(negative)))

    if record.policy_violations > record.policy_critical_actions:
        found.append(
            Violation(
                rid,
                "violations_exceed_actions",
                f"{record.policy_violations} > {record.policy_critical_actions}",
            )
        )

    mismatch = abs(record.phase_sum_s - record.latency_total_s)
    if mismatch > LATENCY_PHASE_TOLERANCE * record.latency_total_s:
        found.append(
            Violation(
                rid,
                "latency_phase_mismatch",
                f"phases sum to {record.phase_sum_s:g}s, total {record.latency_total_s:g}s",
            )
        )

    if record.task_id not in known_tasks:
        found.append(Violation(rid, "unknown_task", record.task_id))
    return found


def validate_dataset(records: Sequence[RunRecord], suite: Sequence[TaskSpec]) -> list[Violation]:
    """Check every record against the RunRecord invariants and the suite.

    Returns a sorted list of violations; empty means the dataset is clean.
    The result does not depend on record order.
    """
    known = {task.task_id for task in suite}
    found: list[Violation] = []

    by_key: dict[tuple[str, str, int], list[str]] = {}
    by_run_id: dict[str, int] = {}
    for record in records:
        found.extend(_record_violations(record, known))
        by_key.setdefault((record.agent_id, record.task_id, record.trial_index), []).append(record.run_id)
        by_run_id[record.run_id] = by_run_id.get(record.run_id, 0) + 1

    for (agent_id, task_id, trial), run_ids in by_key.items():
        if len(run_ids) > 1:
            for rid in run_ids:
                found.append(Violation(rid, "duplicate_trial", f"{agent_id}/{task_id}/{trial}"))
    for rid, count in by_run_id.items():
        if count > 1:
            found.append(Violation(rid, "duplicate_run_id", f"{count} records"))

    return sorted(found)
