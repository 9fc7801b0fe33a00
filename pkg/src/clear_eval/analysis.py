"""Cohort-level analysis: min-max normalization, composite CLEAR scores,
Pareto frontiers and per-domain breakdowns."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

from .metrics import dimension_scores, first_trials, pas
from .model import (
    DOMAINS,
    EQUAL_WEIGHTS,
    AgentSummary,
    Dataset,
    DataError,
    MetricError,
    RunRecord,
    TaskSpec,
    WeightProfile,
)
from .reliability import DEFAULT_SEMANTICS, pass_at_k, trial_matrix

logger = logging.getLogger(__name__)

LOWER_BETTER = "lower_better"
HIGHER_BETTER = "higher_better"

DEFAULT_KS = (1, 3, 5, 8)


def min_max_normalize(
    values: Sequence[tuple[str, float]], direction: str = HIGHER_BETTER
) -> list[tuple[str, float]]:
    """Scale values onto [0, 1] so that 1 is best.

    A degenerate span (all values equal) maps every entry to 1.0.
    """
    if direction not in (LOWER_BETTER, HIGHER_BETTER):
        raise ValueError(f"unknown direction {direction!r}")
    if not values:
        return []
    nums = [v for _, v in values]
    lo, hi = min(nums), max(nums)
    span = hi - lo
    if span == 0:
        return [(key, 1.0) for key, _ in values]
    if direction == LOWER_BETTER:
        return [(key, (hi - v) / span) for key, v in values]
    return [(key, (v - lo) / span) for key, v in values]


@dataclass(frozen=True)
class NormalizedScores:
    agent_id: str
    c_norm: float
    l_norm: float
    e: float
    a: float
    r: float


def normalize_cohort(summaries: Sequence[AgentSummary]) -> list[NormalizedScores]:
    c_norm = dict(min_max_normalize([(s.agent_id, s.mean_cost_usd) for s in summaries], LOWER_BETTER))
    l_norm = dict(min_max_normalize([(s.agent_id, s.mean_latency_s) for s in summaries], LOWER_BETTER))
    return [
        NormalizedScores(s.agent_id, c_norm[s.agent_id], l_norm[s.agent_id], s.efficacy, s.pas, s.reliability)
        for s in summaries
    ]


def composite(norm: NormalizedScores, weights: WeightProfile) -> float:
    # WeightProfile checks its own sum, but a caller may hand in a duck-typed profile
    if abs(math.fsum(weights.as_tuple()) - 1.0) > 1e-9:
        raise DataError("weights must sum to 1")
    parts = (norm.c_norm, norm.l_norm, norm.e, norm.a, norm.r)
    return math.fsum(w * x for w, x in zip(weights.as_tuple(), parts))


def with_composites(summaries: Sequence[AgentSummary], weights: WeightProfile) -> list[AgentSummary]:
    scores = {n.agent_id: composite(n, weights) for n in normalize_cohort(summaries)}
    return [replace(s, composite=scores[s.agent_id]) for s in summaries]


def approach_scores(summaries: Sequence[AgentSummary], weights: WeightProfile = EQUAL_WEIGHTS) -> dict[str, dict[str, float]]:
    """Per-agent scores for the three evaluation approaches that get correlated
    against expert ratings.

    ``efficacy_cost`` is the equal-weight mean of min-max normalized efficacy
    and normalized cost.
    """
    e_norm = dict(min_max_normalize([(s.agent_id, s.efficacy) for s in summaries], HIGHER_BETTER))
    norms = {n.agent_id: n for n in normalize_cohort(summaries)}
    return {
        "efficacy": {s.agent_id: s.efficacy for s in summaries},
        "efficacy_cost": {a: 0.5 * e_norm[a] + 0.5 * norms[a].c_norm for a in norms},
        "clear": {a: composite(n, weights) for a, n in norms.items()},
    }


# --- Pareto -----------------------------------------------------------------

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

PARETO_DIMENSIONS: dict[str, tuple[Callable[[AgentSummary], float], str]] = {
    "cost": (lambda s: s.mean_cost_usd, MINIMIZE),
    "latency": (lambda s: s.mean_latency_s, MINIMIZE),
    "efficacy": (lambda s: s.efficacy, MAXIMIZE),
    "pas": (lambda s: s.pas, MAXIMIZE),
    "reliability": (lambda s: s.reliability, MAXIMIZE),
    "cna": (lambda s: s.cna if s.cna is not None else math.inf, MAXIMIZE),
    "scr": (lambda s: s.scr, MAXIMIZE),
}
DEFAULT_PARETO_DIMS = ("cost", "efficacy", "latency", "pas", "reliability")


@dataclass(frozen=True)
class ParetoEntry:
    on_frontier: bool
    dominated_by: tuple[str, ...]


@dataclass(frozen=True)
class ParetoResult:
    dimensions: tuple[tuple[str, str], ...]
    entries: Mapping[str, ParetoEntry]

    @property
    def frontier(self) -> list[str]:
        return [a for a, e in self.entries.items() if e.on_frontier]

    def divergence(self, reference: Iterable[str]) -> tuple[list[str], list[str]]:
        """Agents (missing from, extra to) the frontier relative to a reference set."""
        ref = set(reference)
        front = set(self.frontier)
        return sorted(ref - front), sorted(front - ref)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True if ``a`` is at least as good everywhere and strictly better somewhere.

    Both vectors must already be oriented so that larger is better.
    """
    strictly = False
    for x, y in zip(a, b):
        if x < y:
            return False
        if x > y:
            strictly = True
    return strictly


def pareto_frontier(
    summaries: Sequence[AgentSummary], dimensions: Sequence[str] = DEFAULT_PARETO_DIMS
) -> ParetoResult:
    """Non-dominated agents over raw (unnormalized) dimension values."""
    if not summaries:
        raise MetricError("pareto frontier needs at least one agent")
    if not dimensions:
        raise DataError("pareto frontier needs at least one dimension")
    unknown = [d for d in dimensions if d not in PARETO_DIMENSIONS]
    if unknown:
        raise DataError(f"unknown dimension(s): {', '.join(unknown)}")

    def oriented(s: AgentSummary) -> tuple[float, ...]:
        out = []
        for name in dimensions:
            getter, sense = PARETO_DIMENSIONS[name]
            v = getter(s)
            out.append(-v if sense == MINIMIZE else v)
        return tuple(out)

    vectors = {s.agent_id: oriented(s) for s in summaries}
    entries = {}
    for agent, vec in vectors.items():
        beaten_by = tuple(other for other, ov in vectors.items() if other != agent and dominates(ov, vec))
        entries[agent] = ParetoEntry(not beaten_by, beaten_by)
    dims = tuple((d, PARETO_DIMENSIONS[d][1]) for d in dimensions)
    return ParetoResult(dims, entries)


# --- Domain breakdown ---------------------------------------------------------


@dataclass(frozen=True)
class DomainCell:
    efficacy: float
    pas: float | None
    tasks: int


@dataclass(frozen=True)
class DomainBreakdown:
    agents: tuple[str, ...]
    domains: tuple[str, ...]
    cells: Mapping[tuple[str, str], DomainCell]
    overall: Mapping[str, DomainCell]
    omitted: tuple[str, ...] = ()


def task_weighted_mean(pairs: Iterable[tuple[float, int]]) -> float:
    """Mean of per-domain fractions weighted by their task counts."""
    pairs = list(pairs)
    n = sum(count for _, count in pairs)
    if n == 0:
        raise MetricError("no tasks")
    return math.fsum(value * count for value, count in pairs) / n


def _pas_or_none(records: Sequence[RunRecord]) -> float | None:
    try:
        return pas(records)
    except MetricError:
        return None


def domain_breakdown(records: Sequence[RunRecord], suite: Sequence[TaskSpec]) -> DomainBreakdown:
    """Efficacy and PAS per (agent, domain), plus a recomputed overall row.

    The overall efficacy is the task-weighted mean of the domain efficacies,
    i.e. pooled over all first-trial runs.
    """
    task_domain = {t.task_id: t.domain for t in suite}
    agents = tuple(dict.fromkeys(r.agent_id for r in records))
    grouped: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        grouped.setdefault((r.agent_id, task_domain[r.task_id]), []).append(r)

    present = [d for d in DOMAINS if any((a, d) in grouped for a in agents)]
    omitted = tuple(d for d in DOMAINS if d not in present)
    for d in omitted:
        logger.warning("domain %s has no tasks; omitted from breakdown", d)

    cells = {}
    overall = {}
    for agent in agents:
        weighted = []
        for d in present:
            recs = grouped.get((agent, d), [])
            first = first_trials(recs)
            if not first:
                continue
            eff = sum(r.success for r in first) / len(first)
            cells[(agent, d)] = DomainCell(eff, _pas_or_none(recs), len(first))
            weighted.append((eff, len(first)))
        agent_recs = [r for r in records if r.agent_id == agent]
        overall[agent] = DomainCell(
            task_weighted_mean(weighted), _pas_or_none(agent_recs), sum(c for _, c in weighted)
        )
    return DomainBreakdown(agents, tuple(present), cells, overall, omitted)


# --- Cohort summary ------------------------------------------------------------


def default_reliability_tasks(records: Sequence[RunRecord]) -> list[str]:
    """Tasks that were run more than once; every task if none were."""
    counts: dict[str, int] = {}
    for r in records:
        counts[r.task_id] = counts.get(r.task_id, 0) + 1
    repeated = sorted(t for t, c in counts.items() if c > 1)
    return repeated or sorted(counts)


def summarize_agent(
    agent_id: str,
    records: Sequence[RunRecord],
    dataset: Dataset,
    ks: Sequence[int] = DEFAULT_KS,
    semantics: str = DEFAULT_SEMANTICS,
    reliability_tasks: Sequence[str] | None = None,
    reliability_k: int = 8,
) -> AgentSummary:
    scores = dimension_scores(agent_id, records, dataset.task_index(), dataset.pricing)
    if reliability_tasks is None:
        reliability_tasks = default_reliability_tasks(records)
    matrix = trial_matrix(agent_id, records, reliability_tasks)
    all_ks = sorted(set(ks) | {reliability_k})
    pass_at = {k: pass_at_k(matrix, k, semantics) for k in all_ks}
    return AgentSummary(
        agent_id=agent_id,
        efficacy=scores.efficacy,
        mean_cost_usd=scores.mean_cost_usd,
        cna=scores.cna,
        cps_usd=scores.cps_usd,
        mean_latency_s=scores.mean_latency_s,
        scr=scores.scr,
        pas=scores.pas,
        pass_at=pass_at,
        injection_resistance=scores.injection_resistance,
        total_cost_usd=scores.total_cost_usd,
        successes=scores.successes,
        reliability_k=reliability_k,
        semantics=semantics,
    )


def summarize(
    dataset: Dataset,
    weights: WeightProfile = EQUAL_WEIGHTS,
    ks: Sequence[int] = DEFAULT_KS,
    semantics: str = DEFAULT_SEMANTICS,
    reliability_tasks: Sequence[str] | None = None,
    reliability_k: int = 8,
) -> list[AgentSummary]:
    """One AgentSummary per agent, in order of first appearance, with composites."""
    if reliability_tasks is None:
        reliability_tasks = dataset.reliability_tasks
    by_agent: dict[str, list[RunRecord]] = {}
    for r in dataset.records:
        by_agent.setdefault(r.agent_id, []).append(r)
    if not by_agent:
        raise MetricError("no data")
    summaries = [
        summarize_agent(agent, recs, dataset, ks, semantics, reliability_tasks, reliability_k)
        for agent, recs in by_agent.items()
    ]
    return with_composites(summaries, weights)


def ranking(summaries: Iterable[AgentSummary]) -> list[str]:
    """Agent ids by composite score, best first; ties broken by agent id."""
    return [s.agent_id for s in sorted(summaries, key=lambda s: (-(s.composite or 0.0), s.agent_id))]

