"""Seeded synthetic run logs and hand-constructed fixtures.

Randomness comes only from ``numpy.random.PCG64`` seeded through
``SeedSequence(seed).spawn(n_agents)``, one child stream per agent, and only
uniform doubles are drawn (``Generator.random``: the top 53 bits of each
64-bit output scaled by 2**-53). Every other distribution is derived from
those uniforms here, so a port that reproduces PCG64 and SeedSequence
reproduces the logs bit for bit.

Draw order per agent: for each task in suite order, for each trial,
``success, input_tokens, output_tokens, cost, plan, exec, reflect``, then one
draw per policy-critical action, then on trial 0 ``probe?, attack``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from .ingestion import default_domain_profiles
from .model import (
    DOMAINS,
    EQUAL_WEIGHTS,
    Dataset,
    DataError,
    DomainProfile,
    ModelPrice,
    PricingTable,
    RunRecord,
    SecurityProbe,
    TaskSpec,
    WeightProfile,
)


@dataclass(frozen=True)
class AgentProfileSpec:
    agent_id: str
    success_rate: float
    success_autocorrelation: float = 0.0
    input_tokens_mean: float = 40_000.0
    input_tokens_spread: float = 0.0
    output_tokens_mean: float = 8_000.0
    output_tokens_spread: float = 0.0
    cost_mean: float | None = None
    cost_spread: float = 0.0
    latency_plan_mean: float = 1.0
    latency_exec_mean: float = 3.0
    latency_reflect_mean: float = 0.5
    latency_jitter: float = 0.0
    violation_rate: float = 0.0
    attack_success_rate: float = 0.0
    probe_fraction: float = 1.0

    def __post_init__(self) -> None:
        for name in ("success_rate", "violation_rate", "attack_success_rate", "probe_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DataError(f"profile {self.agent_id!r}: {name} must be in [0, 1], got {value}")
        if not 0.0 <= self.success_autocorrelation < 1.0:
            raise DataError(f"profile {self.agent_id!r}: success_autocorrelation must be in [0, 1)")
        if not 0.0 <= self.latency_jitter < 1.0:
            raise DataError(f"profile {self.agent_id!r}: latency_jitter must be in [0, 1)")
        for name in ("input_tokens_mean", "input_tokens_spread", "output_tokens_mean", "output_tokens_spread",
                     "cost_spread", "latency_plan_mean", "latency_exec_mean", "latency_reflect_mean"):
            if getattr(self, name) < 0:
                raise DataError(f"profile {self.agent_id!r}: {name} must be non-negative")
        if self.cost_mean is not None and self.cost_mean < 0:
            raise DataError(f"profile {self.agent_id!r}: cost_mean must be non-negative")


def parse_profiles(tree: Any) -> list[AgentProfileSpec]:
    entries = tree.get("profiles") if isinstance(tree, Mapping) else tree
    if not isinstance(entries, list) or not entries:
        raise DataError("profiles file must hold a non-empty list of agent profiles")
    known = {f.name for f in fields(AgentProfileSpec)}
    profiles = []
    for entry in entries:
        extra = set(entry) - known
        if extra:
            raise DataError(f"profile {entry.get('agent_id')!r}: unknown keys {sorted(extra)}")
        if "agent_id" not in entry or "success_rate" not in entry:
            raise DataError("each profile needs agent_id and success_rate")
        profiles.append(AgentProfileSpec(**entry))
    ids = [p.agent_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate agent_id in profiles")
    return profiles


def load_profiles(path: str | Path) -> list[AgentProfileSpec]:
    with open(path, encoding="utf-8") as fh:
        return parse_profiles(yaml.safe_load(fh))


def _spread(u: float, mean: float, spread: float) -> float:
    """Uniform on [mean - spread, mean + spread], floored at zero."""
    return max(0.0, mean + spread * (2.0 * u - 1.0))


def _generate_agent(
    profile: AgentProfileSpec, suite: Sequence[TaskSpec], trials: int, rng: np.random.Generator
) -> list[RunRecord]:
    records = []
    u = rng.random
    jitter = profile.latency_jitter
    for task in suite:
        previous: bool | None = None
        for trial in range(trials):
            draw = u()
            # Markov chain: with probability rho repeat the last outcome,
            # otherwise draw fresh. The marginal success rate stays at p.
            if previous is not None and draw < profile.success_autocorrelation:
                success = previous
            else:
                fresh = draw if previous is None else (draw - profile.success_autocorrelation) / (
                    1.0 - profile.success_autocorrelation
                )
                success = fresh < profile.success_rate
            previous = success

            input_tokens = int(round(_spread(u(), profile.input_tokens_mean, profile.input_tokens_spread)))
            output_tokens = int(round(_spread(u(), profile.output_tokens_mean, profile.output_tokens_spread)))
            cost_draw = u()
            cost = None
            if profile.cost_mean is not None:
                cost = round(_spread(cost_draw, profile.cost_mean, profile.cost_spread), 6)
            plan = round(_spread(u(), profile.latency_plan_mean, jitter * profile.latency_plan_mean), 6)
            exe = round(_spread(u(), profile.latency_exec_mean, jitter * profile.latency_exec_mean), 6)
            reflect = round(_spread(u(), profile.latency_reflect_mean, jitter * profile.latency_reflect_mean), 6)
            total = round(plan + exe + reflect, 6)

            actions = task.step_count
            violations = sum(1 for _ in range(actions) if u() < profile.violation_rate)

            probe = None
            if trial == 0:
                probed = u() < profile.probe_fraction
                attacked = u() < profile.attack_success_rate
                if probed:
                    probe = SecurityProbe(f"atk-{task.task_id}", attacked)

            records.append(
                RunRecord(
                    run_id=f"{profile.agent_id}:{task.task_id}:{trial}",
                    agent_id=profile.agent_id,
                    task_id=task.task_id,
                    trial_index=trial,
                    success=success,
                    input_tokens=input_tokens,
                    output_tokens=output_tokens,
                    latency_plan_s=plan,
                    latency_exec_s=exe,
                    latency_reflect_s=reflect,
                    latency_total_s=total,
                    policy_critical_actions=actions,
                    policy_violations=violations,
                    cost_usd=cost,
                    security_probe=probe,
                )
            )
    return records


def generate(
    profiles: Sequence[AgentProfileSpec], suite: Sequence[TaskSpec], trials_per_task: int, seed: int
) -> list[RunRecord]:
    """Simulate every profile on every task, ``trials_per_task`` times each."""
    if trials_per_task < 1:
        raise DataError("trials_per_task must be at least 1")
    if not suite:
        raise DataError("suite is empty")
    children = np.random.SeedSequence(seed).spawn(len(profiles))
    records: list[RunRecord] = []
    for profile, child in zip(profiles, children):
        rng = np.random.Generator(np.random.PCG64(child))
        records.extend(_generate_agent(profile, suite, trials_per_task, rng))
    return records


def make_suite(
    counts: Mapping[str, int],
    profiles: Sequence[DomainProfile] | None = None,
    subtype: str = "*",
    prefix: str = "",
) -> list[TaskSpec]:
    """A synthetic suite with ``counts[domain]`` tasks per domain, step counts cycling 5..15."""
    profiles = list(profiles) if profiles is not None else default_domain_profiles()
    by_domain = {p.domain: p for p in profiles}
    tasks = []
    for domain in DOMAINS:
        for i in range(counts.get(domain, 0)):
            task_id = f"{prefix}{domain[:3]}-{i:04d}"
            tasks.append(TaskSpec(task_id, domain, subtype, 5 + (len(tasks) % 11), by_domain[domain].sla_for(subtype)))
    return tasks


# --- Constructed fixtures ------------------------------------------------------------

# Published per-agent figures: efficacy, mean cost per task, pass@8, PAS,
# input/output tokens per task, plan/exec/reflect seconds.
TABLE1_AGENTS: dict[str, dict[str, Any]] = {
    "ReAct-GPT4": dict(eff=723, cost=2.87, r8=583, pas=0.89, tokens=(47_200, 8_300), phases=(2.1, 4.8, 1.5)),
    "ReAct-GPT-o3": dict(eff=687, cost=0.31, r8=521, pas=0.85, tokens=(52_100, 9_700), phases=(1.2, 2.4, 0.6)),
    "Reflexion": dict(eff=741, cost=5.12, r8=612, pas=0.91, tokens=(89_400, 15_200), phases=(3.4, 6.1, 3.2)),
    "Plan-Execute": dict(eff=719, cost=1.24, r8=645, pas=0.88, tokens=(38_600, 7_100), phases=(1.8, 4.2, 0.8)),
    "ToolFormer": dict(eff=695, cost=1.89, r8=557, pas=0.82, tokens=(44_300, 9_800), phases=(1.5, 3.6, 0.8)),
    "Domain-Tuned": dict(eff=703, cost=0.27, r8=728, pas=0.93, tokens=(31_200, 5_400), phases=(0.9, 2.3, 0.6)),
}
# Attack success counts per 500 probes. Only Domain-Tuned (40) and
# ToolFormer (90) are published; the rest are placeholders.
TABLE1_ATTACKS = {
    "ReAct-GPT4": 60, "ReAct-GPT-o3": 75, "Reflexion": 55,
    "Plan-Execute": 50, "ToolFormer": 90, "Domain-Tuned": 40,
}
TABLE1_REFERENCE_FRONTIER = frozenset({"ReAct-GPT-o3", "Plan-Execute", "Domain-Tuned"})
TABLE1_TASKS = 1000
TABLE1_TRIALS = 10
TABLE1_PROBES = 500
_ACTIONS_PER_RUN = 10


def _sequence_patterns(tasks: int, first_ok: int, passk_ok: int, trials: int, k: int) -> list[tuple[bool, ...]]:
    """Success sequences hitting exact trial-0 and window pass@k counts.

    Four kinds: all-success (both), success then all-fail (trial 0 only),
    fail then all-success (pass@k only, needs trials - 1 >= k), all-fail.
    """
    both = min(first_ok, passk_ok)
    only_first = first_ok - both
    only_passk = passk_ok - both
    if only_passk and trials - 1 < k:
        raise DataError("cannot separate pass@k from trial 0 with so few trials")
    rest = tasks - both - only_first - only_passk
    if rest < 0:
        raise DataError("success counts exceed task count")
    return (
        [(True,) * trials] * both
        + [(True,) + (False,) * (trials - 1)] * only_first
        + [(False,) + (True,) * (trials - 1)] * only_passk
        + [(False,) * trials] * rest
    )


def _spread_evenly(total: int, slots: int) -> list[int]:
    base, extra = divmod(total, slots)
    return [base + (1 if i < extra else 0) for i in range(slots)]


def _interleave(patterns: list[tuple[bool, ...]]) -> list[tuple[bool, ...]]:
    # Stride through the list so domains (contiguous in the suite) get a mix.
    stride = 7
    n = len(patterns)
    order = sorted(range(n), key=lambda i: ((i * stride) % n, i))
    return [patterns[i] for i in order]


def table1_pricing() -> PricingTable:
    """Illustrative prices; fixture records carry explicit costs regardless."""
    return PricingTable(
        models={
            "gpt-4": ModelPrice(0.03, 0.06),
            "gpt-o3": ModelPrice(0.002, 0.008),
            "llama-ft": ModelPrice(0.0005, 0.0015),
        },
        agent_model_map={
            "ReAct-GPT4": (("gpt-4", 1.0),),
            "ReAct-GPT-o3": (("gpt-o3", 1.0),),
            "Reflexion": (("gpt-4", 1.0),),
            "Plan-Execute": (("gpt-4", 0.15), ("gpt-o3", 0.85)),
            "ToolFormer": (("gpt-4", 1.0),),
            "Domain-Tuned": (("llama-ft", 1.0),),
        },
    )


def preset_weights() -> dict[str, WeightProfile]:
    from .ingestion import load_weights

    return load_weights()


def table1_fixture() -> Dataset:
    """A constructed dataset whose summary reproduces the six-agent results table.

    1000 tasks, each run 10 times by every agent. Trial-0 outcomes give the
    efficacy column, the success patterns give window pass@8, every run has
    ten policy-critical actions with violations spread to give PAS exactly,
    and each run carries its agent's per-task cost and phase latencies.
    """
    profiles = default_domain_profiles()
    suite = make_suite(
        {"customer_support": 200, "data_analysis": 160, "process_automation": 160,
         "software_development": 200, "compliance": 140, "multi_stakeholder": 140},
        profiles,
    )
    assert len(suite) == TABLE1_TASKS
    records: list[RunRecord] = []
    for agent, spec in TABLE1_AGENTS.items():
        patterns = _interleave(_sequence_patterns(TABLE1_TASKS, spec["eff"], spec["r8"], TABLE1_TRIALS, 8))
        runs = TABLE1_TASKS * TABLE1_TRIALS
        violations = _spread_evenly(round((1 - spec["pas"]) * runs * _ACTIONS_PER_RUN), runs)
        attacks = TABLE1_ATTACKS[agent]
        plan, exe, reflect = spec["phases"]
        total = round(plan + exe + reflect, 6)
        n = 0
        for t, (task, pattern) in enumerate(zip(suite, patterns)):
            for trial, ok in enumerate(pattern):
                probe = None
                if trial == 0 and t < TABLE1_PROBES:
                    probe = SecurityProbe(f"atk-{t:03d}", t < attacks)
                records.append(
                    RunRecord(
                        run_id=f"{agent}:{task.task_id}:{trial}",
                        agent_id=agent,
                        task_id=task.task_id,
                        trial_index=trial,
                        success=ok,
                        input_tokens=spec["tokens"][0],
                        output_tokens=spec["tokens"][1],
                        latency_plan_s=plan,
                        latency_exec_s=exe,
                        latency_reflect_s=reflect,
                        latency_total_s=total,
                        policy_critical_actions=_ACTIONS_PER_RUN,
                        policy_violations=violations[n],
                        cost_usd=spec["cost"],
                        security_probe=probe,
                    )
                )
                n += 1
    return Dataset(
        records=tuple(records),
        suite=tuple(suite),
        profiles=tuple(profiles),
        pricing=table1_pricing(),
        weights=preset_weights(),
        reference_frontier=TABLE1_REFERENCE_FRONTIER,
    )


# Per-domain efficacy (per mille) and PAS for three agents.
DOMAIN_TABLE: dict[str, dict[str, tuple[int, float]]] = {
    "ReAct-GPT4": {
        "customer_support": (783, 0.87), "data_analysis": (690, 0.94), "process_automation": (710, 0.88),
        "software_development": (733, 0.91), "compliance": (650, 0.82), "multi_stakeholder": (613, 0.78),
    },
    "Plan-Execute": {
        "customer_support": (750, 0.85), "data_analysis": (720, 0.93), "process_automation": (730, 0.89),
        "software_development": (700, 0.87), "compliance": (675, 0.84), "multi_stakeholder": (640, 0.81),
    },
    "Domain-Tuned": {
        "customer_support": (817, 0.95), "data_analysis": (710, 0.96), "process_automation": (720, 0.92),
        "software_development": (717, 0.94), "compliance": (725, 0.93), "multi_stakeholder": (688, 0.89),
    },
}
DOMAIN_FIXTURE_TASKS = 1000


def domain_fixture(domains: Sequence[str] = DOMAINS) -> Dataset:
    """Single-trial dataset reproducing the per-domain efficacy/PAS breakdown.

    1000 tasks per domain so every printed per-mille value is reachable.
    """
    profiles = default_domain_profiles()
    suite = make_suite({d: DOMAIN_FIXTURE_TASKS for d in domains}, profiles)
    tasks_by_domain: dict[str, list[TaskSpec]] = {}
    for t in suite:
        tasks_by_domain.setdefault(t.domain, []).append(t)
    records = []
    for agent, table in DOMAIN_TABLE.items():
        for domain in domains:
            ok_count, pas_value = table[domain]
            tasks = tasks_by_domain[domain]
            violations = _spread_evenly(round((1 - pas_value) * len(tasks) * _ACTIONS_PER_RUN), len(tasks))
            for i, task in enumerate(tasks):
                records.append(
                    RunRecord(
                        run_id=f"{agent}:{task.task_id}:0",
                        agent_id=agent,
                        task_id=task.task_id,
                        trial_index=0,
                        success=i < ok_count,
                        input_tokens=0,
                        output_tokens=0,
                        latency_plan_s=1.0,
                        latency_exec_s=1.0,
                        latency_reflect_s=0.0,
                        latency_total_s=2.0,
                        policy_critical_actions=_ACTIONS_PER_RUN,
                        policy_violations=violations[i],
                        cost_usd=0.01,
                    )
                )
    return Dataset(tuple(records), tuple(suite), tuple(profiles), PricingTable(), {"equal": EQUAL_WEIGHTS})


# Share of software-development analysis tasks finishing over the 30 s SLA.
SLA_OVERRUNS = {"Plan-Execute": 23, "Reflexion": 34}


def sla_fixture() -> Dataset:
    """100 software-development analysis tasks; fixed share of runs over SLA."""
    profiles = default_domain_profiles()
    suite = make_suite({"software_development": 100}, profiles, subtype="analysis")
    records = []
    for agent, over in SLA_OVERRUNS.items():
        for i, task in enumerate(suite):
            total = 42.0 if i < over else 24.0
            records.append(
                RunRecord(
                    run_id=f"{agent}:{task.task_id}:0",
                    agent_id=agent,
                    task_id=task.task_id,
                    trial_index=0,
                    success=True,
                    input_tokens=1000,
                    output_tokens=200,
                    latency_plan_s=total * 0.25,
                    latency_exec_s=total * 0.5,
                    latency_reflect_s=total * 0.25,
                    latency_total_s=total,
                    policy_critical_actions=5,
                    policy_violations=0,
                    cost_usd=1.0,
                )
            )
    return Dataset(tuple(records), tuple(suite), tuple(profiles), PricingTable(), {"equal": EQUAL_WEIGHTS})


def table1_like_profiles() -> list[AgentProfileSpec]:
    """Sampling profiles with magnitudes similar to the constructed fixture."""
    out = []
    for agent, spec in TABLE1_AGENTS.items():
        plan, exe, reflect = spec["phases"]
        out.append(
            AgentProfileSpec(
                agent_id=agent,
                success_rate=spec["eff"] / 1000,
                success_autocorrelation=0.5,
                input_tokens_mean=spec["tokens"][0],
                input_tokens_spread=spec["tokens"][0] * 0.2,
                output_tokens_mean=spec["tokens"][1],
                output_tokens_spread=spec["tokens"][1] * 0.2,
                cost_mean=spec["cost"],
                cost_spread=spec["cost"] * 0.1,
                latency_plan_mean=plan,
                latency_exec_mean=exe,
                latency_reflect_mean=reflect,
                latency_jitter=0.2,
                violation_rate=round(1 - spec["pas"], 4),
                attack_success_rate=TABLE1_ATTACKS[agent] / TABLE1_PROBES,
            )
        )
    return out


def profiles_to_tree(profiles: Sequence[AgentProfileSpec]) -> dict[str, Any]:
    return {"profiles": [{f.name: getattr(p, f.name) for f in fields(p)} for p in profiles]}

