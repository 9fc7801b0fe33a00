from __future__ import annotations

import pytest

from clear_eval import analysis, simgen
from clear_eval.ingestion import default_domain_profiles
from clear_eval.model import RunRecord, SecurityProbe, TaskSpec


def make_record(
    run_id: str = "r0",
    agent_id: str = "agentA",
    task_id: str = "t1",
    trial_index: int = 0,
    success: bool = True,
    **overrides,
) -> RunRecord:
    fields = dict(
        input_tokens=1000,
        output_tokens=500,
        latency_plan_s=1.0,
        latency_exec_s=2.0,
        latency_reflect_s=0.5,
        latency_total_s=3.5,
        policy_critical_actions=4,
        policy_violations=0,
        cost_usd=None,
        security_probe=None,
    )
    fields.update(overrides)
    return RunRecord(run_id, agent_id, task_id, trial_index, success, **fields)


@pytest.fixture
def small_suite() -> list[TaskSpec]:
    return [
        TaskSpec("t1", "customer_support", "*", 5, 3.0),
        TaskSpec("t2", "data_analysis", "report", 8, 45.0),
        TaskSpec("t3", "software_development", "generation", 12, 60.0),
    ]


@pytest.fixture
def small_records() -> list[RunRecord]:
    return [
        make_record("r1", task_id="t1", cost_usd=0.5),
        make_record("r2", task_id="t2", success=False, cost_usd=0.25,
                    security_probe=SecurityProbe("atk-1", False)),
        make_record("r3", task_id="t3", policy_violations=1, cost_usd=0.75),
    ]


@pytest.fixture(scope="session")
def profiles():
    return default_domain_profiles()


@pytest.fixture(scope="session")
def table1():
    return simgen.table1_fixture()


@pytest.fixture(scope="session")
def table1_summaries(table1):
    return analysis.summarize(table1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
