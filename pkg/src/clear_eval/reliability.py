"""pass@k over repeated trials, and the pass@1 -> pass@k consistency drop.

Three semantics are supported:

``window``
    a task passes if any ``k`` consecutive trials all succeeded (default).
``prefix``
    a task passes if its first ``k`` trials all succeeded.
``combinatorial``
    the expected all-success rate of a uniformly drawn ``k``-subset of the
    trials, ``C(s, k) / C(n, k)`` for ``s`` successes out of ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import MetricError, RunRecord

SEMANTICS = ("window", "prefix", "combinatorial")
DEFAULT_SEMANTICS = "window"


class InsufficientTrials(MetricError):
    pass


@dataclass(frozen=True)
class TrialMatrix:
    agent_id: str
    sequences: Mapping[str, tuple[bool, ...]]

    @property
    def min_trials(self) -> int:
        return min((len(s) for s in self.sequences.values()), default=0)


def trial_matrix(
    agent_id: str, records: Iterable[RunRecord], task_ids: Iterable[str] | None = None
) -> TrialMatrix:
    """Group an agent's records into per-task success sequences ordered by trial.

    Raises ``MetricError`` if a task's trial indices have gaps, or if a task
    in ``task_ids`` has no records.
    """
    wanted = None if task_ids is None else list(dict.fromkeys(task_ids))
    wanted_set = None if wanted is None else set(wanted)
    trials: dict[str, dict[int, bool]] = {}
    for r in records:
        if r.agent_id != agent_id:
            continue
        if wanted_set is not None and r.task_id not in wanted_set:
            continue
        trials.setdefault(r.task_id, {})[r.trial_index] = r.success

    sequences: dict[str, tuple[bool, ...]] = {}
    for task_id in wanted if wanted is not None else sorted(trials):
        by_index = trials.get(task_id)
        if not by_index:
            raise MetricError(f"agent {agent_id!r}: no trials for task {task_id!r}")
        if sorted(by_index) != list(range(len(by_index))):
            raise MetricError(f"agent {agent_id!r}: gap in trial indices for task {task_id!r}")
        sequences[task_id] = tuple(by_index[i] for i in range(len(by_index)))
    return TrialMatrix(agent_id, sequences)


def _longest_run(sequence: Sequence[bool]) -> int:
    best = run = 0
    for ok in sequence:
        run = run + 1 if ok else 0
        if run > best:
            best = run
    return best


def task_pass_at_k(sequence: Sequence[bool], k: int, semantics: str = DEFAULT_SEMANTICS) -> float:
    if k < 1:
        raise MetricError(f"k must be positive, got {k}")
    n = len(sequence)
    if k > n:
        raise InsufficientTrials(f"insufficient trials: k={k} but only {n} recorded")
    if semantics == "window":
        return 1.0 if _longest_run(sequence) >= k else 0.0
    if semantics == "prefix":
        return 1.0 if all(sequence[:k]) else 0.0
    if semantics == "combinatorial":
        return math.comb(sum(map(bool, sequence)), k) / math.comb(n, k)
    raise MetricError(f"unknown pass@k semantics {semantics!r}")


def pass_at_k(matrix: TrialMatrix, k: int, semantics: str = DEFAULT_SEMANTICS) -> float:
    if not matrix.sequences:
        raise MetricError(f"agent {matrix.agent_id!r}: empty trial matrix")
    scores = [task_pass_at_k(seq, k, semantics) for seq in matrix.sequences.values()]
    return math.fsum(scores) / len(scores)


def consistency_drop(pass1: float, passk: float) -> float:
    """Relative decline from pass@1 to pass@k."""
    if pass1 <= 0:
        raise MetricError("consistency drop undefined for pass@1 = 0")
    return (pass1 - passk) / pass1
