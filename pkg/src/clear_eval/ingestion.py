"""Readers and writers for the on-disk formats.

* run logs: newline-delimited JSON, one :class:`RunRecord` per line
* suite manifest, pricing table, weight profiles: YAML documents
* expert ratings: CSV with header ``rater_id,agent_id,task_id,score``

I/O failures propagate as :class:`OSError`. Fatal content errors raise
:class:`IngestError`. Malformed run-log lines are collected, not raised.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import yaml

from .model import (
    DOMAINS,
    ClearError,
    Dataset,
    DomainProfile,
    ExpertRating,
    ModelPrice,
    PricingTable,
    RunRecord,
    SecurityProbe,
    TaskSpec,
    WeightProfile,
)

logger = logging.getLogger(__name__)


class IngestError(ClearError):
    """A file's content cannot be turned into model types."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class LineError:
    line: int
    message: str
    field: str | None = None

    def __str__(self) -> str:
        where = f"line {self.line}"
        if self.field:
            where += f", field {self.field!r}"
        return f"{where}: {self.message}"


# name -> (accepted JSON types, required)
_RECORD_SCHEMA: dict[str, tuple[tuple[type, ...], bool]] = {
    "run_id": ((str,), True),
    "agent_id": ((str,), True),
    "task_id": ((str,), True),
    "trial_index": ((int,), True),
    "success": ((bool,), True),
    "input_tokens": ((int,), True),
    "output_tokens": ((int,), True),
    "cost_usd": ((int, float), False),
    "latency_plan_s": ((int, float), True),
    "latency_exec_s": ((int, float), True),
    "latency_reflect_s": ((int, float), True),
    "latency_total_s": ((int, float), True),
    "policy_critical_actions": ((int,), True),
    "policy_violations": ((int,), True),
    "security_probe": ((dict,), False),
}
RECORD_FIELDS = tuple(_RECORD_SCHEMA)
_FLOAT_FIELDS = {"cost_usd", "latency_plan_s", "latency_exec_s", "latency_reflect_s", "latency_total_s"}


def record_from_dict(obj: Mapping[str, Any]) -> RunRecord:
    """Build a RunRecord from a decoded JSON object.

    Raises ``IngestError`` carrying the offending field name.
    """
    if not isinstance(obj, Mapping):
        raise IngestError("record is not a JSON object")
    values: dict[str, Any] = {}
    for name, (types, required) in _RECORD_SCHEMA.items():
        if name not in obj or obj[name] is None:
            if required:
                raise IngestError(f"missing required field {name!r}", name)
            continue
        value = obj[name]
        # bool is an int subclass; only "success" may be boolean
        if isinstance(value, bool) and bool not in types:
            raise IngestError(f"field {name!r} must not be boolean", name)
        if not isinstance(value, types):
            raise IngestError(f"field {name!r} has type {type(value).__name__}", name)
        values[name] = float(value) if name in _FLOAT_FIELDS else value

    probe = values.pop("security_probe", None)
    if probe is not None:
        case_id = probe.get("attack_case_id")
        succeeded = probe.get("attack_succeeded")
        if not isinstance(case_id, str) or not isinstance(succeeded, bool):
            raise IngestError("security_probe needs attack_case_id (str) and attack_succeeded (bool)", "security_probe")
        values["security_probe"] = SecurityProbe(case_id, succeeded)

    unknown = sorted(set(obj) - set(_RECORD_SCHEMA))
    if unknown:
        logger.warning("run %s: ignoring unknown fields %s", values["run_id"], ", ".join(unknown))
    return RunRecord(**values)


def record_to_dict(record: RunRecord) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in RECORD_FIELDS:
        value = getattr(record, name)
        if value is None:
            continue
        if isinstance(value, SecurityProbe):
            value = {"attack_case_id": value.attack_case_id, "attack_succeeded": value.attack_succeeded}
        out[name] = value
    return out


def format_run_line(record: RunRecord) -> str:
    return json.dumps(record_to_dict(record), separators=(",", ":"), ensure_ascii=False)


def dump_runs(path: str | Path, records: Iterable[RunRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(format_run_line(record))
            fh.write("\n")


def parse_runs(lines: Iterable[str]) -> tuple[list[RunRecord], list[LineError]]:
    records: list[RunRecord] = []
    errors: list[LineError] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append(LineError(lineno, f"invalid JSON: {exc.msg}"))
            continue
        try:
            records.append(record_from_dict(obj))
        except IngestError as exc:
            errors.append(LineError(lineno, str(exc), exc.field))
    return records, errors


def load_runs(path: str | Path) -> tuple[list[RunRecord], list[LineError]]:
    """Read a run log. Returns ``(records, line_errors)`` in file order."""
    with open(path, encoding="utf-8") as fh:
        return parse_runs(fh)


def load_runs_many(paths: Sequence[str | Path]) -> tuple[list[RunRecord], list[tuple[str, LineError]]]:
    records: list[RunRecord] = []
    errors: list[tuple[str, LineError]] = []
    for path in paths:
        recs, errs = load_runs(path)
        records.extend(recs)
        errors.extend((str(path), err) for err in errs)
    return records, errors


def _read_yaml(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        try:
            return yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise IngestError(f"{path}: not valid YAML: {exc}") from exc


def parse_domain_profiles(tree: Mapping[str, Any]) -> list[DomainProfile]:
    profiles = []
    for domain, sla_map in tree.items():
        if domain not in DOMAINS:
            raise IngestError(f"domain_profiles: unknown domain {domain!r}")
        if isinstance(sla_map, (int, float)):
            sla_map = {"*": sla_map}
        profiles.append(DomainProfile(domain, {str(k): float(v) for k, v in sla_map.items()}))
    missing = [d for d in DOMAINS if d not in tree]
    if missing:
        raise IngestError(f"domain_profiles: missing SLA maps for {', '.join(missing)}")
    return profiles


def parse_suite(tree: Mapping[str, Any]) -> tuple[list[TaskSpec], list[DomainProfile]]:
    if not isinstance(tree, Mapping) or "tasks" not in tree or "domain_profiles" not in tree:
        raise IngestError("suite manifest needs 'tasks' and 'domain_profiles'")
    profiles = parse_domain_profiles(tree["domain_profiles"])
    by_domain = {p.domain: p for p in profiles}
    tasks: list[TaskSpec] = []
    seen: set[str] = set()
    for entry in tree["tasks"] or []:
        task_id = str(entry.get("task_id", ""))
        if not task_id:
            raise IngestError("task entry without task_id")
        if task_id in seen:
            raise IngestError(f"duplicate task_id {task_id!r}")
        seen.add(task_id)
        domain = entry.get("domain")
        if domain not in by_domain:
            raise IngestError(f"task {task_id!r}: unknown domain {domain!r}")
        subtype = str(entry.get("subtype", "*"))
        try:
            sla = by_domain[domain].sla_for(subtype)
            tasks.append(TaskSpec(task_id, domain, subtype, int(entry.get("step_count", 5)), sla))
        except ClearError as exc:
            raise IngestError(f"task {task_id!r}: {exc}") from exc
    return tasks, profiles


def load_suite(path: str | Path) -> tuple[list[TaskSpec], list[DomainProfile]]:
    """Read a suite manifest, resolving each task's SLA from its domain profile."""
    return parse_suite(_read_yaml(path))


def suite_to_tree(suite: Sequence[TaskSpec], profiles: Sequence[DomainProfile]) -> dict[str, Any]:
    return {
        "domain_profiles": {p.domain: dict(p.sla_map) for p in profiles},
        "tasks": [
            {"task_id": t.task_id, "domain": t.domain, "subtype": t.subtype, "step_count": t.step_count}
            for t in suite
        ],
    }


def dump_suite(path: str | Path, suite: Sequence[TaskSpec], profiles: Sequence[DomainProfile]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(suite_to_tree(suite, profiles), fh, sort_keys=False)


def parse_pricing(tree: Mapping[str, Any]) -> PricingTable:
    models = {}
    for model_id, prices in (tree.get("models") or {}).items():
        models[str(model_id)] = ModelPrice(float(prices["input_usd_per_1k"]), float(prices["output_usd_per_1k"]))
    mapping = {}
    for agent_id, target in (tree.get("agent_model_map") or {}).items():
        if isinstance(target, str):
            mapping[str(agent_id)] = ((target, 1.0),)
        else:
            mapping[str(agent_id)] = tuple((str(e["model_id"]), float(e["token_share"])) for e in target)
    try:
        return PricingTable(models, mapping)
    except ClearError as exc:
        raise IngestError(f"pricing: {exc}") from exc


def load_pricing(path: str | Path) -> PricingTable:
    return parse_pricing(_read_yaml(path) or {})


def pricing_to_tree(pricing: PricingTable) -> dict[str, Any]:
    return {
        "models": {
            m: {"input_usd_per_1k": p.input_usd_per_1k, "output_usd_per_1k": p.output_usd_per_1k}
            for m, p in pricing.models.items()
        },
        "agent_model_map": {
            a: (shares[0][0] if len(shares) == 1 else [{"model_id": m, "token_share": s} for m, s in shares])
            for a, shares in pricing.agent_model_map.items()
        },
    }


_WEIGHT_KEYS = ("w_cost", "w_latency", "w_efficacy", "w_assurance", "w_reliability")


def parse_weights(tree: Mapping[str, Any]) -> dict[str, WeightProfile]:
    profiles = {}
    for name, entry in (tree.get("profiles") or {}).items():
        try:
            profiles[str(name)] = WeightProfile(*(float(entry[k]) for k in _WEIGHT_KEYS))
        except KeyError as exc:
            raise IngestError(f"weight profile {name!r}: missing {exc.args[0]}") from exc
        except ClearError as exc:
            raise IngestError(f"weight profile {name!r}: {exc}") from exc
    if "equal" not in profiles:
        raise IngestError("weights file must define an 'equal' profile")
    return profiles


def load_weights(path: str | Path | None = None) -> dict[str, WeightProfile]:
    """Read named weight profiles; ``None`` loads the bundled presets."""
    if path is None:
        text = resources.files("clear_eval").joinpath("data/weights.yaml").read_text(encoding="utf-8")
        return parse_weights(yaml.safe_load(text))
    return parse_weights(_read_yaml(path) or {})


def default_domain_profiles() -> list[DomainProfile]:
    text = resources.files("clear_eval").joinpath("data/domain_profiles.yaml").read_text(encoding="utf-8")
    return parse_domain_profiles(yaml.safe_load(text)["domain_profiles"])


RATING_HEADER = ("rater_id", "agent_id", "task_id", "score")


def parse_ratings(lines: Iterable[str]) -> list[ExpertRating]:
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != RATING_HEADER:
        raise IngestError(f"ratings: header must be {','.join(RATING_HEADER)}")
    ratings: list[ExpertRating] = []
    seen: set[tuple[str, str, str]] = set()
    for rowno, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise IngestError(f"ratings row {rowno}: expected 4 columns, got {len(row)}")
        rater, agent, task, raw = (cell.strip() for cell in row)
        try:
            score = int(raw)
        except ValueError:
            raise IngestError(f"ratings row {rowno}: score {raw!r} is not an integer") from None
        if not 1 <= score <= 5:
            raise IngestError(f"ratings row {rowno}: score {score} outside 1-5")
        key = (rater, agent, task)
        if key in seen:
            raise IngestError(f"ratings row {rowno}: duplicate rating for {rater}/{agent}/{task}")
        seen.add(key)
        ratings.append(ExpertRating(rater, agent, task, score))
    return ratings


def load_ratings(path: str | Path) -> list[ExpertRating]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_ratings(fh)


def load_task_list(path: str | Path) -> list[str]:
    """Read a task-id list: one id per line, ``#`` starts a comment."""
    ids = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                ids.append(line)
    return ids


def load_dataset(
    runs: Sequence[str | Path],
    suite_path: str | Path,
    pricing_path: str | Path | None = None,
    weights_path: str | Path | None = None,
) -> tuple[Dataset, list[tuple[str, LineError]]]:
    records, errors = load_runs_many(runs)
    suite, profiles = load_suite(suite_path)
    pricing = load_pricing(pricing_path) if pricing_path else PricingTable()
    weights = load_weights(weights_path)
    return Dataset(tuple(records), tuple(suite), tuple(profiles), pricing, weights), errors
