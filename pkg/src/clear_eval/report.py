"""Table rendering: Markdown (default), comma-separated, and aligned text.

All numbers are rounded half-to-even at their printed precision, going
through the shortest decimal repr of the float so that e.g. 0.6875 prints
as 68.8 percent on every platform.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .analysis import DomainBreakdown, ParetoResult
from .metrics import cost_of_run, first_trials
from .model import AgentSummary, DataError, PricingTable, RunRecord

FORMATS = ("markdown", "csv", "text")
UNDEFINED = "—"

DOMAIN_LABELS = {
    "customer_support": "Customer Support",
    "data_analysis": "Data Analysis",
    "process_automation": "Process Automation",
    "software_development": "Software Dev.",
    "compliance": "Compliance",
    "multi_stakeholder": "Multi-Stakeholder",
}

APPROACH_LABELS = {
    "efficacy": "Efficacy Only",
    "efficacy_cost": "Efficacy + Cost",
    "clear": "CLEAR (All 5 Dimensions)",
}


def fmt_num(value: float | None, places: int, scale: int = 1) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return UNDEFINED
    d = Decimal(repr(float(value))) * scale
    out = d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    if out == 0:
        out = abs(out)
    return f"{out:.{places}f}"


def fmt_pct(value: float | None, places: int = 1) -> str:
    return fmt_num(value, places, 100)


@dataclass
class Table:
    headers: list[str]
    rows: list[list[str]]
    footnotes: list[str] = field(default_factory=list)


def _render_markdown(table: Table) -> str:
    lines = ["| " + " | ".join(table.headers) + " |"]
    align = ["---"] + ["---:"] * (len(table.headers) - 1)
    lines.append("| " + " | ".join(align) + " |")
    lines += ["| " + " | ".join(row) + " |" for row in table.rows]
    if table.footnotes:
        lines.append("")
        lines += table.footnotes
    return "\n".join(lines) + "\n"


def _render_csv(table: Table) -> str:
    # footnotes are dropped so spreadsheets can re-ingest the file
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.headers)
    writer.writerows(table.rows)
    return buf.getvalue()


def _render_text(table: Table) -> str:
    widths = [len(h) for h in table.headers]
    for row in table.rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first, *rest]).rstrip()

    out = [line(table.headers), "  ".join("-" * w for w in widths)]
    out += [line(row) for row in table.rows]
    if table.footnotes:
        out.append("")
        out += table.footnotes
    return "\n".join(out) + "\n"


def render(table: Table, fmt: str = "markdown") -> str:
    if fmt == "markdown":
        return _render_markdown(table)
    if fmt == "csv":
        return _render_csv(table)
    if fmt == "text":
        return _render_text(table)
    raise DataError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


# --- Summary (one row per agent) ------------------------------------------------


def summary_table(
    summaries: Sequence[AgentSummary],
    pareto: ParetoResult | None = None,
    fmt: str = "markdown",
    extended: bool = False,
    reference_frontier: Iterable[str] | None = None,
) -> Table:
    if not summaries:
        raise DataError("no agents to render")
    first = summaries[0]
    rk = first.reliability_k
    semantics = first.semantics
    rel_header = f"R@{rk}" if fmt != "csv" else f"R@{rk} ({semantics})"
    headers = ["Agent", "Eff.", "Cost", "CNA", "Lat.", "PAS", rel_header]
    other_ks = [k for k in sorted(first.pass_at) if k != rk] if extended else []
    if extended:
        headers += [f"R@{k}" if fmt != "csv" else f"R@{k} ({semantics})" for k in other_ks]
        headers += ["SCR", "CPS", "Inj.", "CLEAR"]

    frontier = set(pareto.frontier) if pareto else set()
    rows = []
    for s in summaries:
        name = s.agent_id + ("*" if s.agent_id in frontier else "")
        row = [
            name,
            fmt_pct(s.efficacy),
            fmt_num(s.mean_cost_usd, 2),
            fmt_num(s.cna, 1),
            fmt_num(s.mean_latency_s, 1),
            fmt_num(s.pas, 2),
            fmt_pct(s.pass_at[rk]),
        ]
        if extended:
            row += [fmt_pct(s.pass_at[k]) for k in other_ks]
            row += [fmt_pct(s.scr), fmt_num(s.cps_usd, 2), fmt_pct(s.injection_resistance), fmt_num(s.composite, 3)]
        rows.append(row)

    notes = []
    if pareto is not None:
        dims = ", ".join(f"{name} ({'min' if sense == 'minimize' else 'max'})" for name, sense in pareto.dimensions)
        notes.append(f"\\* Pareto-optimal over {dims}." if fmt == "markdown" else f"* Pareto-optimal over {dims}.")
        if reference_frontier is not None:
            missing, extra = pareto.divergence(reference_frontier)
            if missing or extra:
                parts = []
                if missing:
                    parts.append(f"not on computed frontier: {', '.join(missing)}")
                if extra:
                    parts.append(f"on computed frontier but not in reference: {', '.join(extra)}")
                notes.append("Frontier differs from reference set; " + "; ".join(parts) + ".")
            else:
                notes.append("Frontier matches reference set.")
    notes.append(f"R@k: pass@k, {semantics} semantics. Eff., R@k{', SCR, Inj.' if extended else ''} in percent.")
    return Table(headers, rows, notes)


def render_summary_table(
    summaries: Sequence[AgentSummary],
    pareto: ParetoResult | None = None,
    fmt: str = "markdown",
    extended: bool = False,
    reference_frontier: Iterable[str] | None = None,
) -> str:
    return render(summary_table(summaries, pareto, fmt, extended, reference_frontier), fmt)


def _parse_cell(cell: str, scale: float = 1.0) -> float | None:
    cell = cell.strip()
    if cell in (UNDEFINED, ""):
        return None
    return float(cell) / scale


def parse_summary_csv(text: str) -> list[AgentSummary]:
    """Read back the comma-separated summary written by :func:`render_summary_table`."""
    reader = csv.reader(io.StringIO(text))
    headers = next(reader, None)
    if not headers or headers[:6] != ["Agent", "Eff.", "Cost", "CNA", "Lat.", "PAS"]:
        raise DataError("not a summary table: unexpected header")
    rel_cols = [(i, h) for i, h in enumerate(headers) if h.startswith("R@")]
    if not rel_cols:
        raise DataError("summary table has no R@k column")

    def k_and_mode(h: str) -> tuple[int, str]:
        k_part, _, mode = h[2:].partition(" ")
        return int(k_part), mode.strip("()") or "window"

    rk, semantics = k_and_mode(rel_cols[0][1])
    col = {h: i for i, h in enumerate(headers)}
    out = []
    for row in reader:
        if not row:
            continue
        pass_at = {k_and_mode(h)[0]: _parse_cell(row[i], 100) for i, h in rel_cols}
        get = lambda name, scale=1.0: _parse_cell(row[col[name]], scale) if name in col else None  # noqa: E731
        out.append(
            AgentSummary(
                agent_id=row[0].rstrip("*"),
                efficacy=get("Eff.", 100),
                mean_cost_usd=get("Cost"),
                cna=get("CNA"),
                cps_usd=get("CPS"),
                mean_latency_s=get("Lat."),
                scr=get("SCR", 100) if "SCR" in col else float("nan"),
                pas=get("PAS"),
                pass_at=pass_at,
                injection_resistance=get("Inj.", 100),
                composite=get("CLEAR"),
                reliability_k=rk,
                semantics=semantics,
            )
        )
    return out


def read_summary_csv(path: str | Path) -> list[AgentSummary]:
    return parse_summary_csv(Path(path).read_text(encoding="utf-8"))


# --- Domain breakdown ------------------------------------------------------------


def domain_table(breakdown: DomainBreakdown, fmt: str = "markdown") -> Table:
    headers = ["Domain"]
    for agent in breakdown.agents:
        headers += [f"{agent} Eff.", f"{agent} PAS"]
    rows = []
    for domain in breakdown.domains:
        row = [DOMAIN_LABELS[domain]]
        for agent in breakdown.agents:
            cell = breakdown.cells.get((agent, domain))
            row += [fmt_pct(cell.efficacy) if cell else UNDEFINED, fmt_num(cell.pas, 2) if cell else UNDEFINED]
        rows.append(row)
    overall = ["Overall"]
    for agent in breakdown.agents:
        cell = breakdown.overall[agent]
        overall += [fmt_pct(cell.efficacy), fmt_num(cell.pas, 2)]
    rows.append(overall)
    notes = ["Eff. in percent over first trials; Overall is the task-weighted mean of the domain rows."]
    if breakdown.omitted:
        notes.append("Omitted (no tasks): " + ", ".join(DOMAIN_LABELS[d] for d in breakdown.omitted) + ".")
    return Table(headers, rows, notes)


def render_domain_table(breakdown: DomainBreakdown, fmt: str = "markdown") -> str:
    return render(domain_table(breakdown, fmt), fmt)


# --- Cost / latency decomposition --------------------------------------------------


@dataclass(frozen=True)
class CostLatencyRow:
    agent_id: str
    input_tokens: float
    output_tokens: float
    cost_usd: float
    plan_s: float
    exec_s: float
    reflect_s: float
    total_s: float


def cost_latency_rows(records: Sequence[RunRecord], pricing: PricingTable) -> list[CostLatencyRow]:
    """Per-agent means over first-trial runs."""
    by_agent: dict[str, list[RunRecord]] = {}
    for r in records:
        by_agent.setdefault(r.agent_id, []).append(r)
    rows = []
    for agent, recs in by_agent.items():
        first = first_trials(recs)
        n = len(first)
        if n == 0:
            continue

        def mean(values: Iterable[float]) -> float:
            return math.fsum(values) / n

        rows.append(
            CostLatencyRow(
                agent,
                mean(r.input_tokens for r in first),
                mean(r.output_tokens for r in first),
                mean(cost_of_run(r, pricing) for r in first),
                mean(r.latency_plan_s for r in first),
                mean(r.latency_exec_s for r in first),
                mean(r.latency_reflect_s for r in first),
                mean(r.latency_total_s for r in first),
            )
        )
    return rows


def cost_latency_table(rows: Sequence[CostLatencyRow]) -> Table:
    headers = ["Agent", "Input Tok.", "Output Tok.", "Total Cost", "Plan (s)", "Exec (s)", "Reflect (s)"]
    body = [
        [
            r.agent_id,
            fmt_num(r.input_tokens / 1000, 1) + "K",
            fmt_num(r.output_tokens / 1000, 1) + "K",
            "$" + fmt_num(r.cost_usd, 2),
            fmt_num(r.plan_s, 1),
            fmt_num(r.exec_s, 1),
            fmt_num(r.reflect_s, 1),
        ]
        for r in rows
    ]
    return Table(headers, body, ["Means per task over first trials."])


def render_cost_latency_table(records: Sequence[RunRecord], pricing: PricingTable, fmt: str = "markdown") -> str:
    return render(cost_latency_table(cost_latency_rows(records, pricing)), fmt)


# --- Correlation -------------------------------------------------------------------


def correlation_table(results: Sequence, fmt: str = "markdown") -> Table:
    """``results`` are :class:`clear_eval.stats.CorrelationResult` values."""
    with_ci = any(r.pearson_ci is not None for r in results)
    headers = ["Evaluation Approach", "Pearson", "Spearman"]
    if with_ci:
        if fmt == "csv":
            headers += ["Pearson CI Low", "Pearson CI High", "Spearman CI Low", "Spearman CI High"]
        else:
            headers += ["Pearson 95% CI", "Spearman 95% CI"]
    rows = []
    for r in results:
        row = [APPROACH_LABELS.get(r.approach, r.approach), fmt_num(r.pearson, 2), fmt_num(r.spearman, 2)]
        if with_ci:
            cis = (r.pearson_ci, r.spearman_ci)
            if fmt == "csv":
                for ci in cis:
                    row += [fmt_num(ci.low, 2), fmt_num(ci.high, 2)] if ci else [UNDEFINED, UNDEFINED]
            else:
                row += [f"({fmt_num(ci.low, 2)}, {fmt_num(ci.high, 2)})" if ci else UNDEFINED for ci in cis]
        rows.append(row)
    notes = []
    if results:
        notes.append(f"N = {results[0].n} agents; expert score = mean over raters and tasks.")
        if with_ci:
            ci = results[0].pearson_ci
            notes.append(
                f"Percentile bootstrap, {ci.resamples} resamples, seed {ci.seed}; "
                f"{sum((r.pearson_ci.redraws + r.spearman_ci.redraws) for r in results if r.pearson_ci)} degenerate resamples redrawn."
            )
    return Table(headers, rows, notes)


def render_correlation_table(results: Sequence, fmt: str = "markdown") -> str:
    return render(correlation_table(results, fmt), fmt)


# --- Report bundle --------------------------------------------------------------------


def build_report(
    summaries: Sequence[AgentSummary],
    pareto: ParetoResult,
    breakdown: DomainBreakdown | None,
    cost_rows: Sequence[CostLatencyRow],
    correlation: Sequence | None = None,
    reference_frontier: Iterable[str] | None = None,
    weights_name: str = "equal",
    alpha: float | None = None,
) -> str:
    parts = ["# CLEAR evaluation report", ""]
    parts += ["## Summary", "", render(summary_table(summaries, pareto, "markdown", False, reference_frontier))]
    parts += [f"## Extended metrics (weights: {weights_name})", ""]
    parts.append(render(summary_table(summaries, None, "markdown", True)))
    parts += ["## Pareto frontier", ""]
    for agent, entry in pareto.entries.items():
        status = "frontier" if entry.on_frontier else "dominated by " + ", ".join(entry.dominated_by)
        parts.append(f"- {agent}: {status}")
    parts.append("")
    if breakdown is not None:
        parts += ["## Domain breakdown", "", render(domain_table(breakdown))]
    parts += ["## Cost and latency", "", render(cost_latency_table(cost_rows))]
    if correlation:
        parts += ["## Correlation with expert ratings", "", render(correlation_table(correlation))]
        if alpha is not None:
            parts += [f"Inter-rater agreement (Krippendorff's alpha, ordinal): {fmt_num(alpha, 3)}", ""]
    return "\n".join(parts)


def write_reports(
    out_dir: str | Path,
    summaries: Sequence[AgentSummary],
    pareto: ParetoResult,
    breakdown: DomainBreakdown | None,
    cost_rows: Sequence[CostLatencyRow],
    correlation: Sequence | None = None,
    reference_frontier: Iterable[str] | None = None,
    weights_name: str = "equal",
    alpha: float | None = None,
) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {
        "report.md": build_report(
            summaries, pareto, breakdown, cost_rows, correlation, reference_frontier, weights_name, alpha
        ),
        "summary.csv": render(summary_table(summaries, pareto, "csv", True), "csv"),
        "cost_latency.csv": render(cost_latency_table(cost_rows), "csv"),
    }
    if breakdown is not None:
        files["domains.csv"] = render_domain_table(breakdown, "csv")
    if correlation:
        files["correlation.csv"] = render_correlation_table(correlation, "csv")
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)
    return written

