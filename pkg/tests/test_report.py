import csv
import io

import pytest

from clear_eval import analysis, report, simgen, stats
from clear_eval.model import DataError, PricingTable

from conftest import make_record


@pytest.mark.parametrize(
    "value, places, scale, expected",
    [
        (0.6875, 1, 100, "68.8"),  # exact binary tie rounds to even
        (0.6865, 1, 100, "68.6"),  # decimal repr tie 68.65 -> even
        (2.875, 2, 1, "2.88"),
        (2.865, 2, 1, "2.86"),
        (0.125, 2, 1, "0.12"),
        (-0.0001, 2, 1, "0.00"),
        (None, 2, 1, "—"),
        (float("nan"), 1, 1, "—"),
    ],
)
def test_fmt_half_even(value, places, scale, expected):
    assert report.fmt_num(value, places, scale) == expected


@pytest.fixture(scope="module")
def t1(table1_summaries):
    return table1_summaries, analysis.pareto_frontier(table1_summaries)


def test_table1_markdown_rows(t1, table1):
    sums, pareto = t1
    text = report.render_summary_table(sums, pareto)
    assert "| ReAct-GPT4* | 72.3 | 2.87 | 25.2 | 8.4 | 0.89 | 58.3 |" in text
    assert "| ReAct-GPT-o3 | 68.7 | 0.31 | 221.6 | 4.2 | 0.85 | 52.1 |" in text
    assert "| Reflexion* | 74.1 | 5.12 | 14.5 | 12.7 | 0.91 | 61.2 |" in text
    assert "| Plan-Execute* | 71.9 | 1.24 | 58.0 | 6.8 | 0.88 | 64.5 |" in text
    assert "| ToolFormer | 69.5 | 1.89 | 36.8 | 5.9 | 0.82 | 55.7 |" in text
    assert "| Domain-Tuned* | 70.3 | 0.27 | 260.4 | 3.8 | 0.93 | 72.8 |" in text
    assert "window semantics" in text


def test_divergence_footnote(t1):
    sums, pareto = t1
    text = report.render_summary_table(sums, pareto, reference_frontier=simgen.TABLE1_REFERENCE_FRONTIER)
    assert "Frontier differs from reference set" in text
    assert "ReAct-GPT-o3" in text.split("Frontier differs")[1]
    same = report.render_summary_table(sums, pareto, reference_frontier=pareto.frontier)
    assert "Frontier matches reference set." in same


def test_single_agent_table(t1):
    sums, _ = t1
    lines = report.render_summary_table(sums[:1], fmt="csv").splitlines()
    assert len(lines) == 2


def test_csv_round_trip(t1):
    sums, pareto = t1
    text = report.render_summary_table(sums, pareto, "csv", extended=True)
    assert text.splitlines()[0].startswith("Agent,Eff.,Cost,CNA,Lat.,PAS,R@8 (window)")
    back = report.parse_summary_csv(text)
    assert [b.agent_id for b in back] == [s.agent_id for s in sums]
    for a, b in zip(sums, back):
        assert b.efficacy == pytest.approx(a.efficacy, abs=0.0005)
        assert b.mean_cost_usd == pytest.approx(a.mean_cost_usd, abs=0.005)
        assert b.cna == pytest.approx(a.cna, abs=0.05)
        assert b.pas == pytest.approx(a.pas, abs=0.005)
        assert b.reliability == pytest.approx(a.reliability, abs=0.0005)
        assert b.composite == pytest.approx(a.composite, abs=0.0005)
        assert set(b.pass_at) == set(a.pass_at)
    # re-rendering the parsed values is stable
    assert report.render_summary_table(back, pareto, "csv", extended=True) == text


def test_csv_undefined_cells_round_trip(t1):
    sums, _ = t1
    from dataclasses import replace

    broke = [replace(sums[0], cps_usd=None, injection_resistance=None)]
    back = report.parse_summary_csv(report.render_summary_table(broke, fmt="csv", extended=True))
    assert back[0].cps_usd is None and back[0].injection_resistance is None


def test_parse_rejects_other_tables():
    with pytest.raises(DataError):
        report.parse_summary_csv("a,b,c\n1,2,3\n")


def test_text_format_aligned(t1):
    sums, pareto = t1
    lines = report.render_summary_table(sums, pareto, "text").splitlines()
    assert lines[0].startswith("Agent")
    assert len({len(line) for line in lines[2:8]}) == 1


def test_unknown_format(t1):
    with pytest.raises(DataError):
        report.render_summary_table(t1[0], fmt="html")


def test_rendering_is_pure(t1):
    sums, pareto = t1
    for fmt in report.FORMATS:
        assert report.render_summary_table(sums, pareto, fmt) == report.render_summary_table(sums, pareto, fmt)


def test_domain_table():
    ds = simgen.domain_fixture()
    text = report.render_domain_table(analysis.domain_breakdown(ds.records, ds.suite), "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][:3] == ["Domain", "ReAct-GPT4 Eff.", "ReAct-GPT4 PAS"]
    by_label = {r[0]: r for r in rows[1:]}
    dt = rows[0].index("Domain-Tuned Eff.")
    assert by_label["Compliance"][dt] == "72.5"
    assert by_label["Customer Support"][dt + 1] == "0.95"
    assert list(by_label)[-1] == "Overall"
    assert len(rows) == 8


def test_domain_table_omits_empty():
    ds = simgen.domain_fixture(["compliance"])
    text = report.render_domain_table(analysis.domain_breakdown(ds.records, ds.suite))
    assert "Omitted (no tasks)" in text and "Customer Support" in text.split("Omitted")[1]


def test_cost_latency_reflexion_row(table1):
    text = report.render_cost_latency_table(table1.records, table1.pricing, "csv")
    assert "Reflexion,89.4K,15.2K,$5.12,3.4,6.1,3.2" in text.splitlines()


def test_cost_latency_zero_tokens():
    recs = [make_record(input_tokens=0, output_tokens=0, cost_usd=0.0)]
    text = report.render_cost_latency_table(recs, PricingTable(), "csv")
    assert text.splitlines()[1].startswith("agentA,0.0K,0.0K,$0.00")


def test_cost_latency_phases_sum_to_latency(table1, table1_summaries):
    rows = {r.agent_id: r for r in report.cost_latency_rows(table1.records, table1.pricing)}
    for s in table1_summaries:
        r = rows[s.agent_id]
        assert abs(r.plan_s + r.exec_s + r.reflect_s - s.mean_latency_s) <= 0.05 * s.mean_latency_s


def _correlations(bootstrap=0):
    scores = {"efficacy": {"a": 1, "b": 3, "c": 2, "d": 4}, "efficacy_cost": {"a": 4, "b": 3, "c": 2, "d": 1},
              "clear": {"a": 0.1, "b": 0.2, "c": 0.3, "d": 0.4}}
    expert = {"a": 1.0, "b": 2.0, "c": 3.0, "d": 4.0}
    return stats.correlate_approaches(scores, expert, bootstrap=bootstrap, seed=1)


def test_correlation_table_rows():
    md = report.render_correlation_table(_correlations())
    lines = [l for l in md.splitlines() if l.startswith("|")]
    assert lines[0] == "| Evaluation Approach | Pearson | Spearman |"
    assert [l.split("|")[1].strip() for l in lines[2:]] == ["Efficacy Only", "Efficacy + Cost", "CLEAR (All 5 Dimensions)"]
    assert lines[-1].endswith("| 1.00 | 1.00 |")
    assert report.render_correlation_table(_correlations(), "csv").splitlines()[-1].endswith("1.00,1.00")
    assert "CI" not in md


def test_correlation_table_ci_columns():
    res = _correlations(bootstrap=1000)
    md = report.render_correlation_table(res)
    assert "Pearson 95% CI" in md and "1000 resamples, seed 1" in md
    header = report.render_correlation_table(res, "csv").splitlines()[0]
    assert header.endswith("Pearson CI Low,Pearson CI High,Spearman CI Low,Spearman CI High")
    assert report.render_correlation_table(res) == report.render_correlation_table(_correlations(bootstrap=1000))


def test_write_reports(tmp_path, t1, table1):
    sums, pareto = t1
    bd = analysis.domain_breakdown(table1.records, table1.suite)
    rows = report.cost_latency_rows(table1.records, table1.pricing)
    written = report.write_reports(tmp_path, sums, pareto, bd, rows, _correlations())
    assert sorted(p.name for p in written) == sorted(
        ["report.md", "summary.csv", "cost_latency.csv", "domains.csv", "correlation.csv"]
    )
    first = {p.name: p.read_bytes() for p in written}
    report.write_reports(tmp_path, sums, pareto, bd, rows, _correlations())
    assert first == {p.name: p.read_bytes() for p in written}
    assert b"## Pareto frontier" in first["report.md"]
