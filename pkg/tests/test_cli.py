import csv
import json

import pytest
import yaml

from clear_eval import analysis, report
from clear_eval.cli import main


@pytest.fixture(scope="module")
def t1dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("table1")
    assert main(["fixture", "table1", "--out", str(d)]) == 0
    return d


@pytest.fixture(scope="module")
def evaluated(t1dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("eval")
    code = main(["evaluate", "--runs", str(t1dir / "runs.jsonl"), "--suite", str(t1dir / "suite.yaml"),
                 "--pricing", str(t1dir / "pricing.yaml"), "--out", str(out)])
    assert code == 0
    return out


def ds_args(d):
    return ["--runs", str(d / "runs.jsonl"), "--suite", str(d / "suite.yaml")]


def test_validate_ok(t1dir, capsys):
    assert main(["validate", *ds_args(t1dir)]) == 0
    assert "0 violations" in capsys.readouterr().out


def test_validate_broken_record(t1dir, tmp_path, capsys):
    lines = (t1dir / "runs.jsonl").read_text().splitlines()[:3]
    bad = json.loads(lines[1])
    bad["policy_violations"] = bad["policy_critical_actions"] + 1
    lines[1] = json.dumps(bad)
    (tmp_path / "runs.jsonl").write_text("\n".join(lines) + "\n")
    (tmp_path / "suite.yaml").write_bytes((t1dir / "suite.yaml").read_bytes())
    assert main(["validate", *ds_args(tmp_path)]) == 1
    out = capsys.readouterr().out
    assert "violations_exceed_actions" in out and "1 violations" in out


def test_validate_malformed_line(t1dir, tmp_path, capsys):
    (tmp_path / "runs.jsonl").write_text("{not json\n")
    (tmp_path / "suite.yaml").write_bytes((t1dir / "suite.yaml").read_bytes())
    assert main(["validate", *ds_args(tmp_path)]) == 1
    assert "line 1" in capsys.readouterr().out


def test_validate_missing_file(tmp_path):
    assert main(["validate", "--runs", str(tmp_path / "nope.jsonl"), "--suite", str(tmp_path / "s.yaml")]) == 2


def test_evaluate_writes_reports(evaluated):
    names = sorted(p.name for p in evaluated.iterdir())
    assert names == ["cost_latency.csv", "domains.csv", "report.md", "summary.csv"]
    rows = {r[0]: r for r in csv.reader(open(evaluated / "summary.csv"))}
    assert rows["ReAct-GPT4*"][1:7] == ["72.3", "2.87", "25.2", "8.4", "0.89", "58.3"]
    assert rows["Domain-Tuned*"][1:7] == ["70.3", "0.27", "260.4", "3.8", "0.93", "72.8"]


def test_evaluate_is_deterministic(t1dir, evaluated, tmp_path):
    assert main(["evaluate", *ds_args(t1dir), "--out", str(tmp_path)]) == 0
    for name in ("summary.csv", "report.md", "domains.csv", "cost_latency.csv"):
        assert (tmp_path / name).read_bytes() == (evaluated / name).read_bytes()


def test_evaluate_insufficient_trials(t1dir, tmp_path, capsys):
    assert main(["evaluate", *ds_args(t1dir), "--k", "12", "--out", str(tmp_path)]) == 1
    assert "insufficient trials" in capsys.readouterr().err


def test_evaluate_unknown_weights(t1dir, tmp_path):
    assert main(["evaluate", *ds_args(t1dir), "--weights", "nope", "--out", str(tmp_path)]) == 1


def _ranking(out):
    rows = list(csv.DictReader(open(out / "summary.csv")))
    return [r["Agent"].rstrip("*") for r in sorted(rows, key=lambda r: -float(r["CLEAR"]))]


def test_financial_services_reorders(t1dir, evaluated, tmp_path):
    assert main(["evaluate", *ds_args(t1dir), "--weights", "financial_services", "--out", str(tmp_path)]) == 0
    # hand-weighted sums: equal DT .872 > o3 .801 > Plan .741 > ...;
    # financial_services DT .8405 > Plan .7402 > o3 .7268 > ...
    assert _ranking(evaluated) == ["Domain-Tuned", "ReAct-GPT-o3", "Plan-Execute", "ToolFormer", "ReAct-GPT4", "Reflexion"]
    assert _ranking(tmp_path) == ["Domain-Tuned", "Plan-Execute", "ReAct-GPT-o3", "ToolFormer", "ReAct-GPT4", "Reflexion"]


def test_pareto_from_summary(evaluated, capsys):
    assert main(["pareto", "--summary", str(evaluated / "summary.csv")]) == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("frontier:"))
    assert set(line.split(": ")[1].split(", ")) == {"ReAct-GPT4", "Reflexion", "Plan-Execute", "Domain-Tuned"}
    assert "ReAct-GPT-o3: dominated by" in out


def test_pareto_cost_only(evaluated, capsys):
    assert main(["pareto", "--summary", str(evaluated / "summary.csv"), "--dims", "cost"]) == 0
    assert "frontier: Domain-Tuned\n" in capsys.readouterr().out


def test_pareto_two_agents_one_dominates(tmp_path, capsys):
    (tmp_path / "s.csv").write_text(
        "Agent,Eff.,Cost,CNA,Lat.,PAS,R@8 (window)\n"
        "good,80.0,1.00,80.0,2.0,0.90,70.0\n"
        "bad,70.0,2.00,35.0,3.0,0.80,60.0\n"
    )
    assert main(["pareto", "--summary", str(tmp_path / "s.csv"), "--dims", "cost,efficacy"]) == 0
    assert "frontier: good\n" in capsys.readouterr().out


def test_pareto_reference_divergence(evaluated, capsys):
    args = ["pareto", "--summary", str(evaluated / "summary.csv"),
            "--reference-frontier", "ReAct-GPT-o3,Plan-Execute,Domain-Tuned"]
    assert main(args) == 0
    assert "differs from reference" in capsys.readouterr().out


def test_pareto_unknown_dimension(evaluated, capsys):
    assert main(["pareto", "--summary", str(evaluated / "summary.csv"), "--dims", "speed"]) == 1
    assert "unknown dimension" in capsys.readouterr().err


def test_pareto_from_runs(t1dir, capsys):
    assert main(["pareto", *ds_args(t1dir)]) == 0
    assert "Domain-Tuned: on frontier" in capsys.readouterr().out


def _write_ratings(path, means, raters=40):
    """Integer 1-5 ratings whose per-agent mean hits ``means`` to 1/raters."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rater_id", "agent_id", "task_id", "score"])
        for agent, m in means.items():
            total = round(m * raters)
            base, extra = divmod(total, raters)
            for i in range(raters):
                w.writerow([f"r{i}", agent, "t1", base + (1 if i < extra else 0)])


def test_correlate_proportional_ratings(evaluated, tmp_path, capsys):
    sums = report.read_summary_csv(evaluated / "summary.csv")
    clear = analysis.approach_scores(sums)["clear"]
    _write_ratings(tmp_path / "r.csv", {a: 1 + 4 * v for a, v in clear.items()})
    args = ["correlate", "--summary", str(evaluated / "summary.csv"), "--ratings", str(tmp_path / "r.csv"),
            "--out", str(tmp_path), "--format", "csv"]
    assert main(args) == 0
    out = capsys.readouterr().out
    assert "CLEAR (All 5 Dimensions),1.00,1.00" in out
    assert (tmp_path / "correlation.csv").read_text().splitlines()[-1].endswith("1.00,1.00")


def test_correlate_bootstrap_deterministic(evaluated, tmp_path, capsys):
    sums = report.read_summary_csv(evaluated / "summary.csv")
    _write_ratings(tmp_path / "r.csv", {s.agent_id: 1 + 4 * s.efficacy for s in sums}, raters=5)
    args = ["correlate", "--summary", str(evaluated / "summary.csv"), "--ratings", str(tmp_path / "r.csv"),
            "--bootstrap", "1000", "--seed", "3", "--out", str(tmp_path)]
    assert main(args) == 0
    first = (tmp_path / "correlation.csv").read_bytes()
    assert main(args) == 0
    assert (tmp_path / "correlation.csv").read_bytes() == first
    assert b"Pearson CI Low" in first


def test_correlate_constant_ratings(evaluated, tmp_path, capsys):
    sums = report.read_summary_csv(evaluated / "summary.csv")
    _write_ratings(tmp_path / "r.csv", {s.agent_id: 3 for s in sums}, raters=3)
    args = ["correlate", "--summary", str(evaluated / "summary.csv"), "--ratings", str(tmp_path / "r.csv"),
            "--out", str(tmp_path)]
    assert main(args) == 1
    assert "degenerate sample" in capsys.readouterr().err


def test_correlate_two_agents(tmp_path, capsys):
    (tmp_path / "s.csv").write_text(
        "Agent,Eff.,Cost,CNA,Lat.,PAS,R@8 (window)\n"
        "a,80.0,1.00,80.0,2.0,0.90,70.0\n"
        "b,70.0,2.00,35.0,3.0,0.80,60.0\n"
    )
    _write_ratings(tmp_path / "r.csv", {"a": 4, "b": 2}, raters=2)
    args = ["correlate", "--summary", str(tmp_path / "s.csv"), "--ratings", str(tmp_path / "r.csv"),
            "--out", str(tmp_path)]
    assert main(args) == 1
    assert "degenerate sample" in capsys.readouterr().err


def test_correlate_help_documents_efficacy_cost(capsys):
    with pytest.raises(SystemExit):
        main(["correlate", "--help"])
    assert "normalized" in capsys.readouterr().out


def test_simulate_byte_identical(t1dir, tmp_path, capsys):
    base = ["simulate", "--profiles", str(t1dir / "profiles.yaml"), "--suite", str(t1dir / "suite.yaml"),
            "--trials", "2", "--seed", "42"]
    assert main([*base, "--out", str(tmp_path / "a.jsonl")]) == 0
    assert main([*base, "--out", str(tmp_path / "b.jsonl")]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert "ground truth" in capsys.readouterr().out


def test_simulate_perfect_agent_then_evaluate(t1dir, tmp_path, capsys):
    (tmp_path / "p.yaml").write_text(yaml.safe_dump({"profiles": [
        {"agent_id": "perfect", "success_rate": 1.0, "cost_mean": 1.0},
        {"agent_id": "coin", "success_rate": 0.5, "cost_mean": 0.5},
    ]}))
    (tmp_path / "suite.yaml").write_bytes((t1dir / "suite.yaml").read_bytes())
    assert main(["simulate", "--profiles", str(tmp_path / "p.yaml"), "--suite", str(tmp_path / "suite.yaml"),
                 "--trials", "8", "--seed", "1", "--out", str(tmp_path / "runs.jsonl")]) == 0
    assert main(["evaluate", *ds_args(tmp_path), "--out", str(tmp_path / "out"), "--format", "csv"]) == 0
    rows = {r[0].rstrip("*"): r for r in csv.reader(open(tmp_path / "out" / "summary.csv"))}
    assert rows["perfect"][1] == "100.0"
    assert abs(float(rows["coin"][1]) - 50.0) < 5.0


def test_simulate_table1_like_profiles_track_ground_truth(t1dir, tmp_path, capsys):
    assert main(["simulate", "--profiles", str(t1dir / "profiles.yaml"), "--suite", str(t1dir / "suite.yaml"),
                 "--trials", "8", "--seed", "7", "--out", str(tmp_path / "runs.jsonl")]) == 0
    (tmp_path / "suite.yaml").write_bytes((t1dir / "suite.yaml").read_bytes())
    assert main(["evaluate", *ds_args(tmp_path), "--out", str(tmp_path / "out")]) == 0
    profiles = yaml.safe_load((t1dir / "profiles.yaml").read_text())["profiles"]
    sums = {s.agent_id: s for s in report.read_summary_csv(tmp_path / "out" / "summary.csv")}
    for p in profiles:
        s = sums[p["agent_id"]]
        # 1000 tasks: 4-sigma binomial bound on efficacy is about 0.06
        assert abs(s.efficacy - p["success_rate"]) < 0.06
        assert abs(s.pas - (1 - p["violation_rate"])) < 0.01
        assert abs(s.mean_cost_usd - p["cost_mean"]) < 0.01 * p["cost_mean"] + 0.005


def test_simulate_invalid_profile(t1dir, tmp_path, capsys):
    (tmp_path / "p.yaml").write_text(yaml.safe_dump({"profiles": [{"agent_id": "x", "success_rate": 2.0}]}))
    assert main(["simulate", "--profiles", str(tmp_path / "p.yaml"), "--suite", str(t1dir / "suite.yaml"),
                 "--out", str(tmp_path / "r.jsonl")]) == 1


def test_fixture_sla_scr(tmp_path, capsys):
    assert main(["fixture", "sla", "--out", str(tmp_path)]) == 0
    assert main(["evaluate", *ds_args(tmp_path), "--k", "1", "--out", str(tmp_path / "o"), "--format", "csv"]) == 0
    rows = {r["Agent"].rstrip("*"): r for r in csv.DictReader(open(tmp_path / "o" / "summary.csv"))}
    assert rows["Plan-Execute"]["SCR"] == "77.0"
    assert rows["Reflexion"]["SCR"] == "66.0"


def test_no_color_env(evaluated, capsys, monkeypatch):
    monkeypatch.setenv("CLEAR_NO_COLOR", "1")
    assert main(["pareto", "--summary", str(evaluated / "summary.csv")]) == 0
    assert "\x1b[" not in capsys.readouterr().out
