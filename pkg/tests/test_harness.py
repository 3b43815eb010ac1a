import csv
import io
import json

import pytest

from contingent_pomcp.harness import (
    COLUMNS, ConfigError, ExperimentConfig, ResultRow, aggregate, emit, load_report, main, run_batch,
)
from contingent_pomcp.pomcp import SearchConfig

TRIVIAL_DOMAIN = """(define (domain triv)
  (:predicates (done))
  (:action finish :effect (done)))
"""
TRIVIAL_PROBLEM = """(define (problem triv1)
  (:domain triv)
  (:init (done))
  (:goal (done)))
"""
CORRIDOR_DOMAIN = """(define (domain hall)
  (:types cell)
  (:predicates (at ?c - cell) (next ?a - cell ?b - cell))
  (:action step
    :parameters (?a - cell ?b - cell)
    :precondition (and (at ?a) (next ?a ?b))
    :effect (and (not (at ?a)) (at ?b))))
"""
CORRIDOR_PROBLEM = """(define (problem hall3)
  (:domain hall)
  (:objects a b c - cell)
  (:init (at a) (next a b) (next b c))
  (:goal (at c)))
"""


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in [("triv-d", TRIVIAL_DOMAIN), ("triv", TRIVIAL_PROBLEM),
                       ("hall-d", CORRIDOR_DOMAIN), ("hall", CORRIDOR_PROBLEM)]:
        path = tmp_path / f"{name}.pddl"
        path.write_text(text)
        out[name] = str(path)
    return out


def cfg_for(files, stem, **kw):
    search = SearchConfig(simulations=kw.pop("simulations", 50), rollout_policy=kw.pop("heuristic", "hadd"))
    return ExperimentConfig(domain_file=files[stem + "-d"], problem_file=files[stem], search=search, **kw)


def test_trivial_batch(files):
    row = run_batch(cfg_for(files, "triv"))
    assert row.instance == "triv"
    assert row.success_rate == 1.0 and row.avg_cost == 0
    assert len(row.episodes) == 20


def test_csv_has_header_and_one_line(files):
    text = emit([run_batch(cfg_for(files, "hall", episodes=3))], "csv")
    lines = text.strip().splitlines()
    assert len(lines) == 2
    assert tuple(lines[0].split(",")) == COLUMNS
    rec = next(csv.DictReader(io.StringIO(text)))
    assert float(rec["success_rate"]) == 1.0 and float(rec["avg_cost"]) == 2.0


def test_json_round_trip(files):
    row = run_batch(cfg_for(files, "hall", episodes=3))
    back = load_report(emit([row], "json", timing=True))
    assert back[0].to_dict() == row.to_dict()
    assert json.loads(emit([row]))[0]["avg_step_secs"] is None
    assert load_report(emit([row], "csv"), "csv")[0].aggregates() == row.aggregates()


def test_rows_follow_heuristic_order(files):
    rows = [run_batch(cfg_for(files, "hall", episodes=2, heuristic=h)) for h in ("random", "hadd", "hadd-belief")]
    data = json.loads(emit(rows))
    assert [d["heuristic"] for d in data] == ["random", "hadd", "hadd-belief"]


def test_same_seed_gives_identical_json():
    def once():
        cfg = ExperimentConfig(instance="localize3", search=SearchConfig(simulations=60), episodes=2, seed=7)
        return emit([run_batch(cfg)])
    assert once() == once()


def test_aggregates_recomputable(files):
    row = run_batch(cfg_for(files, "hall", episodes=4))
    again = aggregate(row.instance, row.heuristic, row.simulations, row.episodes, step_secs=[row.avg_step_secs])
    assert again.success_rate == row.success_rate and again.avg_cost == row.avg_cost
    assert again.cost_all_capped == row.cost_all_capped


def test_aggregate_counts_failures():
    recs = [{"success": True, "cost": 4}, {"success": False, "cost": 9}]
    row = aggregate("x", "hadd", 10, recs, step_limit=100, step_secs=[0.5, 1.5])
    assert row.success_rate == 0.5
    assert row.avg_cost == 4 and row.cost_successes_only == 4
    assert row.cost_all_capped == 52
    assert row.avg_step_secs == 1.0
    assert aggregate("x", "hadd", 10, [{"success": False, "cost": 3}]).avg_cost is None


@pytest.mark.parametrize("kw", [
    {"episodes": 0}, {"step_limit": 0}, {"format": "xml"}, {"instance": "nowhere"}, {"instance": None},
])
def test_experiment_config_errors(kw):
    base = {"instance": "unix1"}
    base.update(kw)
    with pytest.raises(ConfigError):
        ExperimentConfig(**base)


def test_emit_rejects_bad_input():
    with pytest.raises(ValueError):
        emit([])
    with pytest.raises(ValueError):
        emit([ResultRow("x", "hadd", 1, 1.0, 0.0, 0.0)], "yaml")


def test_cli_solve_writes_report(files, tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["solve", "--domain", files["hall-d"], "--problem", files["hall"], "--episodes", "2",
                 "--simulations", "30", "--out", str(out), "--quiet"])
    assert code == 0
    assert json.loads(out.read_text())[0]["success_rate"] == 1.0


def test_cli_csv_to_stdout(capsys):
    assert main(["solve", "--instance", "unix1", "--episodes", "1", "--simulations", "30",
                 "--format", "csv", "--quiet"]) == 0
    assert capsys.readouterr().out.startswith(",".join(COLUMNS))


@pytest.mark.parametrize("argv", [
    ["solve", "--instance", "doors99"],
    ["solve", "--instance", "unix1", "--heuristic", "magic"],
    ["solve", "--instance", "unix1", "--particles", "0"],
    ["solve", "--domain", "/nonexistent/d.pddl", "--problem", "/nonexistent/p.pddl"],
    ["solve", "--instance", "unix1", "--format", "xml"],
    ["solve"],
    ["gen", "doors", "--size", "1", "--out", "/tmp"],
    ["frobnicate"],
])
def test_cli_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_cli_gen(tmp_path, capsys):
    assert main(["gen", "medpks", "--size", "3", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["medpks3-domain.pddl", "medpks3.pddl"]
    code = main(["solve", "--domain", str(tmp_path / "medpks3-domain.pddl"),
                 "--problem", str(tmp_path / "medpks3.pddl"), "--episodes", "1", "--simulations", "20", "--quiet"])
    assert code == 0
