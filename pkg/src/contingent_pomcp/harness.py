"""Experiment batches, result rows and the command line interface."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass, field, replace

from . import domains
from .heuristics import POLICIES
from .parser import ParseError, parse_files
from .pomcp import EpisodeRecord, SearchConfig, run_episode

COLUMNS = ("instance", "heuristic", "simulations", "success_rate", "avg_cost", "avg_step_secs")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    instance: str | None = None
    domain_file: str | None = None
    problem_file: str | None = None
    search: SearchConfig = field(default_factory=SearchConfig)
    episodes: int = 20
    step_limit: int = 100
    seed: int = 0
    out: str | None = None
    format: str = "json"
    # wall-clock timings make reports non-reproducible, so they are opt-in in JSON
    timing_in_records: bool = False

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError("episode count must be at least 1")
        if self.step_limit < 1:
            raise ConfigError("step limit must be at least 1")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.instance is None and (self.domain_file is None or self.problem_file is None):
            raise ConfigError("need an instance name or both a domain and a problem file")
        if self.instance is not None and self.instance not in domains.CATALOG:
            raise ConfigError(f"unknown instance {self.instance!r}; known: {sorted(domains.CATALOG)}")
        if self.search.rollout_policy not in POLICIES:
            raise ConfigError(f"unknown heuristic {self.search.rollout_policy!r}")

    @property
    def label(self) -> str:
        if self.instance is not None:
            return self.instance
        return os.path.splitext(os.path.basename(self.problem_file))[0]

    def load_problem(self):
        if self.instance is not None:
            return domains.load(self.instance)
        return parse_files(self.domain_file, self.problem_file)


@dataclass
class ResultRow:
    instance: str
    heuristic: str
    simulations: int
    success_rate: float
    avg_cost: float | None
    avg_step_secs: float
    episodes: list = field(default_factory=list)
    cost_all_capped: float | None = None

    @property
    def cost_successes_only(self):
        return self.avg_cost

    def aggregates(self) -> tuple:
        return tuple(getattr(self, c) for c in COLUMNS)

    def to_dict(self, timing: bool = True) -> dict:
        d = {c: getattr(self, c) for c in COLUMNS}
        if not timing:
            d["avg_step_secs"] = None
        d["cost_successes_only"] = self.avg_cost
        d["cost_all_capped"] = self.cost_all_capped
        d["episodes"] = [dict(e) for e in self.episodes]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ResultRow:
        return cls(
            instance=d["instance"],
            heuristic=d["heuristic"],
            simulations=d["simulations"],
            success_rate=d["success_rate"],
            avg_cost=d["avg_cost"],
            avg_step_secs=d["avg_step_secs"] if d["avg_step_secs"] is not None else 0.0,
            episodes=[dict(e) for e in d.get("episodes", [])],
            cost_all_capped=d.get("cost_all_capped"),
        )


def aggregate(instance: str, heuristic: str, simulations: int, records: list[dict],
              step_limit: int = 100, step_secs: list[float] | None = None) -> ResultRow:
    """Build a row from episode records; failures count as ``step_limit`` in the capped mean."""
    n = len(records)
    wins = [r["cost"] for r in records if r["success"]]
    secs = step_secs if step_secs is not None else [t for r in records for t in r.get("step_secs", [])]
    return ResultRow(
        instance=instance,
        heuristic=heuristic,
        simulations=simulations,
        success_rate=len(wins) / n if n else 0.0,
        avg_cost=sum(wins) / len(wins) if wins else None,
        avg_step_secs=sum(secs) / len(secs) if secs else 0.0,
        episodes=records,
        cost_all_capped=(
            sum(r["cost"] if r["success"] else step_limit for r in records) / n if n else None
        ),
    )


def run_batch(cfg: ExperimentConfig, progress=None) -> ResultRow:
    problem = cfg.load_problem()
    records = []
    secs: list[float] = []
    for i in range(cfg.episodes):
        seed = cfg.seed + i
        search = replace(cfg.search, seed=seed)
        rec: EpisodeRecord = run_episode(problem, search, random.Random(seed), cfg.step_limit, seed=seed)
        secs.extend(rec.step_secs)
        records.append(rec.to_dict(timing=cfg.timing_in_records))
        if progress is not None:
            progress(i, rec)
    return aggregate(cfg.label, cfg.search.rollout_policy, cfg.search.simulations, records,
                     cfg.step_limit, secs)


# --- serialization ------------------------------------------------------------

def emit(rows: list[ResultRow], format: str = "json", timing: bool = False) -> str:
    """Render rows; JSON leaves out wall-clock numbers unless ``timing`` so seeded runs match byte for byte."""
    if not rows:
        raise ValueError("nothing to emit")
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow(["" if v is None else v for v in r.aggregates()])
        return buf.getvalue()
    if format == "json":
        return json.dumps([r.to_dict(timing) for r in rows], indent=2, sort_keys=False) + "\n"
    raise ValueError(f"unknown format {format!r}")


def load_report(text: str, format: str = "json") -> list[ResultRow]:
    if format == "json":
        return [ResultRow.from_dict(d) for d in json.loads(text)]
    if format == "csv":
        rows = []
        for d in csv.DictReader(io.StringIO(text)):
            rows.append(ResultRow(
                instance=d["instance"],
                heuristic=d["heuristic"],
                simulations=int(d["simulations"]),
                success_rate=float(d["success_rate"]),
                avg_cost=float(d["avg_cost"]) if d["avg_cost"] else None,
                avg_step_secs=float(d["avg_step_secs"]),
            ))
        return rows
    raise ValueError(f"unknown format {format!r}")


def write_report(rows: list[ResultRow], path: str, format: str = "json", timing: bool = False) -> None:
    text = emit(rows, format, timing)
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e.strerror}") from e


# --- command line ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="contingent-pomcp")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run an experiment batch")
    s.add_argument("--instance", help=f"catalog name ({', '.join(sorted(domains.CATALOG))})")
    s.add_argument("--domain", help="domain file")
    s.add_argument("--problem", help="problem file")
    s.add_argument("--heuristic", default="hadd",
                   help="rollout policy, one of: " + ", ".join(sorted(POLICIES)))
    d = SearchConfig()
    s.add_argument("--simulations", type=int, default=d.simulations)
    s.add_argument("--timeout-ms", type=float, default=None)
    s.add_argument("--episodes", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-tree-depth", type=int, default=d.max_tree_depth)
    s.add_argument("--max-rollout-depth", type=int, default=d.max_rollout_depth)
    s.add_argument("--exploration-c", type=float, default=d.exploration_c)
    s.add_argument("--particles", type=int, default=d.particles)
    s.add_argument("--step-limit", type=int, default=100)
    s.add_argument("--strict-applicability", action="store_true")
    s.add_argument("--fresh-tree", action="store_true", help="discard the tree after each step")
    s.add_argument("--out", help="report path (stdout if omitted)")
    s.add_argument("--format", choices=("csv", "json"), default="json")
    s.add_argument("--timing", action="store_true", help="keep wall-clock timings in JSON output")
    s.add_argument("--quiet", action="store_true")

    g = sub.add_parser("gen", help="write a generated benchmark instance")
    g.add_argument("family", choices=sorted(domains.GENERATORS))
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    return ap


def config_from_args(args) -> ExperimentConfig:
    if args.instance and (args.domain or args.problem):
        raise ConfigError("use either --instance or --domain/--problem")
    try:
        search = SearchConfig(
            simulations=args.simulations,
            timeout_ms=args.timeout_ms,
            max_tree_depth=args.max_tree_depth,
            max_rollout_depth=args.max_rollout_depth,
            exploration_c=args.exploration_c,
            particles=args.particles,
            rollout_policy=args.heuristic,
            seed=args.seed,
            tree_reuse=not args.fresh_tree,
            strict_applicability=args.strict_applicability,
        )
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e)) from e
    for p in (args.domain, args.problem):
        if p is not None and not os.path.isfile(p):
            raise ConfigError(f"no such file: {p}")
    return ExperimentConfig(
        instance=args.instance,
        domain_file=args.domain,
        problem_file=args.problem,
        search=search,
        episodes=args.episodes,
        step_limit=args.step_limit,
        seed=args.seed,
        out=args.out,
        format=args.format,
        timing_in_records=args.timing,
    )


def _solve(args) -> int:
    try:
        cfg = config_from_args(args)
        cfg.load_problem()
    except (ConfigError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    def progress(i, rec):
        if not args.quiet:
            status = "ok" if rec.success else f"failed ({rec.diagnostic})"
            print(f"episode {i + 1}/{cfg.episodes} seed={rec.seed} cost={rec.cost} {status}",
                  file=sys.stderr)

    row = run_batch(cfg, progress)
    if cfg.out:
        write_report([row], cfg.out, cfg.format, cfg.timing_in_records)
    else:
        sys.stdout.write(emit([row], cfg.format, cfg.timing_in_records))
    return 0


def _gen(args) -> int:
    spec = domains.DomainSpec(args.family, args.size, args.seed)
    try:
        dom, prob = domains.generate(spec)
    except (domains.UnsupportedSize, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    stem = f"{args.family}{args.size}"
    paths = (os.path.join(args.out, f"{stem}-domain.pddl"), os.path.join(args.out, f"{stem}.pddl"))
    for path, text in zip(paths, (dom, prob)):
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    print("\n".join(paths))
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.command == "solve":
        return _solve(args)
    return _gen(args)


__all__ = [
    "COLUMNS", "ConfigError", "ExperimentConfig", "ResultRow", "aggregate", "build_parser",
    "emit", "load_report", "main", "run_batch", "write_report",
]
