"""Command-line pipeline: pool, serve, simulate, report, plus small utilities.

All commands are deterministic given their config and master seed; the seed
can be set in the config file, via ALTEREVAL_SEED, or with --seed (highest
precedence). Exit codes: 0 success, 2 usage/input error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import evaluation, plots, pooling
from .catalog import Catalog, load_catalog, nearest_neighbors
from .errors import AlterEvalError, InputError, ParseError
from .judgments import JudgmentSet, cohens_kappa, dataset_stats, load_qrels
from .rng import substream, substream_seed
from .simulate import (
    SIMBASE,
    SyntheticCritiquer,
    make_session,
    parse_simulator_spec,
    uses_alternatives,
)
from .systems import ReplaySystem, parse_sut_spec

DEFAULT_SEED = 1729
DEFAULT_TOLERANCE_GRID = [1, 2, 3, 4]
DEFAULT_P_SWITCH_GRID = [0.55, 0.65, 0.75, 0.85, 0.95]
SEED_ENV_VAR = "ALTEREVAL_SEED"


@dataclass
class RunConfig:
    """One archivable JSON document describing an experiment."""

    catalog: str | None = None
    qrels: str | None = None
    pools: str | None = None
    out_dir: str = "out"
    sut_spec: str = "greedy:eta=1.0"
    simulator_specs: list[str] | None = None
    tolerance_grid: list[int] = field(default_factory=lambda: list(DEFAULT_TOLERANCE_GRID))
    p_switch_grid: list[float] = field(default_factory=lambda: list(DEFAULT_P_SWITCH_GRID))
    k: int = 100
    cutoff: int = 10
    max_turns: int = 10
    master_seed: int = DEFAULT_SEED
    noise_sigma: float = 0.1
    workers: int = 1
    max_switches: int | None = None
    targets: list[str] | None = None
    n_sample: int = 200
    strata: int = 4
    nn_quota: int = 4
    retrieved_quota: int = 3
    pool_systems: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if not self.tolerance_grid or not self.p_switch_grid:
            raise InputError("tolerance and p_switch grids must be non-empty")
        for name in ("k", "cutoff", "max_turns", "strata"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.workers < 1:
            raise InputError(f"workers must be >= 1, got {self.workers}")

    def simulator_grid(self) -> list[str]:
        if self.simulator_specs:
            return list(self.simulator_specs)
        specs = [SIMBASE]
        specs += [f"metasimtol:tol={tol}" for tol in self.tolerance_grid]
        specs += [
            f"metasimprob:tol={tol},p={p}" for tol in self.tolerance_grid for p in self.p_switch_grid
        ]
        return specs


def load_config(path: str | None, overrides: dict) -> RunConfig:
    doc: dict = {}
    if path:
        config_path = Path(path)
        if not config_path.exists():
            raise InputError(f"config file not found: {config_path}")
        with open(config_path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON config: {exc}", config_path) from None
        unknown = set(doc) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            doc["master_seed"] = int(env_seed)
        except ValueError:
            raise InputError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from None
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**doc)


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "-", text).strip("-")


def _atomic_write(path: Path, write_fn) -> None:
    tmp = path.with_name(path.name + ".tmp")
    write_fn(tmp)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# pool

def _read_ranking_file(path) -> dict[str, tuple[list[str], list[float]]]:
    """JSONL of {target_id, ranking, scores?} keyed by target."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"ranking input not found: {path}")
    out: dict[str, tuple[list[str], list[float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                target = str(doc["target_id"])
                ranking = [str(item) for item in doc["ranking"]]
                scores = [float(s) for s in doc.get("scores", [])]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad ranking record: {exc}", path, lineno) from None
            if target in out:
                raise ParseError(f"duplicate target {target!r}", path, lineno)
            out[target] = (ranking, scores)
    return out


def cmd_pool(args) -> int:
    cfg = load_config(args.config, _config_overrides(args))
    if not cfg.catalog:
        raise InputError("pool needs a catalog (config 'catalog' or --catalog)")
    if not cfg.pool_systems:
        raise InputError("pool needs per-system ranking inputs (config 'pool_systems')")
    catalog = load_catalog(cfg.catalog)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results: dict[str, dict[str, tuple[list[str], list[float]]]] = {}
    nn_files: dict[str, dict[str, tuple[list[str], list[float]]]] = {}
    for system in cfg.pool_systems:
        name = system.get("name")
        if not name or "results" not in system:
            raise InputError(f"pool system entries need 'name' and 'results': {system}")
        results[name] = _read_ranking_file(system["results"])
        if system.get("nn"):
            nn_files[name] = _read_ranking_file(system["nn"])

    eligible = sorted(
        set(catalog.ids()).intersection(*(set(rows) for rows in results.values()))
    )
    if not eligible:
        raise InputError("no targets appear in the catalog and every system's results")

    difficulties = []
    for target in eligible:
        per_system = []
        for name in results:
            _, scores = results[name][target]
            if len(scores) < 2:
                raise InputError(f"system {name!r} has fewer than 2 scores for target {target!r}")
            per_system.append(pooling.difficulty_score(scores[:100]))
        difficulties.append((target, sum(per_system) / len(per_system)))

    n = min(cfg.n_sample, len(eligible)) if args.allow_fewer else cfg.n_sample
    sampled = pooling.stratified_sample(
        difficulties, n, cfg.strata, substream_seed(cfg.master_seed, "pool")
    )

    pools = []
    for target in sampled:
        shared_nn: list[str] | None = None  # one embedding space: computed once per target
        per_system_nn = {}
        for name in results:
            if name in nn_files:
                if target not in nn_files[name]:
                    raise InputError(f"nn file for system {name!r} is missing target {target!r}")
                per_system_nn[name] = nn_files[name][target][0]
            else:
                if shared_nn is None:
                    shared_nn = [
                        item for item, _ in nearest_neighbors(catalog, target, len(catalog) - 1)
                    ]
                per_system_nn[name] = shared_nn
        per_system_results = {name: results[name][target][0] for name in results}
        pools.append(
            pooling.build_pool(target, per_system_nn, per_system_results, cfg.nn_quota, cfg.retrieved_quota)
        )

    pools_path = out_dir / "pools.jsonl"
    _atomic_write(pools_path, lambda tmp: pooling.write_pools(pools, tmp))
    manifest = {
        "master_seed": cfg.master_seed,
        "substream": "pool",
        "n_sample": n,
        "strata": cfg.strata,
        "nn_quota": cfg.nn_quota,
        "retrieved_quota": cfg.retrieved_quota,
        "n_eligible": len(eligible),
        "systems": sorted(results),
        "targets": sampled,
    }
    manifest_path = out_dir / "pool_manifest.json"
    _atomic_write(
        manifest_path,
        lambda tmp: tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"),
    )
    print(f"wrote {len(pools)} pools of {cfg.nn_quota * len(results) + cfg.retrieved_quota * len(results)} "
          f"candidates to {pools_path}")
    print(f"wrote sampling manifest to {manifest_path}")
    return 0


# ---------------------------------------------------------------------------
# simulate

def _dialog_targets(cfg: RunConfig, catalog: Catalog, judgments: JudgmentSet) -> list[str]:
    if cfg.targets:
        targets = list(cfg.targets)
    elif judgments.entries:
        targets = judgments.targets()
    else:
        targets = catalog.ids()
    missing = [t for t in targets if t not in catalog]
    if missing:
        raise InputError(f"targets not in catalog: {missing[:5]}")
    return targets


def _run_one_dialog(cfg, catalog, judgments, sim_spec, run_id, target):
    sut = parse_sut_spec(cfg.sut_spec, cfg.k)
    if isinstance(sut, ReplaySystem):
        sut = sut.bind(target)
    critiquer = SyntheticCritiquer(
        catalog, cfg.noise_sigma, seed=substream_seed(cfg.master_seed, f"dialog/{target}")
    )
    session = make_session(
        sim_spec,
        critiquer,
        judgments,
        catalog,
        target,
        user_id=f"user/{target}",
        rng=substream(cfg.master_seed, f"dialog/{target}"),
        max_switches=cfg.max_switches,
    )
    return evaluation.run_dialog(
        sut,
        session,
        judgments,
        catalog,
        target,
        max_turns=cfg.max_turns,
        include_alternatives=uses_alternatives(sim_spec),
        run_id=run_id,
        seed=cfg.master_seed,
        sut_rng=substream(cfg.master_seed, f"sut/{target}"),
    )


def run_simulation_grid(cfg: RunConfig) -> dict[str, evaluation.RunReport]:
    """Run every (sut, simulator) pair in the grid; write transcripts + reports."""
    if not cfg.catalog:
        raise InputError("simulate needs a catalog (config 'catalog' or --catalog)")
    catalog = load_catalog(cfg.catalog)
    specs = cfg.simulator_grid()
    if any(uses_alternatives(spec) for spec in specs) and not cfg.qrels:
        raise InputError("meta simulator specs need a qrels file (config 'qrels' or --qrels)")
    judgments = load_qrels(cfg.qrels) if cfg.qrels else JudgmentSet(category=catalog.category)
    targets = _dialog_targets(cfg, catalog, judgments)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sut_slug = slug(cfg.sut_spec)

    reports: dict[str, evaluation.RunReport] = {}
    for sim_spec in specs:
        run_id = f"{sut_slug}/{slug(sim_spec)}"
        runner = lambda target: _run_one_dialog(cfg, catalog, judgments, sim_spec, run_id, target)
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                transcripts = list(pool.map(runner, targets))
        else:
            transcripts = [runner(target) for target in targets]
        report = evaluation.aggregate(
            transcripts,
            judgments,
            uses_alternatives(sim_spec),
            cutoff=cfg.cutoff,
            max_turns=cfg.max_turns,
            sut_spec=cfg.sut_spec,
        )
        _atomic_write(
            out_dir / f"transcripts_{sut_slug}_{slug(sim_spec)}.jsonl",
            lambda tmp: evaluation.write_transcripts(transcripts, tmp),
        )
        _atomic_write(
            out_dir / f"report_{sut_slug}_{slug(sim_spec)}.csv",
            lambda tmp: evaluation.write_report(report, tmp),
        )
        reports[sim_spec] = report

    _write_best_threshold_summary(reports, cfg, out_dir, sut_slug)
    manifest = {
        "master_seed": cfg.master_seed,
        "sut_spec": cfg.sut_spec,
        "simulator_specs": specs,
        "n_targets": len(targets),
        "substreams": ["dialog/<target>", "sut/<target>"],
        "config": asdict(cfg),
    }
    _atomic_write(
        out_dir / "run_manifest.json",
        lambda tmp: tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"),
    )
    return reports


def _write_best_threshold_summary(reports, cfg, out_dir: Path, sut_slug: str) -> None:
    """Per tolerance level, the best p_switch per metric at the final turn."""
    prob_reports: dict[int, list[tuple[float, evaluation.RunReport]]] = {}
    for spec, report in reports.items():
        parsed = parse_simulator_spec(spec)
        if parsed["kind"] == "metasimprob":
            prob_reports.setdefault(parsed["tolerance"], []).append((parsed["p_switch"], report))
    if not prob_reports:
        return
    lines = ["sut,tolerance,metric,best_p,value,turn"]
    for tolerance in sorted(prob_reports):
        candidates = sorted(prob_reports[tolerance])
        for metric in ("sr1", "ndcg10", "mrr10"):
            best_p, best_value, turn = None, -1.0, None
            for p, report in candidates:
                row = report.per_turn[-1]
                value = getattr(row, metric)
                if value > best_value:
                    best_p, best_value, turn = p, value, row.turn
            lines.append(f"{cfg.sut_spec},{tolerance},{metric},{best_p},{best_value!r},{turn}")
    path = out_dir / f"summary_{sut_slug}_metasimprob_best.csv"
    _atomic_write(path, lambda tmp: tmp.write_text("\n".join(lines) + "\n", encoding="utf-8"))


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, _config_overrides(args))
    reports = run_simulation_grid(cfg)
    print(f"wrote {len(reports)} runs to {cfg.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# report

def cmd_report(args) -> int:
    reports_dir = Path(args.reports_dir)
    paths = sorted(reports_dir.glob("report_*.csv"))
    if not paths:
        raise InputError(f"no report_*.csv files under {reports_dir}")
    reports = [evaluation.read_report(p) for p in paths]
    by_sut: dict[str, list[evaluation.RunReport]] = {}
    for report in reports:
        by_sut.setdefault(report.sut_spec, []).append(report)

    out_dir = Path(args.out_dir) if args.out_dir else reports_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    for sut_spec, group in sorted(by_sut.items()):
        base = [r for r in group if r.simulator_spec == SIMBASE]
        metas = sorted((r for r in group if r.simulator_spec != SIMBASE), key=lambda r: r.simulator_spec)
        if not base:
            raise InputError(f"no {SIMBASE} report for sut {sut_spec!r}; cannot compute improvement")
        if not metas:
            raise InputError(f"no meta-simulator reports for sut {sut_spec!r}")
        turn = args.turn or base[0].final_turn
        _emit_consolidated(base[0], metas, turn, out_dir, sut_spec)
        _emit_curves(group, out_dir, sut_spec)
        if not args.no_figures:
            plots.render_metric_figures(group, out_dir, slug(sut_spec))
    return 0


def _emit_consolidated(base, metas, turn, out_dir: Path, sut_spec: str) -> None:
    rows = [(r.simulator_spec, r.row(turn)) for r in [base, *metas]]
    improv = {
        metric: evaluation.improvement(base, metas, metric, turn) for metric in ("ndcg10", "mrr10")
    }
    csv_lines = ["simulator,sr1,ndcg10,mrr10"]
    for spec, row in rows:
        csv_lines.append(f"{spec},{row.sr1!r},{row.ndcg10!r},{row.mrr10!r}")
    csv_lines.append(f"% Improv.,,{improv['ndcg10']!r},{improv['mrr10']!r}")
    sut_slug = slug(sut_spec)
    (out_dir / f"table_{sut_slug}.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")

    width = max(len(spec) for spec, _ in rows) + 2
    text_lines = [
        f"sut={sut_spec}  turn={turn}",
        f"{'simulator':<{width}}{'SR@1':>8}{'NDCG@10':>10}{'MRR@10':>9}",
    ]
    for spec, row in rows:
        text_lines.append(f"{spec:<{width}}{row.sr1:>8.3f}{row.ndcg10:>10.3f}{row.mrr10:>9.3f}")
    text_lines.append(
        f"{'% Improv.':<{width}}{'':>8}{improv['ndcg10']:>10.2f}{improv['mrr10']:>9.2f}"
    )
    text = "\n".join(text_lines) + "\n"
    (out_dir / f"table_{sut_slug}.txt").write_text(text, encoding="utf-8")
    print(text, end="")


def _emit_curves(group, out_dir: Path, sut_spec: str) -> None:
    lines = [",".join(evaluation.REPORT_HEADER)]
    ordered = sorted(group, key=lambda r: (r.simulator_spec != SIMBASE, r.simulator_spec))
    for report in ordered:
        for row in report.per_turn:
            lines.append(
                f"{report.simulator_spec},{report.sut_spec},{row.turn},"
                f"{row.sr1!r},{row.ndcg10!r},{row.mrr10!r},{report.n_targets}"
            )
    (out_dir / f"curves_{slug(sut_spec)}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# small utilities

def cmd_power(args) -> int:
    print(f"{'rho':>8} {'cohens_d':>9} {'n':>6}")
    for rho in args.rho:
        d = pooling.correlation_to_cohens_d(rho)
        n = pooling.required_sample_size(pooling.PowerSpec(rho=rho, alpha=args.alpha, power=args.power))
        print(f"{rho:>8.3f} {d:>9.4f} {n:>6d}")
    return 0


def cmd_kappa(args) -> int:
    def read_labels(path):
        text = Path(path).read_text(encoding="utf-8")
        return text.split()

    value = cohens_kappa(read_labels(args.file_a), read_labels(args.file_b))
    print(f"kappa {value:.4f}")
    return 0


def cmd_stats(args) -> int:
    judgments = load_qrels(args.qrels)
    if args.catalog:
        n_target = len(load_catalog(args.catalog))
    elif args.n_target is not None:
        n_target = args.n_target
    else:
        n_target = len(judgments.entries)
    stats = dataset_stats(judgments, n_target, args.pool_size)
    print(f"category                  {judgments.category}")
    print(f"n_target                  {stats.n_target}")
    print(f"n_assessed                {stats.n_assessed}")
    print(f"n_relevant                {stats.n_relevant}")
    print(f"avg_relevant              {stats.avg_relevant:.2f}")
    print(f"n_annotations_per_target  {stats.n_annotations_per_target}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import JudgingService, create_app

    pool_files: dict[str, str] = {}
    for spec in args.pools:
        if "=" in spec:
            category, path = spec.split("=", 1)
        else:
            category, path = Path(spec).stem, spec
        pool_files[category] = path
    service = JudgingService.from_pool_files(
        pool_files, store_path=args.store, min_votes=args.min_votes
    )
    app = create_app(service, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# parser wiring

def _config_overrides(args) -> dict:
    keys = (
        "catalog",
        "qrels",
        "pools",
        "out_dir",
        "sut_spec",
        "k",
        "cutoff",
        "max_turns",
        "master_seed",
        "noise_sigma",
        "workers",
        "n_sample",
        "strata",
        "simulator_specs",
    )
    return {key: getattr(args, key, None) for key in keys}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--catalog", help="embedding file path")
    parser.add_argument("--qrels", help="qrels file path")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument("--sut", dest="sut_spec", help="system spec, e.g. greedy:eta=1.0")
    parser.add_argument("--sim", dest="simulator_specs", action="append",
                        help="simulator spec (repeatable); default is the full grid")
    parser.add_argument("--seed", dest="master_seed", type=int, help="master seed")
    parser.add_argument("--k", type=int, help="ranking depth per turn")
    parser.add_argument("--cutoff", type=int, help="metric cutoff")
    parser.add_argument("--max-turns", dest="max_turns", type=int, help="dialog turn limit")
    parser.add_argument("--noise-sigma", dest="noise_sigma", type=float, help="critique noise sigma")
    parser.add_argument("--workers", type=int, help="parallel dialog workers")
    parser.add_argument("--n", dest="n_sample", type=int, help="targets to sample when pooling")
    parser.add_argument("--strata", type=int, help="difficulty bands when pooling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="altereval",
        description="Evaluate conversational recommenders against simulated users with alternatives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pool = sub.add_parser("pool", help="sample targets and build judging pools")
    _add_config_flags(p_pool)
    p_pool.add_argument("--allow-fewer", action="store_true",
                        help="sample min(n, eligible targets) instead of failing")
    p_pool.set_defaults(func=cmd_pool)

    p_sim = sub.add_parser("simulate", help="run the simulator grid and write transcripts/reports")
    _add_config_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("report", help="consolidate reports into tables, curves, and figures")
    p_rep.add_argument("reports_dir", help="directory containing report_*.csv files")
    p_rep.add_argument("--out", dest="out_dir", help="output directory (default: reports dir)")
    p_rep.add_argument("--turn", type=int, help="evaluation turn (default: final turn)")
    p_rep.add_argument("--no-figures", action="store_true", help="skip PNG figure rendering")
    p_rep.set_defaults(func=cmd_report)

    p_power = sub.add_parser("power", help="sample-size estimate for a correlation effect")
    p_power.add_argument("--rho", type=float, action="append", required=True,
                         help="correlation effect size (repeatable)")
    p_power.add_argument("--alpha", type=float, default=0.05)
    p_power.add_argument("--power", type=float, default=0.90)
    p_power.set_defaults(func=cmd_power)

    p_kappa = sub.add_parser("kappa", help="Cohen's kappa between two label files")
    p_kappa.add_argument("file_a")
    p_kappa.add_argument("file_b")
    p_kappa.set_defaults(func=cmd_kappa)

    p_stats = sub.add_parser("stats", help="judgment-collection statistics for a qrels file")
    p_stats.add_argument("--qrels", required=True)
    p_stats.add_argument("--catalog", help="catalog file; its size is the target count")
    p_stats.add_argument("--n-target", dest="n_target", type=int, help="target count override")
    p_stats.add_argument("--pool-size", dest="pool_size", type=int, default=14)
    p_stats.set_defaults(func=cmd_stats)

    p_serve = sub.add_parser("serve", help="run the judging HTTP service")
    p_serve.add_argument("--pools", action="append", required=True,
                         help="category=pools.jsonl (repeatable)")
    p_serve.add_argument("--store", required=True, help="append-only annotation store (JSONL)")
    p_serve.add_argument("--ui-dir", dest="ui_dir", help="static judging UI directory")
    p_serve.add_argument("--min-votes", dest="min_votes", type=int, default=1)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AlterEvalError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - internal errors
        traceback.print_exc()
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
