"""Command-line orchestration and report emission.

Subcommands: ``split``, ``fuse``, ``eval``, ``bench``, ``report``.

Run configuration is a flat, line-oriented ``key=value`` file. Blank
lines and ``#`` comments are ignored; paths are resolved relative to
the config file. Repeated ``method.name=`` lines open method blocks;
``fusion.name=`` lines open fusion recipes used by ``fuse``. See the
README for the full grammar.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import fusion as fusion_mod
from . import store
from .errors import (
    ConfigError,
    MeirError,
    RowOrderMismatch,
    ZeroPooledVariance,
    ZeroVariance,
    ZeroVector,
)
from .fusion import FusionMode, FusionSpec
from .index import (
    Metric,
    RankedList,
    RunResult,
    TimingReport,
    build_index,
    full_scores,
    timed_search,
    timing_noise,
)
from .metrics import (
    METRIC_NAMES,
    EvalTable,
    RelevanceJudger,
    evaluate_run,
    per_query_vector,
)
from .rng import mix64
from .splitter import SplitRatios, serialize_split, stratified_split
from .stats import bootstrap_ci, cohens_d, mann_whitney_u, paired_t_test
from .store import EmbeddingSet, read_manifest

import time

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

DEFAULT_K = (1, 5, 10, 20, 50)
SCORE_FUSION_MODES = (FusionMode.SCORE_WEIGHTED, FusionMode.SCORE_ATTENTION)


# --- configuration -----------------------------------------------------

@dataclass
class MethodConfig:
    name: str
    database_matrix: Path | None = None
    database_manifest: Path | None = None
    query_matrix: Path | None = None
    query_manifest: Path | None = None
    fusion: FusionSpec | None = None

    @property
    def is_fused(self) -> bool:
        return self.fusion is not None


@dataclass
class FuseRecipe:
    name: str
    mode: FusionMode
    components: list[str]
    out_prefix: Path
    target_dim: int | None = None
    validation_report: Path | None = None


@dataclass
class RunConfig:
    seed: int = 42
    ratios: SplitRatios = field(default_factory=lambda: SplitRatios(0.5, 0.2, 0.3))
    metrics: list[Metric] = field(default_factory=lambda: [Metric.L2, Metric.IP])
    k_values: list[int] = field(default_factory=lambda: list(DEFAULT_K))
    repeats: int = 10
    n_boot: int = 1000
    level: float = 0.95
    out_dir: Path = Path(".")
    methods: list[MethodConfig] = field(default_factory=list)
    fuse_recipes: list[FuseRecipe] = field(default_factory=list)

    def echo(self) -> dict:
        """Config as emitted into report.json."""
        return {
            "seed": self.seed,
            "ratios": list(self.ratios.as_tuple()),
            "metrics": [m.value for m in self.metrics],
            "k_values": self.k_values,
            "repeats": self.repeats,
            "n_boot": self.n_boot,
            "level": self.level,
            "methods": [m.name for m in self.methods],
        }


def _parse_lines(path: Path) -> list[tuple[str, str]]:
    pairs = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        pairs.append((key.strip(), value.strip()))
    return pairs


def _metric_list(value: str) -> list[Metric]:
    if value == "both":
        return [Metric.L2, Metric.IP]
    out = []
    for tok in value.split(","):
        tok = tok.strip()
        try:
            out.append(Metric(tok))
        except ValueError:
            raise ConfigError(f"unknown metric {tok!r} (use l2, ip, or both)")
    return out


def parse_config(path) -> RunConfig:
    path = Path(path)
    base = path.parent
    cfg = RunConfig()
    current_method: dict | None = None
    current_fuse: dict | None = None

    def flush_method():
        nonlocal current_method
        if current_method is None:
            return
        m = current_method
        current_method = None
        spec = None
        if "fusion_mode" in m:
            mode = FusionMode(m["fusion_mode"])
            weights = None
            if "weights" in m:
                weights = tuple(float(w) for w in m["weights"].split(","))
            spec = FusionSpec(
                mode=mode,
                components=tuple(c.strip() for c in m["components"].split(",")),
                weights=weights,
            )
            mc = MethodConfig(name=m["name"], fusion=spec)
        else:
            required = ("database_matrix", "database_manifest",
                        "query_matrix", "query_manifest")
            missing = [k for k in required if k not in m]
            if missing:
                raise ConfigError(f"method {m['name']!r} missing keys: {missing}")
            mc = MethodConfig(
                name=m["name"],
                database_matrix=base / m["database_matrix"],
                database_manifest=base / m["database_manifest"],
                query_matrix=base / m["query_matrix"],
                query_manifest=base / m["query_manifest"],
            )
        cfg.methods.append(mc)

    def flush_fuse():
        nonlocal current_fuse
        if current_fuse is None:
            return
        f = current_fuse
        current_fuse = None
        for req in ("mode", "components", "out_prefix"):
            if req not in f:
                raise ConfigError(f"fusion {f['name']!r} missing key: {req}")
        cfg.fuse_recipes.append(FuseRecipe(
            name=f["name"],
            mode=FusionMode(f["mode"]),
            components=[c.strip() for c in f["components"].split(",")],
            out_prefix=base / f["out_prefix"],
            target_dim=int(f["target_dim"]) if "target_dim" in f else None,
            validation_report=base / f["validation_report"] if "validation_report" in f else None,
        ))

    try:
        for key, value in _parse_lines(path):
            if key == "method.name":
                flush_method()
                flush_fuse()
                current_method = {"name": value}
            elif key.startswith("method."):
                if current_method is None:
                    raise ConfigError(f"{key} before any method.name")
                current_method[key[len("method."):]] = value
            elif key == "fusion.name":
                flush_method()
                flush_fuse()
                current_fuse = {"name": value}
            elif key.startswith("fusion."):
                if current_fuse is None:
                    raise ConfigError(f"{key} before any fusion.name")
                current_fuse[key[len("fusion."):]] = value
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "ratios":
                parts = [float(x) for x in value.split(",")]
                if len(parts) != 3:
                    raise ConfigError("ratios needs 3 comma-separated fractions")
                cfg.ratios = SplitRatios(*parts)
            elif key == "metrics":
                cfg.metrics = _metric_list(value)
            elif key == "k":
                cfg.k_values = sorted(int(x) for x in value.split(","))
            elif key == "repeats":
                cfg.repeats = int(value)
            elif key == "n_boot":
                cfg.n_boot = int(value)
            elif key == "level":
                cfg.level = float(value)
            elif key == "out_dir":
                cfg.out_dir = base / value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        flush_method()
        flush_fuse()
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    names = [m.name for m in cfg.methods]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate method names")
    by_name = {m.name: m for m in cfg.methods}
    for m in cfg.methods:
        if m.is_fused:
            for comp in m.fusion.components:
                if comp not in by_name or by_name[comp].is_fused:
                    raise ConfigError(
                        f"fused method {m.name!r} needs plain component {comp!r}"
                    )
    return cfg


# --- helpers -----------------------------------------------------------

def sig6(x: float) -> float:
    """Round to 6 significant digits for diffable report output."""
    return float(f"{float(x):.6g}")


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & ((1 << 64) - 1)
    return h


def derive_seed(seed: int, label: str) -> int:
    """Stable per-purpose seed derivation."""
    return mix64(seed ^ _fnv1a64(label))


@dataclass
class LoadedMethod:
    config: MethodConfig
    database: EmbeddingSet | None = None
    queries: EmbeddingSet | None = None


def _load_methods(cfg: RunConfig) -> dict[str, LoadedMethod]:
    loaded = {}
    for m in cfg.methods:
        lm = LoadedMethod(m)
        if not m.is_fused:
            lm.database = store.load_embedding_set(m.database_matrix, m.database_manifest)
            lm.queries = store.load_embedding_set(m.query_matrix, m.query_manifest)
            store.assert_disjoint(lm.queries, lm.database)
        loaded[m.name] = lm
    return loaded


def _prepared(es: EmbeddingSet, metric: Metric) -> EmbeddingSet:
    """L2-normalize ahead of inner-product indexing, pass through for L2."""
    if metric == Metric.IP and not es.normalized:
        return store.l2_normalize(es)
    return es


def _fused_run(method: MethodConfig, loaded: dict[str, LoadedMethod],
               metric: Metric, k: int, repeats: int) -> tuple[RunResult, TimingReport]:
    """Score-level fusion retrieval with per-query repeat timing."""
    comps = [loaded[c] for c in method.fusion.components]
    db_ids = comps[0].database.ids
    query_ids = comps[0].queries.ids
    for c in comps[1:]:
        if c.database.ids != db_ids:
            raise RowOrderMismatch(
                f"method {method.name}: component databases disagree on id order"
            )
        if c.queries.ids != query_ids:
            raise RowOrderMismatch(
                f"method {method.name}: component queries disagree on id order"
            )
    indexes = [build_index(_prepared(c.database, metric), metric) for c in comps]
    qsets = [_prepared(c.queries, metric) for c in comps]

    def run_query(qi: int) -> RankedList:
        score_vectors = []
        for idx, qs in zip(indexes, qsets):
            scores = full_scores(idx, qs.matrix[qi])
            if metric == Metric.L2:
                scores = -scores  # orient larger-is-more-similar
            score_vectors.append(scores)
        return fusion_mod.score_fusion(query_ids[qi], score_vectors, db_ids,
                                       method.fusion, k)

    lists = []
    timings_ns: list[list[int]] = []
    for qi in range(len(query_ids)):
        samples = []
        result = None
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            result = run_query(qi)
            t1 = time.perf_counter_ns()
            samples.append(max(t1 - t0, 1))
        lists.append(result)
        timings_ns.append(samples)

    flat = np.array([s for q in timings_ns for s in q], dtype=np.float64) / 1e6
    report = TimingReport(
        mean_ms=float(flat.mean()),
        std_ms=float(flat.std(ddof=1)) if flat.size > 1 else 0.0,
        noise_ms=timing_noise(max(repeats, 2)),
        repeats=repeats,
        per_query_means_ms=[float(np.mean(q) / 1e6) for q in timings_ns],
    )
    run = RunResult(method_name=method.name, metric=metric, k_max=k,
                    lists=lists, timings_ns=timings_ns)
    return run, report


def _evaluate_method(method: MethodConfig, loaded: dict[str, LoadedMethod],
                     cfg: RunConfig) -> dict:
    """All metrics, bootstraps, and timing for one method."""
    lm = loaded[method.name]
    per_metric = []
    tables: dict[Metric, EvalTable] = {}
    timing = None
    k_max = max(cfg.k_values)

    for metric in cfg.metrics:
        if method.is_fused:
            ref = loaded[method.fusion.components[0]]
            database, queries = ref.database, ref.queries
            run, timing = _fused_run(method, loaded, metric, k_max, cfg.repeats)
        else:
            database = _prepared(lm.database, metric)
            queries = _prepared(lm.queries, metric)
            index = build_index(database, metric)
            run, timing = timed_search(index, queries, k_max,
                                       repeats=cfg.repeats, method_name=method.name)
        judger = RelevanceJudger.from_database(database)
        query_labels = dict(zip(queries.ids, queries.labels))
        table = evaluate_run(run, query_labels, judger, cfg.k_values)
        table.method_name = method.name
        tables[metric] = table

        boot = {}
        for name in METRIC_NAMES:
            boot[name] = {}
            for k in cfg.k_values:
                seed = derive_seed(cfg.seed, f"{method.name}/{metric.value}/{name}@{k}")
                r = bootstrap_ci(per_query_vector(table, name, k),
                                 n_boot=cfg.n_boot, level=cfg.level, seed=seed)
                boot[name][str(k)] = {
                    "point_mean": sig6(r.point_mean),
                    "ci_low": sig6(r.ci_low),
                    "ci_high": sig6(r.ci_high),
                    "n_boot": r.n_boot,
                    "level": r.level,
                    "seed": r.seed,
                }
        per_metric.append({
            "metric": metric.value,
            "n": table.n_queries,
            "aggregates": {
                name: {str(k): sig6(table.aggregates[name][k]) for k in cfg.k_values}
                for name in METRIC_NAMES
            },
            "per_class": {
                str(c): {
                    name: {str(k): sig6(table.per_class[c][name][k]) for k in cfg.k_values}
                    for name in METRIC_NAMES
                }
                for c in sorted(table.per_class)
            },
            "bootstrap": boot,
        })

    n_db = (loaded[method.fusion.components[0]].database.n if method.is_fused
            else lm.database.n)
    n_q = (loaded[method.fusion.components[0]].queries.n if method.is_fused
           else lm.queries.n)
    entry = {
        "method_name": method.name,
        "n_database": n_db,
        "n_queries": n_q,
        "per_metric": per_metric,
        "timing": {
            "mean_ms": sig6(timing.mean_ms),
            "std_ms": sig6(timing.std_ms),
            "noise_ms": sig6(timing.noise_ms),
            "repeats": timing.repeats,
        },
    }
    return entry, tables


def _stats_k(cfg: RunConfig) -> int:
    return 10 if 10 in cfg.k_values else cfg.k_values[-1]


def _pairwise_tests(cfg: RunConfig, all_tables: dict[str, dict[Metric, EvalTable]]) -> list[dict]:
    k = _stats_k(cfg)
    rows = []
    names = [m.name for m in cfg.methods]
    for metric in cfg.metrics:
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                va = per_query_vector(all_tables[a][metric], "precision", k)
                vb = per_query_vector(all_tables[b][metric], "precision", k)
                try:
                    t_res = paired_t_test(va, vb)
                    t_stat, p_t = sig6(t_res.statistic), sig6(t_res.p_value)
                except ZeroVariance:
                    t_stat, p_t = None, None
                u_res = mann_whitney_u(va, vb)
                try:
                    d = sig6(cohens_d(va, vb))
                except ZeroPooledVariance:
                    d = None
                rows.append({
                    "metric": metric.value,
                    "a": a,
                    "b": b,
                    "k": k,
                    "t": t_stat,
                    "p_t": p_t,
                    "U": sig6(u_res.statistic),
                    "p_u": sig6(u_res.p_value),
                    "d": d,
                })
    return rows


def _write_method_csvs(out_dir: Path, all_tables: dict[str, dict[Metric, EvalTable]]) -> None:
    for name, by_metric in all_tables.items():
        for metric, table in by_metric.items():
            path = out_dir / f"{name}_{metric.value}.csv"
            with open(path, "w", newline="") as f:
                w = csv.writer(f)
                w.writerow(["query_id", "query_label", "k", "precision", "recall", "ndcg"])
                for row in table.per_query:
                    for k in table.k_values:
                        w.writerow([
                            row.query_id, row.query_label, k,
                            f"{row.values['precision'][k]:.6g}",
                            f"{row.values['recall'][k]:.6g}",
                            f"{row.values['ndcg'][k]:.6g}",
                        ])


# --- commands ----------------------------------------------------------

def cmd_split(args) -> int:
    manifest = read_manifest(args.manifest)
    ratios = SplitRatios(*(float(x) for x in args.ratios.split(",")))
    split = stratified_split(manifest, ratios, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_split(split))

    print(f"{'class':>6} {'train':>7} {'val':>7} {'test':>7} {'total':>7}")
    totals = [0, 0, 0]
    for label in sorted(split.per_class_counts):
        c = split.per_class_counts[label]
        totals = [t + x for t, x in zip(totals, c)]
        print(f"{label:>6} {c[0]:>7} {c[1]:>7} {c[2]:>7} {sum(c):>7}")
    print(f"{'total':>6} {totals[0]:>7} {totals[1]:>7} {totals[2]:>7} {sum(totals):>7}")
    print(f"wrote {out}")
    return 0


def _resolve_auto_components(recipe: FuseRecipe, cfg: RunConfig) -> list[str]:
    if recipe.validation_report is None:
        raise ConfigError(
            f"fusion {recipe.name!r}: components=auto needs validation_report="
        )
    report = json.loads(recipe.validation_report.read_text())
    scores = {}
    for entry in report["methods"]:
        pm = entry["per_metric"][0]
        k_key = "10" if "10" in pm["aggregates"]["precision"] else \
            sorted(pm["aggregates"]["precision"], key=int)[-1]
        scores[entry["method_name"]] = pm["aggregates"]["precision"][k_key]
    a, b = fusion_mod.select_best_two(scores)
    return [a, b]


def cmd_fuse(args) -> int:
    cfg = parse_config(args.config)
    recipe = next((r for r in cfg.fuse_recipes if r.name == args.name), None)
    if recipe is None:
        raise ConfigError(f"no fusion recipe named {args.name!r} in config")

    components = recipe.components
    if components == ["auto"]:
        components = _resolve_auto_components(recipe, cfg)
        print(f"auto-selected components: {components[0]}, {components[1]}")

    by_name = {m.name: m for m in cfg.methods}
    for comp in components:
        if comp not in by_name or by_name[comp].is_fused:
            raise ConfigError(f"fusion component {comp!r} is not a plain method")
    db_sets = [store.load_embedding_set(by_name[c].database_matrix,
                                        by_name[c].database_manifest) for c in components]
    q_sets = [store.load_embedding_set(by_name[c].query_matrix,
                                       by_name[c].query_manifest) for c in components]

    if recipe.mode == FusionMode.CONCAT:
        db_out = fusion_mod.concat_features(db_sets)
        q_out = fusion_mod.concat_features(q_sets)
    elif recipe.mode == FusionMode.FEATURE_AVERAGE:
        db_out = fusion_mod.average_features(db_sets)
        q_out = fusion_mod.average_features(q_sets)
    elif recipe.mode == FusionMode.PCA:
        db_in = fusion_mod.concat_features(db_sets) if len(db_sets) > 1 else db_sets[0]
        q_in = fusion_mod.concat_features(q_sets) if len(q_sets) > 1 else q_sets[0]
        target = recipe.target_dim or min(1024, min(db_in.n - 1, db_in.dim))
        model = fusion_mod.pca_fit(db_in, target)
        db_out = fusion_mod.pca_project(model, db_in)
        q_out = fusion_mod.pca_project(model, q_in)
        prefix = recipe.out_prefix
        prefix.parent.mkdir(parents=True, exist_ok=True)
        fusion_mod.save_pca_model(model, f"{prefix}_pca.bin", f"{prefix}_pca.json")
    else:
        raise ConfigError(
            f"fusion recipe mode {recipe.mode.value} is score-level; "
            "declare it as a method block instead"
        )

    prefix = recipe.out_prefix
    prefix.parent.mkdir(parents=True, exist_ok=True)
    store.save_embedding_set(db_out, f"{prefix}_db.meir", f"{prefix}_db.csv")
    store.save_embedding_set(q_out, f"{prefix}_q.meir", f"{prefix}_q.csv")
    print(f"wrote {prefix}_db.meir ({db_out.n}x{db_out.dim}) "
          f"and {prefix}_q.meir ({q_out.n}x{q_out.dim})")
    return 0


def run_eval(cfg: RunConfig) -> dict:
    """Full evaluation pipeline; returns the report document."""
    loaded = _load_methods(cfg)
    method_entries = []
    all_tables: dict[str, dict[Metric, EvalTable]] = {}
    for method in cfg.methods:
        entry, tables = _evaluate_method(method, loaded, cfg)
        method_entries.append(entry)
        all_tables[method.name] = tables

    pairwise = _pairwise_tests(cfg, all_tables) if len(cfg.methods) > 1 else []
    report = {
        "config_echo": cfg.echo(),
        "methods": method_entries,
        "pairwise_tests": pairwise,
        "n_pairwise_tests": len(pairwise),
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    return report, all_tables


def cmd_eval(args) -> int:
    cfg = parse_config(args.config)
    if args.out_dir:
        cfg.out_dir = Path(args.out_dir)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.metric:
        cfg.metrics = _metric_list(args.metric)
    if args.k:
        cfg.k_values = sorted(int(x) for x in args.k.split(","))

    report, all_tables = run_eval(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    report_path = cfg.out_dir / "report.json"
    report_path.write_text(json.dumps(report, indent=2) + "\n")
    _write_method_csvs(cfg.out_dir, all_tables)

    n_q = report["methods"][0]["n_queries"] if report["methods"] else 0
    print(f"evaluated {len(cfg.methods)} methods x {n_q} queries "
          f"({n_q * len(cfg.methods)} retrievals per metric)")
    print(f"wrote {report_path}")
    return 0


def cmd_bench(args) -> int:
    cfg = parse_config(args.config)
    if args.out_dir:
        cfg.out_dir = Path(args.out_dir)
    loaded = _load_methods(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / "bench.csv"
    k_max = max(cfg.k_values)
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "metric", "mean_ms", "std_ms", "noise_ms", "repeats"])
        for method in cfg.methods:
            for metric in cfg.metrics:
                if method.is_fused:
                    _, timing = _fused_run(method, loaded, metric, k_max, cfg.repeats)
                else:
                    lm = loaded[method.name]
                    index = build_index(_prepared(lm.database, metric), metric)
                    _, timing = timed_search(index, _prepared(lm.queries, metric),
                                             k_max, repeats=cfg.repeats,
                                             method_name=method.name)
                w.writerow([method.name, metric.value,
                            f"{timing.mean_ms:.6g}", f"{timing.std_ms:.6g}",
                            f"{timing.noise_ms:.6g}", timing.repeats])
    print(f"wrote {out_path}")
    return 0


def cmd_report(args) -> int:
    report = json.loads(Path(args.report).read_text())
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.report).parent
    out_dir.mkdir(parents=True, exist_ok=True)

    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "metric", "quality_metric", "k", "mean",
                    "ci_low", "ci_high", "mean_search_ms"])
        for entry in report["methods"]:
            for pm in entry["per_metric"]:
                for name, by_k in pm["aggregates"].items():
                    for k, val in by_k.items():
                        b = pm["bootstrap"][name][k]
                        w.writerow([entry["method_name"], pm["metric"], name, k,
                                    val, b["ci_low"], b["ci_high"],
                                    entry["timing"]["mean_ms"]])

    md_path = out_dir / "summary.md"
    lines = ["| method | metric | P@10 | R@10 | NDCG@10 | mean ms |",
             "|---|---|---|---|---|---|"]
    for entry in report["methods"]:
        for pm in entry["per_metric"]:
            agg = pm["aggregates"]
            k = "10" if "10" in agg["precision"] else sorted(agg["precision"], key=int)[-1]
            lines.append(
                f"| {entry['method_name']} | {pm['metric']} "
                f"| {agg['precision'][k]} | {agg['recall'][k]} | {agg['ndcg'][k]} "
                f"| {entry['timing']['mean_ms']} |"
            )
    md_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {summary_path} and {md_path}")
    return 0


# --- entry point -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meir",
        description="Categorical retrieval evaluation engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="stratified train/val/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--ratios", default="0.5,0.2,0.3")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("fuse", help="build fused embedding files")
    p.add_argument("--config", required=True)
    p.add_argument("--name", required=True, help="fusion recipe name")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="full evaluation pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--metric", default=None, help="l2, ip, or both")
    p.add_argument("--k", default=None, help="comma-separated k list")
    p.add_argument("--parallel", action="store_true",
                   help="reserved; evaluation currently runs sequentially")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="timing-only benchmark")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="re-render report.json as CSV/markdown")
    p.add_argument("--report", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ZeroVariance, ZeroPooledVariance, ZeroVector) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MeirError as exc:
        print(f"data validation error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
