#!/usr/bin/env python3
"""
Command-line interface: train, stream, eval, snapshots and stats.

Every command writes its outputs under --out and prints the run manifest (all
resolved settings, derived values and per-stage wall times) as JSON on stdout.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
"""

import argparse
import json
import logging
import sys
import time
import uuid
from contextlib import contextmanager
from dataclasses import fields
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence

import pandas as pd

from apps.ctdne import __version__
from apps.ctdne.config import resolve_config
from apps.ctdne.edge_stream import replay_stream
from apps.ctdne.embedder import save_embeddings, train
from apps.ctdne.errors import ConfigError, CTDNEError, DataError, EmptyGraphError, InvariantViolation
from apps.ctdne.evaluation import dtdne_baseline, gain_percent, results_frame, run_link_prediction, summarize
from apps.ctdne.models import (
    BiasKind,
    Favor,
    InactivePolicy,
    LinkPredictionResult,
    NegativeScope,
    RunConfig,
    SnapshotMode,
    TemporalWalk,
    WalkKind,
)
from apps.ctdne.temporal_graph import TemporalGraph, graph_stats, load_edge_list, read_edge_records
from apps.ctdne.utils.io_helper import ensure_dir, write_csv, write_json
from apps.ctdne.utils.logging_config import setup_logging
from apps.ctdne.utils.provider_factory import CTDNEProviderFactory
from apps.ctdne.walker import generate_walks, walk_stats, write_walks

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

RUN_FIELDS = {f.name for f in fields(RunConfig)}


class CLIArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


@contextmanager
def stage(name: str, timings: Dict[str, float]) -> Iterator[None]:
    """Time a pipeline stage and prefix errors raised inside it with its name"""
    start = time.perf_counter()
    try:
        yield
    except CTDNEError as e:
        e.args = (f"[{name}] {e}",)
        raise
    finally:
        timings[name] = round(time.perf_counter() - start, 6)


def dataset_name(path: str) -> str:
    return Path(path).name.split(".")[0]


def _require_input(cfg: RunConfig) -> None:
    if not cfg.input:
        raise ConfigError("--input is required")
    if not Path(cfg.input).is_file():
        raise DataError(f"input file {cfg.input} not found")


def _load_graph(cfg: RunConfig, timings: Dict[str, float]) -> TemporalGraph:
    _require_input(cfg)
    with stage("load", timings):
        return load_edge_list(cfg.input, directed=cfg.directed, unit_scale=cfg.unit_scale)


def _write_walk_outputs(walks: List[TemporalWalk], g: TemporalGraph, cfg: RunConfig, out: Path) -> None:
    for name, frame in walk_stats(walks).tables(g.labels).items():
        write_csv(frame, out / f"stats_{name}.csv")
    if cfg.export_walks:
        write_walks(walks, out / "walks.txt", g.labels)


def _generate(g: TemporalGraph, cfg: RunConfig, timings: Dict[str, float]):
    budget = cfg.walk_budget(int(g.active_nodes().shape[0]))
    with stage("walks", timings):
        walks = generate_walks(
            g, budget, cfg.fs, cfg.fg, seed=cfg.seed, options=cfg.sampling_options(), threads=cfg.threads
        )
    return budget, walks


def _walk_derived(budget, walks: List[TemporalWalk]) -> Dict[str, Any]:
    return {
        "beta": budget.beta,
        "n_walks": len(walks),
        "n_relaxed_walks": sum(1 for w in walks if w.kind is WalkKind.RELAXED),
        "context_windows": sum(len(w) - budget.omega + 1 for w in walks if w.kind is not WalkKind.RELAXED),
    }


def cmd_train(cfg: RunConfig, out: Path, timings: Dict[str, float]) -> Dict[str, Any]:
    """Load, walk, train; write embeddings and walk statistics"""
    g = _load_graph(cfg, timings)
    budget, walks = _generate(g, cfg, timings)
    with stage("train", timings):
        z = train(walks, cfg.train_config(), labels=g.labels)
    with stage("write", timings):
        save_embeddings(z, out / "embeddings.txt")
        _write_walk_outputs(walks, g, cfg, out)
    return {"n_nodes": g.n_nodes, "n_edges": g.n_edges, **_walk_derived(budget, walks)}


def cmd_stream(cfg: RunConfig, out: Path, timings: Dict[str, float]) -> Dict[str, Any]:
    """Replay the edge file as a stream with online updates; report per-edge latency"""
    _require_input(cfg)
    with stage("load", timings):
        records = read_edge_records(cfg.input)
        if not records:
            raise EmptyGraphError(f"no edges in {cfg.input}")
    with stage("stream", timings):
        g, z, report = replay_stream(records, cfg)
    with stage("write", timings):
        save_embeddings(z, out / "embeddings.txt")
        write_json(
            out / "summary.json",
            {
                "dataset": dataset_name(cfg.input),
                "latency": report.to_dict(),
                "n_nodes": g.n_nodes,
                "n_edges": g.n_edges,
                "streamed_edges": report.count,
                "walks_per_edge": cfg.walks_per_edge,
                "batch_edges": cfg.batch_edges,
            },
        )
    return {"n_nodes": g.n_nodes, "n_edges": g.n_edges, "latency": report.to_dict()}


def _write_results(results: Sequence[LinkPredictionResult], cfg: RunConfig, out: Path, extra: Dict[str, Any]):
    frame = results_frame(results, dataset_name(cfg.input))
    write_csv(frame, out / "results.csv")
    summary = {"dataset": dataset_name(cfg.input), "variants": summarize(frame), **extra}
    write_json(out / "summary.json", summary)
    return frame, summary


def cmd_eval(cfg: RunConfig, out: Path, timings: Dict[str, float]) -> Dict[str, Any]:
    """Temporal link prediction for one variant, all nine, or the ctdne-opt sweep"""
    g = _load_graph(cfg, timings)
    if cfg.all_variants or cfg.opt:
        providers = CTDNEProviderFactory.create_all_variants(cfg)
    else:
        providers = [CTDNEProviderFactory.create(cfg, cfg.variant)]

    results: List[LinkPredictionResult] = []
    with stage("evaluate", timings):
        for provider in providers:
            results.append(
                run_link_prediction(
                    g, provider, cfg.seed_list(), cfg.split_fraction, cfg.negative_scope, threads=cfg.threads
                )
            )

    notes: Dict[str, Any] = {}
    if cfg.opt:
        best = max(results, key=lambda r: r.mean_auc)
        results.append(
            LinkPredictionResult(
                variant="ctdne-opt", seeds=list(best.seeds), aucs=list(best.aucs), operators=list(best.operators)
            )
        )
        notes["ctdne-opt"] = {
            "selected_variant": best.variant,
            "approximation": "best of the nine F_s x F_Gamma variants by mean hold-out AUC",
        }
    with stage("write", timings):
        _write_results(results, cfg, out, {"notes": notes} if notes else {})
    return {"variants": [r.variant for r in results], "seeds": cfg.seed_list()}


def cmd_snapshots(cfg: RunConfig, out: Path, timings: Dict[str, float]) -> Dict[str, Any]:
    """Snapshot baseline against the matching CTDNE run, with the AUC gain"""
    g = _load_graph(cfg, timings)
    seeds = cfg.seed_list()
    with stage("dtdne", timings):
        dtdne = dtdne_baseline(
            g,
            CTDNEProviderFactory.create_snapshot_provider(cfg),
            seeds,
            cfg.split_fraction,
            cfg.negative_scope,
            threads=cfg.threads,
        )
    with stage("ctdne", timings):
        ctdne = run_link_prediction(
            g,
            CTDNEProviderFactory.create_temporal_provider(cfg),
            seeds,
            cfg.split_fraction,
            cfg.negative_scope,
            threads=cfg.threads,
        )
    with stage("write", timings):
        comparison = pd.DataFrame(
            {
                "dataset": dataset_name(cfg.input),
                "seed": seeds,
                "dtdne_auc": dtdne.aucs,
                "ctdne_auc": ctdne.aucs,
                "gain_percent": [gain_percent(c, d) for c, d in zip(ctdne.aucs, dtdne.aucs)],
            }
        )
        write_csv(comparison, out / "comparison.csv")
        _write_results(
            [dtdne, ctdne],
            cfg,
            out,
            {"gain_percent": gain_percent(ctdne.mean_auc, dtdne.mean_auc), "ctdne_variant": ctdne.variant},
        )
    return {"snapshots": cfg.snapshots, "per_snapshot_dim": cfg.snapshot_config().per_snapshot_dim}


def cmd_stats(cfg: RunConfig, out: Path, timings: Dict[str, float]) -> Dict[str, Any]:
    """Graph statistics plus walk length, occurrence and start histograms"""
    g = _load_graph(cfg, timings)
    budget, walks = _generate(g, cfg, timings)
    with stage("write", timings):
        write_json(out / "graph_stats.json", graph_stats(g).to_dict())
        _write_walk_outputs(walks, g, cfg, out)
    return {"n_nodes": g.n_nodes, "n_edges": g.n_edges, **_walk_derived(budget, walks)}


COMMANDS: Dict[str, Callable[[RunConfig, Path, Dict[str, float]], Dict[str, Any]]] = {
    "train": cmd_train,
    "stream": cmd_stream,
    "eval": cmd_eval,
    "snapshots": cmd_snapshots,
    "stats": cmd_stats,
}


def _common_parser() -> argparse.ArgumentParser:
    common = CLIArgumentParser(add_help=False)
    common.add_argument("--input", help="edge-list file (src dst [weight] time; .gz accepted)")
    common.add_argument("--directed", action="store_true", default=None, help="treat edges as directed")
    common.add_argument("--unit-scale", type=float, help="timestamp units per second")
    common.add_argument("--fs", choices=[k.value for k in BiasKind], help="initial edge distribution F_s")
    common.add_argument("--fg", choices=[k.value for k in BiasKind], help="temporal neighbor distribution F_Γ")
    common.add_argument("--omega", type=int, help="context window size ω")
    common.add_argument("--L", "--walk-length", dest="walk_length", type=int, help="maximum walk length L")
    common.add_argument("--beta", type=int, help="context window budget β")
    common.add_argument("--R", "--walks-per-node", dest="walks_per_node", type=int, help="walks per node R")
    common.add_argument("--no-relax", dest="relax", action="store_false", default=None,
                        help="do not add fallback walks for uncovered nodes")
    common.add_argument("--D", "--dimension", dest="dimension", type=int, help="embedding dimension D")
    common.add_argument("--negatives", type=int, help="negative samples per positive pair")
    common.add_argument("--lr", type=float, help="initial SGD step size")
    common.add_argument("--lr-min", type=float, help="final SGD step size")
    common.add_argument("--online-lr", type=float, help="fixed online step size (default lr/10)")
    common.add_argument("--epochs", type=int)
    common.add_argument("--shrink-window", action="store_true", default=None)
    common.add_argument("--seed", type=int, help="random seed (default: $CTDNE_SEED or 0)")
    common.add_argument("--seeds", type=int, help="number of evaluation seeds")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="walk generation / seed parallelism")
    common.add_argument("--sgd-workers", type=int, help="lock-free SGD writers (not deterministic when > 1)")
    common.add_argument("--exp-scale", type=float, help="time rescale inside exponential distributions")
    common.add_argument("--exp-favor", choices=[f.value for f in Favor])
    common.add_argument("--linear-favor", choices=[f.value for f in Favor])
    common.add_argument("--export-walks", action="store_true", default=None, help="also write walks.txt")
    common.add_argument("--config", dest="config_file", help="key=value configuration file")
    common.add_argument("--manifest", help="replay the configuration of a manifest.json")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true")
    verbosity.add_argument("--quiet", action="store_true")
    return common


def _add_split_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--split-fraction", type=float, help="fraction of edges used for training")
    parser.add_argument("--negative-scope", choices=[s.value for s in NegativeScope])


def build_parser() -> CLIArgumentParser:
    parser = CLIArgumentParser(prog="ctdne", description="Continuous-time dynamic network embeddings")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")
    common = _common_parser()

    sub.add_parser("train", parents=[common], help="generate temporal walks and train embeddings")

    stream = sub.add_parser("stream", parents=[common], help="replay edges as a stream with online updates")
    stream.add_argument("--walks-per-edge", type=int)
    stream.add_argument("--warmup", type=float, help="fraction of edges bulk-loaded before streaming")
    stream.add_argument("--batch-edges", type=int, help="edges per online update")

    evaluate = sub.add_parser("eval", parents=[common], help="temporal link prediction")
    evaluate.add_argument("--variant", help="ctdne, ctdne-<fs>-<fg>, static or dtdne")
    evaluate.add_argument("--all-variants", action="store_true", default=None)
    evaluate.add_argument("--opt", action="store_true", default=None, help="approximate ctdne-opt by a sweep")
    evaluate.add_argument("--T", "--snapshots", dest="snapshots", type=int)
    _add_split_flags(evaluate)

    snapshots = sub.add_parser("snapshots", parents=[common], help="snapshot baseline vs CTDNE")
    snapshots.add_argument("--T", "--snapshots", dest="snapshots", type=int, help="number of snapshots T")
    snapshots.add_argument("--inactive-policy", choices=[p.value for p in InactivePolicy])
    snapshots.add_argument("--snapshot-mode", choices=[m.value for m in SnapshotMode])
    _add_split_flags(snapshots)

    sub.add_parser("stats", parents=[common], help="graph and walk statistics")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, resolve configuration, dispatch; raises on failure"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise ConfigError("a command is required (train, stream, eval, snapshots, stats)")

    level = "DEBUG" if args.verbose else "WARNING" if args.quiet else None
    setup_logging(application="ctdne", level=level)

    flags = {k: v for k, v in vars(args).items() if k in RUN_FIELDS}
    cfg = resolve_config(flags, config_file=args.config_file, manifest=args.manifest)
    out = ensure_dir(cfg.out)

    timings: Dict[str, float] = {}
    derived = COMMANDS[args.command](cfg, out, timings)
    manifest = {
        "command": args.command,
        "config": cfg.to_dict(),
        "derived": derived,
        "timings": timings,
        "version": __version__,
    }
    write_json(out / "manifest.json", manifest)
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point; maps errors onto exit codes"""
    try:
        return run(argv)
    except ConfigError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        logger.error(f"Data error: {e}")
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except InvariantViolation as e:
        logger.error(f"Internal invariant violated: {e}")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:
        error_id = uuid.uuid4().hex[:8]
        logger.error(f"Unexpected error [{error_id}]: {e}", exc_info=True)
        print(f"internal error [{error_id}]: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
