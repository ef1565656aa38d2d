"""Command-line entry point: gen, build, gap, bench, and pipeline sub-commands.

Exit codes: 0 success, 1 runtime error (typed pipeline failure), 2 usage error.
Every run echoes its effective settings to stderr so it can be reproduced from
the log alone. ``CTSBENCH_SEED`` overrides the default seed; ``--config FILE``
(JSON mapping of flag names to values) supplies defaults below the flags.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .activity import ActivityMap, parse_activity_csv, parse_saif
from .archive import write_archive
from .bench import plot_report, run_benchmark, write_report
from .coarsen import CoarsenConfig, build_clustered_graph
from .corpus import CorpusSpec, coarsen_seed, generate_corpus
from .errors import CtsBenchError
from .manifest import fill_gap_columns, assemble_manifest, read_manifest, write_manifest
from .netlist import parse_netlist
from .rawgraph import build_raw_graph

log = logging.getLogger("ctsbench")

DEFAULT_SEED = 20260811
SEED_ENV_VAR = "CTSBENCH_SEED"


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _cos_threshold(text: str) -> float:
    value = float(text)
    if not (-1.0 < value <= 1.0):
        raise argparse.ArgumentTypeError(f"must lie in (-1, 1], got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _int_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _float_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help=f"root seed (default: ${SEED_ENV_VAR} or {DEFAULT_SEED})")
    p.add_argument("--config", type=Path, default=None,
                   help="JSON file with default values for any flag")
    p.add_argument("--log-level", default="INFO",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _add_coarsen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spread-threshold", type=_positive_float, default=0.05)
    p.add_argument("--merge-distance", type=_positive_float, default=0.05)
    p.add_argument("--cos-threshold", type=_cos_threshold, default=0.9)


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--designs", type=_positive_int, default=3)
    p.add_argument("--placements", type=_positive_int, default=3)
    p.add_argument("--cts", type=_positive_int, default=4)
    p.add_argument("--cells", type=_int_range, default=(220, 420), metavar="LO:HI")
    p.add_argument("--ff-fraction", type=_float_range, default=(0.16, 0.28), metavar="LO:HI")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctsbench",
        description="Paired raw/clustered netlist graphs, gap scoring, and benchmark corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic corpus and manifest skeleton")
    _add_common_flags(p_gen)
    _add_corpus_flags(p_gen)
    p_gen.add_argument("--out", type=Path, required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_build = sub.add_parser("build", help="build one graph archive from a netlist")
    _add_common_flags(p_build)
    _add_coarsen_flags(p_build)
    p_build.add_argument("--netlist", type=Path, required=True)
    p_build.add_argument("--activity", type=Path, default=None,
                         help=".saif or .csv activity file (default: no activity)")
    p_build.add_argument("--kind", choices=["raw", "clustered"], required=True)
    p_build.add_argument("--raw-hops", type=_positive_int, default=1)
    p_build.add_argument("--out", type=Path, required=True)
    p_build.set_defaults(func=cmd_build)

    p_gap = sub.add_parser("gap", help="fill gap columns of a manifest")
    _add_common_flags(p_gap)
    p_gap.add_argument("--manifest", type=Path, required=True)
    p_gap.add_argument("--out", type=Path, default=None, help="default: rewrite in place")
    p_gap.add_argument("--skew-metric", choices=["setup", "hold"], default="setup")
    p_gap.set_defaults(func=cmd_gap)

    p_bench = sub.add_parser("bench", help="measure compression/footprint/runtimes on a corpus")
    _add_common_flags(p_bench)
    _add_coarsen_flags(p_bench)
    p_bench.add_argument("--corpus", type=Path, required=True)
    p_bench.add_argument("--out", type=Path, required=True)
    p_bench.add_argument("--repetitions", type=_positive_int, default=5)
    p_bench.add_argument("--parallel", action="store_true",
                         help="measure throughput instead of latency")
    p_bench.set_defaults(func=cmd_bench)

    p_pipe = sub.add_parser("pipeline", help="gen + build + gap + manifest + bench, end to end")
    _add_common_flags(p_pipe)
    _add_corpus_flags(p_pipe)
    _add_coarsen_flags(p_pipe)
    p_pipe.add_argument("--out", type=Path, required=True)
    p_pipe.add_argument("--raw-hops", type=_positive_int, default=1)
    p_pipe.add_argument("--skew-metric", choices=["setup", "hold"], default="setup")
    p_pipe.add_argument("--repetitions", type=_positive_int, default=3)
    p_pipe.add_argument("--parallel", action="store_true")
    p_pipe.add_argument("--resume", action="store_true",
                        help="skip stages whose stamped outputs are intact")
    p_pipe.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    p_pipe.set_defaults(func=cmd_pipeline)
    return parser


def _resolve_seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return DEFAULT_SEED


def _echo_settings(args: argparse.Namespace) -> None:
    shown = {k: v for k, v in vars(args).items() if k != "func" and v is not None}
    log.info("effective settings: %s", json.dumps(shown, sort_keys=True, default=str))


def _coarsen_config(args: argparse.Namespace, seed: int) -> CoarsenConfig:
    return CoarsenConfig(
        seed=seed,
        spread_threshold=args.spread_threshold,
        merge_distance=args.merge_distance,
        cos_threshold=args.cos_threshold,
    )


def _corpus_spec(args: argparse.Namespace, seed: int) -> CorpusSpec:
    return CorpusSpec(
        n_designs=args.designs,
        placements_per_design=args.placements,
        cts_per_placement=args.cts,
        cells=tuple(args.cells),
        ff_fraction=tuple(args.ff_fraction),
        seed=seed,
    )


# --- sub-commands -----------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    summary = generate_corpus(_corpus_spec(args, seed), args.out)
    print(f"generated {len(summary.rows)} manifest rows across "
          f"{len(summary.designs)} designs at {args.out}")
    return 0


def _load_activity(path: Path | None) -> ActivityMap:
    if path is None:
        return ActivityMap({})
    data = path.read_bytes()
    if path.suffix == ".csv":
        return parse_activity_csv(data)
    return parse_saif(data)


def cmd_build(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    netlist = parse_netlist(args.netlist.read_bytes())
    activity = _load_activity(args.activity)
    if args.kind == "raw":
        graph = build_raw_graph(netlist, activity, hops=args.raw_hops)
        write_archive(graph, args.out)
        print(f"raw graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges -> {args.out}")
    else:
        graph = build_clustered_graph(netlist, activity, _coarsen_config(args, seed))
        write_archive(graph, args.out)
        print(f"clustered graph: {len(graph.nodes)} macro-nodes, {len(graph.edges)} edges, "
              f"compression {graph.compression_ratio:.2f}x, "
              f"{graph.unclaimed_logic} unclaimed logic cells -> {args.out}")
    return 0


def cmd_gap(args: argparse.Namespace) -> int:
    rows = read_manifest(args.manifest)
    rows = fill_gap_columns(rows, skew_metric=args.skew_metric)
    out = args.out if args.out is not None else args.manifest
    write_manifest(rows, out)
    print(f"scored {len(rows)} rows -> {out}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    report = run_benchmark(
        args.corpus, _coarsen_config(args, seed),
        repetitions=args.repetitions, parallel=args.parallel,
    )
    paths = write_report(report, args.out)
    paths.update(plot_report(report, args.out))
    mean, lo, hi = report.aggregates["node_compression"]
    print(f"benchmarked {len(report.rows)} placements ({report.mode} mode): "
          f"node compression mean {mean:.2f}x (min {lo:.2f}, max {hi:.2f}) -> {args.out}")
    return 0


# --- pipeline ----------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _stage_key(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()


def _load_stamps(path: Path) -> dict:
    if path.is_file():
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return {}
    return {}


def _stage_intact(stamps: dict, name: str, key: str, root: Path) -> bool:
    entry = stamps.get(name)
    if not entry or entry.get("key") != key:
        return False
    for rel, digest in entry.get("files", {}).items():
        full = root / rel
        if not full.is_file() or _sha256(full) != digest:
            return False
    return all((root / rel).is_file() for rel in entry.get("exists", []))


def _stamp_stage(stamps: dict, name: str, key: str, root: Path,
                 files: list[Path], exists_only: list[Path] = ()) -> None:
    stamps[name] = {
        "key": key,
        "files": {p.relative_to(root).as_posix(): _sha256(p) for p in sorted(files)},
        "exists": sorted(p.relative_to(root).as_posix() for p in exists_only),
    }


def _build_placement_worker(task: tuple) -> tuple[str, str]:
    """Build and write both archives for one placement (process-pool safe)."""
    pdir_s, seed, spread, merge_dist, cos_thr, hops = task
    pdir = Path(pdir_s)
    netlist = parse_netlist(pdir.joinpath("netlist.pnl.json").read_bytes())
    activity = parse_saif(pdir.joinpath("activity.saif").read_bytes())
    cfg = CoarsenConfig(seed=seed, spread_threshold=spread,
                        merge_distance=merge_dist, cos_threshold=cos_thr)
    write_archive(build_raw_graph(netlist, activity, hops=hops), pdir / "raw.ctsg")
    write_archive(build_clustered_graph(netlist, activity, cfg), pdir / "clustered.ctsg")
    return (pdir.parent.name, pdir.name)


def cmd_pipeline(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    spec = _corpus_spec(args, seed)
    out: Path = args.out
    corpus_dir = out / "corpus"
    bench_dir = out / "bench"
    out.mkdir(parents=True, exist_ok=True)
    stamps_path = out / ".stamps.json"
    stamps = _load_stamps(stamps_path) if args.resume else {}

    stage = "gen"
    try:
        gen_key = _stage_key({"spec": spec.__dict__})
        if args.resume and _stage_intact(stamps, "gen", gen_key, out):
            log.info("stage gen: outputs intact, skipping")
            summary = None
        else:
            log.info("stage gen: generating corpus")
            summary = generate_corpus(spec, corpus_dir)
            files = [e.netlist_path for e in summary.placements]
            files += [e.activity_path for e in summary.placements]
            # manifest.csv is completed in place by the gap stage, so the gen
            # stamp only asserts its existence, not its content.
            _stamp_stage(stamps, "gen", gen_key, out, files,
                         exists_only=[summary.manifest_path])
            stamps_path.write_text(json.dumps(stamps, indent=2, sort_keys=True), encoding="utf-8")

        placement_dirs = sorted(p.parent for p in corpus_dir.glob("*/*/netlist.pnl.json"))
        design_names = sorted({p.parent.name for p in placement_dirs})
        design_index = {name: i for i, name in enumerate(design_names)}

        stage = "build"
        build_key = _stage_key({
            "gen": gen_key, "spread": args.spread_threshold, "merge": args.merge_distance,
            "cos": args.cos_threshold, "hops": args.raw_hops,
        })
        if args.resume and _stage_intact(stamps, "build", build_key, out):
            log.info("stage build: outputs intact, skipping")
        else:
            log.info("stage build: %d placements across %d workers",
                     len(placement_dirs), args.jobs)
            tasks = []
            for pdir in placement_dirs:
                d_idx = design_index[pdir.parent.name]
                p_idx = sorted(q.name for q in pdir.parent.iterdir() if q.is_dir()).index(pdir.name)
                tasks.append((
                    str(pdir), coarsen_seed(seed, d_idx, p_idx),
                    args.spread_threshold, args.merge_distance, args.cos_threshold,
                    args.raw_hops,
                ))
            if args.jobs > 1 and len(tasks) > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    list(pool.map(_build_placement_worker, tasks))
            else:
                for task in tasks:
                    _build_placement_worker(task)
            archives = [p for pdir in placement_dirs for p in
                        (pdir / "raw.ctsg", pdir / "clustered.ctsg")]
            _stamp_stage(stamps, "build", build_key, out, archives)
            stamps_path.write_text(json.dumps(stamps, indent=2, sort_keys=True), encoding="utf-8")

        stage = "gap"
        gap_key = _stage_key({"build": build_key, "skew_metric": args.skew_metric})
        if args.resume and _stage_intact(stamps, "gap", gap_key, out):
            log.info("stage gap: outputs intact, skipping")
        else:
            log.info("stage gap: scoring and assembling manifest")
            rows = read_manifest(corpus_dir / "manifest.csv")
            rows = [
                replace(
                    r,
                    raw_graph_path=f"{r.design_name}/{r.placement_id}/raw.ctsg",
                    clustered_graph_path=f"{r.design_name}/{r.placement_id}/clustered.ctsg",
                )
                for r in rows
            ]
            rows = fill_gap_columns(rows, skew_metric=args.skew_metric)
            assemble_manifest(corpus_dir, rows, skew_metric=args.skew_metric)
            _stamp_stage(stamps, "gap", gap_key, out, [corpus_dir / "manifest.csv"])
            stamps_path.write_text(json.dumps(stamps, indent=2, sort_keys=True), encoding="utf-8")

        stage = "bench"
        bench_key = _stage_key({
            "gap": gap_key, "repetitions": args.repetitions, "parallel": args.parallel,
        })
        if args.resume and _stage_intact(stamps, "bench", bench_key, out):
            log.info("stage bench: outputs intact, skipping")
        else:
            log.info("stage bench: measuring efficiency")
            cfg = _coarsen_config(args, seed)
            report = run_benchmark(corpus_dir, cfg,
                                   repetitions=args.repetitions, parallel=args.parallel)
            paths = write_report(report, bench_dir)
            paths.update(plot_report(report, bench_dir))
            deterministic = [paths["data"], paths["scatter_data"], paths["bars_data"],
                             paths["scatter"], paths["bars"]]
            _stamp_stage(stamps, "bench", bench_key, out, deterministic,
                         exists_only=[paths["json"]])
            stamps_path.write_text(json.dumps(stamps, indent=2, sort_keys=True), encoding="utf-8")
    except (CtsBenchError, OSError) as e:
        print(f"pipeline failed at stage {stage}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1

    rows = read_manifest(corpus_dir / "manifest.csv")
    print(f"pipeline complete: {len(rows)} manifest rows, corpus at {corpus_dir}, "
          f"bench report at {bench_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)

    # Config file supplies defaults below explicit flags.
    if "--config" in argv:
        config_path = Path(argv[argv.index("--config") + 1])
        try:
            defaults = json.loads(config_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            print(f"cannot read config {config_path}: {e}", file=sys.stderr)
            return 2
        for p in parser._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
            p.set_defaults(**{k: v for k, v in defaults.items()
                              if any(a.dest == k for a in p._actions)})

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=getattr(logging, args.log_level))
    _echo_settings(args)
    log.info("seed: %d", _resolve_seed(args))

    try:
        return args.func(args)
    except ValueError as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return 2
    except (CtsBenchError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
