"""Command line entry point: ``bridgewalk <subcommand> ...``.

Every flag can also come from a JSON ``--config`` file or from an environment
variable ``BRIDGEWALK_<FLAG>`` (upper case, dashes as underscores).  Explicit
flags win over the environment, which wins over the config file.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .acceptance import (AcceptanceModel, adamic_adar_scores, auc_eval, fit_acceptance,
                         load_interactions, polarity, rov_ap, save_interactions,
                         synthetic_interactions)
from .benchmark import benchmark_incremental
from .exceptions import BridgewalkError, DataError, NumericalError
from .graph import (generate_planted_partition, generate_two_star, load_graph, load_partition,
                    save_graph, save_partition, write_dot)
from .recommend import STRATEGIES, greedy, random_strategy, rov
from .rwc import DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL, build_context, rwc
from .star import EDGE_KINDS, star_score, star_score_limit

logger = logging.getLogger("bridgewalk")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
ENV_PREFIX = "BRIDGEWALK_"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    alpha: float = DEFAULT_ALPHA
    k1: int = 10
    k2: int = 10
    backend: str = "auto"
    seed: int = 0
    tolerance: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    mode: str | None = None
    k: int | None = None
    strategy: str | None = None
    model_path: str | None = None
    paths: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if not 0.0 <= self.alpha < 1.0:
            raise UsageError(f"--alpha must lie in [0, 1), got {self.alpha}")
        if self.k1 < 1 or self.k2 < 1:
            raise UsageError("--k1 and --k2 must be positive")
        if self.tolerance <= 0:
            raise UsageError("--tolerance must be positive")
        if self.k is not None and self.k < 1:
            raise UsageError("-k must be at least 1")
        if self.command == "recommend":
            if self.backend == "power":
                raise UsageError(f"mode {self.mode} needs the dense backend (incremental deltas "
                                 "use explicit inverses); drop --backend power")
            if self.mode == "rov-ap" and not self.model_path:
                raise UsageError("--mode rov-ap needs --model FILE (see 'fit-acceptance')")
            if self.mode == "strategy" and self.strategy not in STRATEGIES:
                raise UsageError(f"--strategy must be one of {', '.join(STRATEGIES)}")
        return self


# --------------------------------------------------------------------------
# output helpers

def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _to_text(writer) -> str:
    buf = io.StringIO()
    writer(buf)
    return buf.getvalue()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(payload: dict, out_path: str | None = None) -> None:
    text = _dump_json(payload)
    if out_path:
        atomic_write(out_path, text)
    sys.stdout.write(text)


def _csv_text(rows, fieldnames) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# --------------------------------------------------------------------------
# subcommands

def _load_inputs(args):
    if not args.graph or not args.partition:
        raise UsageError("--graph and --partition are required")
    graph = load_graph(args.graph)
    partition = load_partition(args.partition, graph, args.k1, args.k2)
    return graph, partition


def cmd_score(args, cfg: RunConfig) -> int:
    graph, partition = _load_inputs(args)
    t0 = time.perf_counter()
    ctx = build_context(graph, partition, cfg.alpha, cfg.backend, tol=cfg.tolerance,
                        max_iter=cfg.max_iter)
    value = rwc(ctx)
    payload = {"rwc": value, "alpha": cfg.alpha, "k1": cfg.k1, "k2": cfg.k2,
               "n": graph.n_vertices, "m": graph.n_edges, "backend": ctx.backend}
    if not args.no_meta:
        payload["wall_ms"] = (time.perf_counter() - t0) * 1e3
    _emit(payload, args.out)
    return EXIT_OK


def cmd_recommend(args, cfg: RunConfig) -> int:
    graph, partition = _load_inputs(args)
    ctx = build_context(graph, partition, cfg.alpha, "dense")
    meta = not args.no_meta
    if cfg.mode == "strategy":
        traj = random_strategy(ctx, graph, partition, cfg.strategy, cfg.k, cfg.seed)
        payload = {"mode": "RANDOM-STRATEGY", "strategy": traj.strategy, "seed": traj.seed,
                   "rwc_before": traj.rwc_before, "rwc_after": traj.final,
                   "trajectory": traj.values, "exhausted": traj.exhausted,
                   "edges": [{"source": a, "target": b, "source_label": graph.label(a),
                              "target_label": graph.label(b)} for a, b in traj.edges]}
        added = traj.edges
        if args.trajectory_out:
            atomic_write(args.trajectory_out,
                         _csv_text(traj.to_rows(graph), ["step", "source", "target", "rwc"]))
    else:
        if cfg.mode == "rov":
            rec = rov(ctx, graph, partition, cfg.k)
        elif cfg.mode == "greedy":
            rec = greedy(ctx, graph, partition, cfg.k, args.scope)
        else:
            model = AcceptanceModel.load(cfg.model_path)
            rec = rov_ap(ctx, graph, partition, model, cfg.k)
        payload = rec.to_dict(graph, meta=meta)
        added = rec.edge_list
        if rec.exhausted:
            logger.warning("only %d of %d requested edges lower the score", len(rec.edges), cfg.k)
    payload.update({"alpha": cfg.alpha, "k1": cfg.k1, "k2": cfg.k2, "k": cfg.k})
    if args.dot_out:
        atomic_write(args.dot_out, _to_text(lambda fh: write_dot(graph, partition, fh, added)))
    _emit(payload, args.out)
    return EXIT_OK


def cmd_oracle(args, cfg: RunConfig) -> int:
    rows = [{"edge_kind": kind, "n": args.n, "alpha": cfg.alpha,
             "score": star_score(kind, args.n, cfg.alpha),
             "limit": star_score_limit(kind, cfg.alpha)} for kind in EDGE_KINDS]
    text = _csv_text(rows, ["edge_kind", "n", "alpha", "score", "limit"])
    if args.out:
        atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _bench_inputs(args, cfg):
    if args.graph:
        return _load_inputs(args)
    n_side = max(2, args.n // 2)
    return generate_planted_partition(n_side, args.p_in, args.p_cross, args.hub_fraction,
                                      cfg.seed, cfg.k1, cfg.k2)


def cmd_benchmark(args, cfg: RunConfig) -> int:
    graph, partition = _bench_inputs(args, cfg)
    if args.target == "incremental":
        if args.probes < 1:
            raise UsageError("--probes must be at least 1")
        report = benchmark_incremental(graph, partition, args.probes, cfg.alpha, cfg.seed,
                                       args.time_budget)
        if args.no_meta:
            for key in ("build_ms", "incremental_ms", "full_ms", "speedup"):
                report.pop(key)
        _emit(report, args.out)
        return EXIT_OK

    ctx = build_context(graph, partition, cfg.alpha, "dense")
    rows, summary = [], {}
    for strategy in STRATEGIES:
        finals = []
        for s in range(args.seeds):
            traj = random_strategy(ctx, graph, partition, strategy, args.n_edges, cfg.seed + s)
            finals.append(traj.final)
            for row in traj.to_rows(graph):
                rows.append({"strategy": strategy, "seed": cfg.seed + s, **row})
        summary[strategy] = {"mean_final_rwc": float(np.mean(finals)), "finals": finals}
    if args.trajectory_out:
        atomic_write(args.trajectory_out,
                     _csv_text(rows, ["strategy", "seed", "step", "source", "target", "rwc"]))
    _emit({"rwc_before": ctx.rwc_value, "n_edges": args.n_edges, "strategies": summary,
                 "n": graph.n_vertices, "m": graph.n_edges}, args.out)
    return EXIT_OK


def cmd_fit_acceptance(args, cfg: RunConfig) -> int:
    graph, partition = _load_inputs(args)
    if not args.interactions:
        raise UsageError("--interactions is required")
    records = load_interactions(args.interactions, graph)
    model = fit_acceptance(records, polarity(graph, partition), args.buckets)
    text = _dump_json(model.to_dict())
    atomic_write(args.out, text)
    sys.stdout.write(_dump_json({"model": args.out, "records": len(records),
                                 "n_buckets": model.n_buckets}))
    return EXIT_OK


def cmd_eval_auc(args, cfg: RunConfig) -> int:
    graph, partition = _load_inputs(args)
    if args.scorer == "polarity":
        if not args.model:
            raise UsageError("--scorer polarity needs --model FILE")
        scorer = AcceptanceModel.load(args.model).as_scorer(polarity(graph, partition))
    else:
        scorer = adamic_adar_scores
    result = auc_eval(scorer, graph, args.pos_fraction, args.neg_fraction, args.repeats, cfg.seed,
                      max_pairs=args.max_pairs)
    if args.csv_out:
        rows = [{"repeat": i, "auc": a} for i, a in enumerate(result.per_repeat)]
        atomic_write(args.csv_out, _csv_text(rows, ["repeat", "auc"]))
    _emit({"scorer": args.scorer, "median_auc": result.median, "repeats": args.repeats},
          args.out)
    return EXIT_OK


ASSORTATIVE_STRENGTH = 0.9


def assortative_table(n_buckets: int) -> np.ndarray:
    """Cell probabilities favouring endorsements between users of similar polarity."""
    centers = (np.arange(n_buckets) + 0.5) / n_buckets * 2 - 1
    gap = np.abs(centers[:, None] - centers[None, :]) / 2
    return np.clip(ASSORTATIVE_STRENGTH * (1 - gap) ** 4, 0.01, 0.99)


def cmd_generate(args, cfg: RunConfig) -> int:
    if args.kind == "two-star":
        graph, partition = generate_two_star(args.n)
    else:
        graph, partition = generate_planted_partition(args.n_per_side, args.p_in, args.p_cross,
                                                      args.hub_fraction, cfg.seed, cfg.k1, cfg.k2)
    atomic_write(args.graph_out, _to_text(lambda fh: save_graph(graph, fh)))
    atomic_write(args.partition_out, _to_text(lambda fh: save_partition(graph, partition, fh)))
    payload = {"n": graph.n_vertices, "m": graph.n_edges, "graph": args.graph_out,
               "partition": args.partition_out}
    if args.interactions_out:
        table = assortative_table(args.buckets)
        records = synthetic_interactions(polarity(graph, partition), table,
                                         args.exposures_per_cell, cfg.seed)
        atomic_write(args.interactions_out, _to_text(lambda fh: save_interactions(records, graph, fh)))
        payload["interactions"] = args.interactions_out
    _emit(payload)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def _common(p: argparse.ArgumentParser, graph_inputs=True):
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="continuation probability")
    p.add_argument("--k1", type=int, default=10, help="size of the high-degree set of side X")
    p.add_argument("--k2", type=int, default=10, help="size of the high-degree set of side Y")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-meta", action="store_true", help="omit timings for reproducible output")
    p.add_argument("--out", help="also write the JSON result here")
    if graph_inputs:
        p.add_argument("--graph", help="edge list, source<TAB>target")
        p.add_argument("--partition", help="vertex<TAB>X|Y")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bridgewalk", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file with flag defaults")
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS threads")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("score", help="compute the RWC score")
    _common(p)
    p.add_argument("--backend", choices=("auto", "dense", "power"), default="auto")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("recommend", help="recommend edges that lower the score")
    _common(p)
    p.add_argument("-k", type=int, default=5, help="number of edges")
    p.add_argument("--mode", choices=("rov", "rov-ap", "greedy", "strategy"), default="rov")
    p.add_argument("--strategy", default="high->high", help="|".join(STRATEGIES))
    p.add_argument("--scope", choices=("all", "cross-side"), default="all")
    p.add_argument("--model", help="acceptance model JSON (rov-ap)")
    p.add_argument("--backend", choices=("auto", "dense", "power"), default="dense")
    p.add_argument("--dot-out", help="DOT snapshot with the added edges highlighted")
    p.add_argument("--trajectory-out", help="CSV of scores after each added edge (strategy)")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("oracle", help="closed-form two-star scores as CSV")
    _common(p, graph_inputs=False)
    p.add_argument("--n", type=int, default=10, help="star size")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("benchmark", help="incremental timing or random-strategy runs")
    _common(p)
    p.add_argument("target", choices=("incremental", "strategies"))
    p.add_argument("--n", type=int, default=2000, help="vertices of the generated graph")
    p.add_argument("--p-in", type=float, default=0.01)
    p.add_argument("--p-cross", type=float, default=0.001)
    p.add_argument("--hub-fraction", type=float, default=0.02)
    p.add_argument("--probes", type=int, default=50)
    p.add_argument("--time-budget", type=float, default=600.0, help="seconds")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--n-edges", type=int, default=50)
    p.add_argument("--trajectory-out")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("fit-acceptance", help="fit the bucketed acceptance model")
    _common(p)
    p.add_argument("--interactions", help="followee<TAB>follower<TAB>content<TAB>endorsed")
    p.add_argument("--buckets", type=int, default=10)
    p.set_defaults(func=cmd_fit_acceptance)

    p = sub.add_parser("eval-auc", help="link-prediction AUC of a scorer")
    _common(p)
    p.add_argument("--scorer", choices=("polarity", "adamic-adar"), default="polarity")
    p.add_argument("--model")
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--pos-fraction", type=float, default=0.1)
    p.add_argument("--neg-fraction", type=float, default=1.0)
    p.add_argument("--max-pairs", type=int, default=1000)
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_eval_auc)

    p = sub.add_parser("generate", help="write a synthetic graph and partition")
    _common(p, graph_inputs=False)
    p.add_argument("kind", choices=("planted", "two-star"))
    p.add_argument("--n", type=int, default=10, help="star size (two-star)")
    p.add_argument("--n-per-side", type=int, default=250)
    p.add_argument("--p-in", type=float, default=0.01)
    p.add_argument("--p-cross", type=float, default=0.001)
    p.add_argument("--hub-fraction", type=float, default=0.02)
    p.add_argument("--graph-out", required=True)
    p.add_argument("--partition-out", required=True)
    p.add_argument("--interactions-out")
    p.add_argument("--buckets", type=int, default=10)
    p.add_argument("--exposures-per-cell", type=int, default=1000)
    p.set_defaults(func=cmd_generate)
    return parser


def _apply_external_defaults(parser: argparse.ArgumentParser, argv) -> None:
    """Fold config-file and ``BRIDGEWALK_*`` values into the subparser defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    config_path = known.config or os.environ.get(ENV_PREFIX + "CONFIG")
    config = {}
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
    subparsers = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    targets = [parser] + [p for sp in subparsers for p in sp.choices.values()]
    for p in targets:
        for action in p._actions:
            if not action.option_strings or action.dest in ("help", "version", "config"):
                continue
            value = config.get(action.dest, config.get(action.dest.replace("_", "-")))
            env = os.environ.get(ENV_PREFIX + action.dest.upper())
            if env is not None:
                value = env
            if value is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                value = value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
            elif action.type is not None:
                try:
                    value = action.type(value)
                except (TypeError, ValueError):
                    raise UsageError(f"bad value {value!r} for {action.dest}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"bad value {value!r} for {action.dest}")
            p.set_defaults(**{action.dest: value})


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        alpha=args.alpha, k1=args.k1, k2=args.k2,
        backend=getattr(args, "backend", "auto"),
        seed=args.seed,
        tolerance=getattr(args, "tolerance", DEFAULT_TOL),
        max_iter=getattr(args, "max_iter", DEFAULT_MAX_ITER),
        mode=getattr(args, "mode", None),
        k=getattr(args, "k", None),
        strategy=getattr(args, "strategy", None),
        model_path=getattr(args, "model", None),
        paths={k: v for k, v in vars(args).items()
               if isinstance(v, str) and (k.endswith("_out") or k in ("graph", "partition", "out"))},
    ).validate()


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_external_defaults(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = _config_from_args(args)
        logger.debug("config %s", asdict(cfg))
        limiter = contextlib.nullcontext()
        if args.threads:
            from threadpoolctl import threadpool_limits
            limiter = threadpool_limits(limits=args.threads)
        with limiter:
            return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, BridgewalkError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
