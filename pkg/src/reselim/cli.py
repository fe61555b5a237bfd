"""Command-line driver.

All outputs are written under ``--out-dir``; every command also writes a
manifest that records the experiment configuration, and the same
configuration always reproduces byte-identical files.

Exit codes: 0 success, 2 usage or configuration error, 3 input parse
error, 4 I/O error, 5 exact oracle size guard exceeded.
"""
from dataclasses import asdict, dataclass, fields
import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import graph as G
from .cascade import CascadeConfig, SeedMultiset, estimate_spread
from .exact import DEFAULT_GUARD, OracleTooLarge, exact_decomposition
from .maximize import (DEFAULT_POOL_THRESHOLD, DEFAULT_TOP_DEGREE, MULTISET, SET, GreedyCurve,
                       default_pool, greedy_select, single_node_spreads)
from .metrics import (DEFAULT_ALPHAS, MetricsReport, alpha_sweep, categorize, fit_saturation,
                      hub_ratio, influence_saturation, reselection_gain)
from .rng import derive_seed

log = logging.getLogger("reselim")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_IO, EXIT_GUARD = 0, 2, 3, 4, 5
WEIGHT_MODELS = ("auto", "wc", "tr", "explicit")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    input: str = ""
    weight_model: str = "auto"
    alpha: float = 1.0
    k: int = 50
    runs: int = 10_000
    seed: int = 0
    out_dir: str = "."
    undirected: bool = False

    def validate(self):
        if self.weight_model not in WEIGHT_MODELS:
            raise UsageError(f"unknown weight model {self.weight_model!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise UsageError("--alpha must lie in [0, 1]")
        if self.k < 1:
            raise UsageError("--k must be at least 1")
        if self.runs < 1:
            raise UsageError("--runs must be at least 1")
        return self

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def cascade(self, alpha=None, workers=1):
        a = self.alpha if alpha is None else alpha
        return CascadeConfig(a, self.runs, derive_seed(self.seed, "mc"), workers)


@dataclass
class LoadedGraph:
    graph: G.WeightedGraph
    ids: np.ndarray  # internal -> original id
    weight_model: str
    name: str

    def to_internal(self, v):
        i = int(np.searchsorted(self.ids, v))
        if i >= len(self.ids) or self.ids[i] != v:
            raise UsageError(f"node {v} not in graph")
        return i

    def internal_seeds(self, seeds):
        return SeedMultiset({self.to_internal(v): m for v, m in seeds.items()})


# -- graph loading -----------------------------------------------------------

def _gen_params(spec):
    params = {}
    for tok in filter(None, spec.split(",")):
        key, _, val = tok.partition("=")
        if not val:
            raise UsageError(f"generator parameter {tok!r} is not key=value")
        params[key.strip().replace("-", "_")] = val.strip()
    return params


def generate(kind, params):
    try:
        if kind == "star":
            return G.gen_star(int(params.get("leaves", 0)), float(params["p"]))
        if kind == "clique":
            return G.gen_clique(int(params["n"]), float(params["p"]))
        if kind == "random":
            return G.gen_random(int(params["n"]), float(params["edge_prob"]), float(params["p"]),
                                int(params.get("seed", 0)))
    except KeyError as e:
        raise UsageError(f"generator {kind} needs parameter {e.args[0]}") from None
    except ValueError as e:
        raise UsageError(str(e)) from None
    raise UsageError(f"unknown generator {kind!r}")


def load_graph(cfg):
    """Resolve ``cfg.input`` (a path or ``gen:<kind>:k=v,...``) to a weighted graph."""
    if cfg.input.startswith("gen:"):
        _, kind, rest = (cfg.input.split(":", 2) + [""])[:3]
        g = generate(kind, _gen_params(rest))
        return LoadedGraph(g, np.arange(g.node_count), "explicit", cfg.input)
    try:
        text = Path(cfg.input).read_text()
    except OSError as e:
        raise OSError(f"cannot read {cfg.input}: {e.strerror}") from e
    name = Path(cfg.input).name
    if G.sniff_columns(text) == 3:
        if cfg.weight_model not in ("auto", "explicit"):
            raise UsageError(f"{name} already carries probabilities; use --weights explicit")
        if cfg.undirected:
            raise UsageError("--undirected applies to unweighted edge lists only")
        g, ids = G.compact_ids(G.parse_weighted_edge_list(text))
        return LoadedGraph(g, ids, "explicit", name)
    if cfg.weight_model == "explicit":
        raise UsageError(f"{name} has no probability column")
    raw = G.parse_edge_list(text)
    if cfg.undirected:
        raw = G.symmetrize(raw)
    raw, ids = G.compact_ids(raw)
    if cfg.weight_model == "tr":
        g = G.assign_tr(raw, derive_seed(cfg.seed, "tr"))
        model = "tr"
    else:
        g = G.assign_wc(raw)
        model = "wc"
    return LoadedGraph(g, ids, model, name)


# -- output helpers ----------------------------------------------------------

def _out(cfg, name):
    d = Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _write(path, text):
    Path(path).write_text(text)
    log.info("wrote %s", path)
    return path


def _write_manifest(cfg, command, extra=None):
    body = {"command": command, "config": asdict(cfg)}
    if extra:
        body.update(extra)
    return _write(_out(cfg, f"manifest_{command}.json"),
                  json.dumps(body, indent=2, sort_keys=True) + "\n")


def _dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def curve_digest(lg, cfg, mode, alpha, k):
    # fading is irrelevant in set mode
    a = None if mode == SET else float(alpha)
    key = json.dumps([lg.graph.digest(), lg.weight_model, cfg.seed, mode, a, k, cfg.runs])
    return hashlib.sha256(key.encode()).hexdigest()[:24]


def cached_curve(lg, cfg, mode, alpha, k, workers):
    """Greedy curve, reusing ``<out-dir>/.cache`` when the same run was done before."""
    path = _out(cfg, ".cache") / f"curve-{curve_digest(lg, cfg, mode, alpha, k)}.csv"
    if path.exists():
        log.info("cache hit %s", path.name)
        return GreedyCurve.from_csv(path.read_text(), mode, alpha, lg.graph.node_count, cfg.runs)
    path.parent.mkdir(parents=True, exist_ok=True)
    curve = greedy_select(lg.graph, k, mode, cfg.cascade(alpha, workers))
    path.write_text(curve.to_csv())
    return curve


# -- commands ----------------------------------------------------------------

def cmd_gen(args, cfg):
    params = {"leaves": args.leaves, "n": args.n, "p": args.p, "edge_prob": args.edge_prob,
              "seed": cfg.seed}
    params = {k: v for k, v in params.items() if v is not None}
    g = generate(args.kind, params)
    name = args.output or f"{args.kind}.txt"
    path = _write(_out(cfg, name), G.format_weighted(g))
    _write_manifest(cfg, "gen", {"kind": args.kind, "params": params, "output": name})
    print(path)


def cmd_weights(args, cfg):
    lg = load_graph(cfg)
    path = _write(_out(cfg, args.output), G.format_weighted(lg.graph, lg.ids))
    if not np.array_equal(lg.ids, np.arange(lg.graph.node_count)):
        _write(_out(cfg, "ids.csv"), G.format_id_table(lg.ids))
    _write_manifest(cfg, "weights", {"weight_model": lg.weight_model,
                                     "nodes": lg.graph.node_count, "edges": lg.graph.edge_count})
    print(path)


def cmd_maximize(args, cfg):
    lg = load_graph(cfg)
    if args.mode == SET and cfg.k > lg.graph.node_count:
        raise UsageError(f"--k {cfg.k} exceeds node count {lg.graph.node_count} in set mode")
    curve = cached_curve(lg, cfg, args.mode, cfg.alpha, cfg.k, args.threads)
    _write(_out(cfg, f"curve_{args.mode}.csv"), curve.to_csv(lg.ids))
    last = curve.steps[-1]
    summary = {
        "graph": lg.name, "weight_model": lg.weight_model, "mode": args.mode,
        "alpha": cfg.alpha, "k": cfg.k, "runs": cfg.runs, "seed": cfg.seed,
        "nodes": lg.graph.node_count, "edges": lg.graph.edge_count,
        "spread_mean": last.spread.mean, "spread_se": last.spread.std_error,
        "multiset": {str(int(lg.ids[v])): m for v, m in curve.multiset().items()},
    }
    _write(_out(cfg, f"summary_{args.mode}.json"), _dumps(summary))
    _write_manifest(cfg, "maximize", {"mode": args.mode})
    print(_out(cfg, f"curve_{args.mode}.csv"))


def cmd_spread(args, cfg):
    lg = load_graph(cfg)
    seeds = lg.internal_seeds(_seeds(args.seeds))
    est, counts = estimate_spread(lg.graph, seeds, cfg.cascade(workers=args.threads),
                                  return_counts=True)
    out = {"seeds": args.seeds, "alpha": cfg.alpha, "runs": est.runs, "mean": est.mean,
           "std_error": est.std_error}
    _write(_out(cfg, "spread.json"), _dumps(out))
    if args.dump_counts:
        _write(_out(cfg, "spread_counts.csv"),
               "run,activated\n" + "".join(f"{i},{c}\n" for i, c in enumerate(counts)))
    _write_manifest(cfg, "spread", {"seeds": args.seeds})
    print(_dumps(out), end="")


def cmd_exact(args, cfg):
    lg = load_graph(cfg)
    seeds = lg.internal_seeds(_seeds(args.seeds))
    res = exact_decomposition(lg.graph, seeds, cfg.alpha, guard=args.guard)
    out = {"seeds": args.seeds, "alpha": cfg.alpha, "spread": res.spread,
           "host_spread": res.host_spread, "mset_size": res.mset_size,
           "unique_count": res.unique_count}
    _write(_out(cfg, "exact.json"), _dumps(out))
    print(f"spread {res.spread!r}")
    print(f"host_spread {res.host_spread!r} mset_size {res.mset_size} "
          f"unique_count {res.unique_count}")


def _window(args, k):
    k_max = min(args.k_max, k)
    k_min = min(args.k_min, k_max - 1)
    return (k_min, k_max) if k_min >= 1 else None


def cmd_report(args, cfg):
    lg = load_graph(cfg)
    n = lg.graph.node_count
    if cfg.k > n:
        raise UsageError(f"--k {cfg.k} exceeds node count {n}")
    want = {x for x in ("rg", "is", "hr") if getattr(args, x)} or {"rg", "is", "hr"}
    simple = cached_curve(lg, cfg, SET, cfg.alpha, cfg.k, args.threads)
    report = MetricsReport(lg.name, lg.weight_model, cfg.k, cfg.alpha, None,
                           runs=cfg.runs, seed=cfg.seed)
    if "rg" in want or args.sweep_alpha:
        resel = cached_curve(lg, cfg, MULTISET, cfg.alpha, cfg.k, args.threads)
        report.rg = reselection_gain(simple, resel, cfg.k)
        report.category = categorize(report.rg)
    if "is" in want:
        window = _window(args, cfg.k)
        if window:
            report.fit = fit_saturation(simple, *window)
            report.is_value = influence_saturation(report.fit)
    if "hr" in want:
        pool = default_pool(lg.graph, args.pool_threshold, args.top_degree, extra=simple.nodes)
        ranking = single_node_spreads(lg.graph, cfg.cascade(workers=args.threads), pool)
        report.hr = {k: hub_ratio(ranking, k) for k in range(2, min(args.hr_max, len(ranking)) + 1)}
    if args.sweep_alpha:
        report.alpha_curve = _sweep(lg, cfg, args, simple)
        _write(_out(cfg, "alpha_sweep.csv"), _sweep_csv(report.alpha_curve))
    _write(_out(cfg, "report.json"), report.to_json())
    _write(_out(cfg, "report.csv"), report.csv_row())
    _write_manifest(cfg, "report", {"metrics": sorted(want), "sweep_alpha": args.sweep_alpha})
    print(report.to_json(), end="")


def _alphas(text):
    if not text:
        return DEFAULT_ALPHAS
    try:
        return tuple(float(a) for a in text.split(","))
    except ValueError:
        raise UsageError(f"bad --alphas {text!r}") from None


def _sweep(lg, cfg, args, simple=None):
    fn = lambda mode, a: cached_curve(lg, cfg, mode, a, cfg.k, args.threads)  # noqa: E731
    return alpha_sweep(lg.graph, cfg.k, _alphas(args.alphas), cfg.cascade(), simple, fn)


def _sweep_csv(curve):
    return "alpha,rg\n" + "".join(f"{a!r},{v!r}\n" for a, v in sorted(curve.items()))


def cmd_sweep_alpha(args, cfg):
    lg = load_graph(cfg)
    if cfg.k > lg.graph.node_count:
        raise UsageError(f"--k {cfg.k} exceeds node count {lg.graph.node_count}")
    curve = _sweep(lg, cfg, args)
    path = _write(_out(cfg, "alpha_sweep.csv"), _sweep_csv(curve))
    _write_manifest(cfg, "sweep-alpha", {"alphas": list(curve)})
    print(path)


def cmd_rank_nodes(args, cfg):
    lg = load_graph(cfg)
    pool = default_pool(lg.graph, args.pool_threshold, args.top_degree)
    ranking = single_node_spreads(lg.graph, cfg.cascade(workers=args.threads), pool)
    path = _write(_out(cfg, "ranking.csv"), ranking.to_csv(lg.ids))
    _write_manifest(cfg, "rank-nodes", {"pool_size": len(pool)})
    print(path)


def _seeds(text):
    try:
        return SeedMultiset.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


# -- argument parsing --------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    common.add_argument("--runs", type=int, default=10_000, help="Monte Carlo runs")
    common.add_argument("--threads", type=int, default=1, help="worker cap; results unchanged")
    common.add_argument("--out-dir", default=".")
    common.add_argument("--undirected", action="store_true",
                        help="add the reverse of every input edge")
    common.add_argument("-q", "--quiet", action="store_true")

    graph_args = argparse.ArgumentParser(add_help=False)
    graph_args.add_argument("--input", "-i", required=True,
                            help="edge-list path or gen:<star|clique|random>:key=value,...")
    graph_args.add_argument("--weights", choices=WEIGHT_MODELS, default="auto",
                            help="auto: explicit for 'u v p' files, wc otherwise")
    graph_args.add_argument("--alpha", type=float, default=1.0, help="fading factor")
    graph_args.add_argument("--k", type=int, default=50, help="seed budget")

    p = argparse.ArgumentParser(prog="reselim",
                                description="Influence maximization with seed reselection.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common], help="write a synthetic weighted graph")
    s.add_argument("kind", choices=("star", "clique", "random"))
    s.add_argument("--leaves", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float, default=None)
    s.add_argument("--edge-prob", type=float)
    s.add_argument("--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("weights", parents=[common, graph_args], help="assign WC/TR weights")
    s.add_argument("--output", default="weighted.txt")
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("maximize", parents=[common, graph_args], help="greedy spread curve")
    s.add_argument("--mode", choices=(SET, MULTISET), default=SET)
    s.set_defaults(func=cmd_maximize)

    for name, func in (("spread", cmd_spread), ("exact", cmd_exact)):
        s = sub.add_parser(name, parents=[common, graph_args])
        s.add_argument("--seeds", required=True, help="e.g. 0:2,5 (node:multiplicity)")
        s.set_defaults(func=func)
        if name == "spread":
            s.add_argument("--dump-counts", action="store_true")
        else:
            s.add_argument("--guard", type=int, default=DEFAULT_GUARD)

    s = sub.add_parser("report", parents=[common, graph_args], help="RG, IS and HR report")
    for flag in ("rg", "is", "hr"):
        s.add_argument(f"--{flag}", action="store_true")
    s.add_argument("--sweep-alpha", action="store_true")
    s.add_argument("--alphas", help="comma-separated fading values (default 0.0..1.0 by 0.1)")
    s.add_argument("--k-min", type=int, default=5)
    s.add_argument("--k-max", type=int, default=50)
    s.add_argument("--hr-max", type=int, default=50)
    s.add_argument("--pool-threshold", type=int, default=DEFAULT_POOL_THRESHOLD)
    s.add_argument("--top-degree", type=int, default=DEFAULT_TOP_DEGREE)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("sweep-alpha", parents=[common, graph_args], help="RG for each alpha")
    s.add_argument("--alphas")
    s.set_defaults(func=cmd_sweep_alpha)

    s = sub.add_parser("rank-nodes", parents=[common, graph_args], help="single-node spreads")
    s.add_argument("--pool-threshold", type=int, default=DEFAULT_POOL_THRESHOLD)
    s.add_argument("--top-degree", type=int, default=DEFAULT_TOP_DEGREE)
    s.set_defaults(func=cmd_rank_nodes)
    return p


def config_from_args(args):
    return ExperimentConfig(
        input=getattr(args, "input", "") or "",
        weight_model=getattr(args, "weights", "auto"),
        alpha=getattr(args, "alpha", 1.0),
        k=getattr(args, "k", 50),
        runs=args.runs,
        seed=args.seed,
        out_dir=args.out_dir,
        undirected=args.undirected,
    ).validate()


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        cfg = config_from_args(args)
        args.func(args, cfg)
    except UsageError as e:
        print(f"reselim: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except G.ParseError as e:
        print(f"reselim: parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OracleTooLarge as e:
        print(f"reselim: {e}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as e:
        print(f"reselim: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
