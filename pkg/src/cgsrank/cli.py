"""Command-line pipeline: generate, label, train, rank, evaluate, sweep, bench.

Every subcommand accepts ``--config FILE`` pointing at a JSON object whose
keys are the subcommand's option names (underscored); explicit flags override
config values, which override built-in defaults. Unknown config keys are
rejected.

All randomness flows from one ``--seed`` through named substreams (ba,
labels, init), so two runs of the same pipeline with the same seed write
byte-identical labels, weights, and scores. Output files get a
``<name>.meta.json`` sidecar carrying a schema version, the graph
fingerprint, the resolved-config hash, and wall-clock timings.

Exit codes: 0 success; 2 usage error (bad flags, bad values, unreadable
paths); 3 data mismatch (malformed files, fingerprint or node-set
mismatches, bad weight files); 4 numeric failure (divergent training).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import statistics
import sys
import time
import warnings

import numpy as np

from . import centrality as ct
from .errors import (
    CgsError,
    FingerprintMismatchError,
    NumericError,
    ParseError,
    WeightFormatError,
)
from .graph import (
    Graph,
    feature_matrix,
    generate_ba,
    load_edge_list,
    network_stats,
    save_edge_list,
    stats_csv,
)
from .metrics import build_report, kendall_tau
from .model import TrainConfig, load_weights, predict as model_predict, save_weights, train
from .rng import substream_seed
from .sir import SirParams, influence_labels, load_labels, save_labels

__all__ = ["main"]

SCHEMA_VERSION = 1
DEFAULT_K_GRID = "10,20,50,100"
DEFAULT_MULTIPLIERS = "1.0,1.2,1.5,1.8,2.0"

_METHOD_ALIASES = {"K-CORE": "KCORE", "1DCGS": "1D-CGS", "CGS": "1D-CGS"}


def _config_hash(command: str, opts: dict) -> str:
    doc = {"command": command}
    doc.update({k: opts[k] for k in sorted(opts)})
    blob = json.dumps(doc, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _write_sidecar(path: str, kind: str, payload: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
    doc.update(payload)
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_sidecar(path: str) -> dict | None:
    meta_path = path + ".meta.json"
    if not os.path.exists(meta_path):
        return None
    with open(meta_path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _parse_methods(spec: str, have_weights: bool) -> list[str]:
    if spec.strip().lower() == "all":
        names = [m for m in ct.KNOWN_METHODS if m != "1D-CGS" or have_weights]
    else:
        names = []
        for tok in spec.split(","):
            name = tok.strip().upper()
            name = _METHOD_ALIASES.get(name, name)
            if name not in ct.KNOWN_METHODS:
                raise ValueError(
                    f"unknown method {tok.strip()!r}; known: {', '.join(ct.KNOWN_METHODS)} (or 'all')"
                )
            if name not in names:
                names.append(name)
    if not names:
        raise ValueError("empty method list")
    if "1D-CGS" in names and not have_weights:
        raise ValueError("method 1D-CGS requires --weights")
    return names


def _method_fn(g: Graph, name: str, weights, mdd_lambda: float):
    if name == "DC":
        return lambda: ct.degree_centrality(g).values
    if name == "BC":
        return lambda: ct.betweenness_centrality(g).values
    if name == "HI":
        return lambda: ct.h_index(g).values
    if name == "KCORE":
        return lambda: ct.k_core(g).values
    if name == "VC":
        return lambda: ct.v_community(g, ct.louvain(g)).values
    if name == "MDD":
        return lambda: ct.mdd(g, lam=mdd_lambda).values
    if name == "ND":
        return lambda: ct.neighborhood_degree(g).values
    if name == "1D-CGS":
        return lambda: model_predict(g, feature_matrix(g), weights).values
    raise ValueError(f"unknown method {name!r}")


def _compute_scores(g: Graph, methods, weights, mdd_lambda: float):
    """[(method, values, seconds)] in the requested method order."""
    out = []
    for name in methods:
        fn = _method_fn(g, name, weights, mdd_lambda)
        t0 = time.perf_counter()
        values = fn()
        out.append((name, values, time.perf_counter() - t0))
    return out


def _align_to_graph(g: Graph, tokens, values, source: str) -> np.ndarray:
    """Reorder a (token, value) file into graph node order or refuse."""
    if len(tokens) != g.n:
        raise FingerprintMismatchError(
            f"{source}: {len(tokens)} rows but the graph has {g.n} nodes"
        )
    idx = np.empty(g.n, dtype=np.int64)
    for i, tok in enumerate(tokens):
        try:
            idx[i] = g.id_of(tok)
        except KeyError:
            raise FingerprintMismatchError(
                f"{source}: node {tok!r} is not in the graph"
            ) from None
    if np.unique(idx).size != g.n:
        raise FingerprintMismatchError(f"{source}: duplicate node ids")
    out = np.empty(g.n, dtype=np.float64)
    out[idx] = values
    return out


def _parse_float_list(spec: str, name: str) -> list[float]:
    try:
        vals = [float(tok) for tok in str(spec).split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"bad {name} list {spec!r}: {exc}") from None
    if not vals:
        raise ValueError(f"empty {name} list")
    return vals


def _parse_int_list(spec: str, name: str) -> list[int]:
    vals = []
    for tok in str(spec).split(","):
        if not tok.strip():
            continue
        try:
            vals.append(int(tok))
        except ValueError:
            raise ValueError(f"bad {name} entry {tok.strip()!r}") from None
    if not vals:
        raise ValueError(f"empty {name} list")
    return vals


def _resolve_mu(opt: dict, g: Graph) -> tuple[float, float | None]:
    """(resolved mu, multiplier or None), clamping to 1.0 with a warning."""
    if opt.get("mu") is not None:
        mu = float(opt["mu"])
        multiplier = None
    else:
        multiplier = float(opt["mu_multiplier"])
        mu_c = network_stats(g).epidemic_threshold
        if not np.isfinite(mu_c):
            raise ValueError(
                "the graph's epidemic threshold is not finite; pass --mu explicitly"
            )
        mu = multiplier * mu_c
    if mu > 1.0:
        warnings.warn(f"resolved infection probability {mu:.6g} > 1; clamping to 1.0")
        mu = 1.0
    return mu, multiplier


# wide per-method scores table written by cmd_rank


def _write_wide_scores(path: str, g: Graph, scored) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id," + ",".join(name for name, _, _ in scored) + "\n")
        for v in range(g.n):
            row = ",".join(repr(float(vals[v])) for _, vals, _ in scored)
            fh.write(f"{g.labels[v]},{row}\n")


def _read_wide_scores(path: str):
    """(methods, tokens, {method: values}) from a cmd_rank table."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if len(cols) < 2 or cols[0] != "node_id":
            raise ParseError(f"expected header node_id,<method>,...; got {header!r}", line=1)
        methods = cols[1:]
        tokens = []
        data = [[] for _ in methods]
        for ln, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(cols):
                raise ParseError(f"expected {len(cols)} fields, got {len(parts)}", line=ln)
            tokens.append(parts[0])
            for j, val in enumerate(parts[1:]):
                try:
                    data[j].append(float(val))
                except ValueError:
                    raise ParseError(f"bad score value {val!r}", line=ln) from None
    columns = {m: np.asarray(col, dtype=np.float64) for m, col in zip(methods, data)}
    return methods, tokens, columns


# subcommand implementations; each takes the merged option dict


def cmd_generate(opt: dict) -> int:
    n = int(opt["n"])
    m_attach = int(opt["m_attach"])
    seed = int(opt["seed"])
    out = opt["out"]
    t0 = time.perf_counter()
    g = generate_ba(n, m_attach, seed=substream_seed(seed, "ba"))
    elapsed = time.perf_counter() - t0
    save_edge_list(g, out)
    stats = network_stats(g)
    stats_path = opt["stats"] if opt["stats"] else out + ".stats.csv"
    with open(stats_path, "w", encoding="utf-8") as fh:
        fh.write(stats_csv(stats))
    _write_sidecar(out, "graph", {
        "graph_fingerprint": g.fingerprint,
        "config_hash": _config_hash("generate", opt),
        "n": g.n,
        "m": g.m,
        "stats_file": stats_path,
        "wall_time_seconds": elapsed,
    })
    print(f"wrote {out} ({g.n} nodes, {g.m} edges) and {stats_path}")
    return 0


def cmd_label(opt: dict) -> int:
    g = load_edge_list(opt["graph"])
    mu, multiplier = _resolve_mu(opt, g)
    params = SirParams(
        mu=mu,
        beta=float(opt["beta"]),
        trials=int(opt["trials"]),
        seed=substream_seed(int(opt["seed"]), "labels"),
    )
    t0 = time.perf_counter()
    labels = influence_labels(g, params)
    elapsed = time.perf_counter() - t0
    extra = {"config_hash": _config_hash("label", opt)}
    if multiplier is not None:
        extra["mu_multiplier"] = multiplier
    save_labels(labels, g, opt["out"], wall_time_seconds=elapsed, extra=extra)
    print(f"wrote {opt['out']} (mu={mu:.6g}, beta={params.beta:.6g}, trials={params.trials})")
    return 0


def cmd_train(opt: dict) -> int:
    g = load_edge_list(opt["graph"])
    tokens, values, meta = load_labels(opt["labels"])
    if meta is not None:
        recorded = meta.get("graph_fingerprint")
        if recorded and recorded != g.fingerprint:
            raise FingerprintMismatchError(
                f"labels were generated for graph {recorded[:12]}..., "
                f"but {opt['graph']} has fingerprint {g.fingerprint[:12]}..."
            )
    y = _align_to_graph(g, tokens, values, source=opt["labels"])
    cfg = TrainConfig(
        learning_rate=float(opt["lr"]),
        epochs=int(opt["epochs"]),
        seed=substream_seed(int(opt["seed"]), "init"),
    )
    t0 = time.perf_counter()
    weights, losses = train(g, feature_matrix(g), y, cfg)
    elapsed = time.perf_counter() - t0
    save_weights(weights, opt["out"])
    loss_path = opt["loss_curve"] if opt["loss_curve"] else opt["out"] + ".loss.csv"
    with open(loss_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for i, loss in enumerate(losses, start=1):
            fh.write(f"{i},{float(loss)!r}\n")
    _write_sidecar(opt["out"], "weights", {
        "graph_fingerprint": g.fingerprint,
        "config_hash": _config_hash("train", opt),
        "epochs": cfg.epochs,
        "learning_rate": cfg.learning_rate,
        "initial_loss": float(losses[0]),
        "final_loss": float(losses[-1]),
        "loss_curve_file": loss_path,
        "wall_time_seconds": elapsed,
    })
    print(f"wrote {opt['out']} (loss {losses[0]:.6g} -> {losses[-1]:.6g} over {cfg.epochs} epochs)")
    return 0


def cmd_rank(opt: dict) -> int:
    g = load_edge_list(opt["graph"])
    weights = load_weights(opt["weights"]) if opt["weights"] else None
    methods = _parse_methods(opt["methods"], weights is not None)
    scored = _compute_scores(g, methods, weights, float(opt["mdd_lambda"]))
    _write_wide_scores(opt["out"], g, scored)
    _write_sidecar(opt["out"], "scores", {
        "graph_fingerprint": g.fingerprint,
        "config_hash": _config_hash("rank", opt),
        "methods": methods,
        "method_seconds": {name: seconds for name, _, seconds in scored},
    })
    print(f"wrote {opt['out']} ({', '.join(methods)})")
    return 0


def cmd_evaluate(opt: dict) -> int:
    ref_tokens, ref_values, ref_meta = load_labels(opt["labels"])
    methods, tokens, columns = _read_wide_scores(opt["scores"])
    scores_meta = _read_sidecar(opt["scores"])
    fp_scores = (scores_meta or {}).get("graph_fingerprint")
    fp_labels = (ref_meta or {}).get("graph_fingerprint")
    if fp_scores and fp_labels and fp_scores != fp_labels:
        raise FingerprintMismatchError(
            f"scores are for graph {fp_scores[:12]}... but labels are for {fp_labels[:12]}..."
        )
    if set(tokens) != set(ref_tokens):
        raise FingerprintMismatchError("scores and labels cover different node sets")
    n = len(ref_tokens)
    order = {tok: i for i, tok in enumerate(ref_tokens)}
    perm = np.array([order[tok] for tok in tokens], dtype=np.int64)
    aligned = {}
    for m in methods:
        col = np.empty(n, dtype=np.float64)
        col[perm] = columns[m]
        aligned[m] = col

    k_grid = sorted(set(_parse_int_list(opt["k_grid"], "k grid")))
    for k in k_grid:
        if k < 1:
            raise ValueError(f"k grid entries must be >= 1, got {k}")
    k_grid = [k for k in k_grid if k <= n // 10]
    if not k_grid:
        k_grid = [min(10, n)]
    tau_variant = str(opt["tau_variant"])

    method_seconds = (scores_meta or {}).get("method_seconds", {})
    reports = [
        build_report(
            ref_values,
            aligned[m],
            m,
            k_grid,
            tau_variant=tau_variant,
            wall_time_seconds=float(method_seconds.get(m, 0.0)),
        )
        for m in methods
    ]

    fingerprint = fp_labels or fp_scores or ""
    graph_tag = fingerprint[:12] if fingerprint else os.path.basename(opt["scores"])
    header = "graph,method,tau," + ",".join(f"js@{k}" for k in k_grid) + ",mi,seconds"
    with open(opt["out_csv"], "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for rep in reports:
            js = ",".join(repr(rep.jaccard_at_k[k]) for k in k_grid)
            fh.write(
                f"{graph_tag},{rep.method},{rep.kendall_tau!r},{js},"
                f"{rep.monotonicity!r},{rep.wall_time_seconds!r}\n"
            )
    out_json = opt["out_json"]
    if not out_json:
        root, ext = os.path.splitext(opt["out_csv"])
        out_json = (root if ext else opt["out_csv"]) + ".json"
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "evaluation-report",
        "graph_fingerprint": fingerprint,
        "config_hash": _config_hash("evaluate", opt),
        "tau_variant": tau_variant,
        "k_grid": k_grid,
        "reports": {
            rep.method: {
                "kendall_tau": rep.kendall_tau,
                "jaccard_at_k": {str(k): v for k, v in rep.jaccard_at_k.items()},
                "monotonicity": rep.monotonicity,
                "rank_histogram": {str(r): c for r, c in rep.rank_histogram.items()},
                "wall_time_seconds": rep.wall_time_seconds,
            }
            for rep in reports
        },
    }
    with open(out_json, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if opt["js_curve"]:
        with open(opt["js_curve"], "w", encoding="utf-8") as fh:
            fh.write("method,k,jaccard\n")
            for rep in reports:
                for k in k_grid:
                    fh.write(f"{rep.method},{k},{rep.jaccard_at_k[k]!r}\n")
    print(f"wrote {opt['out_csv']} and {out_json}")
    return 0


def cmd_sweep_mu(opt: dict) -> int:
    g = load_edge_list(opt["graph"])
    weights = load_weights(opt["weights"]) if opt["weights"] else None
    methods = _parse_methods(opt["methods"], weights is not None)
    multipliers = _parse_float_list(opt["multipliers"], "multiplier")
    for mult in multipliers:
        if not mult > 0:
            raise ValueError(f"multipliers must be > 0, got {mult}")
    mu_c = network_stats(g).epidemic_threshold
    if not np.isfinite(mu_c):
        raise ValueError("the graph's epidemic threshold is not finite; sweep undefined")
    scored = _compute_scores(g, methods, weights, float(opt["mdd_lambda"]))
    labels_seed = substream_seed(int(opt["seed"]), "labels")
    tau_variant = str(opt["tau_variant"])
    resolved = []
    rows = []
    for mult in multipliers:
        mu = mult * mu_c
        if mu > 1.0:
            warnings.warn(f"multiplier {mult:.6g} gives mu {mu:.6g} > 1; clamping to 1.0")
            mu = 1.0
        resolved.append(mu)
        params = SirParams(mu=mu, beta=float(opt["beta"]), trials=int(opt["trials"]), seed=labels_seed)
        labels = influence_labels(g, params)
        for name, values, _ in scored:
            rows.append((mult, name, kendall_tau(labels.values, values, variant=tau_variant)))
    with open(opt["out"], "w", encoding="utf-8") as fh:
        fh.write("multiplier,method,tau\n")
        for mult, name, tau in rows:
            fh.write(f"{mult!r},{name},{tau!r}\n")
    _write_sidecar(opt["out"], "mu-sweep", {
        "graph_fingerprint": g.fingerprint,
        "config_hash": _config_hash("sweep-mu", opt),
        "mu_c": mu_c,
        "multipliers": list(multipliers),
        "resolved_mu": resolved,
        "methods": methods,
        "tau_variant": tau_variant,
    })
    print(f"wrote {opt['out']} ({len(multipliers)} multipliers x {len(methods)} methods)")
    return 0


def cmd_bench_time(opt: dict) -> int:
    paths = [tok.strip() for tok in str(opt["graphs"]).split(",") if tok.strip()]
    if not paths:
        raise ValueError("empty graph list")
    weights = load_weights(opt["weights"]) if opt["weights"] else None
    methods = _parse_methods(opt["methods"], weights is not None)
    repeats = int(opt["repeats"])
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    rows = []
    fingerprints = {}
    for path in paths:
        g = load_edge_list(path)
        name = os.path.basename(path)
        fingerprints[name] = g.fingerprint
        for method in methods:
            fn = _method_fn(g, method, weights, float(opt["mdd_lambda"]))
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn()
                times.append(time.perf_counter() - t0)
            rows.append((name, method, statistics.median(times)))
    with open(opt["out"], "w", encoding="utf-8") as fh:
        fh.write("graph,method,seconds\n")
        for name, method, seconds in rows:
            fh.write(f"{name},{method},{seconds!r}\n")
    _write_sidecar(opt["out"], "bench-time", {
        "config_hash": _config_hash("bench-time", opt),
        "graph_fingerprints": fingerprints,
        "methods": methods,
        "repeats": repeats,
    })
    print(f"wrote {opt['out']} ({len(rows)} rows, median of {repeats})")
    return 0


# parser plumbing: every option defaults to SUPPRESS so the merge order is
# defaults < config file < explicit flags

_COMMANDS: dict = {}


def _register(name, runner, defaults, required, configure):
    _COMMANDS[name] = {
        "runner": runner,
        "defaults": defaults,
        "required": required,
        "configure": configure,
    }


def _opt(parser, flag, **kw):
    kw.setdefault("default", argparse.SUPPRESS)
    parser.add_argument(flag, **kw)


def _configure_generate(p):
    _opt(p, "--n", type=int, help="number of nodes")
    _opt(p, "--m-attach", type=int, help="edges added per new node (default 2)")
    _opt(p, "--seed", type=int, help="root seed (default 0)")
    _opt(p, "--out", help="edge-list output path")
    _opt(p, "--stats", help="stats CSV path (default <out>.stats.csv)")


_register(
    "generate",
    cmd_generate,
    {"n": None, "m_attach": 2, "seed": 0, "out": None, "stats": None},
    ("n", "out"),
    _configure_generate,
)


def _configure_label(p):
    _opt(p, "--graph", help="edge-list path")
    _opt(p, "--mu", type=float, help="infection probability (overrides --mu-multiplier)")
    _opt(p, "--mu-multiplier", type=float,
         help="mu as a multiple of the epidemic threshold (default 1.5)")
    _opt(p, "--beta", type=float, help="recovery probability (default 1.0)")
    _opt(p, "--trials", type=int, help="simulations per node (default 1000)")
    _opt(p, "--seed", type=int, help="root seed (default 0)")
    _opt(p, "--out", help="labels CSV output path")


_register(
    "label",
    cmd_label,
    {"graph": None, "mu": None, "mu_multiplier": 1.5, "beta": 1.0,
     "trials": 1000, "seed": 0, "out": None},
    ("graph", "out"),
    _configure_label,
)


def _configure_train(p):
    _opt(p, "--graph", help="edge-list path")
    _opt(p, "--labels", help="labels CSV from the label step")
    _opt(p, "--lr", type=float, help="learning rate (default 0.005)")
    _opt(p, "--epochs", type=int, help="training epochs (default 3000)")
    _opt(p, "--seed", type=int, help="root seed (default 0)")
    _opt(p, "--out", help="weights output path")
    _opt(p, "--loss-curve", help="loss curve CSV path (default <out>.loss.csv)")


_register(
    "train",
    cmd_train,
    {"graph": None, "labels": None, "lr": 0.005, "epochs": 3000, "seed": 0,
     "out": None, "loss_curve": None},
    ("graph", "labels", "out"),
    _configure_train,
)


def _configure_rank(p):
    _opt(p, "--graph", help="edge-list path")
    _opt(p, "--methods", help="comma list or 'all' (default all)")
    _opt(p, "--weights", help="weights file (required for 1D-CGS)")
    _opt(p, "--mdd-lambda", type=float, help="MDD exhausted-degree weight (default 0.7)")
    _opt(p, "--out", help="scores CSV output path (one column per method)")


_register(
    "rank",
    cmd_rank,
    {"graph": None, "methods": "all", "weights": None, "mdd_lambda": 0.7, "out": None},
    ("graph", "out"),
    _configure_rank,
)


def _configure_evaluate(p):
    _opt(p, "--scores", help="scores CSV from the rank step")
    _opt(p, "--labels", help="reference labels CSV")
    _opt(p, "--k-grid", help="comma list of k values (default 10,20,50,100, capped at n/10)")
    _opt(p, "--tau-variant", choices=("a", "b"), help="Kendall variant (default a)")
    _opt(p, "--out-csv", help="report CSV output path")
    _opt(p, "--out-json", help="report JSON output path (default alongside CSV)")
    _opt(p, "--js-curve", help="optional long-format Jaccard-vs-k CSV path")


_register(
    "evaluate",
    cmd_evaluate,
    {"scores": None, "labels": None, "k_grid": DEFAULT_K_GRID, "tau_variant": "a",
     "out_csv": None, "out_json": None, "js_curve": None},
    ("scores", "labels", "out_csv"),
    _configure_evaluate,
)


def _configure_sweep(p):
    _opt(p, "--graph", help="edge-list path")
    _opt(p, "--methods", help="comma list or 'all' (default all)")
    _opt(p, "--weights", help="weights file (required for 1D-CGS)")
    _opt(p, "--multipliers", help="comma list of mu/mu_c multipliers (default 1.0,1.2,1.5,1.8,2.0)")
    _opt(p, "--trials", type=int, help="simulations per node (default 1000)")
    _opt(p, "--beta", type=float, help="recovery probability (default 1.0)")
    _opt(p, "--seed", type=int, help="root seed (default 0)")
    _opt(p, "--mdd-lambda", type=float, help="MDD exhausted-degree weight (default 0.7)")
    _opt(p, "--tau-variant", choices=("a", "b"), help="Kendall variant (default a)")
    _opt(p, "--out", help="long CSV output path (multiplier,method,tau)")


_register(
    "sweep-mu",
    cmd_sweep_mu,
    {"graph": None, "methods": "all", "weights": None, "multipliers": DEFAULT_MULTIPLIERS,
     "trials": 1000, "beta": 1.0, "seed": 0, "mdd_lambda": 0.7, "tau_variant": "a",
     "out": None},
    ("graph", "out"),
    _configure_sweep,
)


def _configure_bench(p):
    _opt(p, "--graphs", help="comma list of edge-list paths")
    _opt(p, "--methods", help="comma list or 'all' (default all)")
    _opt(p, "--weights", help="weights file (required for 1D-CGS)")
    _opt(p, "--repeats", type=int, help="runs per (graph, method); median reported (default 3)")
    _opt(p, "--mdd-lambda", type=float, help="MDD exhausted-degree weight (default 0.7)")
    _opt(p, "--out", help="timing CSV output path (graph,method,seconds)")


_register(
    "bench-time",
    cmd_bench_time,
    {"graphs": None, "methods": "all", "weights": None, "repeats": 3,
     "mdd_lambda": 0.7, "out": None},
    ("graphs", "out"),
    _configure_bench,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgsrank",
        description="Influential-node ranking pipeline: SIR labels, centrality "
        "baselines, and a trained conv + graph-aggregation model.",
        epilog="exit codes: 0 success, 2 usage error, 3 data mismatch, 4 numeric failure",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, entry in _COMMANDS.items():
        p = sub.add_parser(name, help=f"{name} step")
        _opt(p, "--config", help="JSON file with option defaults (flags override)")
        entry["configure"](p)
    return parser


def _merge_options(args: argparse.Namespace) -> dict:
    entry = _COMMANDS[args.command]
    merged = dict(entry["defaults"])
    supplied = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    config_path = getattr(args, "config", None)
    if config_path is not None:
        with open(config_path, "r", encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"config file is not valid JSON: {exc}", line=exc.lineno)
        if not isinstance(cfg, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = sorted(set(cfg) - set(merged))
        if unknown:
            raise ValueError(
                f"unknown config key(s) {', '.join(map(repr, unknown))}; "
                f"known: {', '.join(sorted(merged))}"
            )
        merged.update(cfg)
    merged.update(supplied)
    missing = [name for name in entry["required"] if merged.get(name) is None]
    if missing:
        raise ValueError(
            "missing required option(s): " + ", ".join(f"--{m.replace('_', '-')}" for m in missing)
        )
    return merged


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        opts = _merge_options(args)
        return _COMMANDS[args.command]["runner"](opts)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ParseError, FingerprintMismatchError, WeightFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CgsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
