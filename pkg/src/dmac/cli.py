"""Command-line entry point: generate, bounds, simulate, compare, sweep.

Configuration is a JSON object with flat dotted keys (nested objects are
flattened on load), e.g. ``{"graph.kind": "tree", "graph.n": 100, "b": 0.1}``.
Command-line flags override file values.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from dmac import bounds as bnd
from dmac import simulate as sim
from dmac.disturbances import DisturbanceSpec, flipped_targets
from dmac.dynamics import (
    DEFAULT_SEPARATION,
    CandidateSet,
    UncertainNetwork,
    build_network,
    max_edge_gain,
    validate_network,
)
from dmac.graph import NetworkGraph, generate_line, generate_star, generate_tree

log = logging.getLogger("dmac")

CONFIG_KEYS = {
    "graph.kind": "graph_kind",
    "graph.n": "graph_n",
    "graph.seed": "graph_seed",
    "graph.edges": "graph_edges",
    "network.file": "network_file",
    "b": "b",
    "models.m": "models_m",
    "models.separation": "models_separation",
    "models.seed": "models_seed",
    "models.values": "models_values",
    "true.rule": "true_rule",
    "true.index": "true_index",
    "true.seed": "true_seed",
    "horizon": "horizon",
    "disturbance.kind": "disturbance_kind",
    "disturbance.variance": "disturbance_variance",
    "disturbance.seed": "disturbance_seed",
    "disturbance.noise_scale": "disturbance_noise_scale",
    "disturbance.target": "disturbance_target",
    "gamma_eval": "gamma_eval",
    "x0": "x0",
    "out": "out",
    "controllers": "controllers",
    "seeds": "seeds",
    "plot": "plot",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    graph_kind: str = "tree"
    graph_n: int = 100
    graph_seed: int = 0
    graph_edges: list | None = None
    network_file: str | None = None
    b: float = 0.1
    models_m: int = 2
    models_separation: float = DEFAULT_SEPARATION
    models_seed: int = 0
    models_values: list | None = None
    true_rule: str = "fixed"
    true_index: int | list | None = None  # None: index 1, or 0 when M = 1
    true_seed: int = 0
    horizon: int = 20
    disturbance_kind: str = "gaussian"
    disturbance_variance: float = 0.1
    disturbance_seed: int = 0
    disturbance_noise_scale: float = 0.0
    disturbance_target: str | list = "flip"
    gamma_eval: float | None = None
    x0: float | list | None = None
    out: str = "out"
    controllers: list = field(default_factory=lambda: list(sim.CONTROLLERS))
    seeds: list = field(default_factory=lambda: list(range(10)))
    plot: bool = False

    @classmethod
    def from_mapping(cls, data: dict) -> RunConfig:
        flat = _flatten(data)
        unknown = sorted(set(flat) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**{CONFIG_KEYS[k]: v for k, v in flat.items()})

    def to_mapping(self) -> dict:
        inv = {v: k for k, v in CONFIG_KEYS.items()}
        return {inv[f.name]: getattr(self, f.name) for f in fields(self)}


def _flatten(data: dict, prefix: str = "") -> dict:
    out = {}
    for key, val in data.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, name + "."))
        else:
            out[name] = val
    return out


# ---------------------------------------------------------------------------
# resolution


def resolve_graph(cfg: RunConfig) -> NetworkGraph:
    kind = cfg.graph_kind
    if kind == "tree":
        return generate_tree(int(cfg.graph_n), int(cfg.graph_seed))
    if kind == "line":
        return generate_line(int(cfg.graph_n))
    if kind == "star":
        return generate_star(int(cfg.graph_n))
    if kind == "explicit":
        if not cfg.graph_edges:
            raise ConfigError("graph.kind = explicit needs graph.edges")
        n = int(cfg.graph_n) if cfg.graph_n else 1 + max(max(e) for e in cfg.graph_edges)
        return NetworkGraph(n, tuple(tuple(e) for e in cfg.graph_edges))
    raise ConfigError(f"unknown graph kind {kind!r}")


def _true_indices(cfg: RunConfig, n: int, m: int):
    if cfg.true_rule == "fixed":
        return min(1, m - 1) if cfg.true_index is None else int(cfg.true_index)
    if cfg.true_rule == "list":
        return np.asarray(cfg.true_index, dtype=np.int64)
    if cfg.true_rule == "random":
        return np.random.default_rng(int(cfg.true_seed)).integers(0, m, size=n)
    raise ConfigError(f"unknown true-model rule {cfg.true_rule!r}")


def resolve_network(cfg: RunConfig) -> UncertainNetwork:
    """Build (or load) the network and abort on any admissibility violation."""
    if cfg.network_file:
        net = load_network(cfg.network_file)
    else:
        graph = resolve_graph(cfg)
        if cfg.models_values is not None:
            cands = tuple(CandidateSet(tuple(sorted(v))) for v in cfg.models_values)
            m = min(len(c) for c in cands)
            net = UncertainNetwork(graph, float(cfg.b), cands, np.zeros(graph.node_count, dtype=np.int64))
            net = net.with_true_index(np.broadcast_to(_true_indices(cfg, graph.node_count, m), (graph.node_count,)))
        else:
            m = int(cfg.models_m)
            dmax = graph.max_degree
            if not cfg.b < max_edge_gain(dmax):
                raise ConfigError(
                    f"b={cfg.b} violates b < sqrt(1/(8*d_max)) = {max_edge_gain(dmax):.6g} "
                    f"for maximum degree {dmax}"
                )
            net = build_network(
                graph,
                float(cfg.b),
                m,
                int(cfg.models_seed),
                float(cfg.models_separation),
                _true_indices(cfg, graph.node_count, m),
            )
    problems = validate_network(net)
    if problems:
        lines = "\n".join(f"  - {p.message}" for p in problems[:20])
        more = f"\n  ... and {len(problems) - 20} more" if len(problems) > 20 else ""
        raise ConfigError(f"network fails admissibility ({len(problems)} violations):\n{lines}{more}")
    return net


def resolve_disturbance(cfg: RunConfig, net: UncertainNetwork, seed: int | None = None) -> DisturbanceSpec:
    target = None
    if cfg.disturbance_kind == "confusion":
        if cfg.disturbance_target == "flip":
            target = flipped_targets(net)
        else:
            target = tuple(int(k) for k in cfg.disturbance_target)
    return DisturbanceSpec(
        kind=cfg.disturbance_kind,
        variance=float(cfg.disturbance_variance),
        seed=int(cfg.disturbance_seed if seed is None else seed),
        target_index=target,
        noise_scale=float(cfg.disturbance_noise_scale),
    )


def resolve_x0(cfg: RunConfig, n: int) -> np.ndarray | None:
    if cfg.x0 is None:
        return None
    x0 = np.broadcast_to(np.asarray(cfg.x0, dtype=float), (n,))
    return np.array(x0)


def resolve_gamma(cfg: RunConfig, net: UncertainNetwork) -> float:
    if cfg.gamma_eval is not None:
        return float(cfg.gamma_eval)
    try:
        return bnd.gamma_upper(net.a_bar, net.a_lower)
    except bnd.NoPositiveRootError as exc:
        raise ConfigError(f"{exc}; pass --gamma explicitly") from exc


# ---------------------------------------------------------------------------
# file formats


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def save_network(net: UncertainNetwork, path: Path) -> None:
    _dump_json(net.to_dict(), path)


def load_network(path) -> UncertainNetwork:
    return UncertainNetwork.from_dict(json.loads(Path(path).read_text()))


def _fmt(v) -> str:
    return repr(float(v)) if not isinstance(v, (int, np.integer)) else str(int(v))


def write_node_trace(trace: sim.SimulationTrace, path: Path) -> None:
    """Long-format node trace: ``t,id,kind,value``."""
    rows = ["t,id,kind,value"]
    blocks = [("state", trace.states), ("control", trace.node_controls), ("disturbance", trace.disturbances)]
    if trace.selections is not None:
        blocks.append(("selection", trace.selections))
    for kind, arr in blocks:
        for t, row in enumerate(arr):
            rows.extend(f"{t},{i},{kind},{_fmt(v)}" for i, v in enumerate(row))
    path.write_text("\n".join(rows) + "\n")


def write_edge_trace(trace: sim.SimulationTrace, path: Path) -> None:
    rows = ["t,id,kind,value"]
    for t, row in enumerate(trace.edge_inputs):
        rows.extend(f"{t},{e},edge_input,{_fmt(v)}" for e, v in enumerate(row))
    path.write_text("\n".join(rows) + "\n")


def read_trace(path) -> dict[str, dict[tuple[int, int], float]]:
    out: dict[str, dict[tuple[int, int], float]] = {}
    lines = Path(path).read_text().splitlines()
    for line in lines[1:]:
        t, i, kind, val = line.split(",")
        out.setdefault(kind, {})[(int(t), int(i))] = float(val)
    return out


def write_differences(cmp: sim.Comparison, path: Path) -> None:
    series = cmp.series()
    names = list(series)
    length = max(len(s) for s in series.values())
    rows = ["t," + ",".join(names)]
    for t in range(length):
        cells = [_fmt(series[k][t]) if t < len(series[k]) else "" for k in names]
        rows.append(f"{t}," + ",".join(cells))
    path.write_text("\n".join(rows) + "\n")


def plot_differences(cmp: sim.Comparison, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "dmac"
    fig, ax = plt.subplots(figsize=(6, 3.8))
    ax.plot(cmp.state_diff_l1, marker="o", label=r"$\|x^\dagger - x^\star\|_1$")
    ax.plot(cmp.control_diff_l1, marker="o", label=r"$\|u^\dagger - u^\star\|_1$")
    ax.set_xlabel("Time")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(cfg: RunConfig, output: str | None = None) -> Path:
    net = resolve_network(cfg)
    path = Path(output) if output else Path(cfg.out) / "network.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_network(net, path)
    log.info("wrote %s (%d nodes, %d edges)", path, net.n, net.graph.edge_count)
    return path


def cmd_bounds(network_file: str, out: str | None = None, per_node: bool = False) -> dict:
    net = load_network(network_file)
    problems = validate_network(net)
    if problems:
        raise ConfigError(f"network fails admissibility: {problems[0].message}")
    record = bnd.compute_bounds(net).to_record()
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        _dump_json(record, Path(out) / "bounds.json")
    if not per_node:
        record = {k: v for k, v in record.items() if k != "zero_control_gains"}
    print(json.dumps(record, indent=2, sort_keys=True))
    return record


def cmd_simulate(cfg: RunConfig) -> dict:
    net = resolve_network(cfg)
    spec = resolve_disturbance(cfg, net)
    gamma = resolve_gamma(cfg, net)
    x0 = resolve_x0(cfg, net.n)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    records = {}
    for kind in cfg.controllers:
        trace, metrics = sim.run(net, kind, spec, int(cfg.horizon), gamma, x0)
        write_node_trace(trace, out / f"trace_{kind}_nodes.csv")
        write_edge_trace(trace, out / f"trace_{kind}_edges.csv")
        records[kind] = metrics.to_record()
    _dump_json(records, out / "metrics.json")
    return records


def cmd_compare(cfg: RunConfig) -> sim.Comparison:
    net = resolve_network(cfg)
    spec = resolve_disturbance(cfg, net)
    gamma = resolve_gamma(cfg, net)
    x0 = resolve_x0(cfg, net.n)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cmp = sim.compare(net, spec, int(cfg.horizon), gamma, x0)
    for kind, trace in cmp.traces.items():
        write_node_trace(trace, out / f"trace_{kind}_nodes.csv")
        write_edge_trace(trace, out / f"trace_{kind}_edges.csv")
    _dump_json({k: m.to_record() for k, m in cmp.metrics.items()}, out / "metrics.json")
    write_differences(cmp, out / "differences.csv")
    if cfg.plot:
        plot_differences(cmp, out / "differences.svg")
    return cmp


def cmd_sweep(cfg: RunConfig) -> dict:
    net = resolve_network(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    records = {}
    for kind in cfg.controllers:
        sweep = sim.empirical_gain_sweep(net, kind, cfg.seeds, int(cfg.horizon), float(cfg.disturbance_variance))
        records[kind] = sweep.to_record()
    try:
        b = bnd.compute_bounds(net)
        records["bounds"] = {
            "gamma_lower": b.gamma_lower,
            "gamma_upper": b.gamma_upper,
            "zero_control_gain_max": float(b.zero_control_gains.max()),
        }
    except bnd.NoPositiveRootError:
        pass
    _dump_json(records, out / "sweep.json")
    print(json.dumps(records, indent=2, sort_keys=True))
    return records


# ---------------------------------------------------------------------------
# argument parsing


def _parse_seeds(text: str) -> list[int]:
    if "-" in text and "," not in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def _add_network_flags(p: argparse.ArgumentParser) -> None:
    topo = p.add_mutually_exclusive_group()
    topo.add_argument("--tree", type=int, metavar="N", help="random tree on N nodes")
    topo.add_argument("--line", type=int, metavar="N", help="path graph on N nodes")
    topo.add_argument("--star", type=int, metavar="N", help="star on N nodes")
    topo.add_argument("--network", metavar="FILE", help="load a generated network file")
    p.add_argument("--b", type=float, help="edge input gain")
    p.add_argument("--models", type=int, help="candidate models per node (M)")
    p.add_argument("--separation", type=float, help="minimum gap between candidates")
    p.add_argument("--seed", type=int, help="seed for topology, candidates and true-model draw")
    p.add_argument("--true-index", help="int, comma list, or 'random'")
    p.add_argument("--config", metavar="FILE", help="JSON run configuration")
    p.add_argument("--out", help="output directory")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--horizon", "-T", type=int)
    p.add_argument("--disturbance", choices=("zero", "gaussian", "confusion"))
    p.add_argument("--variance", type=float)
    p.add_argument("--dist-seed", type=int)
    p.add_argument("--noise-scale", type=float)
    p.add_argument("--gamma", type=float, help="gamma for the game cost (default: upper bound)")
    p.add_argument("--x0", type=float, help="uniform initial state")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmac", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a network file")
    _add_network_flags(p)
    p.add_argument("--output", "-o", help="network file path (default OUT/network.json)")

    p = sub.add_parser("bounds", help="l2-gain bounds of a network file")
    p.add_argument("network_file")
    p.add_argument("--out", help="also write OUT/bounds.json")
    p.add_argument("--per-node", action="store_true", help="print per-node zero-control gains")

    p = sub.add_parser("simulate", help="closed-loop run(s)")
    _add_network_flags(p)
    _add_run_flags(p)
    p.add_argument("--controller", action="append", choices=sim.CONTROLLERS)

    p = sub.add_parser("compare", help="minimax vs H-infinity vs zero on one disturbance")
    _add_network_flags(p)
    _add_run_flags(p)
    p.add_argument("--plot", action="store_true", help="write differences.svg")

    p = sub.add_parser("sweep", help="empirical gains over disturbance seeds")
    _add_network_flags(p)
    _add_run_flags(p)
    p.add_argument("--controller", action="append", choices=sim.CONTROLLERS)
    p.add_argument("--seeds", type=_parse_seeds, help="e.g. 0-9 or 1,4,7")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
    cfg = RunConfig.from_mapping(base)
    a = vars(args)
    for flag, kind in (("tree", "tree"), ("line", "line"), ("star", "star")):
        if a.get(flag) is not None:
            cfg.graph_kind, cfg.graph_n, cfg.network_file = kind, a[flag], None
    if a.get("network"):
        cfg.network_file = a["network"]
    if a.get("seed") is not None:
        cfg.graph_seed = cfg.models_seed = cfg.true_seed = a["seed"]
    simple = {
        "b": "b",
        "models": "models_m",
        "separation": "models_separation",
        "out": "out",
        "horizon": "horizon",
        "disturbance": "disturbance_kind",
        "variance": "disturbance_variance",
        "dist_seed": "disturbance_seed",
        "noise_scale": "disturbance_noise_scale",
        "gamma": "gamma_eval",
        "x0": "x0",
        "controller": "controllers",
        "seeds": "seeds",
    }
    for flag, attr in simple.items():
        if a.get(flag) is not None:
            setattr(cfg, attr, a[flag])
    if a.get("plot"):
        cfg.plot = True
    ti = a.get("true_index")
    if ti is not None:
        if ti == "random":
            cfg.true_rule = "random"
        elif "," in ti:
            cfg.true_rule, cfg.true_index = "list", [int(k) for k in ti.split(",")]
        else:
            cfg.true_rule, cfg.true_index = "fixed", int(ti)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "bounds":
            cmd_bounds(args.network_file, args.out, args.per_node)
            return 0
        cfg = config_from_args(args)
        if args.command == "generate":
            cmd_generate(cfg, args.output)
        elif args.command == "simulate":
            cmd_simulate(cfg)
        elif args.command == "compare":
            cmd_compare(cfg)
        elif args.command == "sweep":
            cmd_sweep(cfg)
    except (ConfigError, ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"dmac {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
