"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

from . import __version__


def _fail(msg: str, code: int = 2) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_run(args) -> int:
    from .harness import ExperimentConfig, run_trial, sweep_metadata, write_metadata

    config = ExperimentConfig.load(args.config)
    if args.algorithm:
        import dataclasses

        config = dataclasses.replace(config, algorithm=args.algorithm)
    seed = args.seed if args.seed is not None else config.seeds[0]
    result = run_trial(config, seed, collect_trace=True)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "result.json"), "w") as fh:
        json.dump(result.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(args.out, "trace.jsonl"), "w") as fh:
        for entry in result.trace:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    meta = sweep_metadata(config, axis="", values=[], extra={"seed": seed})
    write_metadata(meta, os.path.join(args.out, "metadata.json"))
    print(
        f"algorithm={result.algorithm} seed={seed} "
        f"accepted={result.accepted} rejected={result.rejected} "
        f"profit={result.profit:.3f}"
    )
    return 0


def cmd_sweep(args) -> int:
    from .harness import (
        ALGORITHMS,
        ExperimentConfig,
        run_sweep,
        sweep_metadata,
        write_csv,
        write_metadata,
    )

    config = ExperimentConfig.load(args.config)
    if args.seeds:
        import dataclasses

        config = dataclasses.replace(config, seeds=tuple(_parse_seeds(args.seeds)))
    values = [_coerce(v) for v in args.values.split(",")]
    algorithms = tuple(args.algorithms.split(",")) if args.algorithms else ALGORITHMS
    rows = run_sweep(config, args.axis, values, algorithms=algorithms, n_jobs=args.jobs)
    write_csv(rows, args.out)
    write_metadata(
        sweep_metadata(config, args.axis, values, extra={"algorithms": list(algorithms)}),
        os.path.splitext(args.out)[0] + ".metadata.json",
    )
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def _coerce(v: str):
    try:
        return int(v)
    except ValueError:
        return v


def cmd_gen_topology(args) -> int:
    from .topologies import CapacitySpec, HostingSpec, barabasi_albert, linear, load_graphml

    capacity = CapacitySpec(args.cap_lo, args.cap_hi)
    hosting = HostingSpec(args.catalog_size, args.hosting_fraction, args.switch_fraction)
    if args.kind == "linear":
        sub = linear(args.n, capacity, hosting, args.seed)
    elif args.kind == "ba":
        sub = barabasi_albert(args.n, args.m, capacity, hosting, args.seed)
    elif args.kind == "graphml":
        if not args.path:
            return _fail("--path is required for --kind graphml")
        sub, report = load_graphml(args.path, capacity, hosting, args.seed)
        print(
            f"imported {report['nodes']} nodes, "
            f"{report['undirected_edges'] or report['directed_edges']} edges"
        )
    else:
        return _fail(f"unknown topology kind {args.kind!r}")
    sub.save(args.out)
    print(f"wrote substrate with {sub.num_nodes} nodes, {sub.num_links} links to {args.out}")
    return 0


def cmd_gen_workload(args) -> int:
    from .substrate import Substrate
    from .workload import WorkloadSpec, generate, save_jsonl

    with open(args.config) as fh:
        spec = WorkloadSpec.from_json(json.load(fh))
    if args.seed is not None:
        import dataclasses

        spec = dataclasses.replace(spec, seed=args.seed)
    substrate = Substrate.load(args.substrate)
    requests = generate(spec, substrate, args.count)
    save_jsonl(requests, substrate.nf_catalog, args.out)
    print(f"wrote {len(requests)} requests to {args.out}")
    return 0


def cmd_verify(args) -> int:
    from .oracle import verify_competitive

    summary = verify_competitive(args.instances, args.seed)
    ok, total = summary["ok"], summary["instances"]
    print(f"{ok}/{total} instances satisfy OPT_int <= 2*xi*ALG")
    for failure in summary["failures"]:
        print(
            f"  seed={failure['seed']} oracle={failure['oracle_profit']:.3f} "
            f"online={failure['online_profit']:.3f} bound={failure['bound']:.3f}",
            file=sys.stderr,
        )
    return 0 if ok == total else 1


def cmd_dump_state(args) -> int:
    from .harness import replay_trace

    trace_path = args.trace
    if os.path.isdir(trace_path):
        trace_path = os.path.join(trace_path, "trace.jsonl")
    meta_path = args.metadata or os.path.join(os.path.dirname(trace_path), "metadata.json")
    if not os.path.exists(trace_path):
        return _fail(f"trace file {trace_path!r} not found")
    if not os.path.exists(meta_path):
        return _fail(f"metadata file {meta_path!r} not found")
    with open(meta_path) as fh:
        metadata = json.load(fh)
    entries = []
    with open(trace_path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(json.loads(line))
    state, ledger = replay_trace(metadata, entries)
    doc = state.snapshot(ledger)
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_dump_transform(args) -> int:
    from .multilayer import MultilayerGraph
    from .substrate import Substrate

    substrate = Substrate.load(args.substrate)
    index = {name: i for i, name in enumerate(substrate.nf_catalog)}
    try:
        chain = [index[name] for name in args.chain.split(",")] if args.chain else []
    except KeyError as exc:
        return _fail(f"unknown NF type {exc}")
    mlg = MultilayerGraph(substrate, tuple(chain))
    text = mlg.to_dot()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


FIGURE_KINDS = ("fig1", "fig2", "fig3", "fig5")

CSV_CONTRACT_MSG = (
    "figures requires the frontend component (frontend/ with a built dist/); "
    "expected input: results CSV with columns axis, algorithm, seed, "
    "accepted_full, accepted_mand, rejected, profit, profit_norm, "
    "mean_link_util, mean_node_util, J, D plus the sweep's .metadata.json"
)


def cmd_figures(args) -> int:
    frontend = args.frontend
    entry = os.path.join(frontend, "dist", "cli.js")
    if not os.path.exists(entry):
        print(CSV_CONTRACT_MSG, file=sys.stderr)
        return 1
    cmd = ["node", entry, "--results", args.results, "--out-dir", args.out_dir]
    if args.kind:
        cmd += ["--kind", args.kind]
    proc = subprocess.run(cmd)
    return proc.returncode


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfvsim",
        description="Online NFV admission control, routing and placement simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one trial")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--algorithm", choices=("approximation", "heuristic", "greedy"))
    p.add_argument("--out", default="run_out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a sweep grid and write a results CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--seeds", help="e.g. 0..19 or 0,1,2")
    p.add_argument("--algorithms", help="comma-separated subset of algorithms")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-topology", help="generate a substrate JSON")
    p.add_argument("--kind", required=True, choices=("linear", "ba", "graphml"))
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--path", help="GraphML input (kind=graphml)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap-lo", type=int, default=1000)
    p.add_argument("--cap-hi", type=int, default=5000)
    p.add_argument("--catalog-size", type=int, default=6)
    p.add_argument("--hosting-fraction", type=float, default=2.0 / 3.0)
    p.add_argument("--switch-fraction", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_topology)

    p = sub.add_parser("gen-workload", help="generate a workload JSON-lines file")
    p.add_argument("--config", required=True, help="WorkloadSpec JSON")
    p.add_argument("--substrate", required=True, help="substrate JSON")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_workload)

    p = sub.add_parser("verify", help="oracle competitive-ratio and invariant suite")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dump-state", help="cost-state snapshot from a run trace")
    p.add_argument("--trace", required=True, help="trace.jsonl or run directory")
    p.add_argument("--metadata", help="metadata.json (default: next to the trace)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_state)

    p = sub.add_parser("dump-transform", help="DOT export of a transform")
    p.add_argument("--substrate", required=True)
    p.add_argument("--chain", default="", help="comma-separated NF type names")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_transform)

    p = sub.add_parser("figures", help="render figures via the frontend component")
    p.add_argument("--results", required=True, help="results CSV (comma-separate for multi)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--kind", choices=FIGURE_KINDS)
    p.add_argument("--frontend", default="frontend")
    p.set_defaults(func=cmd_figures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(str(exc))
    except (ValueError, KeyError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
