"""Command-line front end: generate, run, report, check-analytic."""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import analytic, experiments, hypergraph, simulator


def _cmd_generate(args) -> int:
    cfg = experiments.parse_config_file(args.config)
    n_combos, n_instances = experiments.count_instances(cfg)
    print(f"generating {n_instances} instances over {n_combos} combos (n={cfg.n})")
    instances = experiments.build_dataset(cfg)
    manifest = experiments.write_dataset(instances, args.out)
    print(f"wrote {len(instances)} instances, manifest {manifest}")
    return 0


def _cmd_run(args) -> int:
    cfg = experiments.parse_config_file(args.config)
    if args.schemes:
        cfg = dataclasses.replace(cfg, schemes=experiments.parse_schemes(args.schemes))
    instances = experiments.load_dataset(args.dataset)
    ctx = experiments.load_or_derive_context(cfg)
    print(
        f"running {len(instances)} instances x {len(cfg.schemes)} schemes "
        f"x depths {list(cfg.depths)} (reference: {ctx.source_label or 'file'})"
    )
    records = experiments.run_pipeline(instances, cfg, ctx)
    experiments.records_to_csv(records, args.out, include_timestamp=not args.no_timestamp)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_report(args) -> int:
    records = experiments.read_records_csv(args.infile)
    rows = experiments.aggregate_report(records, args.filter)
    experiments.write_report_csv(rows, args.out)
    for row in rows:
        print(f"{row.scheme.value:>2} p={row.p}  mean ratio {row.mean_ratio:.4f}  ({row.count} records)")
    if args.plot:
        experiments.plot_report(rows, args.plot)
        print(f"plot written to {args.plot}")
    return 0


def _cmd_check_analytic(args) -> int:
    instances = experiments.load_dataset(args.dataset)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    failures = 0
    for inst in instances:
        h = inst.graph
        acyclic_ok = not hypergraph.has_short_berge_cycle(h)
        edge_ids = list(range(h.m))
        if len(edge_ids) > args.max_edges:
            edge_ids = list(rng.choice(h.m, size=args.max_edges, replace=False))
        for _ in range(args.angles):
            gamma = float(rng.uniform(-np.pi, np.pi))
            beta = float(rng.uniform(-np.pi / 2, np.pi / 2))
            state = simulator.evolve(h, simulator.AngleSchedule((gamma,), (beta,)))
            for alpha in edge_ids:
                ref = simulator.correlator(state, h.edges[alpha].nodes)
                try:
                    diff = abs(analytic.j_general(h, alpha, beta, gamma) - ref)
                except analytic.ScopeTooLargeError:
                    continue
                worst = max(worst, diff)
                if diff >= args.tolerance:
                    failures += 1
                    print(f"FAIL general {inst.instance_id} edge {alpha}: |diff|={diff:.3e}")
                if acyclic_ok:
                    diff = abs(analytic.j_acyclic(h, alpha, beta, gamma) - ref)
                    worst = max(worst, diff)
                    if diff >= args.tolerance:
                        failures += 1
                        print(f"FAIL acyclic {inst.instance_id} edge {alpha}: |diff|={diff:.3e}")
    status = "ok" if failures == 0 else f"{failures} mismatches"
    print(f"checked {len(instances)} instances: {status} (worst |diff| {worst:.3e})")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hyperqaoa",
        description="QAOA on hypergraph instances: dataset sweeps, angle transfer, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a dataset directory from a config")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    run = sub.add_parser("run", help="run schemes over a dataset and write results CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--dataset", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--schemes", help="comma-separated subset of v,g,gb")
    run.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header")
    run.set_defaults(func=_cmd_run)

    rep = sub.add_parser("report", help="aggregate a results CSV into mean ratios")
    rep.add_argument("--in", dest="infile", required=True)
    rep.add_argument("--filter", choices=("all", "k2only"), default="all")
    rep.add_argument("--out", required=True)
    rep.add_argument("--plot", help="optional plot file (svg/pdf/png by extension)")
    rep.set_defaults(func=_cmd_report)

    chk = sub.add_parser(
        "check-analytic",
        help="compare closed-form correlators against the simulator on a dataset",
    )
    chk.add_argument("--dataset", required=True)
    chk.add_argument("--tolerance", type=float, default=1e-9)
    chk.add_argument("--angles", type=int, default=2, help="angle pairs per instance")
    chk.add_argument("--max-edges", type=int, default=4, help="edges sampled per instance")
    chk.add_argument("--seed", type=int, default=0)
    chk.set_defaults(func=_cmd_check_analytic)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
