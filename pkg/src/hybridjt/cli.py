"""Command-line interface: ``hybridjt inspect | query | bench``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import DEFAULT_THREADS, BenchmarkConfig, run_benchmark
from .caseio import EvidenceFileError, parse_evidence_file, posterior_rows, write_csv
from .datasets import resolve_network
from .exceptions import BifSyntaxError, NetworkError, ZeroProbabilityEvidence
from .inference import DEFAULT_CHUNK, EngineMode, Propagator
from .junction_tree import build_junction_tree, tree_report
from .network import Evidence

EXIT_INPUT = 1
EXIT_CHECKSUM = 3


def _thread_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad thread list {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("thread counts must be positive integers")
    return values


def _mode_list(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    valid = {m.value for m in EngineMode}
    for m in modes:
        if m not in valid:
            raise argparse.ArgumentTypeError(f"unknown mode {m!r} (choose from {', '.join(sorted(valid))})")
    return modes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridjt", description="Junction-tree exact inference on Bayesian networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def net_arg(p):
        p.add_argument("--net", required=True, metavar="PATH",
                       help="BIF file, bundled network name, or grid:ROWSxCOLS[:CARD]")

    p = sub.add_parser("inspect", help="junction-tree statistics for a network")
    net_arg(p)
    p.add_argument("--json", action="store_true", help="emit the full report as JSON")

    p = sub.add_parser("query", help="posteriors for the cases of an evidence file")
    net_arg(p)
    p.add_argument("--evidence-file", metavar="PATH", help="one case per line; omit for a single empty case")
    p.add_argument("--mode", default="hybrid", choices=[m.value for m in EngineMode])
    p.add_argument("--threads", type=_thread_list, default=[1], metavar="N")
    p.add_argument("--chunk", type=int, default=DEFAULT_CHUNK, metavar="N")
    p.add_argument("--output", metavar="PATH", help="write the CSV here instead of standard output")

    p = sub.add_parser("bench", help="time seeded evidence cases across modes and thread counts")
    net_arg(p)
    p.add_argument("--mode", type=_mode_list, default=[m.value for m in EngineMode], metavar="LIST",
                   help="comma-separated subset of seq,inter,intra,hybrid (default: all)")
    p.add_argument("--threads", type=_thread_list, default=list(DEFAULT_THREADS), metavar="LIST")
    p.add_argument("--cases", type=int, default=2000, metavar="N")
    p.add_argument("--evidence-ratio", type=float, default=0.2, metavar="R")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--chunk", type=int, default=DEFAULT_CHUNK, metavar="N")
    p.add_argument("--output", metavar="PATH", help="report CSV path (default: standard output)")
    return parser


def _load(spec):
    net = resolve_network(spec)
    return net, build_junction_tree(net)


def cmd_inspect(args, out) -> int:
    net, tree = _load(args.net)
    report = tree_report(net, tree)
    if args.json:
        report["layers_per_root"] = {str(k): v for k, v in report["layers_per_root"].items()}
        json.dump(report, out, indent=2)
        out.write("\n")
        return 0
    per_root = report.pop("layers_per_root")
    for key, value in report.items():
        out.write(f"{key}: {value}\n")
    counts = sorted(per_root.values())
    out.write(f"layers over candidate roots: min {counts[0]}, max {counts[-1]}\n")
    return 0


def cmd_query(args, out) -> int:
    net, tree = _load(args.net)
    if args.evidence_file:
        cases = parse_evidence_file(Path(args.evidence_file).read_text(encoding="utf-8"), net)
    else:
        cases = [Evidence()]
    rows = []
    with Propagator(tree, args.mode, args.threads[0], args.chunk) as prop:
        for i, ev in enumerate(cases):
            try:
                res = prop.run_case(ev)
            except ZeroProbabilityEvidence:
                res = None
            rows.extend(posterior_rows(i, res, net))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, out)
    return 0


def cmd_bench(args, out) -> int:
    config = BenchmarkConfig(
        args.net, args.cases, args.evidence_ratio, args.threads, args.mode, args.seed, args.chunk, args.output
    )
    net, tree = _load(args.net)
    report = run_benchmark(
        net, tree, config,
        progress=lambda r: print(f"{r.mode.value} t={r.threads}: {r.total_s:.3f}s", file=sys.stderr),
    )
    csv_text = report.to_csv()
    if args.output:
        Path(args.output).write_text(csv_text, encoding="utf-8")
    else:
        out.write(csv_text)
    if not report.checksums_agree:
        print("error: posterior checksums differ between configurations", file=sys.stderr)
        return EXIT_CHECKSUM
    return 0


COMMANDS = {"inspect": cmd_inspect, "query": cmd_query, "bench": cmd_bench}


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout if out is None else out
    try:
        return COMMANDS[args.command](args, out)
    except (BifSyntaxError, NetworkError, EvidenceFileError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
