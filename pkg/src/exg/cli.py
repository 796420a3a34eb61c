"""``exg`` command line: trace -> build -> analyze -> export.

Exit codes: 0 success, 2 bad usage or unreadable input, 1 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from exg import io as exgio
from exg.analysis import analyze
from exg.errors import ExgError, InvariantViolation
from exg.graph import BuildConfig, DependencyKind, DepPolicy, TableMode, build_eg
from exg.kernels import KERNEL_PARAMS, Grain, KernelSpec
from exg.trace import read_trace, write_trace

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2

_PARAM_FLAGS = ("n", "nx", "nt", "len", "len1", "len2")


class UsageError(ExgError):
    pass


def _add_kernel_args(p):
    p.add_argument("--kernel", required=True, choices=sorted(KERNEL_PARAMS))
    for name in _PARAM_FLAGS:
        p.add_argument(f"--{name}", type=int, default=None, metavar="N")
    p.add_argument("--grain", required=True, choices=[g.value for g in Grain])


def _kernel_spec(args) -> KernelSpec:
    wanted = KERNEL_PARAMS[args.kernel]
    given = {k: getattr(args, k) for k in _PARAM_FLAGS if getattr(args, k) is not None}
    extra = sorted(set(given) - set(wanted))
    if extra:
        raise UsageError(f"--{extra[0]} does not apply to kernel {args.kernel}")
    missing = [k for k in wanted if k not in given]
    if missing:
        raise UsageError(f"kernel {args.kernel} needs --{missing[0]}")
    return KernelSpec(args.kernel, given, Grain(args.grain))


def _parse_kinds(text):
    kinds = set()
    for tok in text.split(","):
        tok = tok.strip()
        if tok.upper() not in ("RAW", "WAR", "WAW"):
            raise argparse.ArgumentTypeError(f"unknown dependency kind {tok!r}")
        kinds.add(DependencyKind(tok.upper()))
    return frozenset(kinds)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="exg", description="Execution-graph parallelism discovery toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="run an instrumented kernel and write its trace")
    _add_kernel_args(p)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("build", help="build execution graph(s) from a trace file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--table", choices=[m.value for m in TableMode], default="multi-reader")
    p.add_argument("--dep", choices=[d.value for d in DepPolicy], default="ext")
    p.add_argument("--kinds", type=_parse_kinds, default=frozenset({DependencyKind.RAW}))

    p = sub.add_parser("analyze", help="analyze a graph file and write a report")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("export", help="convert a graph or report file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--format", required=True)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("demo", help="trace, build, analyze and export in one go")
    _add_kernel_args(p)
    p.add_argument("-o", "--output", required=True, help="output directory")
    return parser


def _write_text(path, text):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def graph_output_paths(out_path, trace_ids):
    """One path per trace id; ``g.json`` becomes ``g.<id>.json`` when there are several."""
    out = Path(out_path)
    if len(trace_ids) <= 1:
        return {tid: out for tid in trace_ids}
    return {tid: out.with_name(f"{out.stem}.{tid}{out.suffix}") for tid in trace_ids}


def cmd_trace(spec: KernelSpec, out_path) -> int:
    trace = spec.run().trace
    with open(out_path, "wb") as fh:
        write_trace(trace, fh)
    return EXIT_OK


def cmd_build(in_path, out_path, cfg: BuildConfig = BuildConfig()) -> int:
    try:
        with open(in_path, "rb") as fh:
            trace = read_trace(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {in_path}: {exc}") from None
    graphs = build_eg(trace, cfg)
    for tid, path in graph_output_paths(out_path, sorted(graphs)).items():
        _write_text(path, exgio.dumps_graph(graphs[tid]))
    return EXIT_OK


def cmd_analyze(in_path, report_path, stdout=None) -> int:
    g = exgio.loads_graph(_read_text(in_path))
    rep = analyze(g)
    _write_text(report_path, exgio.dumps_report(rep))
    print(rep.summary(), file=stdout or sys.stdout)
    return EXIT_OK


def cmd_export(in_path, fmt, out_path) -> int:
    if fmt not in ("dot", "structured"):
        raise UsageError(f"unknown export format {fmt!r} (expected dot or structured)")
    doc = exgio.load_document(_read_text(in_path))
    text = exgio.to_dot(doc) if fmt == "dot" else exgio.to_structured(doc)
    _write_text(out_path, text)
    return EXIT_OK


def cmd_demo(spec: KernelSpec, out_dir, stdout=None) -> int:
    """Run every stage, leaving each intermediate file in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / "trace.exg"
    graph_path = out / "graph.json"
    cmd_trace(spec, trace_path)
    cmd_build(trace_path, graph_path)
    with open(trace_path, "rb") as fh:
        tids = sorted(read_trace(fh).trace_ids())
    for tid, gpath in graph_output_paths(graph_path, tids).items():
        suffix = f".{tid}" if len(tids) > 1 else ""
        report = out / f"report{suffix}.json"
        cmd_analyze(gpath, report, stdout)
        cmd_export(gpath, "dot", out / f"graph{suffix}.dot")
        cmd_export(report, "dot", out / f"quotient{suffix}.dot")
    return EXIT_OK


def run(argv=None, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        if args.command == "trace":
            return cmd_trace(_kernel_spec(args), args.output)
        if args.command == "build":
            cfg = BuildConfig(TableMode(args.table), DepPolicy(args.dep), args.kinds)
            return cmd_build(args.input, args.output, cfg)
        if args.command == "analyze":
            return cmd_analyze(args.input, args.output, stdout)
        if args.command == "export":
            return cmd_export(args.input, args.format, args.output)
        if args.command == "demo":
            return cmd_demo(_kernel_spec(args), args.output, stdout)
    except InvariantViolation as exc:
        print(f"exg: internal error: {exc}", file=stderr)
        return EXIT_INTERNAL
    except (ExgError, ValueError, OSError) as exc:
        print(f"exg: error: {exc}", file=stderr)
        return EXIT_USAGE
    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
