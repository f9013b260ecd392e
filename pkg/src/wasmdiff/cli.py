"""Command-line surface: analyze / plan / build / test / diff / run.

Exit codes: 0 = targets equivalent (sum of outcome differences is zero),
1 = discrepancies found, 2 = a build failed (report still emitted),
3 = usage, config, or toolchain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import WasmDiffError
from .model import TargetKind, dump_canonical
from .pipeline import (
    PipelineOptions,
    exit_code_for,
    load_project,
    run_pipeline,
    stage_analyze,
    stage_build,
    stage_diff,
    stage_plan,
    stage_test,
)
from .report import emit_report, verdict_line

EXIT_EQUIVALENT = 0
EXIT_DISCREPANCIES = 1
EXIT_BUILD_FAILED = 2
EXIT_USAGE = 3

SUBCOMMANDS = ("analyze", "plan", "build", "test", "diff", "run")


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    project_config: Path
    overrides: dict = field(default_factory=dict)
    output_format: str = "json"
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand: {self.subcommand}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def _parse_overrides(pairs: list[str]) -> dict:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"--set expects KEY=VALUE, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wasmdiff",
        description="Differential testing of C/C++ test suites between native and wasm builds.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in (
        ("analyze", "scan sources and print the construct report"),
        ("plan", "emit build plans for both targets"),
        ("build", "execute build plans"),
        ("test", "discover, execute, and pair tests"),
        ("diff", "compute discrepancies and emit reports"),
        ("run", "full pipeline: analyze, plan, build, test, diff"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True, help="project config file (JSON)")
        p.add_argument("--format", choices=("json", "markdown"), default="json")
        p.add_argument("--jobs", type=int, default=1, help="parallel build/test jobs")
        p.add_argument(
            "--manual-mode",
            action="store_true",
            help="disable the transformer: raw flags, no memory policy, no preloads",
        )
        p.add_argument("--timeout", type=int, help="per-test budget override (seconds)")
        p.add_argument("--toolchain-root", help="wasm toolchain root (else $WASMDIFF_TOOLCHAIN_ROOT/$EMSDK)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (JSON value or bare string)")
        p.add_argument("--fresh", action="store_true", help="ignore cached stage artifacts")
        p.add_argument("--bug-fingerprints", help="extra known-bug fingerprint table (JSON)")
        if name in ("build", "test"):
            p.add_argument("--target", choices=("native", "wasm", "both"), default="both")
    return parser


def _targets(value: str) -> tuple[TargetKind, ...]:
    if value == "native":
        return (TargetKind.NATIVE,)
    if value == "wasm":
        return (TargetKind.WASM,)
    return (TargetKind.NATIVE, TargetKind.WASM)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0

    try:
        overrides = _parse_overrides(args.set)
        if args.timeout is not None:
            overrides["timeout_secs"] = args.timeout
        invocation = CliInvocation(
            subcommand=args.subcommand,
            project_config=Path(args.config),
            overrides=overrides,
            output_format=args.format,
            jobs=args.jobs,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    opts = PipelineOptions(
        manual=args.manual_mode,
        jobs=invocation.jobs,
        toolchain_root=Path(args.toolchain_root) if args.toolchain_root else None,
        fresh=args.fresh,
        bug_fingerprints_file=Path(args.bug_fingerprints) if args.bug_fingerprints else None,
    )

    try:
        project = load_project(invocation.project_config, invocation.overrides)
        return _dispatch(invocation, project, opts, getattr(args, "target", "both"))
    except WasmDiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(invocation: CliInvocation, project, opts: PipelineOptions, target: str) -> int:
    sub = invocation.subcommand

    if sub == "analyze":
        report = stage_analyze(project, opts)
        if invocation.output_format == "markdown":
            print(_construct_markdown(report), end="")
        else:
            print(dump_canonical(report.to_dict()), end="")
        return EXIT_EQUIVALENT

    if sub == "plan":
        plans = stage_plan(project, opts)
        doc = {t.value: plans[t].to_dict() for t in plans}
        print(dump_canonical(doc), end="")
        return EXIT_EQUIVALENT

    if sub == "build":
        results = stage_build(project, opts, _targets(target))
        failed = False
        for target, result in sorted(results.items(), key=lambda kv: kv[0].value):
            status = "ok" if result.succeeded else "FAILED"
            line = f"{target.value}: {status} ({result.duration_ms} ms)"
            if result.failure is not None:
                line += f" [{result.failure.category.value}]"
                failed = True
            print(line)
        return EXIT_BUILD_FAILED if failed else EXIT_EQUIVALENT

    if sub == "test":
        pairings = stage_test(project, opts, _targets(target))
        doc = {"pairings": [p.to_dict() for p in pairings]}
        print(dump_canonical(doc), end="")
        return EXIT_EQUIVALENT

    if sub == "diff":
        report = stage_diff(project, opts)
        _print_report(report, invocation.output_format)
        return exit_code_for(report)

    if sub == "run":
        report, code = run_pipeline(project, opts)
        _print_report(report, invocation.output_format)
        return code

    raise AssertionError(f"unreachable subcommand {sub}")


def _construct_markdown(report) -> str:
    lines = [
        "# Construct scan",
        "",
        f"- scanned files: {report.scanned_files}",
    ]
    for flag in (
        "uses_exceptions",
        "casts_function_pointers",
        "uses_threads",
        "uses_long_double",
    ):
        hits = report.evidence.get(flag, ())
        spots = ", ".join(f"`{file}:{line}`" for file, line in hits)
        lines.append(f"- {flag}: {getattr(report, flag)}" + (f" ({spots})" if spots else ""))
    if report.path_literals:
        lines.append("- path literals:")
        for lit in report.path_literals:
            lines.append(f"  - `{lit.literal}` at `{lit.file}:{lit.line}`")
    if report.skipped_files:
        lines.append("- skipped files:")
        for file, reason in report.skipped_files:
            lines.append(f"  - `{file}`: {reason}")
    return "\n".join(lines) + "\n"


def _print_report(report, output_format: str) -> None:
    if output_format == "markdown":
        print(emit_report(report, "markdown"), end="")
    else:
        print(emit_report(report, "json"), end="")
    print(f"verdict: {verdict_line(report.discrepancy_count)}", file=sys.stderr)


if __name__ == "__main__":
    raise SystemExit(main())
