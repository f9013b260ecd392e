"""Stage functions wiring the whole pipeline, with artifacts cached on disk.

Each stage persists its result as JSON under the project workdir so stages
are resumable, auditable, and bit-exactly reusable: running the stage
subcommands in order produces the same report as one `run` invocation.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .build import (
    BuildResult,
    FailureCategory,
    collect_tool_versions,
    run_build,
)
from .config import load_project_config
from .model import ProjectSpec, TargetKind, TestOutcome, TestPairing, dump_canonical
from .report import (
    BuildSummary,
    DEFAULT_BUG_FINGERPRINTS,
    RunReport,
    classify_divergence,
    compute_discrepancies,
    emit_report,
    load_bug_fingerprints,
)
from .scanner import ConstructReport, scan_sources
from .testrun import discover_tests, pair_tests, run_suite
from .transform import BuildPlan, build_plan, suggest_port_flags

log = logging.getLogger(__name__)

TOOLCHAIN_ROOT_ENV = "WASMDIFF_TOOLCHAIN_ROOT"
NODE_CMD_ENV = "WASMDIFF_NODE"


@dataclass
class PipelineOptions:
    manual: bool = False
    jobs: int = 1
    toolchain_root: Path | None = None
    fresh: bool = False
    bug_fingerprints_file: Path | None = None

    @property
    def node_cmd(self) -> str:
        return os.environ.get(NODE_CMD_ENV, "node")


def effective_toolchain_root(
    project: ProjectSpec, opts: PipelineOptions
) -> Path | None:
    if opts.toolchain_root is not None:
        return opts.toolchain_root
    if project.toolchain_root is not None:
        return project.toolchain_root
    for var in (TOOLCHAIN_ROOT_ENV, "EMSDK"):
        if os.environ.get(var):
            return Path(os.environ[var])
    return None


def _artifact_path(project: ProjectSpec, name: str, opts: PipelineOptions) -> Path:
    # Manual-mode artifacts live beside checked-mode ones so both stage
    # caches stay valid when the two modes are compared in one workdir.
    if opts.manual and name != "construct_report.json":
        stem, dot, ext = name.rpartition(".")
        name = f"{stem}.manual{dot}{ext}"
    return project.workdir / name


def _write_artifact(project: ProjectSpec, name: str, doc: dict, opts: PipelineOptions) -> None:
    path = _artifact_path(project, name, opts)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_canonical(doc), encoding="utf-8")


def _read_artifact(project: ProjectSpec, name: str, opts: PipelineOptions) -> dict | None:
    if opts.fresh:
        return None
    path = _artifact_path(project, name, opts)
    if not path.is_file():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def stage_analyze(project: ProjectSpec, opts: PipelineOptions) -> ConstructReport:
    cached = _read_artifact(project, "construct_report.json", opts)
    if cached is not None:
        return ConstructReport.from_dict(cached)
    report = scan_sources(project.source_root)
    _write_artifact(project, "construct_report.json", report.to_dict(), opts)
    return report


def stage_plan(
    project: ProjectSpec, opts: PipelineOptions
) -> dict[TargetKind, BuildPlan]:
    plans: dict[TargetKind, BuildPlan] = {}
    report = None
    for target in (TargetKind.NATIVE, TargetKind.WASM):
        name = f"plan_{target.value}.json"
        cached = _read_artifact(project, name, opts)
        if cached is not None and cached.get("manual") == opts.manual:
            plans[target] = BuildPlan.from_dict(cached)
            continue
        if report is None:
            report = stage_analyze(project, opts)
        plans[target] = build_plan(project, report, target, manual=opts.manual)
        _write_artifact(project, name, plans[target].to_dict(), opts)
    return plans


def stage_build(
    project: ProjectSpec,
    opts: PipelineOptions,
    targets: tuple[TargetKind, ...] = (TargetKind.NATIVE, TargetKind.WASM),
) -> dict[TargetKind, BuildResult]:
    plans = stage_plan(project, opts)
    toolchain_root = effective_toolchain_root(project, opts)
    results: dict[TargetKind, BuildResult] = {}
    for target in targets:
        name = f"build_{target.value}.json"
        cached = _read_artifact(project, name, opts)
        if cached is not None:
            results[target] = BuildResult.from_dict(cached)
            continue
        result = run_build(plans[target], toolchain_root=toolchain_root, jobs=opts.jobs)
        if (
            target is TargetKind.WASM
            and not result.succeeded
            and not opts.manual
            and result.failure is not None
            and result.failure.category is FailureCategory.MISSING_THIRD_PARTY
        ):
            ports = suggest_port_flags(result.configure_log, result.build_log)
            if ports:
                log.info("retrying wasm build with port flags: %s", " ".join(ports))
                report = stage_analyze(project, opts)
                retry_plan = build_plan(
                    project, report, target, manual=False, extra_feature_flags=ports
                )
                _write_artifact(
                    project, f"plan_{target.value}.json", retry_plan.to_dict(), opts
                )
                plans[target] = retry_plan
                result = run_build(retry_plan, toolchain_root=toolchain_root, jobs=opts.jobs)
        results[target] = result
        _write_artifact(project, name, result.to_dict(), opts)
    return results


def stage_test(
    project: ProjectSpec,
    opts: PipelineOptions,
    targets: tuple[TargetKind, ...] = (TargetKind.NATIVE, TargetKind.WASM),
) -> list[TestPairing]:
    builds = stage_build(project, opts, targets)
    plans = stage_plan(project, opts)
    outcomes: dict[TargetKind, list[TestOutcome]] = {t: [] for t in targets}
    for target in targets:
        name = f"outcomes_{target.value}.json"
        cached = _read_artifact(project, name, opts)
        if cached is not None:
            outcomes[target] = [TestOutcome.from_dict(o) for o in cached["outcomes"]]
            continue
        if not builds[target].succeeded:
            log.warning("skipping %s tests: build failed", target.value)
            outcomes[target] = []
        else:
            artifacts = discover_tests(Path(plans[target].build_dir), target)
            outcomes[target] = run_suite(
                artifacts, project.timeout_secs, jobs=opts.jobs, node_cmd=opts.node_cmd
            )
        _write_artifact(
            project, name, {"outcomes": [o.to_dict() for o in outcomes[target]]}, opts
        )
    pairings = pair_tests(
        outcomes.get(TargetKind.NATIVE, []), outcomes.get(TargetKind.WASM, [])
    )
    _write_artifact(
        project, "pairings.json", {"pairings": [p.to_dict() for p in pairings]}, opts
    )
    return pairings


def stage_diff(project: ProjectSpec, opts: PipelineOptions) -> RunReport:
    cached_pairings = _read_artifact(project, "pairings.json", opts)
    if cached_pairings is not None:
        pairings = [TestPairing.from_dict(p) for p in cached_pairings["pairings"]]
    else:
        pairings = stage_test(project, opts)

    builds = stage_build(project, opts)
    plans = stage_plan(project, opts)
    fingerprints = DEFAULT_BUG_FINGERPRINTS
    if opts.bug_fingerprints_file is not None:
        fingerprints = load_bug_fingerprints(opts.bug_fingerprints_file)

    _count, raw_records = compute_discrepancies(pairings)
    records = tuple(
        classify_divergence(
            r,
            fingerprints=fingerprints,
            unresolved_literals=plans[TargetKind.WASM].unresolved_literals,
        )
        for r in raw_records
    )
    toolchain_root = effective_toolchain_root(project, opts)
    report = RunReport(
        project=project.name,
        native_build=BuildSummary.from_result(
            builds[TargetKind.NATIVE],
            log_dir=str(Path(plans[TargetKind.NATIVE].build_dir) / "logs"),
        ),
        wasm_build=BuildSummary.from_result(
            builds[TargetKind.WASM],
            log_dir=str(Path(plans[TargetKind.WASM].build_dir) / "logs"),
        ),
        pairings=tuple(pairings),
        records=records,
        settings_used=plans[TargetKind.WASM].settings,
        tool_versions=collect_tool_versions(toolchain_root),
    )
    (project.workdir / "report.json").write_text(emit_report(report, "json"), encoding="utf-8")
    (project.workdir / "report.md").write_text(emit_report(report, "markdown"), encoding="utf-8")
    return report


def exit_code_for(report: RunReport) -> int:
    """0 = equivalent, 1 = discrepancies, 2 = a build failed."""
    if not report.native_build.succeeded or not report.wasm_build.succeeded:
        return 2
    return 0 if report.discrepancy_count == 0 else 1


def run_pipeline(project: ProjectSpec, opts: PipelineOptions) -> tuple[RunReport, int]:
    """analyze -> plan -> build both -> test -> diff, emitting both report formats."""
    report = stage_diff(project, opts)
    return report, exit_code_for(report)


def load_project(config_path: str | Path, overrides: dict | None = None) -> ProjectSpec:
    return load_project_config(config_path, overrides)


__all__ = [
    "PipelineOptions",
    "run_pipeline",
    "stage_analyze",
    "stage_plan",
    "stage_build",
    "stage_test",
    "stage_diff",
    "exit_code_for",
    "load_project",
    "effective_toolchain_root",
]
