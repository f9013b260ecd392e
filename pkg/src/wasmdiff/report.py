"""Discrepancy metric, root-cause tagging, and report emission.

The metric is the sum over complete pairings of |native bit - wasm bit|;
a project is deemed equivalent across targets iff that sum is zero.
Root causes are assigned by first-match-wins signal patterns with a
mandatory Unclassified fallback, never by guesswork.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Sequence

from .build import BuildResult, FailureCategory, FailureClassification
from .errors import SerializationFailureError
from .model import (
    Direction,
    DiscrepancyRecord,
    RootCauseTag,
    SignalMatch,
    TestPairing,
    dump_canonical,
    outcome_bit,
)
from .transform import CompilerSettings

SCHEMA_VERSION = "1"

_EXCERPT_LIMIT = 240


def compute_discrepancies(
    pairings: Sequence[TestPairing],
) -> tuple[int, list[DiscrepancyRecord]]:
    """Sum |o_native - o_wasm| over complete pairings; one record per nonzero term.

    Records come back untagged (Unclassified, no evidence); tagging is a
    separate pass so the metric stays a pure fold.
    """
    records: list[DiscrepancyRecord] = []
    for pairing in pairings:
        if not pairing.complete:
            continue
        diff = outcome_bit(pairing.native) - outcome_bit(pairing.wasm)
        if diff == 0:
            continue
        direction = (
            Direction.PASS_NATIVE_FAIL_WASM if diff > 0 else Direction.FAIL_NATIVE_PASS_WASM
        )
        records.append(
            DiscrepancyRecord(
                pairing=pairing,
                direction=direction,
                root_cause=RootCauseTag.UNCLASSIFIED,
            )
        )
    return len(records), records


@dataclass(frozen=True)
class BugFingerprint:
    """A known-compiler-bug signature matched against wasm-side output."""

    name: str
    pattern: str

    def to_dict(self) -> dict:
        return {"name": self.name, "pattern": self.pattern}


DEFAULT_BUG_FINGERPRINTS = (
    BugFingerprint(
        name="vfs-empty-directory-preload",
        pattern=r"empty director(?:y|ies)[^\n]*(?:missing|not found|not loaded|omitted)"
        r"|(?:missing|omitted)[^\n]*empty director(?:y|ies)",
    ),
)


def load_bug_fingerprints(path) -> tuple[BugFingerprint, ...]:
    """User-extensible fingerprint table: JSON list of {name, pattern}."""
    from pathlib import Path

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    extra = tuple(BugFingerprint(name=e["name"], pattern=e["pattern"]) for e in doc)
    return DEFAULT_BUG_FINGERPRINTS + extra


_SYSCALL_PATTERNS = (
    ("enosys", re.compile(r"ENOSYS")),
    (
        "fork-unavailable",
        re.compile(
            r"\bv?fork\b[^\n]*(?:returned -1|failed|not supported|unsupported|unavailable|not implemented)",
            re.I,
        ),
    ),
    (
        "socket-unsupported",
        re.compile(
            r"\b(?:socket|connect|bind|listen|accept)\w*\b[^\n]*(?:not supported|not implemented|failed|refused)",
            re.I,
        ),
    ),
    ("function-not-implemented", re.compile(r"function not implemented", re.I)),
)

_TRAP_PATTERNS = (
    ("wasm-trap-unreachable", re.compile(r"RuntimeError: unreachable|unreachable executed")),
    (
        "wasm-signature-mismatch",
        re.compile(r"null function or function signature mismatch|indirect call signature mismatch"),
    ),
)

_ERRNO_RE = re.compile(r"\[(\d+)\]|errno[ =:]+(\d+)", re.I)


def _first_line_matching(pattern: re.Pattern, text: str) -> str | None:
    for line in text.splitlines():
        if pattern.search(line):
            return line.strip()[:_EXCERPT_LIMIT]
    return None


def _errno_values(text: str) -> list[str]:
    return [m.group(1) or m.group(2) for m in _ERRNO_RE.finditer(text)]


def _errno_mismatch(native_text: str, wasm_text: str) -> bool:
    """Same text modulo errno digits, but different digits."""
    n_vals, w_vals = _errno_values(native_text), _errno_values(wasm_text)
    if not n_vals or not w_vals or n_vals == w_vals:
        return False
    return _ERRNO_RE.sub("[#]", native_text) == _ERRNO_RE.sub("[#]", wasm_text)


def _reordered_lines(native_text: str, wasm_text: str) -> bool:
    """Same multiset of lines, different order."""
    a, b = native_text.splitlines(), wasm_text.splitlines()
    return len(a) > 1 and a != b and sorted(a) == sorted(b)


def _match_root_cause(
    record: DiscrepancyRecord,
    fingerprints: tuple[BugFingerprint, ...],
) -> tuple[RootCauseTag, tuple[SignalMatch, ...]]:
    native, wasm = record.pairing.native, record.pairing.wasm
    wasm_text = wasm.stdout_digest + "\n" + wasm.stderr_digest

    for name, pattern in _SYSCALL_PATTERNS:
        line = _first_line_matching(pattern, wasm_text)
        if line is not None:
            return RootCauseTag.UNSUPPORTED_SYSCALL_OR_API, (SignalMatch(name, line),)

    for name, pattern in _TRAP_PATTERNS:
        line = _first_line_matching(pattern, wasm.stderr_digest)
        if line is not None:
            return RootCauseTag.WASM_LANGUAGE_FEATURE, (SignalMatch(name, line),)

    for n_stream, w_stream, stream_name in (
        (native.stdout_digest, wasm.stdout_digest, "stdout"),
        (native.stderr_digest, wasm.stderr_digest, "stderr"),
    ):
        if _errno_mismatch(n_stream, w_stream):
            excerpt = f"native {_errno_values(n_stream)} vs wasm {_errno_values(w_stream)} on {stream_name}"
            return RootCauseTag.DIFFERENT_STDLIB, (SignalMatch("errno-mismatch", excerpt),)
        if _reordered_lines(n_stream, w_stream):
            excerpt = f"{stream_name}: same lines, different order"
            return RootCauseTag.DIFFERENT_STDLIB, (SignalMatch("element-ordering", excerpt),)
    # The classic missing-file pair: glibc ENOENT=2 vs the wasm libc's 44.
    if ("[2]" in native.stdout_digest + native.stderr_digest) and (
        "[44]" in wasm_text
    ):
        return RootCauseTag.DIFFERENT_STDLIB, (
            SignalMatch("enoent-errno-pair", "native [2] vs wasm [44]"),
        )

    for fp in fingerprints:
        line = _first_line_matching(re.compile(fp.pattern, re.I), wasm_text)
        if line is not None:
            return RootCauseTag.COMPILER_BUG, (SignalMatch(fp.name, line),)

    return RootCauseTag.UNCLASSIFIED, ()


def tag_root_cause(
    record: DiscrepancyRecord,
    fingerprints: tuple[BugFingerprint, ...] = DEFAULT_BUG_FINGERPRINTS,
) -> RootCauseTag:
    """First-match-wins signal tagging; Unclassified when nothing matches."""
    tag, _ = _match_root_cause(record, fingerprints)
    return tag


def classify_divergence(
    record: DiscrepancyRecord,
    fingerprints: tuple[BugFingerprint, ...] = DEFAULT_BUG_FINGERPRINTS,
    unresolved_literals: Sequence[str] = (),
) -> DiscrepancyRecord:
    """Attach the root-cause tag and its evidence to a discrepancy record.

    When the wasm side failed on a missing file and the build plan had path
    literals it could not preload, the record is additionally annotated as a
    possible preload false positive (reported, never suppressed).
    """
    tag, evidence = _match_root_cause(record, fingerprints)
    if unresolved_literals and record.direction is Direction.PASS_NATIVE_FAIL_WASM:
        wasm_text = record.pairing.wasm.stdout_digest + "\n" + record.pairing.wasm.stderr_digest
        line = _first_line_matching(
            re.compile(r"No such file or directory|ENOENT|errno[ =:]+44", re.I), wasm_text
        )
        if line is not None:
            evidence = evidence + (
                SignalMatch(
                    "possible-preload-false-positive",
                    f"{line} (unresolved literals: {', '.join(sorted(unresolved_literals)[:4])})",
                ),
            )
    return replace(record, root_cause=tag, evidence=evidence)


@dataclass(frozen=True)
class BuildSummary:
    """Build outcome without the full logs (those live on disk)."""

    succeeded: bool
    duration_ms: int
    failure: FailureClassification | None = None
    configure_log_path: str = ""
    build_log_path: str = ""

    @staticmethod
    def from_result(result: BuildResult, log_dir: str = "") -> "BuildSummary":
        return BuildSummary(
            succeeded=result.succeeded,
            duration_ms=result.duration_ms,
            failure=result.failure,
            configure_log_path=f"{log_dir}/configure.log" if log_dir else "",
            build_log_path=f"{log_dir}/build.log" if log_dir else "",
        )

    def to_dict(self) -> dict:
        return {
            "succeeded": self.succeeded,
            "duration_ms": self.duration_ms,
            "failure": None if self.failure is None else self.failure.to_dict(),
            "configure_log_path": self.configure_log_path,
            "build_log_path": self.build_log_path,
        }

    @staticmethod
    def from_dict(d: dict) -> "BuildSummary":
        return BuildSummary(
            succeeded=d["succeeded"],
            duration_ms=d["duration_ms"],
            failure=FailureClassification.from_dict(d["failure"]) if d["failure"] else None,
            configure_log_path=d["configure_log_path"],
            build_log_path=d["build_log_path"],
        )


@dataclass(frozen=True)
class RunReport:
    project: str
    native_build: BuildSummary
    wasm_build: BuildSummary
    pairings: tuple  # tuple[TestPairing, ...]
    records: tuple  # tuple[DiscrepancyRecord, ...]
    settings_used: CompilerSettings
    tool_versions: dict
    schema_version: str = SCHEMA_VERSION

    @property
    def pairings_total(self) -> int:
        return len(self.pairings)

    @property
    def pairings_complete(self) -> int:
        return sum(1 for p in self.pairings if p.complete)

    @property
    def discrepancy_count(self) -> int:
        return len(self.records)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "project": self.project,
            "builds": {
                "native": self.native_build.to_dict(),
                "wasm": self.wasm_build.to_dict(),
            },
            "pairings": {
                "total": self.pairings_total,
                "complete": self.pairings_complete,
                "items": [p.to_dict() for p in self.pairings],
            },
            "discrepancies": {
                "count": self.discrepancy_count,
                "records": [r.to_dict() for r in self.records],
            },
            "settings": self.settings_used.to_dict(),
            "tools": dict(self.tool_versions),
        }

    @staticmethod
    def from_dict(d: dict) -> "RunReport":
        report = RunReport(
            project=d["project"],
            native_build=BuildSummary.from_dict(d["builds"]["native"]),
            wasm_build=BuildSummary.from_dict(d["builds"]["wasm"]),
            pairings=tuple(TestPairing.from_dict(p) for p in d["pairings"]["items"]),
            records=tuple(DiscrepancyRecord.from_dict(r) for r in d["discrepancies"]["records"]),
            settings_used=CompilerSettings.from_dict(d["settings"]),
            tool_versions=dict(d["tools"]),
            schema_version=d["schema_version"],
        )
        if (
            d["pairings"]["total"] != report.pairings_total
            or d["pairings"]["complete"] != report.pairings_complete
            or d["discrepancies"]["count"] != report.discrepancy_count
        ):
            raise SerializationFailureError("report counts disagree with embedded items")
        return report


def verdict_line(count: int) -> str:
    if count == 0:
        return "EQUIVALENT (Σ = 0)"
    return f"NOT EQUIVALENT (Σ = {count})"


_TAG_LABELS = {
    RootCauseTag.DIFFERENT_STDLIB: "Different standard libraries",
    RootCauseTag.UNSUPPORTED_SYSCALL_OR_API: "Unsupported system calls and APIs",
    RootCauseTag.WASM_LANGUAGE_FEATURE: "WebAssembly language features",
    RootCauseTag.COMPILER_BUG: "Compiler bugs",
    RootCauseTag.UNCLASSIFIED: "Unclassified",
}

_FAILURE_LABELS = {
    FailureCategory.UNDEFINED_SYMBOLS: "Undefined symbols",
    FailureCategory.MISSING_THIRD_PARTY: "Missing third-party libraries",
    FailureCategory.TARGET_DEPENDENT_WERROR: "Target-dependent warnings + Werror",
    FailureCategory.ARCH_PLATFORM_SPECIFIC: "Architecture- and platform-specific code",
    FailureCategory.INCOMPATIBLE_OPTIONS: "Incompatible compiler options",
    FailureCategory.SUSPECTED_COMPILER_BUG: "WebAssembly compiler bugs",
    FailureCategory.UNKNOWN: "Unknown",
}


def _markdown(report: RunReport) -> str:
    lines = [
        f"# Differential test report: {report.project}",
        "",
        f"**Verdict: {verdict_line(report.discrepancy_count)}**",
        "",
        "## Builds",
        "",
        "| Target | Succeeded | Duration (ms) | Failure category |",
        "| --- | --- | --- | --- |",
    ]
    for label, summary in (("native", report.native_build), ("wasm", report.wasm_build)):
        category = "-" if summary.failure is None else _FAILURE_LABELS[summary.failure.category]
        lines.append(
            f"| {label} | {'yes' if summary.succeeded else 'no'} | {summary.duration_ms} | {category} |"
        )

    lines += [
        "",
        "## Build failure categories",
        "",
        "| Category | Count |",
        "| --- | --- |",
    ]
    failure_counts = {c: 0 for c in FailureCategory}
    for summary in (report.native_build, report.wasm_build):
        if summary.failure is not None:
            failure_counts[summary.failure.category] += 1
    for category in FailureCategory:
        lines.append(f"| {_FAILURE_LABELS[category]} | {failure_counts[category]} |")

    incomplete = [p.test_name for p in report.pairings if not p.complete]
    lines += [
        "",
        "## Test pairings",
        "",
        f"- total: {report.pairings_total}",
        f"- complete: {report.pairings_complete}",
        f"- incomplete (excluded from the metric): {len(incomplete)}"
        + (f": {', '.join(incomplete)}" if incomplete else ""),
        "",
        "## Discrepancies by root cause",
        "",
        "| Root cause | Count |",
        "| --- | --- |",
    ]
    tag_counts = {t: 0 for t in RootCauseTag}
    for record in report.records:
        tag_counts[record.root_cause] += 1
    for tag in RootCauseTag:
        lines.append(f"| {_TAG_LABELS[tag]} | {tag_counts[tag]} |")

    if report.records:
        lines += ["", "## Records", ""]
        for record in report.records:
            lines.append(
                f"- `{record.pairing.test_name}`: {record.direction.value},"
                f" tagged {_TAG_LABELS[record.root_cause]}"
            )
            for signal in record.evidence:
                lines.append(f"  - {signal.pattern}: `{signal.excerpt}`")

    lines += ["", "## Settings used", ""]
    settings = report.settings_used.to_dict()
    for key in ("feature_flags", "memory_flags", "sanitized_user_flags", "preload_args"):
        values = settings[key]
        lines.append(f"- {key}: {' '.join(values) if values else '(none)'}")

    lines += ["", "## Tool versions", ""]
    for tool in sorted(report.tool_versions):
        lines.append(f"- {tool}: {report.tool_versions[tool]}")
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, format: str = "json") -> str:
    """Render a report document; json is schema-stable and round-trips."""
    if format == "json":
        try:
            return dump_canonical(report.to_dict())
        except (TypeError, ValueError) as exc:
            raise SerializationFailureError(str(exc)) from exc
    if format == "markdown":
        return _markdown(report)
    raise ValueError(f"unknown report format: {format}")


def parse_report(text: str) -> RunReport:
    """Inverse of emit_report(..., 'json')."""
    try:
        return RunReport.from_dict(json.loads(text))
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationFailureError(f"malformed report document: {exc}") from exc
