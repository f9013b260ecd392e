"""Shared domain types for the differential-testing pipeline.

Every type here is immutable after construction and JSON round-trippable:
``X.from_dict(x.to_dict()) == x`` holds bit-exactly for all of them, which is
what keeps the report schema stable across emit/parse cycles.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaViolationError

# Streams are retained as bounded digests, not full captures.
DIGEST_LIMIT = 64 * 1024

DEFAULT_TIMEOUT_SECS = 300


class TargetKind(enum.Enum):
    NATIVE = "native"
    WASM = "wasm"


class TestStatus(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    TIMEOUT = "timeout"
    CRASH_SIGNAL = "crash_signal"
    NOT_RUN = "not_run"


class RootCauseTag(enum.Enum):
    DIFFERENT_STDLIB = "different_stdlib"
    UNSUPPORTED_SYSCALL_OR_API = "unsupported_syscall_or_api"
    WASM_LANGUAGE_FEATURE = "wasm_language_feature"
    COMPILER_BUG = "compiler_bug"
    UNCLASSIFIED = "unclassified"


class Direction(enum.Enum):
    PASS_NATIVE_FAIL_WASM = "pass_native_fail_wasm"
    FAIL_NATIVE_PASS_WASM = "fail_native_pass_wasm"


def digest(text: str) -> str:
    """Truncate a captured stream to the bounded evidence size."""
    return text[:DIGEST_LIMIT]


@dataclass(frozen=True)
class ProjectSpec:
    """One codebase under test and how to build/run its test suite."""

    name: str
    source_root: Path
    build_script: Path  # relative to source_root
    test_enable_options: tuple[str, ...] = ()
    extra_configure_args: tuple[str, ...] = ()
    workdir: Path = Path("wasmdiff-work")
    timeout_secs: int = DEFAULT_TIMEOUT_SECS
    toolchain_root: Path | None = None
    inject_mode: str = "cache"  # "cache" | "patch"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "source_root": str(self.source_root),
            "build_script": str(self.build_script),
            "test_enable_options": list(self.test_enable_options),
            "extra_configure_args": list(self.extra_configure_args),
            "workdir": str(self.workdir),
            "timeout_secs": self.timeout_secs,
            "toolchain_root": None if self.toolchain_root is None else str(self.toolchain_root),
            "inject_mode": self.inject_mode,
        }

    @staticmethod
    def from_dict(d: dict) -> "ProjectSpec":
        return ProjectSpec(
            name=d["name"],
            source_root=Path(d["source_root"]),
            build_script=Path(d["build_script"]),
            test_enable_options=tuple(d.get("test_enable_options", [])),
            extra_configure_args=tuple(d.get("extra_configure_args", [])),
            workdir=Path(d["workdir"]),
            timeout_secs=d.get("timeout_secs", DEFAULT_TIMEOUT_SECS),
            toolchain_root=Path(d["toolchain_root"]) if d.get("toolchain_root") else None,
            inject_mode=d.get("inject_mode", "cache"),
        )

    def build_dir(self, target: TargetKind) -> Path:
        return self.workdir / target.value


@dataclass(frozen=True)
class TestOutcome:
    """Observed result of one executable test on one target."""

    artifact_id: str
    target: TargetKind
    status: TestStatus
    exit_code: int | None
    stdout_digest: str
    stderr_digest: str
    duration_ms: int

    def __post_init__(self) -> None:
        if self.status is TestStatus.PASS and self.exit_code != 0:
            raise SchemaViolationError(
                f"{self.artifact_id}: pass requires normal termination with exit code 0"
            )
        if self.duration_ms < 0:
            raise SchemaViolationError(f"{self.artifact_id}: negative duration")

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "target": self.target.value,
            "status": self.status.value,
            "exit_code": self.exit_code,
            "stdout_digest": self.stdout_digest,
            "stderr_digest": self.stderr_digest,
            "duration_ms": self.duration_ms,
        }

    @staticmethod
    def from_dict(d: dict) -> "TestOutcome":
        return TestOutcome(
            artifact_id=d["artifact_id"],
            target=TargetKind(d["target"]),
            status=TestStatus(d["status"]),
            exit_code=d["exit_code"],
            stdout_digest=d["stdout_digest"],
            stderr_digest=d["stderr_digest"],
            duration_ms=d["duration_ms"],
        )


def outcome_bit(o: TestOutcome) -> int:
    """Boolean projection of an outcome: 1 iff the test passed."""
    return 1 if o.status is TestStatus.PASS else 0


@dataclass(frozen=True)
class TestPairing:
    """A test name matched across the two targets; either side may be absent."""

    test_name: str
    native: TestOutcome | None
    wasm: TestOutcome | None

    @property
    def complete(self) -> bool:
        return self.native is not None and self.wasm is not None

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "native": None if self.native is None else self.native.to_dict(),
            "wasm": None if self.wasm is None else self.wasm.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TestPairing":
        return TestPairing(
            test_name=d["test_name"],
            native=TestOutcome.from_dict(d["native"]) if d["native"] else None,
            wasm=TestOutcome.from_dict(d["wasm"]) if d["wasm"] else None,
        )


@dataclass(frozen=True)
class SignalMatch:
    """One matched diagnostic pattern plus the excerpt that matched it."""

    pattern: str
    excerpt: str

    def to_dict(self) -> dict:
        return {"pattern": self.pattern, "excerpt": self.excerpt}

    @staticmethod
    def from_dict(d: dict) -> "SignalMatch":
        return SignalMatch(pattern=d["pattern"], excerpt=d["excerpt"])


@dataclass(frozen=True)
class DiscrepancyRecord:
    """A complete pairing whose pass/fail outcomes differ, with a root cause."""

    pairing: TestPairing
    direction: Direction
    root_cause: RootCauseTag
    evidence: tuple[SignalMatch, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.pairing.complete:
            raise SchemaViolationError(
                f"{self.pairing.test_name}: discrepancy requires a complete pairing"
            )
        if abs(outcome_bit(self.pairing.native) - outcome_bit(self.pairing.wasm)) != 1:
            raise SchemaViolationError(
                f"{self.pairing.test_name}: outcomes do not differ"
            )

    def to_dict(self) -> dict:
        return {
            "pairing": self.pairing.to_dict(),
            "direction": self.direction.value,
            "root_cause": self.root_cause.value,
            "evidence": [e.to_dict() for e in self.evidence],
        }

    @staticmethod
    def from_dict(d: dict) -> "DiscrepancyRecord":
        return DiscrepancyRecord(
            pairing=TestPairing.from_dict(d["pairing"]),
            direction=Direction(d["direction"]),
            root_cause=RootCauseTag(d["root_cause"]),
            evidence=tuple(SignalMatch.from_dict(e) for e in d["evidence"]),
        )


def dump_canonical(obj: dict) -> str:
    """Serialize a report dict deterministically (stable bytes for stable input)."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
