"""Execute build plans as external processes and classify failures.

Native and wasm builds run in dedicated directories under the project
workdir. Failure classification is a fixed, ordered rule table: the first
category whose signals match wins, so the same logs always classify the
same way.
"""

from __future__ import annotations

import enum
import os
import re
import shutil
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import ToolchainMissingError, WorkdirUnwritableError
from .model import SignalMatch, TargetKind
from .transform import BuildPlan, build_script_patch

_EXCERPT_LIMIT = 240


class FailureCategory(enum.Enum):
    UNDEFINED_SYMBOLS = "undefined_symbols"
    MISSING_THIRD_PARTY = "missing_third_party"
    TARGET_DEPENDENT_WERROR = "target_dependent_werror"
    ARCH_PLATFORM_SPECIFIC = "arch_platform_specific"
    INCOMPATIBLE_OPTIONS = "incompatible_options"
    SUSPECTED_COMPILER_BUG = "suspected_compiler_bug"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FailureClassification:
    category: FailureCategory
    matched_signals: tuple = ()  # tuple[SignalMatch, ...]

    def __post_init__(self) -> None:
        if self.category is not FailureCategory.UNKNOWN and not self.matched_signals:
            raise ValueError("classified failure requires matched signals")

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "matched_signals": [s.to_dict() for s in self.matched_signals],
        }

    @staticmethod
    def from_dict(d: dict) -> "FailureClassification":
        return FailureClassification(
            category=FailureCategory(d["category"]),
            matched_signals=tuple(SignalMatch.from_dict(s) for s in d["matched_signals"]),
        )


@dataclass(frozen=True)
class BuildResult:
    target: TargetKind
    succeeded: bool
    configure_log: str
    build_log: str
    duration_ms: int
    failure: FailureClassification | None = None

    def __post_init__(self) -> None:
        if self.succeeded == (self.failure is not None):
            raise ValueError("failure classification present iff the build failed")

    def to_dict(self) -> dict:
        return {
            "target": self.target.value,
            "succeeded": self.succeeded,
            "configure_log": self.configure_log,
            "build_log": self.build_log,
            "duration_ms": self.duration_ms,
            "failure": None if self.failure is None else self.failure.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "BuildResult":
        return BuildResult(
            target=TargetKind(d["target"]),
            succeeded=d["succeeded"],
            configure_log=d["configure_log"],
            build_log=d["build_log"],
            duration_ms=d["duration_ms"],
            failure=FailureClassification.from_dict(d["failure"]) if d["failure"] else None,
        )


def _lines_matching(pattern: re.Pattern, text: str) -> list[str]:
    return [line.strip()[:_EXCERPT_LIMIT] for line in text.splitlines() if pattern.search(line)]


_UNDEFINED_RE = re.compile(r"undefined symbol|undefined reference to")
_FIND_PACKAGE_RE = re.compile(r"could (?:not|NOT) find ([A-Za-z0-9_]+)", re.I)
_MISSING_INCLUDE_RE = re.compile(
    r"fatal error: '?([\w./+-]+)'?(?:: No such file or directory| file not found)"
)
_PLATFORM_HEADER_RE = re.compile(
    r"^(?:sys|linux|asm|arpa|netinet|net)/[\w.]+$|^(?:windows|winsock2?|intrin|immintrin|x86intrin|emmintrin|cpuid)\.h$"
)
_WERROR_PROMOTION_RE = re.compile(
    r"unused compilation argument|argument unused during compilation"
    r"|warnings being treated as errors|\[-Werror[,\]]"
)
_ARCH_RE = re.compile(
    r"invalid output constraint|unsupported architecture|unknown register name"
    r"|invalid instruction mnemonic|error: .*inline assembly"
)
_BAD_OPTION_RE = re.compile(
    r"unknown argument|unsupported option|unrecognized command[- ]line option"
)
_COMPILER_BUG_RE = re.compile(
    r"PLEASE submit a bug report|internal compiler error|LLVM ERROR|Stack dump:"
)


def _match_missing_third_party(text: str) -> list[SignalMatch]:
    signals = []
    for line in text.splitlines():
        m = _FIND_PACKAGE_RE.search(line)
        if m:
            signals.append(SignalMatch("could-not-find-package", line.strip()[:_EXCERPT_LIMIT]))
            continue
        m = _MISSING_INCLUDE_RE.search(line)
        if m and not _PLATFORM_HEADER_RE.match(m.group(1)):
            signals.append(SignalMatch("missing-nonproject-header", line.strip()[:_EXCERPT_LIMIT]))
    return signals


def _match_werror(text: str) -> list[SignalMatch]:
    if "-Werror" not in text:
        return []
    return [
        SignalMatch("werror-promoted-warning", line)
        for line in _lines_matching(_WERROR_PROMOTION_RE, text)
    ]


def _match_arch_platform(text: str) -> list[SignalMatch]:
    signals = [
        SignalMatch("target-unsupported-construct", line)
        for line in _lines_matching(_ARCH_RE, text)
    ]
    for line in text.splitlines():
        m = _MISSING_INCLUDE_RE.search(line)
        if m and _PLATFORM_HEADER_RE.match(m.group(1)):
            signals.append(SignalMatch("platform-only-header", line.strip()[:_EXCERPT_LIMIT]))
    return signals


# Ordered rule table; the first category with any matched signal wins.
_RULES = (
    (
        FailureCategory.UNDEFINED_SYMBOLS,
        lambda text: [SignalMatch("undefined-symbol", s) for s in _lines_matching(_UNDEFINED_RE, text)],
    ),
    (FailureCategory.MISSING_THIRD_PARTY, _match_missing_third_party),
    (FailureCategory.TARGET_DEPENDENT_WERROR, _match_werror),
    (FailureCategory.ARCH_PLATFORM_SPECIFIC, _match_arch_platform),
    (
        FailureCategory.INCOMPATIBLE_OPTIONS,
        lambda text: [SignalMatch("incompatible-option", s) for s in _lines_matching(_BAD_OPTION_RE, text)],
    ),
    (
        FailureCategory.SUSPECTED_COMPILER_BUG,
        lambda text: [SignalMatch("toolchain-crash", s) for s in _lines_matching(_COMPILER_BUG_RE, text)],
    ),
)


def classify_failure(configure_log: str, build_log: str) -> FailureClassification:
    """Assign exactly one failure category from the captured logs."""
    text = configure_log + "\n" + build_log
    for category, matcher in _RULES:
        signals = matcher(text)
        if signals:
            return FailureClassification(category=category, matched_signals=tuple(signals))
    return FailureClassification(category=FailureCategory.UNKNOWN)


_probe_cache: dict[tuple, bool] = {}


def resolve_tool(name: str, toolchain_root: Path | None = None) -> str:
    """Locate a tool binary, preferring the configured toolchain root."""
    if toolchain_root is not None:
        for candidate in (
            Path(toolchain_root) / name,
            Path(toolchain_root) / "upstream" / "emscripten" / name,
        ):
            if candidate.is_file() and os.access(candidate, os.X_OK):
                return str(candidate)
    found = shutil.which(name)
    if found:
        return found
    raise ToolchainMissingError(
        f"required tool {name!r} not found"
        + (f" under {toolchain_root} or PATH" if toolchain_root else " on PATH")
    )


def preflight_probe(cmd: tuple[str, ...]) -> None:
    """Run a --version probe once per process; raise if the tool is unusable."""
    if cmd in _probe_cache:
        if not _probe_cache[cmd]:
            raise ToolchainMissingError(f"preflight probe failed earlier for {cmd[0]}")
        return
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=60)
        ok = proc.returncode == 0
    except (OSError, subprocess.TimeoutExpired):
        ok = False
    _probe_cache[cmd] = ok
    if not ok:
        raise ToolchainMissingError(f"preflight probe failed: {' '.join(cmd)}")


def tool_version(cmd: list[str]) -> str:
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=60)
    except (OSError, subprocess.TimeoutExpired):
        return "unavailable"
    if proc.returncode != 0:
        return "unavailable"
    first = (proc.stdout or proc.stderr).splitlines()
    return first[0].strip() if first else "unknown"


def collect_tool_versions(toolchain_root: Path | None = None) -> dict[str, str]:
    versions = {
        "cmake": tool_version(["cmake", "--version"]),
        "cc": tool_version(["cc", "--version"]),
        "node": tool_version(["node", "--version"]),
    }
    try:
        emcc = resolve_tool("emcc", toolchain_root)
        versions["emcc"] = tool_version([emcc, "--version"])
    except ToolchainMissingError:
        versions["emcc"] = "unavailable"
    return versions


def _build_env(toolchain_root: Path | None) -> dict[str, str]:
    env = dict(os.environ)
    if toolchain_root is not None:
        env["PATH"] = f"{toolchain_root}{os.pathsep}" + env.get("PATH", "")
    return env


def _resolve_command(cmd: tuple, toolchain_root: Path | None) -> list[str]:
    head = resolve_tool(cmd[0], toolchain_root)
    return [head, *cmd[1:]]


def run_build(
    plan: BuildPlan,
    toolchain_root: Path | None = None,
    jobs: int | None = None,
) -> BuildResult:
    """Configure then build in the plan's dedicated directory, capturing logs."""
    configure_cmd = _resolve_command(plan.configure_cmd, toolchain_root)
    build_cmd = _resolve_command(plan.build_cmd, toolchain_root)
    preflight_probe(("cmake", "--version"))
    if plan.target is TargetKind.WASM:
        # Wrapper scripts reject a bare --version; probing resolution + the
        # wrapped compiler covers the same failure modes.
        resolve_tool(plan.configure_cmd[0], toolchain_root)
        resolve_tool(plan.build_cmd[0], toolchain_root)

    build_dir = Path(plan.build_dir)
    log_dir = build_dir / "logs"
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
        probe = build_dir / ".wasmdiff-writable"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise WorkdirUnwritableError(f"cannot write build dir {build_dir}: {exc}") from exc

    if jobs is not None:
        build_cmd = build_cmd + ["-j", str(jobs)]

    env = _build_env(toolchain_root)
    script_path = None
    original_script = None
    if plan.inject_mode == "patch" and plan.target is TargetKind.WASM and not plan.manual:
        candidate = Path(plan.source_dir) / plan.build_script
        script_path = candidate if candidate.is_file() else None
        if script_path is not None:
            original_script = script_path.read_text(encoding="utf-8")
            script_path.write_text(
                original_script + build_script_patch(plan.settings), encoding="utf-8"
            )

    started = time.monotonic()
    try:
        configure = subprocess.run(
            configure_cmd, cwd=build_dir, capture_output=True, text=True, env=env
        )
        configure_log = configure.stdout + configure.stderr
        (log_dir / "configure.log").write_text(configure_log, encoding="utf-8")
        if configure.returncode != 0:
            duration = int((time.monotonic() - started) * 1000)
            (log_dir / "build.log").write_text("", encoding="utf-8")
            return BuildResult(
                target=plan.target,
                succeeded=False,
                configure_log=configure_log,
                build_log="",
                duration_ms=duration,
                failure=classify_failure(configure_log, ""),
            )

        build = subprocess.run(
            build_cmd, cwd=build_dir, capture_output=True, text=True, env=env
        )
        build_log = build.stdout + build.stderr
        (log_dir / "build.log").write_text(build_log, encoding="utf-8")
        duration = int((time.monotonic() - started) * 1000)
        if build.returncode != 0:
            return BuildResult(
                target=plan.target,
                succeeded=False,
                configure_log=configure_log,
                build_log=build_log,
                duration_ms=duration,
                failure=classify_failure(configure_log, build_log),
            )
        return BuildResult(
            target=plan.target,
            succeeded=True,
            configure_log=configure_log,
            build_log=build_log,
            duration_ms=duration,
        )
    finally:
        if script_path is not None and original_script is not None:
            script_path.write_text(original_script, encoding="utf-8")
