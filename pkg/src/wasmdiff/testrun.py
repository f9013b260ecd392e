"""Discover and execute test artifacts in both build trees.

Discovery prefers the build system's own test manifest (CTestTestfile.cmake,
followed recursively through subdirs). When no usable manifest exists the
fallback is a filesystem walk: ELF files with the executable bit for the
native tree, .js hosts with a same-stem .wasm sibling for the wasm tree.

Execution is hermetic: a fixed environment allowlist, the artifact's own
directory as cwd, and a hard per-test budget. Tests run argument-free;
artifacts demanding arguments simply record their failing exit.
"""

from __future__ import annotations

import enum
import logging
import os
import re
import shutil
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import RuntimeMissingError, SpawnFailureError
from .model import TargetKind, TestOutcome, TestPairing, TestStatus, digest

log = logging.getLogger(__name__)

ENV_ALLOWLIST = (
    "PATH",
    "HOME",
    "TMPDIR",
    "NODE_PATH",
    "EMSDK",
    "EM_CONFIG",
    "EM_CACHE",
    "WASMDIFF_TOOLCHAIN_ROOT",
)

_EXCLUDED_DIRS = {"CMakeFiles", "Testing", "logs", ".git"}


class RunnerKind(enum.Enum):
    DIRECT_EXECUTABLE = "direct_executable"
    WASM_HOST = "wasm_host"


@dataclass(frozen=True)
class TestArtifact:
    test_name: str
    target: TargetKind
    path: str
    runner_kind: RunnerKind
    declared_workdir: str

    def __post_init__(self) -> None:
        expected = (
            RunnerKind.DIRECT_EXECUTABLE
            if self.target is TargetKind.NATIVE
            else RunnerKind.WASM_HOST
        )
        if self.runner_kind is not expected:
            raise ValueError(f"{self.test_name}: {self.target.value} artifacts are {expected.value}")

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "target": self.target.value,
            "path": self.path,
            "runner_kind": self.runner_kind.value,
            "declared_workdir": self.declared_workdir,
        }

    @staticmethod
    def from_dict(d: dict) -> "TestArtifact":
        return TestArtifact(
            test_name=d["test_name"],
            target=TargetKind(d["target"]),
            path=d["path"],
            runner_kind=RunnerKind(d["runner_kind"]),
            declared_workdir=d["declared_workdir"],
        )


_CMAKE_TOKEN_RE = re.compile(r'\[=*\[.*?\]=*\]|"(?:[^"\\]|\\.)*"|\(|\)|[^\s()"]+', re.S)


def _unquote_cmake(token: str) -> str:
    if token.startswith('"') and token.endswith('"'):
        return token[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    m = re.fullmatch(r"\[(=*)\[(.*)\]\1\]", token, re.S)
    if m:
        return m.group(2)
    return token


def parse_ctest_manifest(manifest: Path) -> list[tuple[str, list[str], str]]:
    """(test name, command, base dir) entries from a CTestTestfile.cmake.

    subdirs() are followed recursively; relative command paths must be
    resolved against each entry's own base dir, not the root manifest's.
    """
    entries: list[tuple[str, list[str], str]] = []
    try:
        text = manifest.read_text(encoding="utf-8", errors="replace")
    except OSError:
        return entries
    tokens = _CMAKE_TOKEN_RE.findall(text)
    i = 0
    while i < len(tokens):
        word = tokens[i].lower()
        if word in ("add_test", "subdirs") and i + 1 < len(tokens) and tokens[i + 1] == "(":
            args = []
            j = i + 2
            while j < len(tokens) and tokens[j] != ")":
                args.append(_unquote_cmake(tokens[j]))
                j += 1
            if word == "add_test" and len(args) >= 2:
                entries.append((args[0], args[1:], str(manifest.parent)))
            elif word == "subdirs" and args:
                sub = manifest.parent / args[0] / "CTestTestfile.cmake"
                if sub.is_file():
                    entries.extend(parse_ctest_manifest(sub))
            i = j
        i += 1
    return entries


def _is_elf(path: Path) -> bool:
    try:
        with path.open("rb") as fh:
            return fh.read(4) == b"\x7fELF"
    except OSError:
        return False


def _wasm_sibling(path: Path) -> bool:
    return path.with_suffix(".wasm").is_file()


def _artifact_for(path: Path, target: TargetKind) -> TestArtifact | None:
    if target is TargetKind.NATIVE:
        if not (path.is_file() and os.access(path, os.X_OK) and _is_elf(path)):
            return None
        kind = RunnerKind.DIRECT_EXECUTABLE
    else:
        if path.suffix != ".js" or not path.is_file() or not _wasm_sibling(path):
            return None
        kind = RunnerKind.WASM_HOST
    return TestArtifact(
        test_name=path.stem,
        target=target,
        path=str(path),
        runner_kind=kind,
        declared_workdir=str(path.parent),
    )


def _from_manifest(build_dir: Path, target: TargetKind) -> list[TestArtifact]:
    manifest = build_dir / "CTestTestfile.cmake"
    if not manifest.is_file():
        return []
    artifacts: list[TestArtifact] = []
    seen_paths: set[str] = set()
    for _name, command, base_dir in parse_ctest_manifest(manifest):
        # Pick the artifact file out of the registered command: the .js module
        # for wasm (possibly behind a host-runtime word), the binary otherwise.
        # Old-signature add_test entries register the suffixless name, so the
        # wasm side also probes command[0] + ".js".
        if target is TargetKind.WASM:
            candidates = [c for c in command if c.endswith(".js")]
            if not candidates and command:
                candidates = [command[0] + ".js"]
        else:
            candidates = command[:1]
        if not candidates:
            continue
        path = Path(candidates[0])
        if not path.is_absolute():
            path = Path(base_dir) / path
        artifact = _artifact_for(path, target)
        if artifact is None or artifact.path in seen_paths:
            continue
        seen_paths.add(artifact.path)
        artifacts.append(artifact)
    return sorted(artifacts, key=lambda a: a.path)


def _walk_files(build_dir: Path) -> list[Path]:
    out = []
    for root, dirs, files in os.walk(build_dir):
        dirs[:] = sorted(d for d in dirs if d not in _EXCLUDED_DIRS)
        for name in sorted(files):
            out.append(Path(root) / name)
    return out


def discover_tests(build_dir: str | Path, target: TargetKind) -> list[TestArtifact]:
    """Find executable tests under a finished build tree."""
    build_dir = Path(build_dir)
    artifacts = _from_manifest(build_dir, target)
    if artifacts:
        return artifacts
    seen_names: set[str] = set()
    for path in _walk_files(build_dir):
        artifact = _artifact_for(path, target)
        if artifact is None or artifact.test_name in seen_names:
            continue
        seen_names.add(artifact.test_name)
        artifacts.append(artifact)
    artifacts.sort(key=lambda a: a.path)
    if not artifacts:
        log.warning("no tests found under %s for %s", build_dir, target.value)
    return artifacts


def _allowlisted_env() -> dict[str, str]:
    env = {k: os.environ[k] for k in ENV_ALLOWLIST if k in os.environ}
    env["LC_ALL"] = "C"
    env["LANG"] = "C"
    return env


def execute_test(
    artifact: TestArtifact, timeout_secs: int, node_cmd: str = "node"
) -> TestOutcome:
    """Run one artifact under its budget and record the observable outcome."""
    if artifact.runner_kind is RunnerKind.WASM_HOST:
        runtime = shutil.which(node_cmd)
        if runtime is None:
            raise RuntimeMissingError(f"wasm host runtime {node_cmd!r} not found")
        cmd = [runtime, artifact.path]
    else:
        cmd = [artifact.path]

    started = time.monotonic()
    try:
        proc = subprocess.run(
            cmd,
            cwd=artifact.declared_workdir,
            env=_allowlisted_env(),
            capture_output=True,
            timeout=timeout_secs,
        )
    except subprocess.TimeoutExpired as exc:
        elapsed = max(int((time.monotonic() - started) * 1000), timeout_secs * 1000)
        return TestOutcome(
            artifact_id=artifact.test_name,
            target=artifact.target,
            status=TestStatus.TIMEOUT,
            exit_code=None,
            stdout_digest=digest(_decode(exc.stdout)),
            stderr_digest=digest(_decode(exc.stderr)),
            duration_ms=elapsed,
        )
    except OSError as exc:
        raise SpawnFailureError(f"{artifact.test_name}: {exc}") from exc

    elapsed = int((time.monotonic() - started) * 1000)
    if proc.returncode == 0:
        status = TestStatus.PASS
    elif proc.returncode < 0:
        status = TestStatus.CRASH_SIGNAL
    else:
        status = TestStatus.FAIL
    return TestOutcome(
        artifact_id=artifact.test_name,
        target=artifact.target,
        status=status,
        exit_code=proc.returncode,
        stdout_digest=digest(_decode(proc.stdout)),
        stderr_digest=digest(_decode(proc.stderr)),
        duration_ms=elapsed,
    )


def _decode(data: bytes | str | None) -> str:
    if data is None:
        return ""
    if isinstance(data, bytes):
        return data.decode("utf-8", errors="replace")
    return data


def run_suite(
    artifacts: list[TestArtifact],
    timeout_secs: int,
    jobs: int = 1,
    node_cmd: str = "node",
) -> list[TestOutcome]:
    """Execute artifacts (concurrently up to jobs); spawn failures become NotRun."""

    def one(artifact: TestArtifact) -> TestOutcome:
        try:
            return execute_test(artifact, timeout_secs, node_cmd)
        except SpawnFailureError as exc:
            return TestOutcome(
                artifact_id=artifact.test_name,
                target=artifact.target,
                status=TestStatus.NOT_RUN,
                exit_code=None,
                stdout_digest="",
                stderr_digest=digest(str(exc)),
                duration_ms=0,
            )

    if jobs <= 1:
        outcomes = [one(a) for a in artifacts]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, artifacts))
    return sorted(outcomes, key=lambda o: o.artifact_id)


def pair_tests(
    native: list[TestOutcome], wasm: list[TestOutcome]
) -> list[TestPairing]:
    """Match outcomes by exact test name; unmatched sides stay incomplete."""
    by_name_native: dict[str, TestOutcome] = {}
    for outcome in native:
        if outcome.artifact_id in by_name_native:
            raise ValueError(f"duplicate native test name: {outcome.artifact_id}")
        by_name_native[outcome.artifact_id] = outcome
    by_name_wasm: dict[str, TestOutcome] = {}
    for outcome in wasm:
        if outcome.artifact_id in by_name_wasm:
            raise ValueError(f"duplicate wasm test name: {outcome.artifact_id}")
        by_name_wasm[outcome.artifact_id] = outcome
    names = sorted(set(by_name_native) | set(by_name_wasm))
    return [
        TestPairing(
            test_name=name,
            native=by_name_native.get(name),
            wasm=by_name_wasm.get(name),
        )
        for name in names
    ]
