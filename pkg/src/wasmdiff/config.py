"""Project configuration ingestion and validation.

The config file is JSON with the keys documented in the README:
name, source_root, build_script, test_enable_options[], extra_configure_args[],
workdir, timeout_secs, and the optional toolchain_root / inject_mode.
Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import BadPathError, MissingFieldError, SchemaViolationError
from .model import DEFAULT_TIMEOUT_SECS, ProjectSpec

_REQUIRED = ("name", "source_root", "build_script", "workdir")
_KNOWN = _REQUIRED + (
    "test_enable_options",
    "extra_configure_args",
    "timeout_secs",
    "toolchain_root",
    "inject_mode",
)


def _string_list(doc: dict, key: str) -> tuple[str, ...]:
    value = doc.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaViolationError(f"{key} must be a list of strings")
    return tuple(value)


def _is_within(inner: Path, outer: Path) -> bool:
    try:
        inner.relative_to(outer)
        return True
    except ValueError:
        return False


def load_project_config(path: str | os.PathLike, overrides: dict | None = None) -> ProjectSpec:
    """Read and validate a project config file into a ProjectSpec.

    overrides (e.g. from --set/--timeout CLI flags) replace document values
    before validation.
    """
    config_path = Path(path)
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BadPathError(f"cannot read config {config_path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolationError(f"{config_path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolationError(f"{config_path}: top level must be an object")
    if overrides:
        doc = {**doc, **overrides}

    for key in _REQUIRED:
        if key not in doc:
            raise MissingFieldError(f"{config_path}: missing required key {key!r}")
    unknown = sorted(set(doc) - set(_KNOWN))
    if unknown:
        raise SchemaViolationError(f"{config_path}: unknown keys {unknown}")
    if not isinstance(doc["name"], str) or not doc["name"]:
        raise SchemaViolationError(f"{config_path}: name must be a nonempty string")

    base = config_path.resolve().parent
    source_root = (base / doc["source_root"]).resolve()
    workdir = (base / doc["workdir"]).resolve()
    build_script = Path(doc["build_script"])

    if not source_root.is_dir():
        raise BadPathError(f"source_root does not exist: {source_root}")
    if build_script.is_absolute():
        raise SchemaViolationError("build_script must be relative to source_root")
    if not (source_root / build_script).is_file():
        raise BadPathError(f"build_script not found: {source_root / build_script}")
    if _is_within(workdir, source_root) or _is_within(source_root, workdir):
        raise BadPathError(f"workdir must be disjoint from source_root: {workdir}")

    timeout = doc.get("timeout_secs", DEFAULT_TIMEOUT_SECS)
    if not isinstance(timeout, int) or isinstance(timeout, bool) or timeout < 1:
        raise SchemaViolationError("timeout_secs must be an integer >= 1")

    inject_mode = doc.get("inject_mode", "cache")
    if inject_mode not in ("cache", "patch"):
        raise SchemaViolationError("inject_mode must be 'cache' or 'patch'")

    toolchain_root = None
    if doc.get("toolchain_root"):
        if not isinstance(doc["toolchain_root"], str):
            raise SchemaViolationError("toolchain_root must be a string path")
        toolchain_root = (base / doc["toolchain_root"]).resolve()

    return ProjectSpec(
        name=doc["name"],
        source_root=source_root,
        build_script=build_script,
        test_enable_options=_string_list(doc, "test_enable_options"),
        extra_configure_args=_string_list(doc, "extra_configure_args"),
        workdir=workdir,
        timeout_secs=timeout,
        toolchain_root=toolchain_root,
        inject_mode=inject_mode,
    )
