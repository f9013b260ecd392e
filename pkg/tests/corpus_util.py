"""Drive corpus fixtures through the CLI and its file interfaces."""

from __future__ import annotations

import json
from pathlib import Path

from conftest import CORPUS

PROJECT_KEYS = (
    "name",
    "build_script",
    "test_enable_options",
    "extra_configure_args",
    "timeout_secs",
)

FIXTURE_IDS = (
    "exception_catching",
    "fn_pointer_cast",
    "file_preload",
    "deep_recursion",
    "ssp_flags",
    "errno_divergence",
    "fork_unsupported",
    "signature_mismatch",
    "empty_dir_preload",
    "hash_order",
)

FIXABLE = FIXTURE_IDS[:5]
DIVERGENT = FIXTURE_IDS[5:]

EXPECTATION_KEYS = (
    "fixture_id",
    "expected_native",
    "expected_wasm_manual",
    "expected_wasm_checked",
    "expected_tag",
    "toolchain_version",
)


def load_manifest(fixture_id: str) -> dict:
    return json.loads((CORPUS / fixture_id / "manifest.json").read_text(encoding="utf-8"))


def write_fixture_config(
    fixture_id: str, tmp_path: Path, toolchain_root: Path | None = None
) -> Path:
    """Materialize a project config for one fixture (workdir under tmp_path)."""
    manifest = load_manifest(fixture_id)
    doc = {k: manifest[k] for k in PROJECT_KEYS if k in manifest}
    doc["source_root"] = str(CORPUS / fixture_id)
    doc["workdir"] = str(tmp_path / f"work-{fixture_id}")
    doc.setdefault("timeout_secs", 60)
    if toolchain_root is not None:
        doc["toolchain_root"] = str(toolchain_root)
    config = tmp_path / f"{fixture_id}.conf"
    config.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return config


def read_outcomes(workdir: Path, target: str) -> list[dict]:
    doc = json.loads((workdir / f"outcomes_{target}.json").read_text(encoding="utf-8"))
    return doc["outcomes"]


def read_report(workdir: Path) -> dict:
    return json.loads((workdir / "report.json").read_text(encoding="utf-8"))
