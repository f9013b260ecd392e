from __future__ import annotations

import json
import shutil
import subprocess
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
MOCK_TOOLCHAIN = Path(__file__).parent / "mocktoolchain"
REPO_ROOT = Path(__file__).parent.parent
CORPUS = REPO_ROOT / "corpus"


def has_tool(name: str) -> bool:
    return shutil.which(name) is not None


def has_emscripten() -> bool:
    return has_tool("emcmake") and has_tool("emmake") and has_tool("emcc")


requires_cmake = pytest.mark.skipif(
    not (has_tool("cmake") and has_tool("cc")), reason="cmake/cc not installed"
)
requires_node = pytest.mark.skipif(not has_tool("node"), reason="node not installed")
requires_emscripten = pytest.mark.skipif(
    not has_emscripten(),
    reason="Emscripten toolchain (emcmake/emmake/emcc) not installed",
)


def write_config(path: Path, source_root: Path, workdir: Path, **extra) -> Path:
    doc = {
        "name": extra.pop("name", source_root.name),
        "source_root": str(source_root),
        "build_script": extra.pop("build_script", "CMakeLists.txt"),
        "workdir": str(workdir),
        **extra,
    }
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return path


def compile_c(source: str, out: Path, lang: str = "c") -> Path:
    """Build a tiny native helper binary for runner tests."""
    src = out.with_suffix(f".{lang}")
    src.write_text(source, encoding="utf-8")
    compiler = "cc" if lang == "c" else "c++"
    subprocess.run([compiler, str(src), "-o", str(out)], check=True, capture_output=True)
    return out
