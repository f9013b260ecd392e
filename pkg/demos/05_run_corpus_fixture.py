#!/usr/bin/env python3
"""Run the full pipeline on a corpus fixture (needs Emscripten + node).

Builds the fixture natively and for wasm, runs the paired tests, and prints
the markdown report. Pass a fixture name (default: errno_divergence) and
optionally --manual-mode to see the untransformed baseline.

Emscripten is located from PATH, $WASMDIFF_TOOLCHAIN_ROOT, or $EMSDK.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

from wasmdiff.cli import main

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"

if not (shutil.which("emcmake") or shutil.which("emcc")):
    import os

    if not (os.environ.get("WASMDIFF_TOOLCHAIN_ROOT") or os.environ.get("EMSDK")):
        sys.exit(
            "No Emscripten toolchain found. Install emsdk and either activate it "
            "(emcmake on PATH) or set WASMDIFF_TOOLCHAIN_ROOT/EMSDK to its root."
        )

fixture = next((a for a in sys.argv[1:] if not a.startswith("-")), "errno_divergence")
if not (CORPUS / fixture / "manifest.json").is_file():
    names = ", ".join(sorted(p.name for p in CORPUS.iterdir() if p.is_dir()))
    sys.exit(f"unknown fixture {fixture!r}; available: {names}")

manifest = json.loads((CORPUS / fixture / "manifest.json").read_text())
workdir = Path(tempfile.mkdtemp(prefix=f"wasmdiff-{fixture}-"))
config = workdir / "fixture.conf"
config.write_text(
    json.dumps(
        {
            "name": manifest["name"],
            "source_root": str(CORPUS / fixture),
            "build_script": manifest["build_script"],
            "extra_configure_args": manifest.get("extra_configure_args", []),
            "workdir": str(workdir / "work"),
            "timeout_secs": 60,
        },
        indent=2,
    )
)

argv = ["run", "-c", str(config), "--format", "markdown"]
if "--manual-mode" in sys.argv[1:]:
    argv.append("--manual-mode")

print(f"expected: native={manifest['expected_native']}, "
      f"wasm manual={manifest['expected_wasm_manual']}, "
      f"wasm checked={manifest['expected_wasm_checked']}, tag={manifest['expected_tag']}")
print(f"workdir: {workdir}\n")
code = main(argv)
print(f"\nexit code: {code}")
sys.exit(code)
