#!/usr/bin/env python3
"""Show the wasm flag sanitizer on the flag sets that break wasm builds.

-Werror turns target-dependent warnings fatal, -march/-mtune/-Ofast have no
wasm equivalent, and stack-smashing protection has no runtime library to
link against; the sanitizer rewrites each while preserving everything else
in order.
"""

from wasmdiff.model import TargetKind
from wasmdiff.transform import apply_memory_policy, CompilerSettings, sanitize_user_flags

EXAMPLES = [
    ["-O2", "-Werror"],
    ["-march=native", "-mtune=native"],
    ["-fstack-protector-strong", "-g"],
    ["-Wall", "-Werror=shadow", "-Ofast", "-std=c++17"],
    [],
]

for flags in EXAMPLES:
    out = sanitize_user_flags(flags, TargetKind.WASM)
    print(f"{flags!r:60} -> {out!r}")

print()
print("memory policy applied to a fresh wasm flag set:")
settings = apply_memory_policy(CompilerSettings(target=TargetKind.WASM))
print(" ", " ".join(settings.compile_flags()))
