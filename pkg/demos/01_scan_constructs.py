#!/usr/bin/env python3
"""Scan the bundled corpus fixtures and show what the construct scanner sees.

Each fixture isolates one construct; the scanner's per-flag evidence points
at the exact file:line that triggered it, and the inferred wasm settings
follow directly from the flags.
"""

from pathlib import Path

from wasmdiff.scanner import scan_sources
from wasmdiff.transform import infer_feature_flags

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

for fixture in sorted(p for p in CORPUS.iterdir() if p.is_dir()):
    report = scan_sources(fixture / "src")
    flags = sorted(infer_feature_flags(report))
    print(f"{fixture.name}:")
    print(f"  scanned {report.scanned_files} file(s)")
    for flag_name, hits in sorted(report.evidence.items()):
        spots = ", ".join(f"{file}:{line}" for file, line in hits[:3])
        print(f"  {flag_name}: {spots}")
    if report.path_literals:
        literals = ", ".join(p.literal for p in report.path_literals[:4])
        print(f"  path literals: {literals}")
    print(f"  inferred settings: {' '.join(flags) if flags else '(none)'}")
    print()
