#!/usr/bin/env python3
"""Run the failure classifier over the stored build-log fixtures.

One log per category; the classifier's first-match-wins rule table assigns
exactly one category and keeps the matching lines as evidence.
"""

from pathlib import Path

from wasmdiff.build import classify_failure

LOGS = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "build_logs"

for log_file in sorted(LOGS.glob("*.log")):
    text = log_file.read_text()
    configure_log = text if "Configuring incomplete" in text else ""
    build_log = "" if configure_log else text
    result = classify_failure(configure_log, build_log)
    print(f"{log_file.name}: {result.category.value}")
    for signal in result.matched_signals[:2]:
        print(f"  [{signal.pattern}] {signal.excerpt}")
    print()
