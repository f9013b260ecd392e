#!/usr/bin/env python3
"""Compute the discrepancy metric over synthetic paired outcomes.

A test contributes |o_native - o_wasm| to the sum; the pair of binaries is
equivalent exactly when the sum over complete pairings is zero. Root causes
are tagged from the output signals of the failing side.
"""

from wasmdiff.model import TargetKind, TestOutcome, TestPairing, TestStatus
from wasmdiff.report import classify_divergence, compute_discrepancies, verdict_line


def outcome(name, target, status, stdout="", stderr=""):
    return TestOutcome(
        artifact_id=name,
        target=target,
        status=status,
        exit_code=0 if status is TestStatus.PASS else 1,
        stdout_digest=stdout,
        stderr_digest=stderr,
        duration_ms=12,
    )


pairings = [
    TestPairing(
        "parse_scalar",
        outcome("parse_scalar", TargetKind.NATIVE, TestStatus.PASS),
        outcome("parse_scalar", TargetKind.WASM, TestStatus.PASS),
    ),
    TestPairing(
        "log_errno",
        outcome("log_errno", TargetKind.NATIVE, TestStatus.PASS, stdout="No such file or directory [2]"),
        outcome("log_errno", TargetKind.WASM, TestStatus.FAIL, stdout="No such file or directory [44]"),
    ),
    TestPairing(
        "call_helper",
        outcome("call_helper", TargetKind.NATIVE, TestStatus.PASS),
        outcome("call_helper", TargetKind.WASM, TestStatus.FAIL, stderr="RuntimeError: unreachable"),
    ),
    TestPairing(
        "native_only_probe",
        outcome("native_only_probe", TargetKind.NATIVE, TestStatus.PASS),
        None,  # incomplete pairings never contribute to the sum
    ),
]

count, records = compute_discrepancies(pairings)
print(f"pairings: {len(pairings)} total, {sum(1 for p in pairings if p.complete)} complete")
print(f"verdict: {verdict_line(count)}")
for record in records:
    tagged = classify_divergence(record)
    print(f"  {tagged.pairing.test_name}: {tagged.direction.value} -> {tagged.root_cause.value}")
    for signal in tagged.evidence:
        print(f"    [{signal.pattern}] {signal.excerpt}")
