from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wasmdiff.build import FailureCategory, FailureClassification
from wasmdiff.errors import SerializationFailureError
from wasmdiff.model import (
    Direction,
    RootCauseTag,
    SignalMatch,
    TargetKind,
    TestOutcome,
    TestPairing,
    TestStatus,
)
from wasmdiff.report import (
    BuildSummary,
    RunReport,
    classify_divergence,
    compute_discrepancies,
    emit_report,
    parse_report,
    tag_root_cause,
    verdict_line,
)
from wasmdiff.transform import CompilerSettings, apply_memory_policy


def outcome(
    name: str,
    target: TargetKind,
    status: TestStatus,
    stdout: str = "",
    stderr: str = "",
) -> TestOutcome:
    return TestOutcome(
        artifact_id=name,
        target=target,
        status=status,
        exit_code=0 if status is TestStatus.PASS else 1,
        stdout_digest=stdout,
        stderr_digest=stderr,
        duration_ms=1,
    )


def pairing(
    name: str,
    native_status: TestStatus,
    wasm_status: TestStatus,
    native_stdout: str = "",
    wasm_stdout: str = "",
    native_stderr: str = "",
    wasm_stderr: str = "",
) -> TestPairing:
    return TestPairing(
        test_name=name,
        native=outcome(name, TargetKind.NATIVE, native_status, native_stdout, native_stderr),
        wasm=outcome(name, TargetKind.WASM, wasm_status, wasm_stdout, wasm_stderr),
    )


# ---------------------------------------------------------------- metric


def test_metric_single_divergence():
    pairings = [
        pairing("a", TestStatus.PASS, TestStatus.PASS),
        pairing("b", TestStatus.PASS, TestStatus.FAIL),
        pairing("c", TestStatus.FAIL, TestStatus.FAIL),
    ]
    count, records = compute_discrepancies(pairings)
    assert count == 1
    assert records[0].direction is Direction.PASS_NATIVE_FAIL_WASM
    assert records[0].pairing.test_name == "b"


def test_metric_all_equal_is_zero():
    pairings = [pairing(str(i), TestStatus.PASS, TestStatus.PASS) for i in range(5)]
    count, records = compute_discrepancies(pairings)
    assert count == 0 and records == []
    assert verdict_line(count) == "EQUIVALENT (Σ = 0)"


def test_incomplete_pairings_excluded():
    one_sided = TestPairing(
        test_name="solo",
        native=outcome("solo", TargetKind.NATIVE, TestStatus.PASS),
        wasm=None,
    )
    count, _ = compute_discrepancies([one_sided])
    assert count == 0


def brute_force_sum(pairings) -> int:
    # independent oracle: direct restatement of the metric definition
    total = 0
    for p in pairings:
        if p.native is None or p.wasm is None:
            continue
        o_native = 1 if p.native.status is TestStatus.PASS else 0
        o_wasm = 1 if p.wasm.status is TestStatus.PASS else 0
        total += abs(o_native - o_wasm)
    return total


def random_pairings(rng: random.Random, n: int):
    statuses = list(TestStatus)
    out = []
    for i in range(n):
        native = rng.choice(statuses)
        wasm = rng.choice(statuses)
        p = TestPairing(
            test_name=f"t{i}",
            native=None if rng.random() < 0.1 else outcome(f"t{i}", TargetKind.NATIVE, native),
            wasm=None if rng.random() < 0.1 else outcome(f"t{i}", TargetKind.WASM, wasm),
        )
        out.append(p)
    return out


def test_metric_against_brute_force_oracle():
    rng = random.Random(20240917)
    for _ in range(50):
        pairings = random_pairings(rng, rng.randint(0, 30))
        count, records = compute_discrepancies(pairings)
        assert count == brute_force_sum(pairings)
        assert count == len(records)


def test_metric_symmetry_under_label_swap():
    rng = random.Random(7)
    pairings = random_pairings(rng, 40)
    swapped = [
        TestPairing(
            test_name=p.test_name,
            native=p.wasm
            and outcome(p.test_name, TargetKind.NATIVE, p.wasm.status),
            wasm=p.native
            and outcome(p.test_name, TargetKind.WASM, p.native.status),
        )
        for p in pairings
    ]
    count, records = compute_discrepancies(pairings)
    swapped_count, swapped_records = compute_discrepancies(swapped)
    assert count == swapped_count
    flipped = {
        Direction.PASS_NATIVE_FAIL_WASM: Direction.FAIL_NATIVE_PASS_WASM,
        Direction.FAIL_NATIVE_PASS_WASM: Direction.PASS_NATIVE_FAIL_WASM,
    }
    assert [flipped[r.direction] for r in records] == [r.direction for r in swapped_records]


# ---------------------------------------------------------------- root causes


def divergent(native_stdout="", wasm_stdout="", native_stderr="", wasm_stderr=""):
    _, records = compute_discrepancies(
        [
            pairing(
                "t",
                TestStatus.PASS,
                TestStatus.FAIL,
                native_stdout=native_stdout,
                wasm_stdout=wasm_stdout,
                native_stderr=native_stderr,
                wasm_stderr=wasm_stderr,
            )
        ]
    )
    return records[0]


def test_tag_errno_mismatch():
    record = divergent(
        native_stdout="This is plog: No such file or directory [2]\n",
        wasm_stdout="This is plog: No such file or directory [44]\n",
    )
    assert tag_root_cause(record) is RootCauseTag.DIFFERENT_STDLIB


def test_tag_element_ordering():
    record = divergent(
        native_stdout="neighbor 2\nneighbor 1\nneighbor 0\n",
        wasm_stdout="neighbor 0\nneighbor 1\nneighbor 2\n",
    )
    assert tag_root_cause(record) is RootCauseTag.DIFFERENT_STDLIB


def test_tag_wasm_trap():
    record = divergent(wasm_stderr="RuntimeError: unreachable\n    at wasm-function[4]\n")
    assert tag_root_cause(record) is RootCauseTag.WASM_LANGUAGE_FEATURE


def test_tag_signature_mismatch():
    record = divergent(
        wasm_stderr="RuntimeError: null function or function signature mismatch\n"
    )
    assert tag_root_cause(record) is RootCauseTag.WASM_LANGUAGE_FEATURE


def test_tag_fork_unavailable():
    record = divergent(wasm_stdout="fork() returned -1, no child process\n")
    assert tag_root_cause(record) is RootCauseTag.UNSUPPORTED_SYSCALL_OR_API


def test_tag_enosys():
    record = divergent(wasm_stderr="socketcall failed: ENOSYS\n")
    assert tag_root_cause(record) is RootCauseTag.UNSUPPORTED_SYSCALL_OR_API


def test_tag_compiler_bug_fingerprint():
    record = divergent(
        wasm_stdout="empty directory 'emp' missing from preloaded tree\n"
    )
    assert tag_root_cause(record) is RootCauseTag.COMPILER_BUG


def test_tag_fallback_unclassified():
    record = divergent(native_stdout="42\n", wasm_stdout="41\n")
    assert tag_root_cause(record) is RootCauseTag.UNCLASSIFIED


def test_tag_priority_syscall_over_trap():
    record = divergent(
        wasm_stdout="fork() returned -1\n",
        wasm_stderr="RuntimeError: unreachable\n",
    )
    assert tag_root_cause(record) is RootCauseTag.UNSUPPORTED_SYSCALL_OR_API


def test_tag_is_deterministic_and_total():
    record = divergent(wasm_stderr="anything at all")
    assert tag_root_cause(record) is tag_root_cause(record)


def test_classify_divergence_attaches_evidence():
    record = divergent(
        native_stdout="No such file or directory [2]\n",
        wasm_stdout="No such file or directory [44]\n",
    )
    tagged = classify_divergence(record)
    assert tagged.root_cause is RootCauseTag.DIFFERENT_STDLIB
    assert tagged.evidence and tagged.evidence[0].pattern == "errno-mismatch"


def test_fingerprint_table_is_user_extensible(tmp_path):
    from wasmdiff.report import load_bug_fingerprints

    record = divergent(wasm_stdout="SIMD lane shuffle produced stale lane values\n")
    assert tag_root_cause(record) is RootCauseTag.UNCLASSIFIED

    table = tmp_path / "bugs.json"
    table.write_text('[{"name": "simd-lane-shuffle", "pattern": "stale lane values"}]')
    fingerprints = load_bug_fingerprints(table)
    assert tag_root_cause(record, fingerprints) is RootCauseTag.COMPILER_BUG
    tagged = classify_divergence(record, fingerprints=fingerprints)
    assert tagged.evidence[0].pattern == "simd-lane-shuffle"


def test_preload_false_positive_annotation():
    record = divergent(wasm_stderr="cannot open data/test.xml: No such file or directory\n")
    tagged = classify_divergence(record, unresolved_literals=("data/test.xml",))
    assert any(s.pattern == "possible-preload-false-positive" for s in tagged.evidence)
    # annotated, never suppressed
    assert tagged.pairing.test_name == "t"


# ---------------------------------------------------------------- reports


def make_report(records_from=None) -> RunReport:
    pairings = records_from or [
        pairing("a", TestStatus.PASS, TestStatus.PASS),
        pairing("b", TestStatus.PASS, TestStatus.FAIL, wasm_stderr="RuntimeError: unreachable"),
    ]
    _count, raw = compute_discrepancies(pairings)
    records = tuple(classify_divergence(r) for r in raw)
    return RunReport(
        project="demo",
        native_build=BuildSummary(succeeded=True, duration_ms=1200),
        wasm_build=BuildSummary(succeeded=True, duration_ms=3400),
        pairings=tuple(pairings),
        records=records,
        settings_used=apply_memory_policy(CompilerSettings(target=TargetKind.WASM)),
        tool_versions={"cmake": "cmake version 3.22.1", "node": "v20.0.0"},
    )


def test_report_counts_and_invariant():
    report = make_report()
    assert report.pairings_total == 2
    assert report.pairings_complete == 2
    assert report.discrepancy_count == 1 == len(report.records)


def test_json_round_trip_is_byte_identical():
    report = make_report()
    first = emit_report(report, "json")
    parsed = parse_report(first)
    assert emit_report(parsed, "json") == first


def test_markdown_verdict_and_tables():
    zero = make_report([pairing("a", TestStatus.PASS, TestStatus.PASS)])
    text = emit_report(zero, "markdown")
    assert "EQUIVALENT (Σ = 0)" in text
    assert "| Different standard libraries | 0 |" in text

    nonzero = make_report()
    text = emit_report(nonzero, "markdown")
    assert "NOT EQUIVALENT (Σ = 1)" in text
    assert "| WebAssembly language features | 1 |" in text
    assert "Undefined symbols" in text  # failure table mirrors the six categories


def test_markdown_reports_failed_build():
    report = RunReport(
        project="demo",
        native_build=BuildSummary(succeeded=True, duration_ms=10),
        wasm_build=BuildSummary(
            succeeded=False,
            duration_ms=20,
            failure=FailureClassification(
                category=FailureCategory.UNDEFINED_SYMBOLS,
                matched_signals=(SignalMatch("undefined-symbol", "undefined symbol: x"),),
            ),
        ),
        pairings=(),
        records=(),
        settings_used=CompilerSettings(target=TargetKind.WASM),
        tool_versions={},
    )
    text = emit_report(report, "markdown")
    assert "| wasm | no | 20 | Undefined symbols |" in text


def test_parse_report_rejects_tampered_counts():
    import json

    doc = json.loads(emit_report(make_report(), "json"))
    doc["discrepancies"]["count"] = 99
    with pytest.raises(SerializationFailureError):
        parse_report(json.dumps(doc))


def test_parse_report_rejects_garbage():
    with pytest.raises(SerializationFailureError):
        parse_report("{not json")
    with pytest.raises(SerializationFailureError):
        parse_report('{"schema_version": "1"}')


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        emit_report(make_report(), "yaml")


@given(st.lists(st.sampled_from(list(TestStatus)), min_size=0, max_size=12))
def test_count_matches_records_for_any_status_vector(statuses):
    pairings = [
        pairing(f"t{i}", native_status, TestStatus.PASS)
        for i, native_status in enumerate(statuses)
    ]
    count, records = compute_discrepancies(pairings)
    assert count == len(records) == sum(
        1 for s in statuses if s is not TestStatus.PASS
    )
