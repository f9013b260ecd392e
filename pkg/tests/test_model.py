from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wasmdiff.errors import SchemaViolationError
from wasmdiff.model import (
    Direction,
    DiscrepancyRecord,
    RootCauseTag,
    SignalMatch,
    TargetKind,
    TestOutcome,
    TestPairing,
    TestStatus,
    outcome_bit,
)

statuses = st.sampled_from(list(TestStatus))


def make_outcome(
    status: TestStatus,
    target: TargetKind = TargetKind.NATIVE,
    name: str = "t",
    stdout: str = "",
    stderr: str = "",
) -> TestOutcome:
    exit_code = 0 if status is TestStatus.PASS else (1 if status is TestStatus.FAIL else None)
    return TestOutcome(
        artifact_id=name,
        target=target,
        status=status,
        exit_code=exit_code,
        stdout_digest=stdout,
        stderr_digest=stderr,
        duration_ms=5,
    )


outcomes = st.builds(
    make_outcome,
    status=statuses,
    target=st.sampled_from(list(TargetKind)),
    name=st.text(st.characters(categories=("Ll",)), min_size=1, max_size=8),
    stdout=st.text(max_size=40),
    stderr=st.text(max_size=40),
)


def test_outcome_bit_definition():
    assert outcome_bit(make_outcome(TestStatus.PASS)) == 1
    assert outcome_bit(make_outcome(TestStatus.TIMEOUT)) == 0
    assert outcome_bit(make_outcome(TestStatus.CRASH_SIGNAL)) == 0
    assert outcome_bit(make_outcome(TestStatus.FAIL)) == 0
    assert outcome_bit(make_outcome(TestStatus.NOT_RUN)) == 0


@given(outcomes)
def test_outcome_bit_total_and_deterministic(outcome):
    bit = outcome_bit(outcome)
    assert bit in (0, 1)
    assert bit == outcome_bit(outcome)
    assert (bit == 1) == (outcome.status is TestStatus.PASS)


def test_pass_requires_exit_zero():
    with pytest.raises(SchemaViolationError):
        TestOutcome(
            artifact_id="t",
            target=TargetKind.WASM,
            status=TestStatus.PASS,
            exit_code=1,
            stdout_digest="",
            stderr_digest="",
            duration_ms=0,
        )


@given(outcomes)
def test_outcome_round_trip(outcome):
    assert TestOutcome.from_dict(outcome.to_dict()) == outcome


@given(st.one_of(st.none(), outcomes), st.one_of(st.none(), outcomes))
def test_pairing_round_trip(native, wasm):
    native = native and make_outcome(native.status, TargetKind.NATIVE, "t")
    wasm = wasm and make_outcome(wasm.status, TargetKind.WASM, "t")
    pairing = TestPairing(test_name="t", native=native, wasm=wasm)
    assert TestPairing.from_dict(pairing.to_dict()) == pairing
    assert pairing.complete == (native is not None and wasm is not None)


def test_discrepancy_record_round_trip():
    pairing = TestPairing(
        test_name="t",
        native=make_outcome(TestStatus.PASS, TargetKind.NATIVE),
        wasm=make_outcome(TestStatus.FAIL, TargetKind.WASM),
    )
    record = DiscrepancyRecord(
        pairing=pairing,
        direction=Direction.PASS_NATIVE_FAIL_WASM,
        root_cause=RootCauseTag.DIFFERENT_STDLIB,
        evidence=(SignalMatch("errno-mismatch", "native [2] vs wasm [44]"),),
    )
    assert DiscrepancyRecord.from_dict(record.to_dict()) == record


def test_discrepancy_requires_differing_outcomes():
    pairing = TestPairing(
        test_name="t",
        native=make_outcome(TestStatus.PASS, TargetKind.NATIVE),
        wasm=make_outcome(TestStatus.PASS, TargetKind.WASM),
    )
    with pytest.raises(SchemaViolationError):
        DiscrepancyRecord(
            pairing=pairing,
            direction=Direction.PASS_NATIVE_FAIL_WASM,
            root_cause=RootCauseTag.UNCLASSIFIED,
        )


def test_discrepancy_requires_complete_pairing():
    pairing = TestPairing(
        test_name="t", native=make_outcome(TestStatus.PASS, TargetKind.NATIVE), wasm=None
    )
    with pytest.raises(SchemaViolationError):
        DiscrepancyRecord(
            pairing=pairing,
            direction=Direction.PASS_NATIVE_FAIL_WASM,
            root_cause=RootCauseTag.UNCLASSIFIED,
        )
