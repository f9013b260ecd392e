"""Corpus fixture verification that runs without a wasm toolchain.

Every fixture must build natively and meet its declared native expectation,
driven end to end through the CLI and its JSON file interfaces. The two
fixtures whose wasm-side behavior the mock toolchain reproduces honestly
(filesystem preloading, stack-protector linking) are exercised against it.
"""

from __future__ import annotations

from pathlib import Path

import pytest

import corpus_util
from conftest import CORPUS, MOCK_TOOLCHAIN, requires_cmake, requires_node
from wasmdiff.cli import EXIT_BUILD_FAILED, EXIT_EQUIVALENT, main


def test_corpus_is_complete():
    present = sorted(p.name for p in CORPUS.iterdir() if p.is_dir())
    assert present == sorted(corpus_util.FIXTURE_IDS)


@pytest.mark.parametrize("fixture_id", corpus_util.FIXTURE_IDS)
def test_manifest_declares_all_expectations(fixture_id):
    manifest = corpus_util.load_manifest(fixture_id)
    for key in corpus_util.EXPECTATION_KEYS:
        assert key in manifest, key
    assert manifest["fixture_id"] == fixture_id
    assert manifest["expected_native"] in ("Pass", "Fail")
    assert manifest["expected_wasm_manual"] in ("Pass", "Fail", "BuildFail")
    assert manifest["expected_wasm_checked"] in ("Pass", "Fail")
    assert (CORPUS / fixture_id / manifest["build_script"]).is_file()
    assert any((CORPUS / fixture_id / "src").iterdir())


# scanner soundness over the corpus: every seeded construct is detected
SEEDED_CONSTRUCTS = {
    "exception_catching": "uses_exceptions",
    "fn_pointer_cast": "casts_function_pointers",
}
SEEDED_LITERALS = {
    "file_preload": {"../resources/input/input.xml", "data/test.xml"},
    "empty_dir_preload": {"./data"},
    "errno_divergence": {"/a/file/that/does/not/exist.txt"},
}


@pytest.mark.parametrize("fixture_id,flag", sorted(SEEDED_CONSTRUCTS.items()))
def test_scanner_detects_seeded_construct(fixture_id, flag):
    from wasmdiff.scanner import scan_sources

    report = scan_sources(CORPUS / fixture_id / "src")
    assert getattr(report, flag) is True


@pytest.mark.parametrize("fixture_id,expected", sorted(SEEDED_LITERALS.items()))
def test_scanner_extracts_seeded_path_literals(fixture_id, expected):
    from wasmdiff.scanner import scan_sources

    report = scan_sources(CORPUS / fixture_id / "src")
    assert expected <= {p.literal for p in report.path_literals}


@requires_cmake
@pytest.mark.parametrize("fixture_id", corpus_util.FIXTURE_IDS)
def test_fixture_builds_and_meets_native_expectation(fixture_id, tmp_path, capsys):
    config = corpus_util.write_fixture_config(fixture_id, tmp_path)
    assert main(["build", "-c", str(config), "--target", "native"]) == EXIT_EQUIVALENT
    assert main(["test", "-c", str(config), "--target", "native"]) == EXIT_EQUIVALENT

    manifest = corpus_util.load_manifest(fixture_id)
    workdir = Path(tmp_path / f"work-{fixture_id}")
    outcomes = corpus_util.read_outcomes(workdir, "native")
    assert len(outcomes) == 1, "each fixture registers exactly one test"
    expected = "pass" if manifest["expected_native"] == "Pass" else "fail"
    assert outcomes[0]["status"] == expected, fixture_id


@requires_cmake
@requires_node
def test_file_preload_fixture_against_mock_vfs(tmp_path, capsys):
    config = corpus_util.write_fixture_config("file_preload", tmp_path, MOCK_TOOLCHAIN)
    assert main(["run", "-c", str(config)]) == EXIT_EQUIVALENT
    report = corpus_util.read_report(tmp_path / "work-file_preload")
    assert report["discrepancies"]["count"] == 0
    preloads = report["settings"]["preload_args"]
    assert len(preloads) == 2
    assert any(p.endswith("@data/test.xml") for p in preloads)
    assert any(p.endswith("@../resources/input/input.xml") for p in preloads)


@requires_cmake
@requires_node
def test_file_preload_fixture_fails_without_transformer(tmp_path, capsys):
    config = corpus_util.write_fixture_config("file_preload", tmp_path, MOCK_TOOLCHAIN)
    code = main(["run", "-c", str(config), "--manual-mode"])
    assert code == 1
    report = corpus_util.read_report(tmp_path / "work-file_preload")
    assert report["discrepancies"]["count"] == 1


@requires_cmake
@requires_node
def test_ssp_fixture_against_mock_linker(tmp_path, capsys):
    config = corpus_util.write_fixture_config("ssp_flags", tmp_path, MOCK_TOOLCHAIN)
    assert main(["build", "-c", str(config), "--manual-mode"]) == EXIT_BUILD_FAILED
    out = capsys.readouterr().out
    assert "undefined_symbols" in out

    (tmp_path / "checked").mkdir(exist_ok=True)
    fresh = corpus_util.write_fixture_config("ssp_flags", tmp_path / "checked", MOCK_TOOLCHAIN)
    assert main(["run", "-c", str(fresh)]) == EXIT_EQUIVALENT
