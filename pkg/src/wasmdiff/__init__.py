"""Differential testing of C/C++ test suites between native and WebAssembly builds."""

from .build import (
    BuildResult,
    FailureCategory,
    FailureClassification,
    classify_failure,
    run_build,
)
from .config import load_project_config
from .errors import (
    BadPathError,
    ConfigError,
    EmptyTreeError,
    MissingFieldError,
    RuntimeMissingError,
    SchemaViolationError,
    SerializationFailureError,
    SpawnFailureError,
    ToolchainMissingError,
    WasmDiffError,
    WorkdirUnwritableError,
    WrongTargetError,
)
from .model import (
    Direction,
    DiscrepancyRecord,
    ProjectSpec,
    RootCauseTag,
    SignalMatch,
    TargetKind,
    TestOutcome,
    TestPairing,
    TestStatus,
    outcome_bit,
)
from .pipeline import PipelineOptions, run_pipeline
from .report import (
    BugFingerprint,
    BuildSummary,
    RunReport,
    classify_divergence,
    compute_discrepancies,
    emit_report,
    parse_report,
    tag_root_cause,
)
from .scanner import (
    ConstructReport,
    PathLiteral,
    extract_path_literals,
    scan_sources,
)
from .testrun import (
    RunnerKind,
    TestArtifact,
    discover_tests,
    execute_test,
    pair_tests,
    run_suite,
)
from .transform import (
    BuildPlan,
    CompilerSettings,
    PreloadMapping,
    apply_memory_policy,
    build_plan,
    infer_feature_flags,
    resolve_preloads,
    sanitize_user_flags,
)

__version__ = "0.1.0"
