"""Turn construct facts plus project flags into target-faithful build plans.

For the wasm target this injects the feature flags implied by the scan,
applies the memory policy (1 MiB stack, growable heap, -Oz appended last so
it wins over any project -O level), sanitizes flags the wasm toolchain cannot
honor, and attaches virtual-filesystem preload mappings. Native plans pass
the project's own flags through untouched.

Flags reach the build through configure-time cache definitions; the source
tree is never edited unless the project config opts into "patch" mode.
"""

from __future__ import annotations

import logging
import re
import shlex
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import WrongTargetError
from .model import ProjectSpec, TargetKind
from .scanner import ConstructReport, PathLiteral

log = logging.getLogger(__name__)

EXCEPTION_FLAG = "-sNO_DISABLE_EXCEPTION_CATCHING"
FN_POINTER_FLAG = "-sEMULATE_FUNCTION_POINTER_CASTS"
THREAD_FLAG = "-pthread"
LONG_DOUBLE_FLAG = "-sPRINTF_LONG_DOUBLE"

STACK_SIZE_FLAG = "-sSTACK_SIZE=1048576"  # 1 MiB
MEMORY_GROWTH_FLAG = "-sALLOW_MEMORY_GROWTH"
SIZE_OPT_FLAG = "-Oz"

# Third-party libraries with a ported build selectable by one setting.
PORT_FLAGS = {
    "boost": "-sUSE_BOOST_HEADERS=1",
    "sdl": "-sUSE_SDL=2",
    "sdl2": "-sUSE_SDL=2",
    "zlib": "-sUSE_ZLIB=1",
    "png": "-sUSE_LIBPNG=1",
    "libpng": "-sUSE_LIBPNG=1",
    "freetype": "-sUSE_FREETYPE=1",
    "bzip2": "-sUSE_BZIP2=1",
    "ogg": "-sUSE_OGG=1",
    "vorbis": "-sUSE_VORBIS=1",
    "giflib": "-sUSE_GIFLIB=1",
}

_FLAG_CACHE_VARS = ("CMAKE_C_FLAGS", "CMAKE_CXX_FLAGS", "CMAKE_EXE_LINKER_FLAGS")


@dataclass(frozen=True)
class PreloadMapping:
    """One local file or directory embedded into the virtual filesystem."""

    src: str  # absolute, canonical local path
    dst: str  # path exactly as written in source

    def option(self) -> str:
        return f"--preload-file {self.src}@{self.dst}"

    def to_dict(self) -> dict:
        return {"src": self.src, "dst": self.dst}

    @staticmethod
    def from_dict(d: dict) -> "PreloadMapping":
        return PreloadMapping(src=d["src"], dst=d["dst"])


@dataclass(frozen=True)
class CompilerSettings:
    """Complete flag set for one build target."""

    target: TargetKind
    feature_flags: frozenset = frozenset()
    memory_flags: frozenset = frozenset()
    sanitized_user_flags: tuple = ()
    preload_args: tuple = ()

    def __post_init__(self) -> None:
        if self.target is TargetKind.NATIVE and (
            self.feature_flags or self.memory_flags or self.preload_args
        ):
            raise WrongTargetError("native settings carry no wasm-specific flags")

    def compile_flags(self) -> list[str]:
        """Flag order: project flags, inferred features, memory policy (-Oz last)."""
        ordered_memory = [f for f in (STACK_SIZE_FLAG, MEMORY_GROWTH_FLAG) if f in self.memory_flags]
        ordered_memory += sorted(self.memory_flags - {STACK_SIZE_FLAG, MEMORY_GROWTH_FLAG, SIZE_OPT_FLAG})
        if SIZE_OPT_FLAG in self.memory_flags:
            ordered_memory.append(SIZE_OPT_FLAG)
        return list(self.sanitized_user_flags) + sorted(self.feature_flags) + ordered_memory

    def link_flags(self) -> list[str]:
        return self.compile_flags() + list(self.preload_args)

    def to_dict(self) -> dict:
        return {
            "target": self.target.value,
            "feature_flags": sorted(self.feature_flags),
            "memory_flags": sorted(self.memory_flags),
            "sanitized_user_flags": list(self.sanitized_user_flags),
            "preload_args": list(self.preload_args),
        }

    @staticmethod
    def from_dict(d: dict) -> "CompilerSettings":
        return CompilerSettings(
            target=TargetKind(d["target"]),
            feature_flags=frozenset(d["feature_flags"]),
            memory_flags=frozenset(d["memory_flags"]),
            sanitized_user_flags=tuple(d["sanitized_user_flags"]),
            preload_args=tuple(d["preload_args"]),
        )


def infer_feature_flags(report: ConstructReport) -> set[str]:
    """Map detected constructs to the wasm settings that restore their support."""
    flags = set()
    if report.uses_exceptions:
        flags.add(EXCEPTION_FLAG)
    if report.casts_function_pointers:
        flags.add(FN_POINTER_FLAG)
    if report.uses_threads:
        flags.add(THREAD_FLAG)
    if report.uses_long_double:
        flags.add(LONG_DOUBLE_FLAG)
    return flags


def sanitize_user_flags(flags: Sequence[str], target: TargetKind) -> list[str]:
    """Rewrite project flags the wasm toolchain rejects; identity for native."""
    if target is TargetKind.NATIVE:
        return list(flags)
    out: list[str] = []
    removed_werror = False
    ssp_replaced = False
    for flag in flags:
        if flag == "-Werror" or flag.startswith("-Werror="):
            removed_werror = True
            continue
        if flag.startswith("-march=") or flag.startswith("-mtune=") or flag == "-Ofast":
            continue
        if flag.startswith("-fstack-protector"):
            if not ssp_replaced:
                out.append("-fno-stack-protector")
                ssp_replaced = True
            continue
        out.append(flag)
    if removed_werror and "-Wno-error" not in out:
        out.append("-Wno-error")
    return out


def apply_memory_policy(settings: CompilerSettings) -> CompilerSettings:
    """Fix the wasm memory policy: 1 MiB stack, growable memory, -Oz."""
    if settings.target is not TargetKind.WASM:
        raise WrongTargetError("memory policy applies to wasm builds only")
    return replace(
        settings,
        memory_flags=frozenset({STACK_SIZE_FLAG, MEMORY_GROWTH_FLAG, SIZE_OPT_FLAG}),
    )


def resolve_preloads(
    literals: Iterable[PathLiteral], search_roots: Sequence[Path]
) -> list[PreloadMapping]:
    """Probe each path literal against the search roots, first hit wins.

    Literals that resolve nowhere are dropped (logged); duplicates keep their
    first occurrence. Every returned mapping's src exists at call time.
    """
    if not search_roots:
        raise ValueError("search_roots must be nonempty")
    mappings: list[PreloadMapping] = []
    seen: set[tuple[str, str]] = set()
    for lit in literals:
        raw = Path(lit.literal)
        if raw.is_absolute():
            candidates = [raw]
        else:
            candidates = [Path(root) / lit.literal for root in search_roots]
        src = next((c for c in candidates if c.exists()), None)
        if src is None:
            log.info("preload literal unresolved, dropped: %s (%s:%d)", lit.literal, lit.file, lit.line)
            continue
        mapping = PreloadMapping(src=str(src.resolve()), dst=lit.literal)
        key = (mapping.src, mapping.dst)
        if key not in seen:
            seen.add(key)
            mappings.append(mapping)
    return mappings


def default_search_roots(project: ProjectSpec) -> list[Path]:
    """Expected test working directories first, then the source root."""
    roots = [
        project.source_root / name
        for name in ("test", "tests")
        if (project.source_root / name).is_dir()
    ]
    roots.append(project.source_root)
    return roots


@dataclass(frozen=True)
class BuildPlan:
    """Everything the orchestrator needs to build one target."""

    project_name: str
    target: TargetKind
    source_dir: str
    build_dir: str
    configure_cmd: tuple
    build_cmd: tuple
    settings: CompilerSettings
    unresolved_literals: tuple = ()
    manual: bool = False
    inject_mode: str = "cache"
    build_script: str = "CMakeLists.txt"

    def to_dict(self) -> dict:
        return {
            "project_name": self.project_name,
            "target": self.target.value,
            "source_dir": self.source_dir,
            "build_dir": self.build_dir,
            "configure_cmd": list(self.configure_cmd),
            "build_cmd": list(self.build_cmd),
            "settings": self.settings.to_dict(),
            "unresolved_literals": list(self.unresolved_literals),
            "manual": self.manual,
            "inject_mode": self.inject_mode,
            "build_script": self.build_script,
        }

    @staticmethod
    def from_dict(d: dict) -> "BuildPlan":
        return BuildPlan(
            project_name=d["project_name"],
            target=TargetKind(d["target"]),
            source_dir=d["source_dir"],
            build_dir=d["build_dir"],
            configure_cmd=tuple(d["configure_cmd"]),
            build_cmd=tuple(d["build_cmd"]),
            settings=CompilerSettings.from_dict(d["settings"]),
            unresolved_literals=tuple(d["unresolved_literals"]),
            manual=d["manual"],
            inject_mode=d.get("inject_mode", "cache"),
            build_script=d.get("build_script", "CMakeLists.txt"),
        )


def _define_args(project: ProjectSpec) -> list[str]:
    defines = []
    for opt in project.test_enable_options:
        defines.append(opt if opt.startswith("-D") else f"-D{opt}")
    return defines


def split_flag_defines(args: Sequence[str]) -> tuple[list[str], list[str]]:
    """Separate -DCMAKE_*_FLAGS defines from other configure args.

    Returns (other_args, user_flags); user flags are the shlex-split union of
    the compile/link flag variables so they can be sanitized and re-injected.
    """
    others: list[str] = []
    user_flags: list[str] = []
    for arg in args:
        m = re.match(r"-D(CMAKE_(?:C|CXX|EXE_LINKER)_FLAGS)(?::\w+)?=(.*)$", arg)
        if m:
            for flag in shlex.split(m.group(2)):
                if flag not in user_flags:
                    user_flags.append(flag)
        else:
            others.append(arg)
    return others, user_flags


def build_plan(
    project: ProjectSpec,
    report: ConstructReport,
    target: TargetKind,
    manual: bool = False,
    extra_feature_flags: Iterable[str] = (),
) -> BuildPlan:
    """Assemble the per-target plan: settings, commands, dedicated build dir.

    Manual-mode wasm builds get their own directory so the cmake cache of a
    transformed build never leaks into the untransformed baseline (or vice
    versa) when both run from one workdir. extra_feature_flags carries port
    settings added on a retry after a missing-third-party build failure.
    """
    build_dir = project.build_dir(target)
    if manual and target is TargetKind.WASM:
        build_dir = project.workdir / f"{target.value}_manual"
    defines = _define_args(project)

    if target is TargetKind.NATIVE:
        settings = CompilerSettings(
            target=target,
            sanitized_user_flags=sanitize_user_flags(project.extra_configure_args, target),
        )
        configure = ("cmake", str(project.source_root), *defines, *project.extra_configure_args)
        return BuildPlan(
            project_name=project.name,
            target=target,
            source_dir=str(project.source_root),
            build_dir=str(build_dir),
            configure_cmd=configure,
            build_cmd=("cmake", "--build", "."),
            settings=settings,
            manual=manual,
            inject_mode=project.inject_mode,
            build_script=str(project.build_script),
        )

    if manual:
        # Transformer disabled: raw flags, no memory policy, no preloads.
        settings = CompilerSettings(target=target)
        configure = (
            "emcmake",
            "cmake",
            str(project.source_root),
            *defines,
            *project.extra_configure_args,
        )
        return BuildPlan(
            project_name=project.name,
            target=target,
            source_dir=str(project.source_root),
            build_dir=str(build_dir),
            configure_cmd=configure,
            build_cmd=("emmake", "cmake", "--build", "."),
            settings=settings,
            manual=True,
            inject_mode=project.inject_mode,
            build_script=str(project.build_script),
        )

    other_args, user_flags = split_flag_defines(project.extra_configure_args)
    mappings = resolve_preloads(report.path_literals, default_search_roots(project))
    resolved_dsts = {m.dst for m in mappings}
    unresolved = tuple(
        sorted({p.literal for p in report.path_literals if p.literal not in resolved_dsts})
    )
    settings = apply_memory_policy(
        CompilerSettings(
            target=target,
            feature_flags=frozenset(infer_feature_flags(report)) | frozenset(extra_feature_flags),
            sanitized_user_flags=tuple(sanitize_user_flags(user_flags, target)),
            preload_args=tuple(m.option() for m in mappings),
        )
    )
    compile_str = " ".join(settings.compile_flags())
    link_str = " ".join(settings.link_flags())
    configure = (
        "emcmake",
        "cmake",
        str(project.source_root),
        *defines,
        *other_args,
        f"-DCMAKE_C_FLAGS={compile_str}",
        f"-DCMAKE_CXX_FLAGS={compile_str}",
        f"-DCMAKE_EXE_LINKER_FLAGS={link_str}",
    )
    return BuildPlan(
        project_name=project.name,
        target=target,
        source_dir=str(project.source_root),
        build_dir=str(build_dir),
        configure_cmd=configure,
        build_cmd=("emmake", "cmake", "--build", "."),
        settings=settings,
        unresolved_literals=unresolved,
        manual=False,
        inject_mode=project.inject_mode,
        build_script=str(project.build_script),
    )


def build_script_patch(settings: CompilerSettings) -> str:
    """CMake lines appended to the build script in "patch" injection mode."""
    compile_str = " ".join(settings.compile_flags())
    link_str = " ".join(settings.link_flags())
    return (
        "\n# wasmdiff flag injection (appended; original script is restored after the build)\n"
        f'string(APPEND CMAKE_C_FLAGS " {compile_str}")\n'
        f'string(APPEND CMAKE_CXX_FLAGS " {compile_str}")\n'
        f'string(APPEND CMAKE_EXE_LINKER_FLAGS " {link_str}")\n'
    )


def suggest_port_flags(configure_log: str, build_log: str) -> list[str]:
    """Port settings for third-party libraries named by a failed configure/build."""
    text = f"{configure_log}\n{build_log}".lower()
    found = set()
    for m in re.finditer(r"could not find (\w+)", text):
        name = m.group(1)
        if name in PORT_FLAGS:
            found.add(PORT_FLAGS[name])
    for m in re.finditer(r"fatal error: ([\w.+-]+)[/.]", text):
        name = m.group(1)
        if name in PORT_FLAGS:
            found.add(PORT_FLAGS[name])
    return sorted(found)
