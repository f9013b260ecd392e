"""Source-level construct detection over a C/C++ tree.

A token scanner, not a parser: comments and string/char literals are stripped
first, then four detectors run over the remaining tokens. Each detector only
ever adds runtime support flags downstream, so over-approximation is safe by
construction. The per-file results merge commutatively; the aggregate report
is normalized (sorted) so scanning the same tree always yields the same bytes.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import EmptyTreeError

DEFAULT_EXTENSIONS = (".c", ".cc", ".cpp", ".cxx", ".h", ".hh", ".hpp", ".hxx", ".inl")

FLAG_EXCEPTIONS = "uses_exceptions"
FLAG_FN_POINTER_CASTS = "casts_function_pointers"
FLAG_THREADS = "uses_threads"
FLAG_LONG_DOUBLE = "uses_long_double"

_INCLUDE_RE = re.compile(r'^\s*#\s*include\s*["<]([^">]+)[">]', re.MULTILINE)
# printf-family length modifier L with a floating conversion, e.g. %Lf, %10.3Le
_LONG_DOUBLE_FMT_RE = re.compile(r"%[-+ #0-9.*]*L[aefgAEFG]")
_PATH_EXTENSION_RE = re.compile(r"\.[A-Za-z0-9]{1,4}$")

MAX_PATH_LITERAL_LEN = 4096


class Token(NamedTuple):
    text: str
    line: int


class StringLiteral(NamedTuple):
    content: str
    line: int


@dataclass(frozen=True)
class PathLiteral:
    """A string literal whose content is shaped like a filesystem path."""

    literal: str
    file: str
    line: int

    def to_dict(self) -> dict:
        return {"literal": self.literal, "file": self.file, "line": self.line}

    @staticmethod
    def from_dict(d: dict) -> "PathLiteral":
        return PathLiteral(literal=d["literal"], file=d["file"], line=d["line"])


@dataclass(frozen=True)
class ConstructReport:
    """Aggregated construct facts for one scanned tree."""

    uses_exceptions: bool
    casts_function_pointers: bool
    uses_threads: bool
    uses_long_double: bool
    path_literals: tuple[PathLiteral, ...]
    scanned_files: int
    evidence: dict = field(default_factory=dict)  # flag -> ((file, line), ...)
    skipped_files: tuple = ()  # ((file, reason), ...)

    def __post_init__(self) -> None:
        for flag in (
            FLAG_EXCEPTIONS,
            FLAG_FN_POINTER_CASTS,
            FLAG_THREADS,
            FLAG_LONG_DOUBLE,
        ):
            if getattr(self, flag) and not self.evidence.get(flag):
                raise ValueError(f"flag {flag} set without evidence")

    def to_dict(self) -> dict:
        return {
            "uses_exceptions": self.uses_exceptions,
            "casts_function_pointers": self.casts_function_pointers,
            "uses_threads": self.uses_threads,
            "uses_long_double": self.uses_long_double,
            "path_literals": [p.to_dict() for p in self.path_literals],
            "scanned_files": self.scanned_files,
            "evidence": {k: [list(hit) for hit in v] for k, v in self.evidence.items()},
            "skipped_files": [list(s) for s in self.skipped_files],
        }

    @staticmethod
    def from_dict(d: dict) -> "ConstructReport":
        return ConstructReport(
            uses_exceptions=d["uses_exceptions"],
            casts_function_pointers=d["casts_function_pointers"],
            uses_threads=d["uses_threads"],
            uses_long_double=d["uses_long_double"],
            path_literals=tuple(PathLiteral.from_dict(p) for p in d["path_literals"]),
            scanned_files=d["scanned_files"],
            evidence={k: tuple((f, n) for f, n in v) for k, v in d["evidence"].items()},
            skipped_files=tuple((f, r) for f, r in d["skipped_files"]),
        )


# One pass over the raw text: comments and literals cannot nest across each
# other, so a left-to-right scan over their start characters gets the
# boundaries right. Unterminated block comments and strings are tolerated
# (blanked to EOF/EOL). Raw strings are recognized at the quote by looking
# back at the prefix, keeping the hot regex anchored on rare start chars.
_MASTER_RE = re.compile(
    r"//(?:\\\r?\n|[^\n])*"
    r"|/\*.*?(?:\*/|\Z)"
    r'|"(?P<sbody>(?:\\.|[^"\\\n])*)(?:"|(?=\n)|\Z)'
    r"|'(?:\\.|[^'\\\n])*(?:'|(?=\n)|\Z)",
    re.S,
)

_RAW_PREFIXES = ("R", "uR", "UR", "LR", "u8R")
_RAW_DELIM_RE = re.compile(r"[^()\s\\]{0,16}\(")

_NOT_NEWLINE_RE = re.compile(r"[^\n]")


def _line_starts(text: str) -> list[int]:
    starts = [0]
    pos = text.find("\n")
    while pos != -1:
        starts.append(pos + 1)
        pos = text.find("\n", pos + 1)
    return starts


def _raw_prefix_at(text: str, quote: int) -> int | None:
    """Start offset of a raw-string prefix ending at the quote, if any."""
    j = quote - 1
    while j >= 0 and (text[j].isalnum() or text[j] == "_"):
        j -= 1
    return j + 1 if text[j + 1 : quote] in _RAW_PREFIXES else None


def strip_source(text: str) -> tuple[str, list[StringLiteral]]:
    """Blank out comments and string/char literals, preserving line structure.

    Returns the stripped text (same length, literals/comments replaced by
    spaces) and the extracted string-literal contents with line numbers.
    """
    starts = _line_starts(text)
    literals: list[StringLiteral] = []
    pieces: list[str] = []
    last = 0
    pos = 0
    n = len(text)
    while pos < n:
        m = _MASTER_RE.search(text, pos)
        if m is None:
            break
        start, end = m.start(), m.end()
        string_body = m.group("sbody")
        if string_body is not None:
            raw_start = _raw_prefix_at(text, start)
            if raw_start is not None:
                dm = _RAW_DELIM_RE.match(text, start + 1)
                delim = dm.group()[:-1] if dm else ""
                body_start = start + 1 + len(delim) + 1
                terminator = ')' + delim + '"'
                body_end = text.find(terminator, body_start)
                if body_end < 0:
                    body_end = n
                    end = n
                else:
                    end = body_end + len(terminator)
                start = raw_start
                literals.append(
                    StringLiteral(text[body_start:body_end], bisect_right(starts, start))
                )
            else:
                literals.append(StringLiteral(string_body, bisect_right(starts, start)))
        pieces.append(text[last:start])
        pieces.append(_NOT_NEWLINE_RE.sub(" ", text[start:end]))
        last = end
        pos = end
    pieces.append(text[last:])
    return "".join(pieces), literals


_TOKEN_RE = re.compile(r"[A-Za-z_]\w*|\d[\w.]*|[^\s\w]")


def tokenize(stripped: str) -> list[Token]:
    """Split stripped source into identifier/number/punctuation tokens."""
    starts = _line_starts(stripped)
    return [
        Token(m.group(), bisect_right(starts, m.start()))
        for m in _TOKEN_RE.finditer(stripped)
    ]


def collect_includes(stripped: str) -> list[tuple[str, int]]:
    starts = _line_starts(stripped)
    return [
        (m.group(1), bisect_right(starts, m.start()))
        for m in _INCLUDE_RE.finditer(stripped)
    ]


def build_typedef_table(tokens: list[Token]) -> set[str]:
    """Collect typedef/using aliases whose right-hand side declares a function pointer."""
    table: set[str] = set()
    for start, end in _alias_spans(tokens):
        body = tokens[start:end]
        for k in range(len(body) - 4):
            if (
                body[k].text == "("
                and body[k + 1].text == "*"
                and re.fullmatch(r"[A-Za-z_]\w*", body[k + 2].text)
                and body[k + 3].text == ")"
                and body[k + 4].text == "("
            ):
                if tokens[start].text == "typedef":
                    table.add(body[k + 2].text)
        if tokens[start].text == "using" and len(body) >= 3 and body[2].text == "=":
            rhs = body[3:]
            if _has_abstract_fn_pointer(rhs):
                table.add(body[1].text)
    return table


def _alias_spans(tokens: list[Token]) -> Iterable[tuple[int, int]]:
    """Index ranges [start, end) from a typedef/using keyword to its ';'."""
    i = 0
    n = len(tokens)
    while i < n:
        if tokens[i].text in ("typedef", "using"):
            j = i
            while j < n and tokens[j].text != ";":
                j += 1
            yield i, j
            i = j
        i += 1


def _has_abstract_fn_pointer(tokens: list[Token]) -> bool:
    for k in range(len(tokens) - 3):
        if (
            tokens[k].text == "("
            and tokens[k + 1].text == "*"
            and tokens[k + 2].text == ")"
            and tokens[k + 3].text == "("
        ):
            return True
    return False


def detect_exceptions(tokens: list[Token]) -> list[Token]:
    """Hits for try/catch/throw keyword tokens (legacy throw() specs included)."""
    return [t for t in tokens if t.text in ("try", "catch", "throw")]


def _named_cast_matches(tokens: list[Token], k: int, typedef_table: set[str]) -> bool:
    """static_cast<T>/reinterpret_cast<T> at index k with T a fn-pointer type."""
    n = len(tokens)
    if k + 1 >= n or tokens[k + 1].text != "<":
        return False
    depth = 0
    inner: list[Token] = []
    for j in range(k + 1, min(n, k + 64)):
        if tokens[j].text == "<":
            depth += 1
        elif tokens[j].text == ">":
            depth -= 1
            if depth == 0:
                break
        elif depth >= 1:
            inner.append(tokens[j])
    return any(x.text in typedef_table for x in inner) or _has_abstract_fn_pointer(inner)


def detect_function_pointer_casts(
    tokens: list[Token], typedef_table: set[str]
) -> list[Token]:
    """Hits for cast expressions whose target type is a function-pointer type."""
    hits: list[Token] = []
    suppressed = set()
    for start, end in _alias_spans(tokens):
        suppressed.update(range(start, end))
    n = len(tokens)
    for k in range(n):
        if k in suppressed:
            continue
        t = tokens[k]
        # C-style cast to a typedef'd function-pointer alias: (alias)
        if (
            t.text == "("
            and k + 2 < n
            and tokens[k + 1].text in typedef_table
            and tokens[k + 2].text == ")"
        ):
            hits.append(tokens[k + 1])
            continue
        # C-style cast to a syntactic function-pointer type: contains (*)( ...
        if (
            t.text == "("
            and k + 3 < n
            and tokens[k + 1].text == "*"
            and tokens[k + 2].text == ")"
            and tokens[k + 3].text == "("
        ):
            hits.append(t)
            continue
        if t.text in ("static_cast", "reinterpret_cast") and _named_cast_matches(
            tokens, k, typedef_table
        ):
            hits.append(t)
    return hits


def detect_threads(tokens: list[Token], includes: list[tuple[str, int]]) -> list[Token]:
    """Hits for pthread/std::thread usage."""
    hits = [Token(f"#include <{h}>", line) for h, line in includes if h in ("pthread.h", "thread")]
    for k, t in enumerate(tokens):
        if t.text == "pthread_create":
            hits.append(t)
        if (
            t.text == "std"
            and k + 3 < len(tokens)
            and tokens[k + 1].text == ":"
            and tokens[k + 2].text == ":"
            and tokens[k + 3].text == "thread"
        ):
            hits.append(tokens[k + 3])
    return hits


def detect_long_double(
    tokens: list[Token], string_literals: list[StringLiteral]
) -> list[Token]:
    """Hits for the long double type or printf %L floating conversions."""
    hits = [
        tokens[k]
        for k in range(len(tokens) - 1)
        if tokens[k].text == "long" and tokens[k + 1].text == "double"
    ]
    for lit in string_literals:
        m = _LONG_DOUBLE_FMT_RE.search(lit.content)
        if m:
            hits.append(Token(m.group(), lit.line))
    return hits


def looks_like_path(s: str) -> bool:
    """Path-shape filter: has a '/' or a file extension, and could be one path."""
    if not s or len(s) > MAX_PATH_LITERAL_LEN or not s.strip():
        return False
    if "\n" in s or "\t" in s:
        return False
    return "/" in s or _PATH_EXTENSION_RE.search(s) is not None


@dataclass
class FileScan:
    """Per-file construct facts; merged commutatively into a ConstructReport."""

    file: str
    hits: dict  # flag -> list[(file, line)]
    literals: list[StringLiteral]


def _detect_hits(
    rel: str,
    tokens: list[Token],
    literals: list[StringLiteral],
    includes: list[tuple[str, int]],
    typedef_table: set[str],
) -> dict:
    return {
        FLAG_EXCEPTIONS: [(rel, t.line) for t in detect_exceptions(tokens)],
        FLAG_FN_POINTER_CASTS: [
            (rel, t.line) for t in detect_function_pointer_casts(tokens, typedef_table)
        ],
        FLAG_THREADS: [(rel, t.line) for t in detect_threads(tokens, includes)],
        FLAG_LONG_DOUBLE: [(rel, t.line) for t in detect_long_double(tokens, literals)],
    }


def _scan_file(text: str, rel: str, typedef_table: set[str]) -> FileScan:
    stripped, literals = strip_source(text)
    tokens = tokenize(stripped)
    includes = collect_includes(stripped)
    hits = _detect_hits(rel, tokens, literals, includes, typedef_table)
    return FileScan(file=rel, hits=hits, literals=literals)


# ---------------------------------------------------------------------------
# Fast scan path: the detector contracts above are defined over token
# streams; these regex equivalents produce the same (file, line) hit sets
# over stripped text without materializing tokens, which is what keeps
# whole-tree scans linear in bytes rather than in token objects. The
# equivalence is pinned by the cross-validation tests.

_KEYWORD_EXCEPTION_RE = re.compile(r"\b(?:try|catch|throw)\b")
_PTHREAD_CREATE_RE = re.compile(r"\bpthread_create\b")
_STD_THREAD_RE = re.compile(r"\bstd\s*:\s*:\s*(thread)\b")
_LONG_DOUBLE_RE = re.compile(r"\blong\s+double\b")
_ABSTRACT_FN_PTR_RE = re.compile(r"\(\s*\*\s*\)\s*\(")
_PAREN_IDENT_RE = re.compile(r"\(\s*([A-Za-z_]\w*)\s*\)")
_NAMED_CAST_RE = re.compile(r"\b(?:static_cast|reinterpret_cast)\b\s*<")
_ALIAS_KEYWORD_RE = re.compile(r"\b(?:typedef|using)\b")
_TYPEDEF_DECLARATOR_RE = re.compile(r"\(\s*\*\s*([A-Za-z_]\w*)\s*\)\s*\(")
_USING_ALIAS_RE = re.compile(r"\busing\s+([A-Za-z_]\w*)\s*=")

_NAMED_CAST_SLICE = 2000  # covers the 64-token window of the token detector


def _alias_text_spans(stripped: str) -> list[tuple[int, int]]:
    """Character ranges of typedef/using declarations (keyword to ';').

    Scanning resumes after each ';' like the token-stream variant, so spans
    never overlap.
    """
    spans = []
    pos = 0
    while True:
        m = _ALIAS_KEYWORD_RE.search(stripped, pos)
        if m is None:
            return spans
        end = stripped.find(";", m.end())
        end = len(stripped) if end < 0 else end
        spans.append((m.start(), end))
        pos = end + 1


def build_typedef_table_from_text(stripped: str) -> set[str]:
    """Same table as build_typedef_table, computed without tokenizing."""
    table: set[str] = set()
    for start, end in _alias_text_spans(stripped):
        span = stripped[start:end]
        if span.startswith("typedef"):
            table.update(_TYPEDEF_DECLARATOR_RE.findall(span))
        else:
            m = _USING_ALIAS_RE.match(span)
            if m and _ABSTRACT_FN_PTR_RE.search(span, m.end()):
                table.add(m.group(1))
    return table


def _fast_fn_pointer_cast_lines(
    stripped: str, typedef_table: set[str], starts: list[int]
) -> list[int]:
    spans = _alias_text_spans(stripped)
    span_starts = [s for s, _ in spans]

    def suppressed(pos: int) -> bool:
        k = bisect_right(span_starts, pos) - 1
        return k >= 0 and pos < spans[k][1]

    lines = []
    for m in _PAREN_IDENT_RE.finditer(stripped):
        if m.group(1) in typedef_table and not suppressed(m.start()):
            lines.append(bisect_right(starts, m.start(1)))
    for m in _ABSTRACT_FN_PTR_RE.finditer(stripped):
        if not suppressed(m.start()):
            lines.append(bisect_right(starts, m.start()))
    for m in _NAMED_CAST_RE.finditer(stripped):
        if suppressed(m.start()):
            continue
        # tokenize only the bounded window and reuse the token detector's
        # angle-bracket logic so both paths share one definition
        window = tokenize(stripped[m.start() : m.start() + _NAMED_CAST_SLICE])
        if _named_cast_matches(window, 0, typedef_table):
            lines.append(bisect_right(starts, m.start()))
    return lines


def _fast_detect_hits(
    rel: str,
    stripped: str,
    literals: list[StringLiteral],
    includes: list[tuple[str, int]],
    typedef_table: set[str],
) -> dict:
    starts = _line_starts(stripped)
    exception_lines = [
        bisect_right(starts, m.start()) for m in _KEYWORD_EXCEPTION_RE.finditer(stripped)
    ]
    thread_lines = [line for h, line in includes if h in ("pthread.h", "thread")]
    thread_lines += [
        bisect_right(starts, m.start()) for m in _PTHREAD_CREATE_RE.finditer(stripped)
    ]
    thread_lines += [
        bisect_right(starts, m.start(1)) for m in _STD_THREAD_RE.finditer(stripped)
    ]
    long_double_lines = [
        bisect_right(starts, m.start()) for m in _LONG_DOUBLE_RE.finditer(stripped)
    ]
    long_double_lines += [
        lit.line for lit in literals if _LONG_DOUBLE_FMT_RE.search(lit.content)
    ]
    return {
        FLAG_EXCEPTIONS: [(rel, line) for line in exception_lines],
        FLAG_FN_POINTER_CASTS: [
            (rel, line)
            for line in _fast_fn_pointer_cast_lines(stripped, typedef_table, starts)
        ],
        FLAG_THREADS: [(rel, line) for line in thread_lines],
        FLAG_LONG_DOUBLE: [(rel, line) for line in long_double_lines],
    }


def _matching_files(root: Path, extensions: Iterable[str]) -> list[Path]:
    suffixes = {e.lower() for e in extensions}
    files = [p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in suffixes]
    return sorted(files, key=lambda p: p.as_posix())


def merge_scans(scans: Iterable[FileScan], skipped: Iterable[tuple[str, str]] = ()) -> ConstructReport:
    """Fold per-file scans into one normalized report (order-independent)."""
    evidence: dict[str, list] = {
        FLAG_EXCEPTIONS: [],
        FLAG_FN_POINTER_CASTS: [],
        FLAG_THREADS: [],
        FLAG_LONG_DOUBLE: [],
    }
    path_literals: list[PathLiteral] = []
    count = 0
    for scan in scans:
        count += 1
        for flag, hit_list in scan.hits.items():
            evidence[flag].extend(hit_list)
        for lit in scan.literals:
            if looks_like_path(lit.content):
                path_literals.append(PathLiteral(lit.content, scan.file, lit.line))
    normalized = {
        flag: tuple(sorted(set(hit_list))) for flag, hit_list in evidence.items() if hit_list
    }
    path_literals.sort(key=lambda p: (p.file, p.line, p.literal))
    return ConstructReport(
        uses_exceptions=bool(normalized.get(FLAG_EXCEPTIONS)),
        casts_function_pointers=bool(normalized.get(FLAG_FN_POINTER_CASTS)),
        uses_threads=bool(normalized.get(FLAG_THREADS)),
        uses_long_double=bool(normalized.get(FLAG_LONG_DOUBLE)),
        path_literals=tuple(path_literals),
        scanned_files=count,
        evidence=normalized,
        skipped_files=tuple(sorted(skipped)),
    )


def scan_sources(
    root: str | Path, extensions: Iterable[str] = DEFAULT_EXTENSIONS
) -> ConstructReport:
    """Scan all matching files under root and aggregate the construct report."""
    root = Path(root)
    extensions = list(extensions)
    if not extensions:
        raise ValueError("extensions must be nonempty")
    files = _matching_files(root, extensions)
    if not files:
        raise EmptyTreeError(f"no source files matching {extensions} under {root}")

    # Typedef aliases can live in headers used by other files, so the alias
    # table is built over the whole tree before the cast detector runs.
    # Files are stripped once and never fully tokenized (fast path).
    typedef_table: set[str] = set()
    prepared: list[tuple[str, str, list[StringLiteral]]] = []
    skipped: list[tuple[str, str]] = []
    for path in files:
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_bytes().decode("utf-8", errors="replace")
        except OSError as exc:
            skipped.append((rel, str(exc)))
            continue
        stripped, literals = strip_source(text)
        prepared.append((rel, stripped, literals))
        if "typedef" in stripped or "using" in stripped:
            typedef_table |= build_typedef_table_from_text(stripped)

    scans = []
    for rel, stripped, literals in prepared:
        includes = collect_includes(stripped)
        hits = _fast_detect_hits(rel, stripped, literals, includes, typedef_table)
        scans.append(FileScan(file=rel, hits=hits, literals=literals))
    return merge_scans(scans, skipped)


def extract_path_literals(
    root: str | Path, extensions: Iterable[str] = DEFAULT_EXTENSIONS
) -> list[PathLiteral]:
    """All path-shaped string literals under root, with locations."""
    root = Path(root)
    out: list[PathLiteral] = []
    for path in _matching_files(root, extensions):
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_bytes().decode("utf-8", errors="replace")
        except OSError:
            continue
        _, literals = strip_source(text)
        for lit in literals:
            if looks_like_path(lit.content):
                out.append(PathLiteral(lit.content, rel, lit.line))
    out.sort(key=lambda p: (p.file, p.line, p.literal))
    return out
