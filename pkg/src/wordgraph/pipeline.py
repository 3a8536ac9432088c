"""Sliding-window document profiles and corpus runs."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from wordgraph.errors import ConfigError, DataError, DocumentSkipped
from wordgraph.graphcore import AttributeVector
from wordgraph.graphcore.kernel import encode_tokens, window_matrix
from wordgraph.textprep import CleanRules, TokenStream, clean_text, read_document, tokenize

log = logging.getLogger(__name__)

ShortTextPolicy = Literal["single-window", "skip"]
MIN_GRADE, MAX_GRADE = 0, 11


@dataclass(frozen=True)
class WindowingConfig:
    window_len: int = 30
    step: int = 15
    short_text_policy: ShortTextPolicy = "single-window"

    def __post_init__(self) -> None:
        if self.window_len < 2:
            raise ConfigError(f"window length must be >= 2, got {self.window_len}")
        if not 1 <= self.step <= self.window_len:
            raise ConfigError(
                f"step must be between 1 and the window length ({self.window_len}), got {self.step}"
            )
        if self.short_text_policy not in ("single-window", "skip"):
            raise ConfigError(f"unknown short-text policy {self.short_text_policy!r}")


@dataclass(frozen=True)
class TextProfile:
    doc_id: str
    window_count: int
    mean: AttributeVector


@dataclass(frozen=True)
class CorpusRecord:
    doc_id: str
    grade: int
    profile: TextProfile

    def __post_init__(self) -> None:
        if not MIN_GRADE <= self.grade <= MAX_GRADE:
            raise DataError(f"{self.doc_id}: grade {self.grade} outside {MIN_GRADE}-{MAX_GRADE}")


@dataclass(frozen=True)
class ManifestEntry:
    doc_id: str
    path: Path
    grade: int


@dataclass(frozen=True)
class SkipEntry:
    doc_id: str
    reason: Literal["short_text", "error"]
    detail: str


@dataclass
class CorpusResult:
    records: list[CorpusRecord]
    skips: list[SkipEntry] = field(default_factory=list)

    @property
    def errors(self) -> list[SkipEntry]:
        return [s for s in self.skips if s.reason == "error"]


def enumerate_windows(stream: TokenStream, cfg: WindowingConfig) -> list[tuple[int, int]]:
    """(start, length) of every full window; see ``short_text_policy`` for short texts."""
    count = len(stream)
    if count == 0:
        raise DataError(f"{stream.doc_id or 'document'}: no tokens")
    if count < cfg.window_len:
        return [(0, count)] if cfg.short_text_policy == "single-window" else []
    return [(s, cfg.window_len) for s in range(0, count - cfg.window_len + 1, cfg.step)]


def window_attribute_matrix(stream: TokenStream, cfg: WindowingConfig) -> np.ndarray:
    """Per-window attributes, one row per window, columns in ``ATTRIBUTES`` order."""
    windows = enumerate_windows(stream, cfg)
    if not windows:
        return np.zeros((0, 7))
    ids, vocab = encode_tokens(stream.tokens)
    flags = np.asarray(stream.boundary_flags(), dtype=np.bool_)
    length = windows[0][1]
    return window_matrix(ids, flags, [s for s, _ in windows], length, vocab)


def analyze_document(stream: TokenStream, cfg: WindowingConfig | None = None) -> TextProfile:
    """Average the window attributes of one document (equal weight per window).

    Raises :class:`DocumentSkipped` when the skip policy leaves no window.
    """
    cfg = cfg or WindowingConfig()
    matrix = window_attribute_matrix(stream, cfg)
    if matrix.shape[0] == 0:
        raise DocumentSkipped(
            f"{stream.doc_id}: {len(stream)} tokens, shorter than window of {cfg.window_len}"
        )
    means = [math.fsum(matrix[:, j].tolist()) / matrix.shape[0] for j in range(7)]
    return TextProfile(stream.doc_id, int(matrix.shape[0]), AttributeVector.from_sequence(means))


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Parse a ``doc_id,path,grade`` CSV. Relative paths resolve against the manifest's folder."""
    path = Path(path)
    try:
        handle = path.open(encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise DataError(f"cannot open manifest {path}: {exc.strerror or exc}") from None
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: no documents")
        if [h.strip() for h in header] != ["doc_id", "path", "grade"]:
            raise DataError(f"{path}:1: expected header doc_id,path,grade, got {','.join(header)}")
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}: {row}")
            doc_id, doc_path, grade_text = (c.strip() for c in row)
            if not doc_id:
                raise DataError(f"{path}:{lineno}: empty doc_id")
            if doc_id in seen:
                raise DataError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            try:
                grade = int(grade_text)
            except ValueError:
                raise DataError(f"{path}:{lineno}: grade {grade_text!r} is not an integer") from None
            if not MIN_GRADE <= grade <= MAX_GRADE:
                raise DataError(
                    f"{path}:{lineno}: row {doc_id!r} grade {grade} outside {MIN_GRADE}-{MAX_GRADE}"
                )
            seen.add(doc_id)
            doc = Path(doc_path)
            entries.append(ManifestEntry(doc_id, doc if doc.is_absolute() else path.parent / doc, grade))
    if not entries:
        raise DataError(f"{path}: no documents")
    return entries


def _process(entry: ManifestEntry, cfg: WindowingConfig, rules: CleanRules) -> CorpusRecord | SkipEntry:
    try:
        raw = read_document(entry.path)
    except (OSError, UnicodeDecodeError) as exc:
        detail = getattr(exc, "strerror", None) or str(exc)
        return SkipEntry(entry.doc_id, "error", f"cannot read {entry.path}: {detail}")
    stream = tokenize(clean_text(raw, rules), entry.doc_id)
    if not len(stream):
        return SkipEntry(entry.doc_id, "error", "no tokens")
    try:
        profile = analyze_document(stream, cfg)
    except DocumentSkipped as exc:
        return SkipEntry(entry.doc_id, "short_text", str(exc))
    return CorpusRecord(entry.doc_id, entry.grade, profile)


def _process_chunk(
    entries: Sequence[ManifestEntry], cfg: WindowingConfig, rules: CleanRules
) -> list[CorpusRecord | SkipEntry]:
    return [_process(e, cfg, rules) for e in entries]


def run_corpus(
    entries: Sequence[ManifestEntry],
    cfg: WindowingConfig | None = None,
    rules: CleanRules | None = None,
    workers: int = 1,
) -> CorpusResult:
    """Analyze every manifest entry. Output is sorted by doc_id whatever the worker count."""
    cfg = cfg or WindowingConfig()
    rules = rules or CleanRules.default()
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    ordered = sorted(entries, key=lambda e: e.doc_id)
    if workers == 1 or len(ordered) < 2:
        results = _process_chunk(ordered, cfg, rules)
    else:
        chunks = [ordered[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_process_chunk, chunks, [cfg] * workers, [rules] * workers)
            results = [r for part in parts for r in part]

    records = sorted((r for r in results if isinstance(r, CorpusRecord)), key=lambda r: r.doc_id)
    skips = sorted((r for r in results if isinstance(r, SkipEntry)), key=lambda s: s.doc_id)
    for s in skips:
        log.info("skipped %s (%s): %s", s.doc_id, s.reason, s.detail)
    if not records:
        raise DataError("no document could be analyzed")
    return CorpusResult(records, skips)


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
