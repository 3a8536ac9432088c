"""Editorial cleanup and tokenization.

Raw book text goes through two steps before graph construction:

1. :func:`clean_text` drops editorial lines (ISBN, catalog card, table of
   contents, bare page numbers...) while keeping every other line, and its
   line terminator, byte for byte.
2. :func:`tokenize` turns the cleaned text into a :class:`TokenStream`:
   case-folded word tokens plus the indices at which a new line starts.
   Line breaks matter downstream because no graph edge is drawn across them.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from wordgraph.errors import ConfigError

Action = Literal["drop-line", "drop-span"]
ACTIONS: tuple[str, ...] = ("drop-line", "drop-span")

# Letters/digits (any script), with single hyphens or apostrophes allowed
# between two word characters. Combining marks continue a word so that
# decomposed input and case-folded dotted capitals stay in one token.
_MARKS = "\u0300-\u036f\u1ab0-\u1aff\u1dc0-\u1dff\u20d0-\u20ff\ufe20-\ufe2f"
_WORD_CHAR = rf"(?:[^\W_][{_MARKS}]*)"
_JOINER = "['\u2019\u02bc\\-\u2010\u2011]"
TOKEN_PATTERN = rf"{_WORD_CHAR}+(?:{_JOINER}{_WORD_CHAR}+)*"
_TOKEN_RE = re.compile(TOKEN_PATTERN)
_TOKEN_FULL_RE = re.compile(TOKEN_PATTERN)

DEFAULT_RULE_LINES: tuple[tuple[Action, str], ...] = (
    # ISBN / ISSN lines
    ("drop-line", r"(?i)\bIS[BS]N\b"),
    # catalog card (ficha catalografica) classification lines
    ("drop-line", r"^\s*(?:CDD|CDU)\b"),
    ("drop-line", r"(?i)dados internacionais de cataloga"),
    # copyright notices
    ("drop-line", r"(?i)^\s*(?:©|\(c\)\s|copyright\b|todos os direitos reservados)"),
    # a bare page number, optionally prefixed by "p." / "pag." / "pág."
    ("drop-line", r"(?i)^\s*(?:p(?:[aá]g)?\.?\s*)?\d{1,4}\s*$"),
    # table-of-contents entries with dot leaders: "Capitulo 1 ........ 12"
    ("drop-line", r"(?:\.\s?){4,}\s*\d+\s*$"),
    ("drop-line", r"…{2,}\s*\d+\s*$"),
    # front/back matter headings on a line of their own
    (
        "drop-line",
        r"(?i)^\s*(?:sum[aá]rio|[ií]ndice|refer[eê]ncias(?: bibliogr[aá]ficas)?"
        r"|bibliografia|ficha catalogr[aá]fica|cr[eé]ditos)\s*:?\s*$",
    ),
)


@dataclass(frozen=True)
class CleanRules:
    """Ordered line-matching rules applied by :func:`clean_text`.

    ``source`` is ``"default"`` or the path of the rules file.
    """

    rules: tuple[tuple[Action, str], ...]
    source: str = "default"
    _compiled: tuple[tuple[str, re.Pattern[str]], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        compiled = []
        for number, (action, pattern) in enumerate(self.rules, start=1):
            if action not in ACTIONS:
                raise ConfigError(
                    f"rule {number} ({action!r}): unknown action, expected one of {ACTIONS}"
                )
            try:
                compiled.append((action, re.compile(pattern)))
            except re.error as exc:
                raise ConfigError(f"rule {number} ({pattern!r}): {exc}") from None
        object.__setattr__(self, "_compiled", tuple(compiled))

    @classmethod
    def default(cls) -> CleanRules:
        return cls(DEFAULT_RULE_LINES)

    @classmethod
    def from_file(cls, path: str | Path) -> CleanRules:
        """Read ``action<TAB>pattern`` lines; ``#`` starts a comment line."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read rules file {path}: {exc}") from None
        rules: list[tuple[Action, str]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            action, sep, pattern = line.partition("\t")
            if not sep or not pattern:
                raise ConfigError(
                    f"{path}:{lineno}: rule {line!r} is not of the form action<TAB>pattern"
                )
            action = action.strip()
            if action not in ACTIONS:
                raise ConfigError(f"{path}:{lineno}: rule {line!r} has unknown action {action!r}")
            try:
                re.compile(pattern)
            except re.error as exc:
                raise ConfigError(f"{path}:{lineno}: rule {line!r}: bad pattern: {exc}") from None
            rules.append((action, pattern))  # type: ignore[arg-type]
        return cls(tuple(rules), source=str(path))

    def _apply_line(self, content: str) -> str | None:
        """Return the cleaned line content, or None if the line is dropped."""
        while True:
            before = content
            for action, regex in self._compiled:
                if action == "drop-line":
                    if regex.search(content):
                        return None
                else:
                    content = regex.sub("", content)
            # span removal can expose new matches; loop to a fixed point so
            # cleaning is idempotent
            if content == before:
                return content


@dataclass(frozen=True)
class TokenStream:
    doc_id: str
    tokens: tuple[str, ...]
    boundary_before: frozenset[int]

    def __len__(self) -> int:
        return len(self.tokens)

    def boundary_flags(self) -> list[bool]:
        """Per-token flags, True where a new line begins."""
        flags = [False] * len(self.tokens)
        for i in self.boundary_before:
            if i < len(flags):
                flags[i] = True
        return flags

    def segments(self) -> list[tuple[str, ...]]:
        starts = sorted(self.boundary_before | {0})
        ends = starts[1:] + [len(self.tokens)]
        return [self.tokens[a:b] for a, b in zip(starts, ends) if a < b]


def _split_terminator(line: str) -> tuple[str, str]:
    body = line.splitlines()[0] if line else ""
    return body, line[len(body):]


def clean_text(raw: str, rules: CleanRules | None = None) -> str:
    """Remove editorial lines/spans from ``raw``.

    Dropped lines disappear together with their line terminator; all other
    lines are emitted unchanged (minus any ``drop-span`` matches) and in order.
    """
    rules = rules or CleanRules.default()
    out: list[str] = []
    for line in raw.splitlines(keepends=True):
        body, terminator = _split_terminator(line)
        cleaned = rules._apply_line(body)
        if cleaned is not None:
            out.append(cleaned + terminator)
    return "".join(out)


def tokenize(cleaned: str, doc_id: str = "") -> TokenStream:
    """Split ``cleaned`` text into case-folded word tokens.

    Each non-empty line opens a new segment; blank lines add nothing.
    """
    text = unicodedata.normalize("NFC", cleaned).casefold()
    tokens: list[str] = []
    boundaries: set[int] = set()
    for line in text.splitlines():
        words = _TOKEN_RE.findall(line)
        if words:
            boundaries.add(len(tokens))
            tokens.extend(words)
    return TokenStream(doc_id, tuple(tokens), frozenset(boundaries))


def detokenize(stream: TokenStream) -> str:
    """Space-joined tokens, one segment per line."""
    return "\n".join(" ".join(seg) for seg in stream.segments())


def is_token(s: str) -> bool:
    return _TOKEN_FULL_RE.fullmatch(s) is not None


def prepare(raw: str, doc_id: str = "", rules: CleanRules | None = None) -> TokenStream:
    return tokenize(clean_text(raw, rules), doc_id)


def read_document(path: str | Path) -> str:
    """Read a UTF-8 document (a leading BOM is ignored)."""
    return Path(path).read_text(encoding="utf-8-sig")


def iter_rules(rules: CleanRules) -> Iterable[str]:
    """Render rules back to the ``action<TAB>pattern`` file format."""
    for action, pattern in rules.rules:
        yield f"{action}\t{pattern}"
