"""Result-line grammar: parsing, validation, serialization, stream tagging.

A solver run condenses its comparable results on one stdout line:

    libopt%solver[.tag]%collection%problem%token=number%token=number...

Fields are separated by ``%``, the first four are positional, the rest
are token-number pairs. Blanks (space/tab) around fields and around the
``=`` sign are ignored, and a ``#`` starts a comment running to the end
of the line. Every line must carry at least two pairs, exactly one of
which is ``info`` (value 0 means the solver succeeded).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import LiboptError

SENTINEL = "libopt"
INFO_TOKEN = "info"

# solver/collection/problem/token names are "words"
NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")
# optional sign, decimal digits with optional point, optional e/E exponent
NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")

_BLANKS = " \t"


class RecordError(LiboptError):
    """A malformed result line, or a record invariant violation."""


def is_name(text: str) -> bool:
    return bool(NAME_RE.match(text))


def check_name(text: str, what: str = "name") -> str:
    if not NAME_RE.match(text):
        raise RecordError(f"invalid {what} {text!r} (must match [A-Za-z0-9_]+)")
    return text


def check_tag(text: str) -> str:
    """Tags may contain anything except '%', '#', and whitespace."""
    if not text or any(c in "%#" or c.isspace() for c in text):
        raise RecordError(f"invalid tag {text!r} (nonempty, no '%', '#', or blanks)")
    return text


def split_solver_field(text: str) -> tuple[str, str | None]:
    """Split ``solv[.tag]`` at the first dot only; the tag keeps later dots."""
    name, sep, tag = text.partition(".")
    if sep:
        return check_name(name, "solver"), check_tag(tag)
    return check_name(name, "solver"), None


def parse_number(text: str) -> float:
    if not NUMBER_RE.match(text):
        raise RecordError(f"unparseable number {text!r}")
    return float(text)


def format_number(value: float) -> str:
    """Shortest decimal text that parses back to exactly the same float."""
    out = repr(value)
    if out.endswith(".0"):
        out = out[:-2]
    return out


@dataclass(frozen=True)
class TokenPair:
    token: str
    value: float

    def __post_init__(self) -> None:
        check_name(self.token, "token")
        if not math.isfinite(self.value):
            raise RecordError(f"non-finite value for token {self.token!r}")


@dataclass(frozen=True)
class LiboptRecord:
    """One parsed result: who ran what, plus the measured token values."""

    solver: str
    collection: str
    problem: str
    pairs: tuple[TokenPair, ...]
    tag: str | None = None

    def __post_init__(self) -> None:
        check_name(self.solver, "solver")
        check_name(self.collection, "collection")
        check_name(self.problem, "problem")
        if self.tag is not None:
            check_tag(self.tag)
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if len(self.pairs) < 2:
            raise RecordError("a result needs at least two token-number pairs")
        seen: set[str] = set()
        for pair in self.pairs:
            if pair.token in seen:
                raise RecordError(f"duplicate token {pair.token!r}")
            seen.add(pair.token)
        if INFO_TOKEN not in seen:
            raise RecordError(f"missing mandatory {INFO_TOKEN!r} pair")

    @property
    def solver_with_tag(self) -> str:
        return self.solver if self.tag is None else f"{self.solver}.{self.tag}"

    @property
    def info(self) -> float:
        return next(p.value for p in self.pairs if p.token == INFO_TOKEN)

    @property
    def succeeded(self) -> bool:
        return self.info == 0.0

    def token_map(self) -> dict[str, float]:
        return {p.token: p.value for p in self.pairs}

    def key_text(self) -> str:
        return f"{self.solver_with_tag}%{self.collection}%{self.problem}"


def parse_line(text: str) -> LiboptRecord:
    """Parse one result line into a record; raises RecordError when malformed."""
    if "\n" in text or "\r" in text:
        raise RecordError("result line must be a single line")
    body = text.split("#", 1)[0]
    fields = [f.strip(_BLANKS) for f in body.split("%")]
    if fields[0] != SENTINEL:
        raise RecordError(f"line does not start with the {SENTINEL!r} sentinel")
    if len(fields) < 4:
        raise RecordError(
            "expected positional fields 'libopt%solver%collection%problem'"
        )
    solver, tag = split_solver_field(fields[1])
    collection = check_name(fields[2], "collection")
    problem = check_name(fields[3], "problem")
    pairs = []
    for raw in fields[4:]:
        token, sep, number = raw.partition("=")
        if not sep:
            raise RecordError(f"pair {raw!r} has no '='")
        token = token.strip(_BLANKS)
        if not token:
            raise RecordError(f"pair {raw!r} has an empty token")
        pairs.append(TokenPair(check_name(token, "token"), parse_number(number.strip(_BLANKS))))
    return LiboptRecord(solver, collection, problem, tuple(pairs), tag)


def serialize(record: LiboptRecord) -> str:
    """Canonical writer: no padding blanks, pairs in stored order."""
    parts = [SENTINEL, record.solver_with_tag, record.collection, record.problem]
    parts += [f"{p.token}={format_number(p.value)}" for p in record.pairs]
    return "%".join(parts)


@dataclass(frozen=True)
class TokenConfig:
    """Effective token settings resolved from the startup file."""

    valid_tokens: frozenset[str] | None = None
    performance_tokens: frozenset[str] | None = None
    store_path: Path | None = None

    def __post_init__(self) -> None:
        if self.valid_tokens is not None and self.performance_tokens is not None:
            stray = self.performance_tokens - self.valid_tokens
            if stray:
                raise RecordError(
                    f"performance tokens not among the valid tokens: {sorted(stray)}"
                )


def validate_tokens(record: LiboptRecord, config: TokenConfig) -> list[str]:
    """Check a record's tokens against the configured sets.

    Without a configured set there is no verification. Violations are
    returned as a list, one message per offending token, never raised
    mid-scan.
    """
    errors: list[str] = []
    if config.valid_tokens is not None:
        for pair in record.pairs:
            if pair.token not in config.valid_tokens:
                errors.append(f"unknown token {pair.token!r} in {record.key_text()}")
    if config.performance_tokens is not None:
        if not any(p.token in config.performance_tokens for p in record.pairs):
            errors.append(f"no performance token in {record.key_text()}")
    return errors


def _looks_like_result_line(line: str) -> bool:
    body = line.split("#", 1)[0]
    head, sep, _ = body.partition("%")
    return bool(sep) and head.strip(_BLANKS) == SENTINEL


def _append_tag(line: str, tag: str) -> str:
    # textual rewrite of the solver field only, preserving padding and comment
    body, sep, comment = line.partition("#")
    fields = body.split("%")
    solver = fields[1]
    stripped = solver.strip(_BLANKS)
    left = solver[: len(solver) - len(solver.lstrip(_BLANKS))]
    right = solver[len(left) + len(stripped):]
    fields[1] = f"{left}{stripped}.{tag}{right}"
    return "%".join(fields) + sep + comment


def filter_stream(
    lines: Iterable[str],
    tag: str | None = None,
    records: list[LiboptRecord] | None = None,
    warnings: list[str] | None = None,
) -> Iterator[str]:
    """Pass lines through, tagging and harvesting the ones that parse.

    Result lines get ``.tag`` appended to their solver field (when a tag
    is given) and are collected into ``records``; every other line passes
    through untouched. A line that carries the sentinel but fails to
    parse is forwarded unchanged and noted in ``warnings`` so one bad
    printout cannot abort a long batch.
    """
    if tag is not None:
        check_tag(tag)
    for line in lines:
        try:
            record = parse_line(line)
        except RecordError as exc:
            if warnings is not None and _looks_like_result_line(line):
                warnings.append(f"unparseable result line {line!r}: {exc}")
            yield line
            continue
        if tag is not None:
            line = _append_tag(line, tag)
            record = parse_line(line)
        if records is not None:
            records.append(record)
        yield line


def iter_result_lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield (lineno, line) for the non-blank, non-comment lines of a result file."""
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if body.strip():
            yield lineno, raw
