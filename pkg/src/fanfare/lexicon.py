"""Commentator-excitement scoring from transcript text.

A weighted expression dictionary maps words and phrases ("great shot",
"fantastic", ...) to excitement weights in [0, 1].  A transcript's score is
the noisy-OR aggregate 1 - prod(1 - w_i) over every matched occurrence, so
several exciting expressions push the score up while staying bounded, and a
single match scores exactly its weight.

Matching is case-insensitive on word boundaries: text and expressions are
tokenized identically (runs of word characters), so "fantastically" never
matches the entry "fantastic".  Multi-word expressions must appear as
consecutive tokens.  Each entry counts once per non-overlapping occurrence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


class LexiconError(ValueError):
    """Base class for lexicon-file problems; carries the offending line number."""

    def __init__(self, message: str, lineno: int = 0):
        super().__init__(message)
        self.lineno = lineno


class DuplicateExpression(LexiconError):
    pass


class WeightOutOfRange(LexiconError):
    pass


class EmptyLexicon(LexiconError):
    pass


def _tokenize(text: str):
    """Lowercased word tokens with their character offsets."""
    return [(m.group(0).lower(), m.start()) for m in _TOKEN_RE.finditer(text)]


def normalize_expression(expression: str) -> str:
    """Lowercase, split into word tokens, rejoin with single spaces."""
    return " ".join(tok for tok, _ in _tokenize(expression))


@dataclass(frozen=True)
class ExcitementLexicon:
    """Normalized (expression, weight) entries, expressions unique."""

    entries: tuple  # of (normalized expression string, weight)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class LexicalScore:
    """Noisy-OR excitement score plus the matches that produced it.

    `matches` holds (expression, weight, character offset) per occurrence;
    zero-weight entries contribute no excitement and are not recorded, so
    score == 0 exactly when matches is empty.
    """

    score: float
    matches: tuple


def load_lexicon(source: str) -> ExcitementLexicon:
    """Parse a two-column `expression, weight` document into a lexicon.

    One entry per line, last comma separates the weight; `#` starts a
    comment line; blank lines are ignored.
    """
    entries = []
    seen = set()
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," not in line:
            raise LexiconError(f"line {lineno}: expected 'expression, weight'", lineno)
        expr_part, weight_part = line.rsplit(",", 1)
        try:
            weight = float(weight_part.strip())
        except ValueError:
            raise LexiconError(f"line {lineno}: weight '{weight_part.strip()}' is not a number",
                               lineno) from None
        if not (0.0 <= weight <= 1.0):
            raise WeightOutOfRange(
                f"line {lineno}: weight {weight} outside [0, 1]", lineno)
        expression = normalize_expression(expr_part)
        if not expression:
            raise LexiconError(f"line {lineno}: empty expression", lineno)
        if expression in seen:
            raise DuplicateExpression(
                f"line {lineno}: duplicate expression '{expression}'", lineno)
        seen.add(expression)
        entries.append((expression, weight))
    if not entries:
        raise EmptyLexicon("lexicon has no entries")
    return ExcitementLexicon(entries=tuple(entries))


def load_lexicon_file(path) -> ExcitementLexicon:
    with open(path, encoding="utf-8") as fh:
        return load_lexicon(fh.read())


def default_lexicon() -> ExcitementLexicon:
    """The 60-expression dictionary shipped with the package."""
    source = resources.files("fanfare").joinpath("data/default_lexicon.txt").read_text("utf-8")
    return load_lexicon(source)


def score_text(text: str, lexicon: ExcitementLexicon) -> LexicalScore:
    """Score a transcript against the lexicon.

    Pure and deterministic; empty text scores 0 with no matches.
    """
    tokens = _tokenize(text)
    words = [tok for tok, _ in tokens]
    matches = []
    for expression, weight in lexicon.entries:
        expr_tokens = expression.split(" ")
        n = len(expr_tokens)
        i = 0
        while i + n <= len(words):
            if words[i:i + n] == expr_tokens:
                if weight > 0.0:
                    matches.append((expression, weight, tokens[i][1]))
                i += n  # greedy: occurrences of one entry never overlap
            else:
                i += 1
    matches.sort(key=lambda m: (m[2], m[0]))
    miss = 1.0
    for _, weight, _ in matches:
        miss *= 1.0 - weight
    score = 1.0 - miss if matches else 0.0
    return LexicalScore(score=min(max(score, 0.0), 1.0), matches=tuple(matches))
