"""Exception types shared across the pipeline.

Parsing and lexicon errors carry enough location information (entry index,
line number) to point a corpus maintainer at the offending input.
"""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


# --- IGT parsing ---------------------------------------------------------


class IgtError(PipelineError):
    def __init__(self, message: str, *, entry_index: int | None = None,
                 line_no: int | None = None):
        super().__init__(message)
        self.message = message
        self.entry_index = entry_index
        self.line_no = line_no

    def __str__(self) -> str:
        where = []
        if self.entry_index is not None:
            where.append(f"entry {self.entry_index}")
        if self.line_no is not None:
            where.append(f"line {self.line_no}")
        if where:
            return f"{self.message} ({', '.join(where)})"
        return self.message


class TierMissing(IgtError):
    """An entry lacks one of the required marker lines."""


class TokenCountMismatch(IgtError):
    """The word, segmentation and gloss lines disagree on token count."""


class MorphemeCountMismatch(IgtError):
    """A segmentation token and its gloss token disagree on unit count."""


class UnbalancedBrackets(IgtError):
    """A covert-morpheme bracket is unclosed or stray."""


# --- Lexicon loading ------------------------------------------------------


class LexiconError(PipelineError):
    def __init__(self, message: str, *, line_no: int | None = None):
        super().__init__(message)
        self.message = message
        self.line_no = line_no

    def __str__(self) -> str:
        if self.line_no is not None:
            return f"{self.message} (line {self.line_no})"
        return self.message


class MalformedRow(LexiconError):
    pass


class DuplicateKey(LexiconError):
    pass


class UnknownClassName(LexiconError):
    pass


class UnknownVariantKind(LexiconError):
    pass


class ConflictingLexeme(LexiconError):
    pass


class MissingCanonical(LexiconError):
    pass


# --- Paradigm tables ------------------------------------------------------


class TableError(PipelineError):
    pass


class ColumnCountError(TableError):
    pass


class UnknownSlot(TableError):
    pass


# --- Reinflection ---------------------------------------------------------


class ReinflectionError(PipelineError):
    pass


class EmptyTrainingSet(ReinflectionError):
    pass


class NoSourceCells(ReinflectionError):
    pass


# --- Evaluation -----------------------------------------------------------


class EvalError(PipelineError):
    pass


class MissingPrediction(EvalError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        preview = ", ".join(map(str, self.missing[:5]))
        more = "" if len(self.missing) <= 5 else f" (+{len(self.missing) - 5} more)"
        super().__init__(f"no prediction for {len(self.missing)} gold cells: {preview}{more}")


class DegenerateEvalSet(EvalError):
    pass


class ZeroMeanBenefit(EvalError):
    pass


# --- Exercise service -----------------------------------------------------


class ServiceError(PipelineError):
    pass


class EmptyAfterFilter(ServiceError):
    pass


class SessionExhausted(ServiceError):
    pass


class UnknownExercise(ServiceError):
    pass


class UnknownSession(ServiceError):
    pass
