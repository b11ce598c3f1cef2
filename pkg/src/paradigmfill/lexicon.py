"""Expert-supplied classifications backing the table builder.

Two registries, both loaded from small TSV config files and immutable after
load:

* morph classes: which affix labels are inflectional (keep as paradigm
  slots) versus derivational (merge into the stem);
* variants: which stem spellings belong to the same lexeme, and whether a
  spelling is canonical, an orthographic variant, or a dialect form.

Lexeme identity is keyed on the stem *form*, never the gloss: the same
lexeme may carry different glosses in different contexts, and distinct
lexemes may share a gloss.  Homographic distinct lexemes cannot be pulled
apart without extra annotation; that limitation is accepted here.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .errors import (
    ConflictingLexeme,
    DuplicateKey,
    MalformedRow,
    MissingCanonical,
    UnknownClassName,
    UnknownVariantKind,
)
from .igt import Boundary, GlossKind, Morpheme

logger = logging.getLogger(__name__)

KIND_CANONICAL = "canonical"
KIND_ORTHOGRAPHIC = "orthographic"
KIND_DIALECT = "dialect"

UNMARKED_DIALECT = "unmarked"


class MorphClass(enum.Enum):
    INFLECTIONAL = "Inflectional"
    DERIVATIONAL = "Derivational"


@dataclass(frozen=True)
class MorphClassLexicon:
    """Maps (gloss label, optional form) to a morph class.

    Lookup by (label, form) falls back to the form-independent (label, None)
    entry.  Unlisted labels default by gloss kind: grammatical labels are
    inflectional, lexical ones derivational.  Defaulted decisions are worth
    reviewing, so :meth:`classify` reports them.
    """

    entries: Mapping[tuple[str, str | None], MorphClass]

    def lookup(self, label: str, form: str | None = None) -> MorphClass | None:
        if form is not None:
            hit = self.entries.get((label, form))
            if hit is not None:
                return hit
        return self.entries.get((label, None))

    def classify(self, m: Morpheme) -> tuple[MorphClass, bool]:
        """Return (class, defaulted) for an affix or reduplicant."""
        if m.boundary not in (Boundary.AFFIX, Boundary.REDUPLICANT):
            raise ValueError(
                f"classify expects an affix or reduplicant, got {m.boundary.value}"
            )
        listed = self.lookup(m.gloss, m.form)
        if listed is not None:
            return listed, False
        if m.gloss_kind is GlossKind.GRAMMATICAL:
            return MorphClass.INFLECTIONAL, True
        return MorphClass.DERIVATIONAL, True

    @classmethod
    def empty(cls) -> "MorphClassLexicon":
        return cls(entries=MappingProxyType({}))


def classify_morph(lexicon: MorphClassLexicon, m: Morpheme) -> MorphClass:
    """Class of an affix/reduplicant, applying and logging defaults."""
    cls, defaulted = lexicon.classify(m)
    if defaulted:
        logger.debug(
            "no morph-class entry for %r (form %r); defaulting to %s",
            m.gloss, m.form, cls.value,
        )
    return cls


@dataclass(frozen=True)
class VariantEntry:
    lexeme_id: str
    kind: str  # one of KIND_CANONICAL, KIND_ORTHOGRAPHIC, KIND_DIALECT
    dialect: str | None = None

    def dialect_group(self) -> str:
        """Group name for fairness reporting; non-dialect kinds collapse."""
        if self.kind == KIND_DIALECT and self.dialect:
            return self.dialect
        return UNMARKED_DIALECT


@dataclass(frozen=True)
class VariantRegistry:
    entries: Mapping[str, VariantEntry]

    def resolve(self, stem_form: str) -> VariantEntry:
        hit = self.entries.get(stem_form)
        if hit is not None:
            return hit
        return VariantEntry(lexeme_id=stem_form, kind=KIND_CANONICAL)

    @classmethod
    def empty(cls) -> "VariantRegistry":
        return cls(entries=MappingProxyType({}))


def resolve_lexeme(registry: VariantRegistry, stem_form: str) -> VariantEntry:
    """Total, deterministic lookup; unregistered forms are their own lexeme."""
    return registry.resolve(stem_form)


# --- TSV loading ----------------------------------------------------------


def _read_rows(path: Path | str):
    """Yield (line_no, fields) for non-comment, non-blank TSV lines."""
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield line_no, line.split("\t")


def load_morph_classes(path: Path | str) -> MorphClassLexicon:
    """Load the 3-column TSV: label, form-or-``*``, class name."""
    entries: dict[tuple[str, str | None], MorphClass] = {}
    for line_no, fields in _read_rows(path):
        if len(fields) != 3:
            raise MalformedRow(
                f"expected 3 tab-separated columns, found {len(fields)}",
                line_no=line_no,
            )
        label, form, class_name = (f.strip() for f in fields)
        if not label or not form or not class_name:
            raise MalformedRow("empty column", line_no=line_no)
        try:
            morph_class = MorphClass(class_name)
        except ValueError:
            raise UnknownClassName(
                f"unknown morph class {class_name!r} "
                f"(expected Inflectional or Derivational)",
                line_no=line_no,
            ) from None
        key = (label, None if form == "*" else form)
        if key in entries:
            raise DuplicateKey(f"duplicate morph-class key {key!r}", line_no=line_no)
        entries[key] = morph_class
    return MorphClassLexicon(entries=MappingProxyType(entries))


_KIND_NAMES = {
    "Canonical": KIND_CANONICAL,
    "Orthographic": KIND_ORTHOGRAPHIC,
    "Dialect": KIND_DIALECT,
}


def load_variants(path: Path | str) -> VariantRegistry:
    """Load the 4-column TSV: form, lexeme id, kind, dialect-or-empty."""
    entries: dict[str, VariantEntry] = {}
    for line_no, fields in _read_rows(path):
        if len(fields) not in (3, 4):
            raise MalformedRow(
                f"expected 4 tab-separated columns, found {len(fields)}",
                line_no=line_no,
            )
        form = fields[0].strip()
        lexeme_id = fields[1].strip()
        kind_name = fields[2].strip()
        dialect = fields[3].strip() if len(fields) == 4 else ""
        if not form or not lexeme_id or not kind_name:
            raise MalformedRow("empty column", line_no=line_no)
        kind = _KIND_NAMES.get(kind_name)
        if kind is None:
            raise UnknownVariantKind(
                f"unknown variant kind {kind_name!r} "
                f"(expected Canonical, Orthographic or Dialect)",
                line_no=line_no,
            )
        if kind == KIND_DIALECT and not dialect:
            raise MalformedRow(
                "Dialect rows need a dialect name in column 4", line_no=line_no
            )
        if kind != KIND_DIALECT and dialect:
            raise MalformedRow(
                f"{kind_name} rows must leave column 4 empty", line_no=line_no
            )
        if form in entries:
            if entries[form].lexeme_id != lexeme_id:
                raise ConflictingLexeme(
                    f"form {form!r} is listed under both "
                    f"{entries[form].lexeme_id!r} and {lexeme_id!r}",
                    line_no=line_no,
                )
            raise DuplicateKey(f"duplicate variant form {form!r}", line_no=line_no)
        entries[form] = VariantEntry(
            lexeme_id=lexeme_id, kind=kind, dialect=dialect or None
        )
    by_lexeme: dict[str, bool] = {}
    for entry in entries.values():
        by_lexeme.setdefault(entry.lexeme_id, False)
        if entry.kind == KIND_CANONICAL:
            by_lexeme[entry.lexeme_id] = True
    missing = sorted(lx for lx, has in by_lexeme.items() if not has)
    if missing:
        raise MissingCanonical(
            f"lexemes without a Canonical entry: {', '.join(missing)}"
        )
    return VariantRegistry(entries=MappingProxyType(entries))
