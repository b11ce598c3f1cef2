r"""Tiered interlinear glossed text: parsing, word analysis, serialization.

The wire format is a Toolbox-style marker file.  Each entry is exactly four
lines, in order:

    \w Giigwis Maryhl gayt
    \m giikw-i[-t]=s Mary=hl gayt
    \g buy-TR-3.II=PN Mary=CN hat
    \f Mary bought a hat.

Entries are separated by blank lines.  ``\w`` holds the orthographic words,
``\m`` the segmentation tokens, ``\g`` the gloss tokens (one token per word,
aligned by position), ``\f`` the free translation.  Within a token, ``-``
joins affixes, ``=`` joins clitics, ``~`` joins a reduplicant to its base,
``[...]`` wraps covert (phonologically null) material and attaches directly
to the preceding unit, and a leading ``*`` marks a code-switched word.

Covert brackets may sit on either tier.  ``giikw-i[-t]=s`` carries the
bracket on the segmentation tier and pairs positionally with a plain gloss
unit; ``arrive.PL[-3.II]=CN`` carries it on the gloss tier and pairs with an
implicit empty segmentation unit.  Both produce a morpheme with
``covert=True``; the first keeps its bracket-interior form, the second has
an empty form.

All functions here are pure: no I/O, no shared mutable state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import (
    MorphemeCountMismatch,
    TierMissing,
    TokenCountMismatch,
    UnbalancedBrackets,
)

MARKER_WORDS = "\\w"
MARKER_SEGMENTS = "\\m"
MARKER_GLOSSES = "\\g"
MARKER_TRANSLATION = "\\f"

_ENTRY_MARKERS = (MARKER_WORDS, MARKER_SEGMENTS, MARKER_GLOSSES, MARKER_TRANSLATION)


class Boundary(enum.Enum):
    STEM = "stem"
    AFFIX = "affix"
    CLITIC = "clitic"
    REDUPLICANT = "reduplicant"


class GlossKind(enum.Enum):
    LEXICAL = "lexical"
    GRAMMATICAL = "grammatical"


_SEPARATORS = ("-", "=", "~")
_BOUNDARY_CHAR = {
    Boundary.STEM: "-",
    Boundary.AFFIX: "-",
    Boundary.CLITIC: "=",
    Boundary.REDUPLICANT: "~",
}


def classify_gloss_label(label: str) -> GlossKind:
    """Classify a gloss label as lexical or grammatical.

    A label is grammatical iff it contains no lowercase alphabetic
    character; digits, uppercase letters and the ``.``/``/`` separators used
    in compound category labels do not make it lexical.
    """
    if not label:
        raise ValueError("empty gloss label")
    if any(c.islower() for c in label):
        return GlossKind.LEXICAL
    return GlossKind.GRAMMATICAL


@dataclass(frozen=True)
class Morpheme:
    form: str
    gloss: str
    boundary: Boundary
    covert: bool = False
    codeswitch: bool = False
    gloss_kind: GlossKind = GlossKind.GRAMMATICAL


@dataclass(frozen=True)
class AnalyzedWord:
    surface: str
    morphemes: tuple[Morpheme, ...]

    def stem(self) -> Morpheme | None:
        for m in self.morphemes:
            if m.boundary is Boundary.STEM:
                return m
        return None


@dataclass(frozen=True)
class IgtEntry:
    words: tuple[str, ...]
    analyses: tuple[AnalyzedWord, ...]
    translation: str
    source_id: str

    def __post_init__(self):
        if len(self.words) != len(self.analyses):
            raise ValueError(
                f"entry {self.source_id!r}: {len(self.words)} words but "
                f"{len(self.analyses)} analyses"
            )


# --- token splitting ------------------------------------------------------


@dataclass(frozen=True)
class _Unit:
    text: str
    sep_before: str | None = None
    bracketed: bool = False
    bracket_sep: str | None = None


def _split_units(token: str) -> list[_Unit]:
    """Split one tier token into units, extracting bracketed covert groups.

    Brackets are scanned before boundary splitting, so separators inside
    ``[...]`` belong to the bracketed unit.
    """
    units: list[_Unit] = []
    pending: list[str] = []
    sep: str | None = None
    open_unit = False
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == "[":
            if open_unit:
                units.append(_Unit("".join(pending), sep))
                pending, sep, open_unit = [], None, False
            close = token.find("]", i + 1)
            if close == -1:
                raise UnbalancedBrackets(f"unclosed '[' in token {token!r}")
            interior = token[i + 1 : close]
            if "[" in interior:
                raise UnbalancedBrackets(f"nested '[' in token {token!r}")
            bsep = interior[0] if interior[:1] in _SEPARATORS else None
            btext = interior[1:] if bsep else interior
            units.append(_Unit(btext, None, bracketed=True, bracket_sep=bsep))
            i = close + 1
        elif ch == "]":
            raise UnbalancedBrackets(f"stray ']' in token {token!r}")
        elif ch in _SEPARATORS:
            if open_unit:
                units.append(_Unit("".join(pending), sep))
                pending = []
            sep = ch
            open_unit = True
            i += 1
        else:
            pending.append(ch)
            open_unit = True
            i += 1
    if open_unit:
        units.append(_Unit("".join(pending), sep))
    return units


def _align_units(
    seg_units: list[_Unit], gloss_units: list[_Unit], seg_token: str, gloss_token: str
) -> list[tuple[_Unit | None, _Unit]]:
    """Pair segmentation units with gloss units.

    Equal-length lists pair positionally.  When the gloss tier has extra
    units they must be bracketed (covert with no surface exponent) and pair
    with an implicit empty segmentation unit.
    """
    if len(seg_units) == len(gloss_units):
        return list(zip(seg_units, gloss_units))
    pairs: list[tuple[_Unit | None, _Unit]] = []
    i = j = 0
    while i < len(seg_units) or j < len(gloss_units):
        remaining_s = len(seg_units) - i
        remaining_g = len(gloss_units) - j
        if remaining_g > remaining_s and gloss_units[j].bracketed:
            pairs.append((None, gloss_units[j]))
            j += 1
        elif remaining_s > 0 and remaining_g > 0:
            pairs.append((seg_units[i], gloss_units[j]))
            i += 1
            j += 1
        else:
            raise MorphemeCountMismatch(
                f"cannot align {len(seg_units)} segmentation units in "
                f"{seg_token!r} with {len(gloss_units)} gloss units in "
                f"{gloss_token!r}"
            )
    return pairs


def _effective_sep(pair: tuple[_Unit | None, _Unit]) -> str | None:
    seg, gloss = pair
    unit = seg if seg is not None else gloss
    if unit.bracketed:
        return unit.bracket_sep or "-"
    return unit.sep_before


def parse_word(surface: str, seg_token: str, gloss_token: str) -> AnalyzedWord:
    """Analyze one word from its aligned segmentation and gloss tokens.

    Units split on ``-`` (affix), ``=`` (clitic) and ``~``; the unit
    *preceding* a ``~`` is the reduplicant.  The stem is the first overt
    non-reduplicant, non-clitic unit with a lexical gloss; if no such unit
    exists the word has no stem (a pure-function word).
    """
    if not seg_token or not gloss_token:
        raise MorphemeCountMismatch(
            f"empty tier token for word {surface!r}: seg={seg_token!r} "
            f"gloss={gloss_token!r}"
        )
    codeswitch = seg_token.startswith("*") or gloss_token.startswith("*")
    seg_units = _split_units(seg_token[1:] if seg_token.startswith("*") else seg_token)
    gloss_units = _split_units(
        gloss_token[1:] if gloss_token.startswith("*") else gloss_token
    )
    pairs = _align_units(seg_units, gloss_units, seg_token, gloss_token)

    # First pass: boundaries that follow mechanically from the separators.
    boundaries: list[Boundary | None] = []
    for idx, pair in enumerate(pairs):
        nxt = pairs[idx + 1] if idx + 1 < len(pairs) else None
        if nxt is not None and nxt[0] is not None and nxt[0].sep_before == "~":
            boundaries.append(Boundary.REDUPLICANT)
        elif _effective_sep(pair) == "=":
            boundaries.append(Boundary.CLITIC)
        else:
            boundaries.append(None)

    morphemes: list[Morpheme] = []
    stem_found = False
    for idx, (seg, gloss) in enumerate(pairs):
        label = gloss.text
        if not label:
            raise MorphemeCountMismatch(
                f"empty gloss unit in token {gloss_token!r}"
            )
        kind = classify_gloss_label(label)
        covert = (seg is None) or seg.bracketed or gloss.bracketed
        boundary = boundaries[idx]
        if boundary is None:
            if not stem_found and not covert and kind is GlossKind.LEXICAL:
                boundary = Boundary.STEM
                stem_found = True
            else:
                boundary = Boundary.AFFIX
        morphemes.append(
            Morpheme(
                form=seg.text if seg is not None else "",
                gloss=label,
                boundary=boundary,
                covert=covert,
                codeswitch=codeswitch and idx == 0,
                gloss_kind=kind,
            )
        )
    return AnalyzedWord(surface=surface, morphemes=tuple(morphemes))


# --- serialization --------------------------------------------------------


def _joiner(prev: Morpheme, current: Morpheme) -> str:
    if prev.boundary is Boundary.REDUPLICANT:
        return "~"
    if current.boundary is Boundary.CLITIC:
        return "="
    return "-"


def serialize_word(word: AnalyzedWord) -> tuple[str, str]:
    """Render a word's segmentation and gloss tokens."""
    seg_parts: list[str] = []
    gloss_parts: list[str] = []
    for idx, m in enumerate(word.morphemes):
        prev = word.morphemes[idx - 1] if idx > 0 else None
        star = "*" if m.codeswitch else ""
        if m.covert:
            bchar = _BOUNDARY_CHAR[m.boundary]
            if m.form:
                # Bracket lives on the segmentation tier; the gloss unit is
                # written plainly.
                seg_parts.append(f"[{bchar}{m.form}]")
                gloss_join = _joiner(prev, m) if gloss_parts else ""
                gloss_parts.append(gloss_join + m.gloss)
            else:
                gloss_parts.append(f"[{bchar}{m.gloss}]")
        else:
            seg_join = _joiner(prev, m) if seg_parts else ""
            gloss_join = _joiner(prev, m) if gloss_parts else ""
            seg_parts.append(seg_join + star + m.form)
            gloss_parts.append(gloss_join + star + m.gloss)
    return "".join(seg_parts), "".join(gloss_parts)


def _marker_line(marker: str, tokens: tuple[str, ...] | list[str]) -> str:
    return f"{marker} {' '.join(tokens)}" if tokens else marker


def serialize_document(entries: list[IgtEntry]) -> str:
    """Render entries back to the marker format.

    Each entry becomes four marker lines followed by one blank line, so
    documents produced by :func:`parse_document` round-trip byte-exact.
    """
    blocks: list[str] = []
    for entry in entries:
        seg_tokens: list[str] = []
        gloss_tokens: list[str] = []
        for analysis in entry.analyses:
            seg, gloss = serialize_word(analysis)
            seg_tokens.append(seg)
            gloss_tokens.append(gloss)
        lines = [
            _marker_line(MARKER_WORDS, entry.words),
            _marker_line(MARKER_SEGMENTS, seg_tokens),
            _marker_line(MARKER_GLOSSES, gloss_tokens),
            f"{MARKER_TRANSLATION} {entry.translation}"
            if entry.translation
            else MARKER_TRANSLATION,
        ]
        blocks.append("\n".join(lines) + "\n\n")
    return "".join(blocks)


# --- document parsing -----------------------------------------------------


def _blocks(text: str):
    """Yield (first_line_no, [(line_no, line), ...]) for each entry block."""
    block: list[tuple[int, str]] = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        if line.strip() == "":
            if block:
                yield block
                block = []
        else:
            block.append((line_no, line))
    if block:
        yield block


def _parse_entry(entry_index: int, block: list[tuple[int, str]]) -> IgtEntry:
    if len(block) > len(_ENTRY_MARKERS):
        line_no, _ = block[len(_ENTRY_MARKERS)]
        raise TierMissing(
            "entry has extra lines: expected exactly \\w \\m \\g \\f",
            entry_index=entry_index,
            line_no=line_no,
        )
    contents: list[str] = []
    line_nos: list[int] = []
    for pos, marker in enumerate(_ENTRY_MARKERS):
        if pos >= len(block):
            raise TierMissing(
                f"missing {marker} line",
                entry_index=entry_index,
                line_no=block[-1][0],
            )
        line_no, line = block[pos]
        if line == marker:
            content = ""
        elif line.startswith(marker + " "):
            content = line[len(marker) + 1 :]
        else:
            raise TierMissing(
                f"expected {marker} line, found {line.split(' ', 1)[0]!r}",
                entry_index=entry_index,
                line_no=line_no,
            )
        contents.append(content)
        line_nos.append(line_no)

    words = tuple(contents[0].split())
    segs = contents[1].split()
    glosses = contents[2].split()
    translation = contents[3]
    if not (len(words) == len(segs) == len(glosses)):
        raise TokenCountMismatch(
            f"token counts differ: {len(words)} words, {len(segs)} "
            f"segmentations, {len(glosses)} glosses",
            entry_index=entry_index,
            line_no=line_nos[1],
        )
    analyses = []
    for word, seg, gloss in zip(words, segs, glosses):
        try:
            analyses.append(parse_word(word, seg, gloss))
        except (MorphemeCountMismatch, UnbalancedBrackets) as err:
            if err.entry_index is None:
                err.entry_index = entry_index
            if err.line_no is None:
                err.line_no = line_nos[1]
            raise
    return IgtEntry(
        words=words,
        analyses=tuple(analyses),
        translation=translation,
        source_id=str(entry_index),
    )


def parse_document(text: str) -> list[IgtEntry]:
    """Parse a marker-format document into entries.

    Raises the first error encountered; use :func:`scan_document` to collect
    all errors for validation reports.  ``source_id`` is the 0-based entry
    position, which is what serialization-round-trip well-formedness assumes.
    """
    return [
        _parse_entry(index, block) for index, block in enumerate(_blocks(text))
    ]


def scan_document(text: str):
    """Parse leniently, returning ``(entries, errors)``.

    Entries that fail to parse are skipped; their errors keep entry index
    and line number so a validation report can list every problem at once.
    """
    entries: list[IgtEntry] = []
    errors = []
    for index, block in enumerate(_blocks(text)):
        try:
            entries.append(_parse_entry(index, block))
        except (TierMissing, TokenCountMismatch, MorphemeCountMismatch,
                UnbalancedBrackets) as err:
            errors.append(err)
    return entries, errors
