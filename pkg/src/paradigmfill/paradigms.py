"""Turn analyzed words into sparse inflection tables, one per lexeme variant.

A word contributes a table cell after three normalization steps: clitics are
dropped (and removed verbatim from the right edge of the orthographic word),
covert morphemes are dropped from the slot name, and derivational affixes
are merged into the stem.  The slot name puts ROOT first, then any prefix or
reduplicant labels in stem-outward order, then suffix labels in surface
order, so prefixal plural reduplication yields names like ROOT-PL-3.II.

Tables serialize to a 5-column TSV, one row per inventory slot::

    ROOT-TR-3.II	find-TR-3.II	'wa-i-t	'wayit	'wa-TR-3.II
    ROOT-SX	_	_	_	_

Unattested slots render the four value columns as ``_``.  Filled tables
(attested plus predicted cells) use a sibling 6-column format whose last
column records provenance.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ColumnCountError, UnknownSlot
from .igt import AnalyzedWord, Boundary, IgtEntry, Morpheme
from .lexicon import (
    KIND_CANONICAL,
    MorphClass,
    MorphClassLexicon,
    VariantEntry,
    VariantRegistry,
)

logger = logging.getLogger(__name__)

ROOT_LABEL = "ROOT"
EMPTY_FIELD = "_"

PROVENANCE_ATTESTED = "attested"
PROVENANCE_PREDICTED = "predicted"

SKIP_NO_STEM = "no_stem"
SKIP_SURFACE_RECOVERY_FAILED = "surface_recovery_failed"
SKIP_CODESWITCH = "codeswitch"


@dataclass(frozen=True)
class SlotTemplate:
    """Ordered inflectional labels with exactly one ROOT placeholder."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if self.labels.count(ROOT_LABEL) != 1:
            raise UnknownSlot(
                f"slot must contain exactly one {ROOT_LABEL}: "
                f"{'-'.join(self.labels) or '(empty)'}"
            )

    def render(self) -> str:
        return "-".join(self.labels)

    def render_with(self, root: str) -> str:
        return "-".join(root if lb == ROOT_LABEL else lb for lb in self.labels)

    def strip_root_value(self, rendered: str) -> str:
        """Recover the ROOT substitution from a render_with() result.

        ROOT is always first in well-formed slots, so the rendered labels
        form a suffix.
        """
        suffix = "-".join(self.labels[1:])
        if suffix:
            suffix = "-" + suffix
            if not rendered.endswith(suffix):
                raise UnknownSlot(
                    f"{rendered!r} does not end with the labels of "
                    f"{self.render()!r}"
                )
            return rendered[: -len(suffix)]
        return rendered

    @classmethod
    def parse(cls, text: str) -> "SlotTemplate":
        return cls(labels=tuple(text.split("-")))


@dataclass(frozen=True)
class Cell:
    gloss: str
    segmentation: str
    surface: str
    stem_tag: str
    predicted: bool = False


@dataclass(frozen=True)
class Skip:
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class CellCandidate:
    lexeme_id: str
    variant_form: str
    variant_kind: str
    dialect: str | None
    slot: SlotTemplate
    cell: Cell
    dropped_covert: tuple[str, ...] = ()
    # (label, form, chosen class) for every affix that fell back to the
    # default classification; surfaced in the build report for review.
    defaulted_classes: tuple[tuple[str, str, str], ...] = ()


@dataclass
class ParadigmTable:
    lexeme_id: str
    variant_form: str
    variant_kind: str = KIND_CANONICAL
    dialect: str | None = None
    cells: dict[SlotTemplate, Cell] = field(default_factory=dict)

    def attested(self) -> dict[SlotTemplate, Cell]:
        return {s: c for s, c in self.cells.items() if not c.predicted}

    def stem_gloss(self) -> str:
        """Most common stem gloss across attested cells, ties lexicographic."""
        counts = Counter(
            slot.strip_root_value(cell.gloss)
            for slot, cell in self.attested().items()
        )
        if not counts:
            return self.variant_form
        return min(counts, key=lambda g: (-counts[g], g))

    def dialect_group(self) -> str:
        entry = VariantEntry(self.lexeme_id, self.variant_kind, self.dialect)
        return entry.dialect_group()


@dataclass(frozen=True)
class SlotInventory:
    slots: tuple[SlotTemplate, ...]
    counts: dict[SlotTemplate, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(set(self.slots)) != len(self.slots):
            raise UnknownSlot("inventory contains duplicate slots")

    def __contains__(self, slot: SlotTemplate) -> bool:
        return slot in set(self.slots)

    def __iter__(self):
        return iter(self.slots)


@dataclass
class BuildReport:
    words_total: int = 0
    candidates: int = 0
    skips: Counter = field(default_factory=Counter)
    duplicates_collapsed: int = 0
    conflicts: list = field(default_factory=list)
    defaulted_classes: Counter = field(default_factory=Counter)
    attested_cells: int = 0

    def render(self) -> str:
        lines = [
            f"words: {self.words_total}",
            f"candidates: {self.candidates}",
            f"attested_cells: {self.attested_cells}",
            f"duplicates_collapsed: {self.duplicates_collapsed}",
        ]
        for reason in sorted(self.skips):
            lines.append(f"skip.{reason}: {self.skips[reason]}")
        for (label, form, cls) in sorted(self.defaulted_classes):
            lines.append(
                f"defaulted_class: {label}\t{form or '*'}\t{cls}\t"
                f"{self.defaulted_classes[(label, form, cls)]}"
            )
        for (lexeme, variant, slot, kept, counts) in self.conflicts:
            competitors = ", ".join(
                f"{s}×{n}" for s, n in sorted(counts.items())
            )
            lines.append(
                f"conflict: {lexeme}/{variant} {slot}: kept {kept} of "
                f"[{competitors}]"
            )
        return "\n".join(lines) + "\n"


@dataclass
class TableSet:
    tables: dict[tuple[str, str], ParadigmTable] = field(default_factory=dict)
    report: BuildReport | None = None

    def sorted_tables(self) -> list[ParadigmTable]:
        return [self.tables[key] for key in sorted(self.tables)]


# --- word analysis --------------------------------------------------------


def _render_segmentation(units: list[Morpheme]) -> str:
    parts: list[str] = []
    for idx, m in enumerate(units):
        if idx == 0:
            parts.append(m.form)
        elif units[idx - 1].boundary is Boundary.REDUPLICANT:
            parts.append("~" + m.form)
        else:
            parts.append("-" + m.form)
    return "".join(parts)


def analyze_word(
    word: AnalyzedWord,
    morph_lex: MorphClassLexicon,
    variants: VariantRegistry,
    *,
    include_covert: bool = False,
) -> CellCandidate | Skip:
    """Reduce one analyzed word to a paradigm-cell candidate.

    Returns a :class:`Skip` instead of a candidate when the word is
    code-switched, has no stem, or its clitic-free surface cannot be
    recovered by verbatim right-edge removal (sandhi at the clitic boundary
    cannot be undone reliably, so such words are reported, not guessed).
    """
    if any(m.codeswitch for m in word.morphemes):
        return Skip(SKIP_CODESWITCH, word.surface)
    if word.stem() is None:
        return Skip(SKIP_NO_STEM, word.surface)

    trailing_clitics: list[str] = []
    kept: list[Morpheme] = []
    dropped_covert: list[str] = []
    for m in word.morphemes:
        if m.boundary is Boundary.CLITIC:
            if not m.covert:
                trailing_clitics.append(m.form)
            continue
        if m.covert and not include_covert:
            dropped_covert.append(m.gloss)
            continue
        kept.append(m)

    # Merge derivational affixes into the stem, keeping surface order.
    stem_idx = next(
        i for i, m in enumerate(kept) if m.boundary is Boundary.STEM
    )
    merged: list[Morpheme] = []
    merged_prefix: list[str] = []
    merged_suffix: list[str] = []
    defaults: list[tuple[str, str, str]] = []
    for i, m in enumerate(kept):
        if m.boundary is Boundary.STEM:
            merged.append(m)
            continue
        cls, defaulted = morph_lex.classify(m)
        if defaulted:
            defaults.append((m.gloss, m.form, cls.value))
        if cls is MorphClass.DERIVATIONAL:
            (merged_prefix if i < stem_idx else merged_suffix).append(m.form)
        else:
            merged.append(m)
    stem = word.stem()
    assert stem is not None
    stem_form = "".join(merged_prefix) + stem.form + "".join(merged_suffix)
    merged = [
        Morpheme(
            form=stem_form,
            gloss=m.gloss,
            boundary=Boundary.STEM,
            covert=m.covert,
            gloss_kind=m.gloss_kind,
        )
        if m.boundary is Boundary.STEM
        else m
        for m in merged
    ]

    stem_idx = next(i for i, m in enumerate(merged) if m.boundary is Boundary.STEM)
    prefix_labels = [m.gloss for m in merged[:stem_idx]]
    suffix_labels = [m.gloss for m in merged[stem_idx + 1 :]]
    slot = SlotTemplate(
        labels=(ROOT_LABEL, *reversed(prefix_labels), *suffix_labels)
    )

    surface = word.surface
    for clitic in reversed(trailing_clitics):
        if clitic and surface.endswith(clitic):
            surface = surface[: -len(clitic)]
        elif clitic:
            return Skip(
                SKIP_SURFACE_RECOVERY_FAILED,
                f"{word.surface!r} does not end with clitic {clitic!r}",
            )

    entry = variants.resolve(stem_form)
    cell = Cell(
        gloss=slot.render_with(stem.gloss),
        segmentation=_render_segmentation(merged),
        surface=surface,
        stem_tag=slot.render_with(stem_form),
    )
    return CellCandidate(
        lexeme_id=entry.lexeme_id,
        variant_form=stem_form,
        variant_kind=entry.kind,
        dialect=entry.dialect,
        slot=slot,
        cell=cell,
        dropped_covert=tuple(dropped_covert),
        defaulted_classes=tuple(defaults),
    )


def build_tables(
    corpus: list[IgtEntry],
    morph_lex: MorphClassLexicon,
    variants: VariantRegistry,
    *,
    include_covert: bool = False,
) -> TableSet:
    """Group cell candidates into per-variant tables.

    Conflicting surfaces for one slot keep the most frequent, ties broken
    lexicographically; every skip and conflict lands in the build report.
    The merge is pure counting with deterministic tie-breaks, so any
    processing order yields the same tables.
    """
    report = BuildReport()
    grouped: dict[tuple[str, str], dict] = {}
    by_cell: dict[tuple[str, str], dict[SlotTemplate, list[Cell]]] = {}
    for entry in corpus:
        for word in entry.analyses:
            report.words_total += 1
            result = analyze_word(
                word, morph_lex, variants, include_covert=include_covert
            )
            if isinstance(result, Skip):
                report.skips[result.reason] += 1
                logger.debug("skipping %s: %s", result.reason, result.detail)
                continue
            report.candidates += 1
            for triple in result.defaulted_classes:
                report.defaulted_classes[triple] += 1
            key = (result.lexeme_id, result.variant_form)
            grouped.setdefault(
                key,
                {
                    "kind": result.variant_kind,
                    "dialect": result.dialect,
                },
            )
            by_cell.setdefault(key, {}).setdefault(result.slot, []).append(
                result.cell
            )

    tables: dict[tuple[str, str], ParadigmTable] = {}
    for key in sorted(grouped):
        lexeme_id, variant_form = key
        cells: dict[SlotTemplate, Cell] = {}
        for slot in sorted(by_cell[key], key=SlotTemplate.render):
            contenders = by_cell[key][slot]
            surface_counts = Counter(c.surface for c in contenders)
            winner_surface = min(
                surface_counts, key=lambda s: (-surface_counts[s], s)
            )
            winner = min(
                (c for c in contenders if c.surface == winner_surface),
                key=lambda c: (c.segmentation, c.gloss, c.stem_tag),
            )
            report.duplicates_collapsed += len(contenders) - 1
            if len(surface_counts) > 1:
                report.conflicts.append(
                    (
                        lexeme_id,
                        variant_form,
                        slot.render(),
                        winner_surface,
                        dict(surface_counts),
                    )
                )
                logger.warning(
                    "surface conflict at %s/%s %s: kept %r",
                    lexeme_id, variant_form, slot.render(), winner_surface,
                )
            cells[slot] = winner
        report.attested_cells += len(cells)
        tables[key] = ParadigmTable(
            lexeme_id=lexeme_id,
            variant_form=variant_form,
            variant_kind=grouped[key]["kind"],
            dialect=grouped[key]["dialect"],
            cells=cells,
        )
    return TableSet(tables=tables, report=report)


def compute_inventory(tables: TableSet) -> SlotInventory:
    """Union of attested slots, ordered by descending attestation count.

    Ties order lexicographically by the rendered slot name.
    """
    counts: Counter = Counter()
    for table in tables.sorted_tables():
        for slot in table.attested():
            counts[slot] += 1
    ordered = sorted(counts, key=lambda s: (-counts[s], s.render()))
    return SlotInventory(slots=tuple(ordered), counts=dict(counts))


# --- TSV formats ----------------------------------------------------------


def write_table_tsv(table: ParadigmTable, inventory: SlotInventory) -> str:
    """Render the 5-column attested-table TSV, one row per inventory slot."""
    attested = table.attested()
    unknown = set(attested) - set(inventory.slots)
    if unknown:
        raise UnknownSlot(
            f"table {table.lexeme_id}/{table.variant_form} attests slots "
            f"outside the inventory: "
            f"{', '.join(sorted(s.render() for s in unknown))}"
        )
    lines = []
    for slot in inventory:
        cell = attested.get(slot)
        if cell is None:
            lines.append(
                "\t".join([slot.render()] + [EMPTY_FIELD] * 4)
            )
        else:
            lines.append(
                "\t".join(
                    [
                        slot.render(),
                        cell.gloss,
                        cell.segmentation,
                        cell.surface,
                        cell.stem_tag,
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def _infer_variant(cells: dict[SlotTemplate, Cell]) -> str | None:
    for slot in sorted(cells, key=SlotTemplate.render):
        return slot.strip_root_value(cells[slot].stem_tag)
    return None


def read_table_tsv(
    text: str,
    *,
    lexeme_id: str | None = None,
    variant_form: str | None = None,
    variant_kind: str = KIND_CANONICAL,
    dialect: str | None = None,
) -> ParadigmTable:
    """Parse the 5-column format back into a table.

    The body does not carry the table's identity; pass it in (the directory
    reader takes it from the manifest) or let it default: the variant form
    is recovered from any attested stem tag, and the lexeme id falls back to
    the variant form, mirroring unregistered-variant resolution.
    """
    cells: dict[SlotTemplate, Cell] = {}
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ColumnCountError(
                f"line {line_no}: expected 5 columns, found {len(fields)}"
            )
        slot = SlotTemplate.parse(fields[0])
        if all(f == EMPTY_FIELD for f in fields[1:]):
            continue
        cells[slot] = Cell(
            gloss=fields[1],
            segmentation=fields[2],
            surface=fields[3],
            stem_tag=fields[4],
        )
    variant = variant_form if variant_form is not None else _infer_variant(cells)
    if variant is None:
        variant = ""
    return ParadigmTable(
        lexeme_id=lexeme_id if lexeme_id is not None else variant,
        variant_form=variant,
        variant_kind=variant_kind,
        dialect=dialect,
        cells=cells,
    )


def write_filled_table_tsv(table: ParadigmTable, inventory: SlotInventory) -> str:
    """Render the 6-column filled-table TSV (last column is provenance)."""
    lines = []
    for slot in inventory:
        cell = table.cells.get(slot)
        if cell is None:
            lines.append("\t".join([slot.render()] + [EMPTY_FIELD] * 5))
            continue
        lines.append(
            "\t".join(
                [
                    slot.render(),
                    cell.gloss,
                    cell.segmentation or EMPTY_FIELD,
                    cell.surface,
                    cell.stem_tag,
                    PROVENANCE_PREDICTED if cell.predicted else PROVENANCE_ATTESTED,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def read_filled_table_tsv(
    text: str,
    *,
    lexeme_id: str | None = None,
    variant_form: str | None = None,
    variant_kind: str = KIND_CANONICAL,
    dialect: str | None = None,
) -> ParadigmTable:
    cells: dict[SlotTemplate, Cell] = {}
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 6:
            raise ColumnCountError(
                f"line {line_no}: expected 6 columns, found {len(fields)}"
            )
        slot = SlotTemplate.parse(fields[0])
        if all(f == EMPTY_FIELD for f in fields[1:]):
            continue
        if fields[5] not in (PROVENANCE_ATTESTED, PROVENANCE_PREDICTED):
            raise ColumnCountError(
                f"line {line_no}: unknown provenance {fields[5]!r}"
            )
        predicted = fields[5] == PROVENANCE_PREDICTED
        cells[slot] = Cell(
            gloss=fields[1],
            segmentation="" if fields[2] == EMPTY_FIELD else fields[2],
            surface=fields[3],
            stem_tag=fields[4],
            predicted=predicted,
        )
    variant = variant_form if variant_form is not None else _infer_variant(cells)
    if variant is None:
        variant = ""
    return ParadigmTable(
        lexeme_id=lexeme_id if lexeme_id is not None else variant,
        variant_form=variant,
        variant_kind=variant_kind,
        dialect=dialect,
        cells=cells,
    )


# --- directory layout -----------------------------------------------------

MANIFEST_NAME = "tables.tsv"
INVENTORY_NAME = "slots.tsv"
REPORT_NAME = "build_report.txt"


def table_filename(lexeme_id: str, variant_form: str, *, filled: bool = False) -> str:
    stem = f"{lexeme_id}__{variant_form}".replace("/", "_")
    return f"{stem}.filled.tsv" if filled else f"{stem}.tsv"


def write_inventory(inventory: SlotInventory) -> str:
    lines = [
        f"{slot.render()}\t{inventory.counts.get(slot, 0)}" for slot in inventory
    ]
    return "\n".join(lines) + "\n"


def read_inventory(text: str) -> SlotInventory:
    slots: list[SlotTemplate] = []
    counts: dict[SlotTemplate, int] = {}
    for line in text.split("\n"):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ColumnCountError(
                f"inventory rows need 2 columns, found {len(fields)}"
            )
        slot = SlotTemplate.parse(fields[0])
        slots.append(slot)
        try:
            counts[slot] = int(fields[1])
        except ValueError:
            raise ColumnCountError(
                f"inventory count {fields[1]!r} is not an integer"
            ) from None
    return SlotInventory(slots=tuple(slots), counts=counts)


def write_tables(
    tables: TableSet,
    inventory: SlotInventory,
    out_dir: Path | str,
    *,
    filled: bool = False,
) -> None:
    """Write one TSV per table plus manifest, inventory and build report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_lines = []
    for table in tables.sorted_tables():
        name = table_filename(table.lexeme_id, table.variant_form, filled=filled)
        body = (
            write_filled_table_tsv(table, inventory)
            if filled
            else write_table_tsv(table, inventory)
        )
        (out / name).write_text(body, encoding="utf-8")
        manifest_lines.append(
            "\t".join(
                [
                    table.lexeme_id,
                    table.variant_form,
                    table.variant_kind,
                    table.dialect or "",
                    name,
                ]
            )
        )
    (out / MANIFEST_NAME).write_text(
        "\n".join(manifest_lines) + ("\n" if manifest_lines else ""),
        encoding="utf-8",
    )
    (out / INVENTORY_NAME).write_text(write_inventory(inventory), encoding="utf-8")
    if tables.report is not None:
        (out / REPORT_NAME).write_text(tables.report.render(), encoding="utf-8")


def read_tables(table_dir: Path | str) -> tuple[TableSet, SlotInventory]:
    """Load a table directory written by :func:`write_tables`."""
    root = Path(table_dir)
    inventory = read_inventory((root / INVENTORY_NAME).read_text(encoding="utf-8"))
    tables: dict[tuple[str, str], ParadigmTable] = {}
    manifest = (root / MANIFEST_NAME).read_text(encoding="utf-8")
    for line in manifest.split("\n"):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ColumnCountError(
                f"manifest rows need 5 columns, found {len(fields)}"
            )
        lexeme_id, variant_form, kind, dialect, name = fields
        body = (root / name).read_text(encoding="utf-8")
        reader = (
            read_filled_table_tsv if name.endswith(".filled.tsv") else read_table_tsv
        )
        tables[(lexeme_id, variant_form)] = reader(
            body,
            lexeme_id=lexeme_id,
            variant_form=variant_form,
            variant_kind=kind,
            dialect=dialect or None,
        )
    return TableSet(tables=tables), inventory
