"""Pairwise reinflection over paradigm tables.

Training data is every ordered pair of attested train cells within one
table (dialect variants each own a table, so dialect forms never mix inside
a training example).  The transducer is a counted string-rewrite model: for
each pair the longest common contiguous substring splits source and target
into prefix + stem + suffix, and rewrite rules are recorded at every stem
depth, plus one whole-string rule per pair.  Inference applies the best
matching whole-string, suffix and prefix rules in that order; missing cells
are then predicted once per attested source form and settled by majority
vote.

A neural transducer can stand behind the same interface; this module ships
its configuration and the character/tag encoding it consumes, not the model
itself.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field

from .errors import ColumnCountError, EmptyTrainingSet, NoSourceCells, UnknownSlot
from .paradigms import (
    Cell,
    ParadigmTable,
    SlotInventory,
    SlotTemplate,
    TableSet,
)

SIDE_PREFIX = "P"
SIDE_SUFFIX = "S"
SIDE_WHOLE = "W"

SEPARATOR_TOKEN = "<S>"

BUCKET_TRAIN = "train"
BUCKET_DEV = "dev"
BUCKET_TEST = "test"


@dataclass(frozen=True)
class CellId:
    lexeme_id: str
    variant_form: str
    slot: SlotTemplate

    def sort_key(self) -> tuple[str, str, str]:
        return (self.lexeme_id, self.variant_form, self.slot.render())


@dataclass(frozen=True)
class ReinflectionPair:
    table_ref: tuple[str, str]
    src_slot: SlotTemplate
    tgt_slot: SlotTemplate
    src_form: str
    tgt_form: str

    def __post_init__(self):
        if self.src_slot == self.tgt_slot:
            raise ValueError("a reinflection pair needs two distinct slots")


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    ratios: tuple[float, float, float] = (0.668, 0.235, 0.097)

    def __post_init__(self):
        if len(self.ratios) != 3 or any(r <= 0 for r in self.ratios):
            raise ValueError("ratios must be three positive numbers")
        if not math.isclose(sum(self.ratios), 1.0, abs_tol=1e-9):
            raise ValueError(f"ratios must sum to 1, got {sum(self.ratios)}")


@dataclass(frozen=True)
class SplitResult:
    spec: SplitSpec
    train: tuple[CellId, ...]
    dev: tuple[CellId, ...]
    test: tuple[CellId, ...]

    def bucket(self, name: str) -> tuple[CellId, ...]:
        return {BUCKET_TRAIN: self.train, BUCKET_DEV: self.dev,
                BUCKET_TEST: self.test}[name]


@dataclass(frozen=True)
class NeuralConfig:
    """Transformer hyperparameters for an external neural transducer."""

    layers: int = 4
    heads: int = 4
    embedding: int = 256
    hidden: int = 512
    optimizer: str = "adam"
    learning_rate: float = 0.001
    batch_size: int = 400
    max_updates: int = 20000

    def __post_init__(self):
        for name in ("layers", "heads", "embedding", "hidden",
                     "learning_rate", "batch_size", "max_updates"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


SlotPair = tuple[SlotTemplate, SlotTemplate]
RuleTable = dict[SlotPair, dict[tuple[str, str], int]]


@dataclass
class RuleModel:
    suffix_rules: RuleTable = field(default_factory=dict)
    prefix_rules: RuleTable = field(default_factory=dict)
    whole_rules: RuleTable = field(default_factory=dict)

    def _add(self, table: RuleTable, key: SlotPair, src: str, tgt: str) -> None:
        rules = table.setdefault(key, {})
        rules[(src, tgt)] = rules.get((src, tgt), 0) + 1


# --- splitting ------------------------------------------------------------


def _integer_targets(n: int, ratios: tuple[float, float, float]) -> list[int]:
    """Largest-remainder apportionment of n cells across the three buckets."""
    raw = [r * n for r in ratios]
    floors = [math.floor(x) for x in raw]
    order = sorted(range(3), key=lambda i: (-(raw[i] - floors[i]), i))
    for i in order[: n - sum(floors)]:
        floors[i] += 1
    return floors


def all_cell_ids(tables: TableSet) -> list[CellId]:
    cells = []
    for table in tables.sorted_tables():
        for slot in sorted(table.attested(), key=SlotTemplate.render):
            cells.append(
                CellId(table.lexeme_id, table.variant_form, slot)
            )
    return cells


def split_cells(tables: TableSet, spec: SplitSpec) -> SplitResult:
    """Partition attested cells into train/dev/test.

    The partition is disjoint, exhaustive and fully determined by the seed.
    Every table keeps at least one cell in train (its first cell in the
    shuffled order), so single-cell tables go wholly to train; dev and test
    then fill their integer targets from the remaining cells.
    """
    cells = all_cell_ids(tables)
    rng = random.Random(spec.seed)
    shuffled = list(cells)
    rng.shuffle(shuffled)

    seen_tables: set[tuple[str, str]] = set()
    anchors: list[CellId] = []
    remaining: list[CellId] = []
    for cell in shuffled:
        table_key = (cell.lexeme_id, cell.variant_form)
        if table_key in seen_tables:
            remaining.append(cell)
        else:
            seen_tables.add(table_key)
            anchors.append(cell)

    _, t_dev, t_test = _integer_targets(len(cells), spec.ratios)
    n_dev = min(t_dev, len(remaining))
    n_test = min(t_test, len(remaining) - n_dev)
    dev = remaining[:n_dev]
    test = remaining[n_dev : n_dev + n_test]
    train = anchors + remaining[n_dev + n_test :]
    return SplitResult(
        spec=spec,
        train=tuple(sorted(train, key=CellId.sort_key)),
        dev=tuple(sorted(dev, key=CellId.sort_key)),
        test=tuple(sorted(test, key=CellId.sort_key)),
    )


# --- pair generation ------------------------------------------------------


def generate_pairs(tables: TableSet, cells) -> list[ReinflectionPair]:
    """Ordered within-table pairs: a table with k cells yields k·(k−1)."""
    by_table: dict[tuple[str, str], list[CellId]] = {}
    for cell in cells:
        by_table.setdefault((cell.lexeme_id, cell.variant_form), []).append(cell)
    pairs: list[ReinflectionPair] = []
    for table_key in sorted(by_table):
        table = tables.tables.get(table_key)
        if table is None:
            raise UnknownSlot(
                f"split references table {table_key[0]}/{table_key[1]} "
                f"which is not in the table set"
            )
        members = sorted(by_table[table_key], key=CellId.sort_key)
        for member in members:
            if member.slot not in table.cells:
                raise UnknownSlot(
                    f"split references cell {member.slot.render()} not "
                    f"attested in table {table_key[0]}/{table_key[1]}"
                )
        for src in members:
            for tgt in members:
                if src.slot == tgt.slot:
                    continue
                pairs.append(
                    ReinflectionPair(
                        table_ref=table_key,
                        src_slot=src.slot,
                        tgt_slot=tgt.slot,
                        src_form=table.cells[src.slot].surface,
                        tgt_form=table.cells[tgt.slot].surface,
                    )
                )
    return pairs


# --- rule training --------------------------------------------------------


def longest_common_substring(a: str, b: str) -> tuple[int, int, int]:
    """Length and start offsets of the longest common contiguous substring.

    Ties go to the leftmost occurrence in ``a``, then the leftmost in ``b``.
    """
    best_len, best_a, best_b = 0, 0, 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                length = prev[j - 1] + 1
                cur[j] = length
                a_start = i - length
                b_start = j - length
                if length > best_len or (
                    length == best_len
                    and length
                    and (a_start, b_start) < (best_a, best_b)
                ):
                    best_len, best_a, best_b = length, a_start, b_start
        prev = cur
    return best_len, best_a, best_b


def train_rules(pairs: list[ReinflectionPair]) -> RuleModel:
    """Count rewrite rules from reinflection pairs.

    Each pair records one whole-string rule plus, when the forms share a
    substring, suffix and prefix rules at every stem depth k: the suffix
    rule rewrites (last k stem chars + source suffix) and the prefix rule
    rewrites (source prefix + first k stem chars).  Counting is commutative,
    so any accumulation order builds the same model.
    """
    if not pairs:
        raise EmptyTrainingSet("no reinflection pairs to train on")
    model = RuleModel()
    for pair in pairs:
        key = (pair.src_slot, pair.tgt_slot)
        src, tgt = pair.src_form, pair.tgt_form
        model._add(model.whole_rules, key, src, tgt)
        length, a_start, b_start = longest_common_substring(src, tgt)
        if length == 0:
            continue
        stem = src[a_start : a_start + length]
        p_s, s_s = src[:a_start], src[a_start + length :]
        p_t, s_t = tgt[:b_start], tgt[b_start + length :]
        for k in range(length + 1):
            tail = stem[length - k :]
            head = stem[:k]
            model._add(model.suffix_rules, key, tail + s_s, tail + s_t)
            model._add(model.prefix_rules, key, p_s + head, p_t + head)
    return model


def _best_rule(
    rules: dict[tuple[str, str], int] | None, matches
) -> tuple[str, str, int] | None:
    """Longest src side, then highest count, then smallest tgt side."""
    if not rules:
        return None
    candidates = [
        (src, tgt, count)
        for (src, tgt), count in rules.items()
        if matches(src)
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda r: (-len(r[0]), -r[2], r[1]))


def apply_rules(
    model: RuleModel,
    form: str,
    src_slot: SlotTemplate,
    tgt_slot: SlotTemplate,
) -> tuple[str, int]:
    """Rewrite ``form`` from the source slot to the target slot.

    An exact whole-string match wins outright (it is the longest possible
    match and is what memorizes the training set).  Otherwise the best
    matching suffix rule applies, then the best matching prefix rule on the
    result; support sums the counts of the rules that fired.  With no match
    at all the form is copied with support 0.
    """
    key = (src_slot, tgt_slot)
    whole = _best_rule(model.whole_rules.get(key), lambda src: src == form)
    if whole is not None:
        return whole[1], whole[2]
    result = form
    support = 0
    suffix = _best_rule(
        model.suffix_rules.get(key), lambda src: result.endswith(src)
    )
    if suffix is not None:
        src, tgt, count = suffix
        result = result[: len(result) - len(src)] + tgt
        support += count
    current = result
    prefix = _best_rule(
        model.prefix_rules.get(key), lambda src: current.startswith(src)
    )
    if prefix is not None:
        src, tgt, count = prefix
        result = tgt + result[len(src) :]
        support += count
    return result, support


# --- cell filling ---------------------------------------------------------


@dataclass(frozen=True)
class Vote:
    src_slot: SlotTemplate
    src_form: str
    prediction: str
    support: int


@dataclass(frozen=True)
class VoteDetail:
    votes: tuple[Vote, ...]
    winner: str

    def counts(self) -> Counter:
        return Counter(v.prediction for v in self.votes)


def fill_cell(
    model: RuleModel,
    table: ParadigmTable,
    tgt_slot: SlotTemplate,
    *,
    sources: dict[SlotTemplate, str] | None = None,
) -> tuple[str, VoteDetail]:
    """Predict one cell from each attested source form and take the vote.

    The most frequent prediction wins; ties break by highest summed rule
    support, then lexicographically.  ``sources`` restricts the voting cells
    (the evaluation pipeline passes only train-attested forms).
    """
    if sources is None:
        sources = {
            slot: cell.surface
            for slot, cell in table.attested().items()
            if slot != tgt_slot
        }
    if not sources:
        raise NoSourceCells(
            f"table {table.lexeme_id}/{table.variant_form} has no source cells"
        )
    votes = []
    for slot in sorted(sources, key=SlotTemplate.render):
        prediction, support = apply_rules(model, sources[slot], slot, tgt_slot)
        votes.append(Vote(slot, sources[slot], prediction, support))
    counts = Counter(v.prediction for v in votes)
    support_sums: Counter = Counter()
    for v in votes:
        support_sums[v.prediction] += v.support
    winner = min(
        counts, key=lambda p: (-counts[p], -support_sums[p], p)
    )
    return winner, VoteDetail(votes=tuple(votes), winner=winner)


def fill_tables(
    model: RuleModel, tables: TableSet, inventory: SlotInventory
) -> TableSet:
    """Complete every empty inventory slot of every table.

    Attested cells are untouched; predictions are marked as such.  The
    result is a new table set; inputs are not mutated.
    """
    filled: dict[tuple[str, str], ParadigmTable] = {}
    for table in tables.sorted_tables():
        cells = dict(table.cells)
        stem_gloss = table.stem_gloss()
        for slot in inventory:
            if slot in cells:
                continue
            prediction, _ = fill_cell(model, table, slot)
            cells[slot] = Cell(
                gloss=slot.render_with(stem_gloss),
                segmentation="",
                surface=prediction,
                stem_tag=slot.render_with(table.variant_form),
                predicted=True,
            )
        filled[(table.lexeme_id, table.variant_form)] = ParadigmTable(
            lexeme_id=table.lexeme_id,
            variant_form=table.variant_form,
            variant_kind=table.variant_kind,
            dialect=table.dialect,
            cells=cells,
        )
    return TableSet(tables=filled)


# --- neural encoding ------------------------------------------------------


def encode_neural_pair(
    pair: ReinflectionPair, separator: str = SEPARATOR_TOKEN
) -> tuple[list[str], list[str]]:
    """Character/tag token sequences for a sequence-to-sequence transducer.

    Input: source characters, separator, source slot labels, separator,
    target slot labels.  Output: target characters.
    """
    input_tokens = (
        list(pair.src_form)
        + [separator]
        + list(pair.src_slot.labels)
        + [separator]
        + list(pair.tgt_slot.labels)
    )
    return input_tokens, list(pair.tgt_form)


def decode_neural_pair(
    input_tokens: list[str],
    output_tokens: list[str],
    table_ref: tuple[str, str] = ("", ""),
    separator: str = SEPARATOR_TOKEN,
) -> ReinflectionPair:
    """Invert :func:`encode_neural_pair`.

    The table reference is not part of the encoding, so it must be supplied
    by the caller when it matters.
    """
    first = input_tokens.index(separator)
    second = input_tokens.index(separator, first + 1)
    return ReinflectionPair(
        table_ref=table_ref,
        src_slot=SlotTemplate(labels=tuple(input_tokens[first + 1 : second])),
        tgt_slot=SlotTemplate(labels=tuple(input_tokens[second + 1 :])),
        src_form="".join(input_tokens[:first]),
        tgt_form="".join(output_tokens),
    )


# --- serialization --------------------------------------------------------


def model_to_tsv(model: RuleModel) -> str:
    """Model file: side, src slot, tgt slot, src side, tgt side, count."""
    rows = []
    for side, table in (
        (SIDE_PREFIX, model.prefix_rules),
        (SIDE_SUFFIX, model.suffix_rules),
        (SIDE_WHOLE, model.whole_rules),
    ):
        for (src_slot, tgt_slot), rules in table.items():
            for (src, tgt), count in rules.items():
                rows.append(
                    (side, src_slot.render(), tgt_slot.render(), src, tgt, count)
                )
    rows.sort()
    return "\n".join("\t".join(map(str, row)) for row in rows) + (
        "\n" if rows else ""
    )


def model_from_tsv(text: str) -> RuleModel:
    model = RuleModel()
    tables = {
        SIDE_PREFIX: model.prefix_rules,
        SIDE_SUFFIX: model.suffix_rules,
        SIDE_WHOLE: model.whole_rules,
    }
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 6:
            raise ColumnCountError(
                f"model line {line_no}: expected 6 columns, found {len(fields)}"
            )
        side, src_slot, tgt_slot, src, tgt, count = fields
        if side not in tables:
            raise ColumnCountError(
                f"model line {line_no}: unknown side {side!r}"
            )
        key = (SlotTemplate.parse(src_slot), SlotTemplate.parse(tgt_slot))
        try:
            parsed_count = int(count)
        except ValueError:
            raise ColumnCountError(
                f"model line {line_no}: count {count!r} is not an integer"
            ) from None
        tables[side].setdefault(key, {})[(src, tgt)] = parsed_count
    return model


def _spec_header(spec: SplitSpec) -> str:
    ratios = ",".join(repr(r) for r in spec.ratios)
    return f"# seed={spec.seed} ratios={ratios}"


def _parse_spec_header(line: str) -> SplitSpec:
    if not line.startswith("# seed="):
        raise ColumnCountError(f"expected a seed/ratios header, found {line!r}")
    body = line[2:]
    try:
        seed_part, ratios_part = body.split(" ratios=", 1)
        seed = int(seed_part[len("seed="):])
        ratios = tuple(float(r) for r in ratios_part.split(","))
    except ValueError:
        raise ColumnCountError(f"malformed seed/ratios header: {line!r}") from None
    return SplitSpec(seed=seed, ratios=ratios)  # type: ignore[arg-type]


def split_to_tsv(result: SplitResult) -> str:
    lines = [_spec_header(result.spec)]
    for bucket in (BUCKET_TRAIN, BUCKET_DEV, BUCKET_TEST):
        for cell in result.bucket(bucket):
            lines.append(
                "\t".join(
                    [bucket, cell.lexeme_id, cell.variant_form, cell.slot.render()]
                )
            )
    return "\n".join(lines) + "\n"


def split_from_tsv(text: str) -> SplitResult:
    lines = [line for line in text.split("\n") if line]
    if not lines:
        raise ColumnCountError("empty split file")
    spec = _parse_spec_header(lines[0])
    buckets: dict[str, list[CellId]] = {
        BUCKET_TRAIN: [],
        BUCKET_DEV: [],
        BUCKET_TEST: [],
    }
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 4:
            raise ColumnCountError(
                f"split line {line_no}: expected 4 columns, found {len(fields)}"
            )
        bucket, lexeme_id, variant_form, slot = fields
        if bucket not in buckets:
            raise ColumnCountError(
                f"split line {line_no}: unknown bucket {bucket!r}"
            )
        buckets[bucket].append(
            CellId(lexeme_id, variant_form, SlotTemplate.parse(slot))
        )
    return SplitResult(
        spec=spec,
        train=tuple(buckets[BUCKET_TRAIN]),
        dev=tuple(buckets[BUCKET_DEV]),
        test=tuple(buckets[BUCKET_TEST]),
    )


def pairs_to_tsv(pairs: list[ReinflectionPair], spec: SplitSpec) -> str:
    lines = [_spec_header(spec)]
    for p in pairs:
        lines.append(
            "\t".join(
                [
                    p.table_ref[0],
                    p.table_ref[1],
                    p.src_slot.render(),
                    p.tgt_slot.render(),
                    p.src_form,
                    p.tgt_form,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def pairs_from_tsv(text: str) -> tuple[list[ReinflectionPair], SplitSpec]:
    lines = [line for line in text.split("\n") if line]
    if not lines:
        raise ColumnCountError("empty pairs file")
    spec = _parse_spec_header(lines[0])
    pairs = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 6:
            raise ColumnCountError(
                f"pairs line {line_no}: expected 6 columns, found {len(fields)}"
            )
        pairs.append(
            ReinflectionPair(
                table_ref=(fields[0], fields[1]),
                src_slot=SlotTemplate.parse(fields[2]),
                tgt_slot=SlotTemplate.parse(fields[3]),
                src_form=fields[4],
                tgt_form=fields[5],
            )
        )
    return pairs, spec
