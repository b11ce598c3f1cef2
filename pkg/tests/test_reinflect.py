import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradigmfill.errors import EmptyTrainingSet, NoSourceCells
from paradigmfill.paradigms import Cell, ParadigmTable, SlotInventory, SlotTemplate, TableSet
from paradigmfill.reinflect import (
    CellId,
    NeuralConfig,
    ReinflectionPair,
    RuleModel,
    SplitSpec,
    apply_rules,
    decode_neural_pair,
    encode_neural_pair,
    fill_cell,
    fill_tables,
    generate_pairs,
    longest_common_substring,
    model_from_tsv,
    model_to_tsv,
    pairs_from_tsv,
    pairs_to_tsv,
    split_cells,
    split_from_tsv,
    split_to_tsv,
    train_rules,
)

SLOT = SlotTemplate.parse
S1 = SLOT("ROOT-3.II")
S2 = SLOT("ROOT-3PL.II")
S3 = SLOT("ROOT-TR-3.II")


def make_cell(slot: SlotTemplate, surface: str, stem: str) -> Cell:
    return Cell(
        gloss=slot.render_with("g"),
        segmentation=surface,
        surface=surface,
        stem_tag=slot.render_with(stem),
    )


def make_tables(cell_counts: list[int], prefix: str = "lex") -> TableSet:
    """One table per count, with that many attested cells."""
    tables = {}
    for t, count in enumerate(cell_counts):
        stem = f"{prefix}{t}"
        cells = {}
        for c in range(count):
            slot = SLOT(f"ROOT-S{c}")
            cells[slot] = make_cell(slot, f"{stem}x{c}", stem)
        tables[(stem, stem)] = ParadigmTable(
            lexeme_id=stem, variant_form=stem, cells=cells
        )
    return TableSet(tables=tables)


class TestLongestCommonSubstring:
    def test_basic(self):
        assert longest_common_substring("'wat", "'wadiit") == (3, 0, 0)

    def test_disjoint(self):
        assert longest_common_substring("ab", "cd") == (0, 0, 0)

    def test_leftmost_in_src_then_tgt(self):
        # "ab" occurs twice in each string; the leftmost starts win.
        assert longest_common_substring("abxab", "abyab") == (2, 0, 0)
        assert longest_common_substring("xxab", "abyab") == (2, 2, 0)

    def test_empty(self):
        assert longest_common_substring("", "abc") == (0, 0, 0)


class TestSplitCells:
    def test_reference_sizes(self):
        tables = make_tables([12] * 107)  # 1284 cells
        spec = SplitSpec(seed=13, ratios=(0.668, 0.235, 0.097))
        result = split_cells(tables, spec)
        assert (len(result.train), len(result.dev), len(result.test)) == (
            858, 302, 124,
        )

    def test_partition_disjoint_and_exhaustive(self):
        tables = make_tables([1, 2, 3, 5, 8])
        result = split_cells(tables, SplitSpec(seed=7, ratios=(0.5, 0.3, 0.2)))
        buckets = [set(result.train), set(result.dev), set(result.test)]
        assert sum(len(b) for b in buckets) == 19
        assert len(buckets[0] | buckets[1] | buckets[2]) == 19

    def test_every_table_keeps_a_train_cell(self):
        tables = make_tables([1, 2, 3, 5, 8])
        result = split_cells(tables, SplitSpec(seed=3, ratios=(0.4, 0.3, 0.3)))
        train_tables = {(c.lexeme_id, c.variant_form) for c in result.train}
        assert train_tables == set(tables.tables)

    def test_single_cell_table_goes_to_train(self):
        tables = make_tables([1, 6])
        result = split_cells(tables, SplitSpec(seed=1, ratios=(0.4, 0.3, 0.3)))
        assert CellId("lex0", "lex0", SLOT("ROOT-S0")) in result.train

    def test_same_seed_same_partition(self):
        tables = make_tables([4, 7, 2, 9])
        spec = SplitSpec(seed=13, ratios=(0.6, 0.2, 0.2))
        assert split_cells(tables, spec) == split_cells(tables, spec)

    def test_ratio_validation(self):
        with pytest.raises(ValueError):
            SplitSpec(seed=1, ratios=(0.5, 0.5, 0.5))
        with pytest.raises(ValueError):
            SplitSpec(seed=1, ratios=(1.0, 0.0, 0.0))


class TestGeneratePairs:
    def test_three_cells_six_pairs(self):
        tables = make_tables([3])
        cells = [
            CellId("lex0", "lex0", SLOT(f"ROOT-S{i}")) for i in range(3)
        ]
        assert len(generate_pairs(tables, cells)) == 6

    def test_single_cell_no_pairs(self):
        tables = make_tables([1])
        cells = [CellId("lex0", "lex0", SLOT("ROOT-S0"))]
        assert generate_pairs(tables, cells) == []

    def test_two_tables_sum(self):
        tables = make_tables([2, 3])
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        assert len(generate_pairs(tables, cells)) == 2 + 6

    def test_pairs_stay_within_their_table(self):
        tables = make_tables([2, 2])
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        for pair in generate_pairs(tables, cells):
            assert pair.table_ref in tables.tables

    @settings(max_examples=120, deadline=None)
    @given(st.lists(st.integers(1, 12), min_size=1, max_size=8))
    def test_count_property(self, counts):
        tables = make_tables(counts)
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        pairs = generate_pairs(tables, cells)
        assert len(pairs) == sum(k * (k - 1) for k in counts)


class TestTrainRules:
    def test_suffix_rules_at_each_depth(self):
        pair = ReinflectionPair(("'wa", "'wa"), S1, S2, "'wat", "'wadiit")
        model = train_rules([pair])
        suffixes = model.suffix_rules[(S1, S2)]
        assert suffixes[("t", "diit")] == 1
        assert suffixes[("at", "adiit")] == 1

    def test_identity_pair_yields_identity_rewrites(self):
        pair = ReinflectionPair(("x", "x"), S1, S2, "lim", "lim")
        model = train_rules([pair])
        for (src, tgt) in model.suffix_rules[(S1, S2)]:
            assert src == tgt
        for (src, tgt) in model.prefix_rules[(S1, S2)]:
            assert src == tgt

    def test_disjoint_strings_whole_rule_only(self):
        pair = ReinflectionPair(("x", "x"), S1, S2, "ab", "cd")
        model = train_rules([pair])
        assert model.whole_rules[(S1, S2)] == {("ab", "cd"): 1}
        assert (S1, S2) not in model.suffix_rules
        assert (S1, S2) not in model.prefix_rules

    def test_empty_training_set(self):
        with pytest.raises(EmptyTrainingSet):
            train_rules([])

    def test_counts_accumulate(self):
        pair = ReinflectionPair(("x", "x"), S1, S2, "'wat", "'wadiit")
        model = train_rules([pair, pair])
        assert model.suffix_rules[(S1, S2)][("t", "diit")] == 2


class TestApplyRules:
    def test_generalizes_to_new_stem(self):
        model = train_rules(
            [ReinflectionPair(("x", "x"), S1, S2, "'wat", "'wadiit")]
        )
        prediction, support = apply_rules(model, "limt", S1, S2)
        assert prediction == "limdiit"
        assert support > 0

    def test_copy_fallback(self):
        model = train_rules(
            [ReinflectionPair(("x", "x"), S1, S2, "'wat", "'wadiit")]
        )
        assert apply_rules(model, "limt", S2, S1) == ("limt", 0)

    def test_training_source_reproduces_target(self):
        model = train_rules(
            [ReinflectionPair(("x", "x"), S1, S2, "'wat", "'wadiit")]
        )
        assert apply_rules(model, "'wat", S1, S2)[0] == "'wadiit"

    def test_prefix_rules_rewrite_left_edge(self):
        pair = ReinflectionPair(("x", "x"), S1, S2, "nawat", "kiwat")
        model = train_rules([pair])
        prediction, _ = apply_rules(model, "nagut", S1, S2)
        assert prediction == "kigut"


class TestMemorization:
    @staticmethod
    def unambiguous(pairs):
        seen: dict[tuple, set] = {}
        for p in pairs:
            seen.setdefault((p.src_form, p.src_slot, p.tgt_slot), set()).add(
                p.tgt_form
            )
        return [
            p
            for p in pairs
            if len(seen[(p.src_form, p.src_slot, p.tgt_slot)]) == 1
        ]

    @settings(max_examples=150, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.sampled_from(["ROOT-A", "ROOT-B", "ROOT-C"]),
                st.sampled_from(["ROOT-X", "ROOT-Y"]),
                st.text(alphabet="abc'", max_size=5),
                st.text(alphabet="abc'", max_size=5),
            ),
            min_size=1,
            max_size=25,
        )
    )
    def test_unambiguous_pairs_reproduce_exactly(self, raw):
        pairs = [
            ReinflectionPair(("t", "t"), SLOT(src_slot), SLOT(tgt_slot), src, tgt)
            for src_slot, tgt_slot, src, tgt in raw
        ]
        model = train_rules(pairs)
        for pair in self.unambiguous(pairs):
            got, _ = apply_rules(model, pair.src_form, pair.src_slot, pair.tgt_slot)
            assert got == pair.tgt_form


class TestFillCell:
    @staticmethod
    def model_mapping(*rules):
        """Whole-string rules (src_slot, form, prediction, count)."""
        model = RuleModel()
        for src_slot, form, prediction, count in rules:
            model.whole_rules.setdefault((src_slot, S3), {})[(form, prediction)] = count
        return model

    @staticmethod
    def table_with(cells):
        return ParadigmTable(lexeme_id="t", variant_form="t", cells=cells)

    def test_strict_majority(self):
        slots = [SLOT(f"ROOT-V{i}") for i in range(3)]
        table = self.table_with(
            {slot: make_cell(slot, f"f{i}", "t") for i, slot in enumerate(slots)}
        )
        model = self.model_mapping(
            (slots[0], "f0", "'wadiit", 1),
            (slots[1], "f1", "'wadiit", 1),
            (slots[2], "f2", "'wat", 1),
        )
        prediction, detail = fill_cell(model, table, S3)
        assert prediction == "'wadiit"
        assert detail.counts()["'wadiit"] == 2

    def test_single_source_verbatim(self):
        slot = SLOT("ROOT-V0")
        table = self.table_with({slot: make_cell(slot, "f0", "t")})
        model = self.model_mapping((slot, "f0", "'wayit", 1))
        assert fill_cell(model, table, S3)[0] == "'wayit"

    def test_tie_breaks_by_support(self):
        slots = [SLOT("ROOT-V0"), SLOT("ROOT-V1")]
        table = self.table_with(
            {slot: make_cell(slot, f"f{i}", "t") for i, slot in enumerate(slots)}
        )
        model = self.model_mapping(
            (slots[0], "f0", "x", 3),
            (slots[1], "f1", "y", 5),
        )
        assert fill_cell(model, table, S3)[0] == "y"

    def test_support_tie_breaks_lexicographically(self):
        slots = [SLOT("ROOT-V0"), SLOT("ROOT-V1")]
        table = self.table_with(
            {slot: make_cell(slot, f"f{i}", "t") for i, slot in enumerate(slots)}
        )
        model = self.model_mapping(
            (slots[0], "f0", "zz", 2),
            (slots[1], "f1", "aa", 2),
        )
        assert fill_cell(model, table, S3)[0] == "aa"

    def test_no_source_cells(self):
        table = self.table_with({})
        with pytest.raises(NoSourceCells):
            fill_cell(RuleModel(), table, S3)

    def test_vote_is_order_invariant(self):
        slots = [SLOT(f"ROOT-V{i}") for i in range(3)]
        cells = {slot: make_cell(slot, f"f{i}", "t") for i, slot in enumerate(slots)}
        model = self.model_mapping(
            (slots[0], "f0", "b", 1),
            (slots[1], "f1", "a", 1),
            (slots[2], "f2", "a", 1),
        )
        forward = self.table_with(dict(cells))
        backward = self.table_with(dict(reversed(list(cells.items()))))
        assert fill_cell(model, forward, S3) == fill_cell(model, backward, S3)


class TestFillTables:
    def test_fills_exactly_the_empty_slots(self):
        tables = make_tables([3])
        inventory = SlotInventory(
            slots=tuple(SLOT(f"ROOT-S{i}") for i in range(31))
        )
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        model = train_rules(generate_pairs(tables, cells))
        filled = fill_tables(model, tables, inventory)
        table = filled.tables[("lex0", "lex0")]
        predicted = [c for c in table.cells.values() if c.predicted]
        assert len(table.cells) == 31
        assert len(predicted) == 28

    def test_attested_cells_untouched(self):
        tables = make_tables([3])
        inventory = SlotInventory(
            slots=tuple(SLOT(f"ROOT-S{i}") for i in range(5))
        )
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        model = train_rules(generate_pairs(tables, cells))
        filled = fill_tables(model, tables, inventory)
        for slot, cell in tables.tables[("lex0", "lex0")].cells.items():
            assert filled.tables[("lex0", "lex0")].cells[slot] == cell

    def test_fully_attested_table_unchanged(self):
        tables = make_tables([4])
        inventory = SlotInventory(
            slots=tuple(SLOT(f"ROOT-S{i}") for i in range(4))
        )
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        model = train_rules(generate_pairs(tables, cells))
        filled = fill_tables(model, tables, inventory)
        assert filled.tables == tables.tables

    def test_deterministic(self):
        tables = make_tables([2, 5, 3])
        inventory = SlotInventory(
            slots=tuple(SLOT(f"ROOT-S{i}") for i in range(6))
        )
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        model = train_rules(generate_pairs(tables, cells))
        assert fill_tables(model, tables, inventory).tables == fill_tables(
            model, tables, inventory
        ).tables


class TestNeuralInterface:
    def test_encoding_example(self):
        pair = ReinflectionPair(("'wa", "'wa"), S1, S2, "'wat", "'wadiit")
        input_tokens, output_tokens = encode_neural_pair(pair)
        assert input_tokens == [
            "'", "w", "a", "t", "<S>", "ROOT", "3.II", "<S>", "ROOT", "3PL.II",
        ]
        assert output_tokens == ["'", "w", "a", "d", "i", "i", "t"]

    def test_identity_pair_prefix(self):
        pair = ReinflectionPair(("x", "x"), S1, S2, "lim", "lim")
        input_tokens, output_tokens = encode_neural_pair(pair)
        assert input_tokens[: len(output_tokens)] == output_tokens

    def test_decode_round_trip(self):
        pair = ReinflectionPair(("'wa", "'wa"), S1, S2, "'wat", "'wadiit")
        back = decode_neural_pair(*encode_neural_pair(pair), table_ref=("'wa", "'wa"))
        assert back == pair

    def test_config_defaults(self):
        config = NeuralConfig()
        assert (config.layers, config.heads) == (4, 4)
        assert (config.embedding, config.hidden) == (256, 512)
        assert config.optimizer == "adam"
        assert config.learning_rate == 0.001
        assert (config.batch_size, config.max_updates) == (400, 20000)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            NeuralConfig(layers=0)


class TestSerialization:
    def test_model_round_trip(self):
        pairs = [
            ReinflectionPair(("a", "a"), S1, S2, "'wat", "'wadiit"),
            ReinflectionPair(("a", "a"), S1, S3, "ab", "cd"),
        ]
        model = train_rules(pairs)
        text = model_to_tsv(model)
        back = model_from_tsv(text)
        assert back.suffix_rules == model.suffix_rules
        assert back.prefix_rules == model.prefix_rules
        assert back.whole_rules == model.whole_rules
        assert model_to_tsv(back) == text

    def test_model_file_is_sorted(self):
        pairs = [
            ReinflectionPair(("a", "a"), S2, S1, "x", "y"),
            ReinflectionPair(("a", "a"), S1, S2, "b", "c"),
        ]
        lines = model_to_tsv(train_rules(pairs)).strip().split("\n")
        assert lines == sorted(lines)

    def test_split_round_trip(self):
        tables = make_tables([3, 4])
        spec = SplitSpec(seed=13, ratios=(0.6, 0.2, 0.2))
        result = split_cells(tables, spec)
        text = split_to_tsv(result)
        assert text.startswith("# seed=13 ratios=0.6,0.2,0.2\n")
        back = split_from_tsv(text)
        assert back == result

    def test_malformed_model_count_is_reported(self):
        from paradigmfill.errors import ColumnCountError

        with pytest.raises(ColumnCountError):
            model_from_tsv("S\tROOT\tROOT-X\ta\tb\tmany\n")

    def test_malformed_split_header_is_reported(self):
        from paradigmfill.errors import ColumnCountError

        with pytest.raises(ColumnCountError):
            split_from_tsv("# seed=thirteen ratios=0.7,0.2,0.1\n")

    def test_stale_split_references_are_reported(self):
        from paradigmfill.errors import UnknownSlot

        tables = make_tables([2])
        with pytest.raises(UnknownSlot):
            generate_pairs(
                tables, [CellId("ghost", "ghost", SLOT("ROOT-S0"))]
            )
        with pytest.raises(UnknownSlot):
            generate_pairs(
                tables,
                [
                    CellId("lex0", "lex0", SLOT("ROOT-S0")),
                    CellId("lex0", "lex0", SLOT("ROOT-S9")),
                ],
            )

    def test_pairs_round_trip(self):
        tables = make_tables([3])
        cells = [
            CellId(t.lexeme_id, t.variant_form, slot)
            for t in tables.sorted_tables()
            for slot in t.cells
        ]
        pairs = generate_pairs(tables, cells)
        spec = SplitSpec(seed=5, ratios=(0.8, 0.1, 0.1))
        back, back_spec = pairs_from_tsv(pairs_to_tsv(pairs, spec))
        assert back == pairs
        assert back_spec == spec


class TestSuffixingOracle:
    """Synthetic purely-suffixing families against the known affix map."""

    @staticmethod
    def build_family(rng: random.Random, lexeme_count=10, slot_count=8):
        letters = "bdgklmnpstwy"
        stems = set()
        while len(stems) < lexeme_count:
            stems.add("".join(rng.choice(letters) for _ in range(rng.randint(2, 5))))
        suffixes = set()
        while len(suffixes) < slot_count - 1:
            suffixes.add("".join(rng.choice("aeiou'" ) for _ in range(rng.randint(1, 3))))
        affix_map = {SLOT("ROOT"): ""}
        for index, suffix in enumerate(sorted(suffixes)):
            affix_map[SLOT(f"ROOT-S{index}")] = suffix
        tables = {}
        for stem in sorted(stems):
            cells = {
                slot: make_cell(slot, stem + suffix, stem)
                for slot, suffix in affix_map.items()
            }
            tables[(stem, stem)] = ParadigmTable(
                lexeme_id=stem, variant_form=stem, cells=cells
            )
        return TableSet(tables=tables), affix_map

    def test_held_out_cells_match_oracle(self):
        for seed in range(5):
            rng = random.Random(seed)
            tables, affix_map = self.build_family(rng)
            keys = sorted(tables.tables)
            held_table_key = keys[-1]
            held_out_count = rng.randint(1, len(affix_map) - 1)
            held_slots = sorted(affix_map, key=SlotTemplate.render)[:held_out_count]

            train_cells = []
            for key in keys:
                for slot in sorted(tables.tables[key].cells, key=SlotTemplate.render):
                    if key == held_table_key and slot in held_slots:
                        continue
                    train_cells.append(CellId(key[0], key[1], slot))
            model = train_rules(generate_pairs(tables, train_cells))

            held_table = tables.tables[held_table_key]
            stem = held_table_key[0]
            sources = {
                slot: cell.surface
                for slot, cell in held_table.cells.items()
                if slot not in held_slots
            }
            for slot in held_slots:
                prediction, _ = fill_cell(model, held_table, slot, sources=sources)
                assert prediction == stem + affix_map[slot]
