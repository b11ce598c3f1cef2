"""Acceptance gate: one test per release criterion, at its stated tolerance.

Each test prints a PASS line on success (run with ``pytest -s`` to see them;
a failure prints FAIL via the assertion itself).
"""

import random
import sys
import time
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradigmfill.cli import main
from paradigmfill.evaluate import (
    DialectScore,
    accuracy,
    dialect_stddev,
    generalized_entropy,
)
from paradigmfill.exercises import ExerciseService, generate_exercises, normalize_answer
from paradigmfill.igt import Boundary, parse_document, parse_word, serialize_document
from paradigmfill.lexicon import VariantRegistry, load_morph_classes
from paradigmfill.paradigms import (
    SlotTemplate,
    analyze_word,
    build_tables,
    compute_inventory,
    write_table_tsv,
)
from paradigmfill.reinflect import (
    CellId,
    SplitSpec,
    apply_rules,
    fill_cell,
    fill_tables,
    generate_pairs,
    split_cells,
    train_rules,
)

from test_reinflect import make_cell, make_tables
from test_reinflect import TestSuffixingOracle as OracleTools

FIXTURES = Path(__file__).parent / "fixtures"
SLOT = SlotTemplate.parse


def report(name: str) -> None:
    print(f"[PASS] {name}", file=sys.stderr)


def test_parser_fixtures(appendix_text, figure_text):
    """Appendix-sample decompositions are exact; round trip is byte-exact;
    runtime under one second."""
    start = time.monotonic()

    word = parse_word("Giigwis", "giikw-i[-t]=s", "buy-TR-3.II=PN")
    assert [
        (m.form, m.gloss, m.boundary, m.covert) for m in word.morphemes
    ] == [
        ("giikw", "buy", Boundary.STEM, False),
        ("i", "TR", Boundary.AFFIX, False),
        ("t", "3.II", Boundary.AFFIX, True),
        ("s", "PN", Boundary.CLITIC, False),
    ]
    word = parse_word(
        "al'algaltgathl", "CVC~algal-t=gat=hl", "PL~watch-3.II=REPORT=CN"
    )
    assert [(m.form, m.boundary) for m in word.morphemes] == [
        ("CVC", Boundary.REDUPLICANT),
        ("algal", Boundary.STEM),
        ("t", Boundary.AFFIX),
        ("gat", Boundary.CLITIC),
        ("hl", Boundary.CLITIC),
    ]
    word = parse_word("government", "*government", "*government")
    assert len(word.morphemes) == 1
    assert word.morphemes[0].codeswitch
    assert word.morphemes[0].boundary is Boundary.STEM

    entries = parse_document(appendix_text)
    analog = {
        (a.surface, tuple((m.form, m.gloss, m.covert) for m in a.morphemes))
        for e in entries
        for a in e.analyses
    }
    assert (
        "bekwhl",
        (("bekw", "arrive.PL", False), ("", "3.II", True), ("hl", "CN", False)),
    ) in analog
    assert serialize_document(entries) == appendix_text
    assert serialize_document(parse_document(figure_text)) == figure_text

    assert time.monotonic() - start < 1.0
    report("parser fixtures: exact decompositions, byte-exact round trip, <1s")


def test_paradigm_fixtures(morph_lex, wa_corpus):
    """Derivational merge and the published sample-table row, byte-exact."""
    word = parse_word("maaxwsxwa", "maaxws-xw-a", "fallen.snow-VAL-ATTR")
    candidate = analyze_word(word, morph_lex, VariantRegistry.empty())
    assert candidate.slot == SLOT("ROOT-ATTR")
    assert candidate.variant_form == "maaxwsxw"

    tables = build_tables(wa_corpus, morph_lex, VariantRegistry.empty())
    inventory = compute_inventory(tables)
    text = write_table_tsv(tables.tables[("'wa", "'wa")], inventory)
    assert (
        "ROOT-TR-3.II\tfind-TR-3.II\t'wa-i-t\t'wayit\t'wa-TR-3.II"
        in text.split("\n")
    )
    report("paradigm fixtures: ROOT-ATTR merge and byte-exact table row")


@settings(max_examples=120, deadline=None)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=10))
def test_pair_combinatorics(counts):
    """Pair generation count equals the sum of k(k-1) over tables."""
    tables = make_tables(counts)
    cells = [
        CellId(t.lexeme_id, t.variant_form, slot)
        for t in tables.sorted_tables()
        for slot in t.cells
    ]
    assert len(generate_pairs(tables, cells)) == sum(
        k * (k - 1) for k in counts
    )


def test_pair_combinatorics_report():
    report("combinatorics: pair count == sum k(k-1), k in 1..12, 120 cases")


def test_oracle_equivalence():
    """Purely-suffixing families: held-out filling matches the affix-map
    oracle exactly once every slot pair is attested; under five seconds."""
    start = time.monotonic()
    checked = 0
    for seed in range(6):
        rng = random.Random(seed)
        tables, affix_map = OracleTools.build_family(
            rng, lexeme_count=10, slot_count=8
        )
        keys = sorted(tables.tables)
        held_table_key = keys[rng.randrange(len(keys))]
        slots = sorted(affix_map, key=SlotTemplate.render)
        rng.shuffle(slots)
        held_slots = slots[: rng.randint(1, len(slots) - 1)]

        train_cells = [
            CellId(key[0], key[1], slot)
            for key in keys
            for slot in sorted(tables.tables[key].cells, key=SlotTemplate.render)
            if not (key == held_table_key and slot in held_slots)
        ]
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
            assert prediction == stem + affix_map[slot], (
                seed, slot.render(), prediction
            )
            checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    report(
        f"oracle equivalence: {checked} held-out cells match the affix map "
        f"exactly in {elapsed:.2f}s"
    )


@settings(max_examples=150, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["ROOT-A", "ROOT-B", "ROOT-C"]),
            st.sampled_from(["ROOT-X", "ROOT-Y"]),
            st.text(alphabet="abg'", max_size=5),
            st.text(alphabet="abg'", max_size=5),
        ),
        min_size=1,
        max_size=25,
    )
)
def test_memorization_property(raw):
    """Unambiguous training pairs are reproduced exactly."""
    from paradigmfill.reinflect import ReinflectionPair

    pairs = [
        ReinflectionPair(("t", "t"), SLOT(a), SLOT(b), src, tgt)
        for a, b, src, tgt in raw
    ]
    seen: dict[tuple, set] = {}
    for p in pairs:
        seen.setdefault((p.src_form, p.src_slot, p.tgt_slot), set()).add(p.tgt_form)
    model = train_rules(pairs)
    for p in pairs:
        if len(seen[(p.src_form, p.src_slot, p.tgt_slot)]) > 1:
            continue
        got, _ = apply_rules(model, p.src_form, p.src_slot, p.tgt_slot)
        assert got == p.tgt_form


def test_memorization_report():
    report("memorization: unambiguous training pairs reproduce exactly")


def test_determinism(tmp_path):
    """split -> train -> fill -> eval twice with seed 13 is byte-identical."""
    def run(base: Path) -> dict[str, bytes]:
        tables = base / "tables"
        assert main([
            "build-tables",
            "--corpus", str(FIXTURES / "drill_corpus.igt"),
            "--morph-classes", str(FIXTURES / "morph_classes.tsv"),
            "--variants", str(FIXTURES / "variants.tsv"),
            "--out", str(tables),
        ]) == 0
        assert main([
            "split", str(tables), "--seed", "13",
            "--ratios", "0.668,0.235,0.097",
        ]) == 0
        assert main(["train", str(tables)]) == 0
        assert main(["fill", str(tables)]) == 0
        assert main(["fill", str(tables), "--holdout", "test"]) == 0
        assert main([
            "eval", str(tables / "preds_test.tsv"), str(tables / "gold_test.tsv"),
            "--variants", str(FIXTURES / "variants.tsv"),
            "--out", str(tables / "report.txt"),
        ]) == 0
        return {
            str(p.relative_to(base)): p.read_bytes()
            for p in sorted(base.rglob("*"))
            if p.is_file()
        }

    first = run(tmp_path / "first")
    second = run(tmp_path / "second")
    assert first == second
    report(
        f"determinism: {len(first)} artifacts byte-identical across two "
        f"seed-13 runs"
    )


def test_split_ratios():
    """1284 cells at the reference ratios produce the reference sizes within
    1%, and the partition and per-table constraints always hold."""
    tables = make_tables([12] * 107)
    spec = SplitSpec(seed=13, ratios=(0.668, 0.235, 0.097))
    result = split_cells(tables, spec)
    sizes = (len(result.train), len(result.dev), len(result.test))
    for actual, target in zip(sizes, (858, 302, 124)):
        assert abs(actual - target) <= max(1, round(0.01 * target))

    rng = random.Random(99)
    for _ in range(25):
        counts = [rng.randint(1, 9) for _ in range(rng.randint(1, 40))]
        shape = make_tables(counts)
        outcome = split_cells(shape, SplitSpec(seed=rng.randint(0, 10**6)))
        buckets = (set(outcome.train), set(outcome.dev), set(outcome.test))
        total = sum(counts)
        assert sum(len(b) for b in buckets) == total
        assert len(buckets[0] | buckets[1] | buckets[2]) == total
        assert {
            (c.lexeme_id, c.variant_form) for c in outcome.train
        } == set(shape.tables)
    report(f"split ratios: sizes {sizes} vs 858/302/124; invariants hold")


def test_metrics():
    """Accuracy, entropy index, and dialect stddev at stated tolerances."""
    pairs = {("v", "v", f"ROOT-S{i}"): "x" for i in range(124)}
    golds = {
        key: ("x" if index < 108 else "y")
        for index, key in enumerate(sorted(pairs))
    }
    assert abs(accuracy(pairs, golds).accuracy - 0.8709) <= 1e-4

    for tenths in range(1, 10):
        benefits = [1] * tenths + [0] * (10 - tenths)
        mu = tenths / 10
        assert abs(generalized_entropy(benefits, 2) - (1 - mu) / (2 * mu)) <= 1e-12

    groups = {"East": DialectScore(9, 10), "West": DialectScore(8, 10)}
    assert dialect_stddev(groups) == 0.05
    report(
        "metrics: accuracy 108/124 within 1e-4, GE_2 closed form within "
        "1e-12, stddev exactly 0.05"
    )


def test_service_contract(morph_lex, wa_corpus):
    """Submitting the stored answer is always correct; any other surface
    from the same table is not.  Runs without the UI."""
    tables = build_tables(wa_corpus, morph_lex, VariantRegistry.empty())
    inventory = compute_inventory(tables)
    cells = [
        CellId(t.lexeme_id, t.variant_form, slot)
        for t in tables.sorted_tables()
        for slot in t.attested()
    ]
    model = train_rules(generate_pairs(tables, cells))
    filled = fill_tables(model, tables, inventory)
    exercises = generate_exercises(filled)
    service = ExerciseService(exercises)
    session = service.create_session()

    surfaces_by_table: dict[tuple[str, str], set[str]] = {}
    for table in filled.sorted_tables():
        surfaces_by_table[(table.lexeme_id, table.variant_form)] = {
            cell.surface for cell in table.cells.values()
        }

    checked_right = checked_wrong = 0
    for exercise in exercises:
        result = service.check_answer(session, exercise.id, exercise.answer)
        assert result["correct"], exercise
        checked_right += 1
        for other in surfaces_by_table[(exercise.lexeme_id, exercise.variant_form)]:
            if normalize_answer(other) == normalize_answer(exercise.answer):
                continue
            result = service.check_answer(session, exercise.id, other)
            assert not result["correct"], (exercise, other)
            checked_wrong += 1
    assert checked_right and checked_wrong
    report(
        f"service contract: {checked_right} stored answers accepted, "
        f"{checked_wrong} other table strings rejected"
    )
