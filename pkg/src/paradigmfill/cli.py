"""Command-line entry point chaining the pipeline stages.

    pf validate corpus.igt
    pf build-tables --corpus corpus.igt --morph-classes mc.tsv \
        --variants var.tsv --out tables/
    pf split --seed 13 --ratios 0.668,0.235,0.097 tables/
    pf train tables/
    pf fill tables/ --splits tables/splits.tsv --holdout test
    pf eval tables/preds_test.tsv tables/gold_test.tsv --variants var.tsv
    pf gen-exercises tables/filled --out exercises.json
    pf serve --exercises exercises.json --port 8000

Every subcommand is deterministic: identical inputs and flags produce
byte-identical outputs.  Exit codes: 0 success, 1 validation or pipeline
error, 2 usage error.  Unset flags fall back to the config file named by
``PF_CONFIG`` (lines of ``key = value``, keys matching the long flag
names).
"""

from __future__ import annotations

import argparse
import logging
import os
import signal
import sys
from pathlib import Path

from . import evaluate as ev
from . import exercises as ex
from . import igt, lexicon, paradigms, reinflect
from .errors import PipelineError
from .server import DrillServer

logger = logging.getLogger(__name__)

CONFIG_ENV = "PF_CONFIG"


def load_config(path: str | None = None) -> dict[str, str]:
    """Read ``key = value`` lines from the PF_CONFIG file, if any."""
    path = path if path is not None else os.environ.get(CONFIG_ENV)
    if not path or not Path(path).exists():
        return {}
    config: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").split("\n"):
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, value = line.split("=", 1)
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def _fill_from_config(args: argparse.Namespace, names: list[str]) -> None:
    config = load_config()
    for name in names:
        if getattr(args, name, None) is None and name in config:
            setattr(args, name, config[name])


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    return parts[0], parts[1], parts[2]


def _require(args: argparse.Namespace, parser: argparse.ArgumentParser,
             *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            parser.error(
                f"--{name.replace('_', '-')} is required "
                f"(flag or {CONFIG_ENV} entry)"
            )


# --- subcommands ------------------------------------------------------------


def cmd_validate(args) -> int:
    text = Path(args.corpus).read_text(encoding="utf-8")
    entries, errors = igt.scan_document(text)
    words = sum(len(e.words) for e in entries)
    morphemes = sum(
        len(a.morphemes) for e in entries for a in e.analyses
    )
    print(f"entries: {len(entries)}")
    print(f"words: {words}")
    print(f"morphemes: {morphemes}")
    print(f"{len(errors)} alignment errors")
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    round_trip = igt.serialize_document(entries)
    if not errors and round_trip != text:
        print("warning: input is not in canonical form; "
              "serialization would normalize it", file=sys.stderr)
    return 1 if errors else 0


def cmd_build_tables(args, parser) -> int:
    _require(args, parser, "corpus", "out")
    morph_lex = (
        lexicon.load_morph_classes(args.morph_classes)
        if args.morph_classes
        else lexicon.MorphClassLexicon.empty()
    )
    variants = (
        lexicon.load_variants(args.variants)
        if args.variants
        else lexicon.VariantRegistry.empty()
    )
    corpus = igt.parse_document(Path(args.corpus).read_text(encoding="utf-8"))
    tables = paradigms.build_tables(
        corpus, morph_lex, variants, include_covert=args.include_covert
    )
    inventory = paradigms.compute_inventory(tables)
    paradigms.write_tables(tables, inventory, args.out)
    report = tables.report
    assert report is not None
    print(f"tables: {len(tables.tables)}")
    print(f"attested cells: {report.attested_cells}")
    print(f"skipped words: {sum(report.skips.values())}")
    return 0


def cmd_split(args, parser) -> int:
    if args.seed is None:
        parser.error("--seed is required (flag or PF_CONFIG entry)")
    tables, _ = paradigms.read_tables(args.tables)
    ratios = args.ratios if args.ratios else (0.668, 0.235, 0.097)
    spec = reinflect.SplitSpec(seed=int(args.seed), ratios=ratios)
    result = reinflect.split_cells(tables, spec)
    out = Path(args.out) if args.out else Path(args.tables) / "splits.tsv"
    out.write_text(reinflect.split_to_tsv(result), encoding="utf-8")
    print(
        f"train: {len(result.train)}  dev: {len(result.dev)}  "
        f"test: {len(result.test)}"
    )
    return 0


def cmd_train(args, parser) -> int:
    tables, _ = paradigms.read_tables(args.tables)
    splits_path = Path(args.splits) if args.splits else Path(args.tables) / "splits.tsv"
    split = reinflect.split_from_tsv(splits_path.read_text(encoding="utf-8"))
    pairs = reinflect.generate_pairs(tables, split.train)
    model = reinflect.train_rules(pairs)
    out = Path(args.out) if args.out else Path(args.tables) / "model.tsv"
    out.write_text(reinflect.model_to_tsv(model), encoding="utf-8")
    pairs_out = (
        Path(args.pairs_out) if args.pairs_out else Path(args.tables) / "pairs.tsv"
    )
    pairs_out.write_text(
        reinflect.pairs_to_tsv(pairs, split.spec), encoding="utf-8"
    )
    print(f"pairs: {len(pairs)}")
    rule_count = sum(
        len(rules)
        for table in (model.prefix_rules, model.suffix_rules, model.whole_rules)
        for rules in table.values()
    )
    print(f"rules: {rule_count}")
    return 0


def cmd_fill(args, parser) -> int:
    tables, inventory = paradigms.read_tables(args.tables)
    model_path = Path(args.model) if args.model else Path(args.tables) / "model.tsv"
    model = reinflect.model_from_tsv(model_path.read_text(encoding="utf-8"))

    if args.holdout:
        splits_path = (
            Path(args.splits) if args.splits else Path(args.tables) / "splits.tsv"
        )
        split = reinflect.split_from_tsv(splits_path.read_text(encoding="utf-8"))
        held_out = split.bucket(args.holdout)
        train_by_table: dict[tuple[str, str], set] = {}
        for cell in split.train:
            train_by_table.setdefault(
                (cell.lexeme_id, cell.variant_form), set()
            ).add(cell.slot)
        predictions: dict[ev.CellKey, str] = {}
        golds: dict[ev.CellKey, str] = {}
        for cell in held_out:
            table = tables.tables.get((cell.lexeme_id, cell.variant_form))
            if table is None or cell.slot not in table.cells:
                print(
                    f"error: split file does not match the table directory "
                    f"(missing {cell.lexeme_id}/{cell.variant_form} "
                    f"{cell.slot.render()})",
                    file=sys.stderr,
                )
                return 1
            sources = {
                slot: table.cells[slot].surface
                for slot in train_by_table.get(
                    (cell.lexeme_id, cell.variant_form), set()
                )
            }
            prediction, _ = reinflect.fill_cell(
                model, table, cell.slot, sources=sources
            )
            key = (cell.lexeme_id, cell.variant_form, cell.slot.render())
            predictions[key] = prediction
            golds[key] = table.cells[cell.slot].surface
        preds_out = (
            Path(args.preds_out)
            if args.preds_out
            else Path(args.tables) / f"preds_{args.holdout}.tsv"
        )
        gold_out = (
            Path(args.gold_out)
            if args.gold_out
            else Path(args.tables) / f"gold_{args.holdout}.tsv"
        )
        preds_out.write_text(ev.cells_to_tsv(predictions), encoding="utf-8")
        gold_out.write_text(ev.cells_to_tsv(golds), encoding="utf-8")
        print(f"predicted {len(predictions)} {args.holdout} cells")
        return 0

    filled = reinflect.fill_tables(model, tables, inventory)
    out = Path(args.out) if args.out else Path(args.tables) / "filled"
    paradigms.write_tables(filled, inventory, out, filled=True)
    predicted = sum(
        1
        for table in filled.sorted_tables()
        for cell in table.cells.values()
        if cell.predicted
    )
    print(f"predicted cells: {predicted}")
    return 0


def cmd_eval(args, parser) -> int:
    predictions = ev.cells_from_tsv(Path(args.preds).read_text(encoding="utf-8"))
    golds = ev.cells_from_tsv(Path(args.gold).read_text(encoding="utf-8"))
    registry = (
        lexicon.load_variants(args.variants)
        if args.variants
        else lexicon.VariantRegistry.empty()
    )
    report = ev.evaluate_predictions(
        predictions,
        golds,
        registry,
        alpha=args.alpha,
        benefit_mode=args.gei_benefits,
    )
    text = report.render()
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        dialect_path = out.with_name(out.stem + "_dialects.tsv")
        dialect_path.write_text(report.dialect_tsv(), encoding="utf-8")
    return 0


def cmd_gen_exercises(args, parser) -> int:
    _require(args, parser, "out")
    tables, _ = paradigms.read_tables(args.tables)
    provenance = None
    if not args.include_predicted:
        provenance = frozenset({ex.PROVENANCE_ATTESTED})
    exercise_filter = ex.ExerciseFilter(
        dialects=frozenset(args.dialect) if args.dialect else None,
        slots=frozenset(args.slot) if args.slot else None,
        provenance=provenance,
    )
    descriptions = None
    if args.descriptions:
        descriptions = dict(ex.DEFAULT_LABEL_DESCRIPTIONS)
        for line in Path(args.descriptions).read_text(encoding="utf-8").split("\n"):
            if not line.strip() or line.startswith("#"):
                continue
            label, _, description = line.partition("\t")
            descriptions[label] = description
    exercise_list = ex.generate_exercises(tables, exercise_filter, descriptions)
    Path(args.out).write_text(
        ex.exercises_to_json(exercise_list), encoding="utf-8"
    )
    print(f"exercises: {len(exercise_list)}")
    return 0


def cmd_serve(args, parser) -> int:
    _require(args, parser, "exercises")
    exercise_list = ex.exercises_from_json(
        Path(args.exercises).read_text(encoding="utf-8")
    )
    server = DrillServer(
        exercise_list,
        port=int(args.port) if args.port is not None else 8000,
        ui_dir=args.ui_dir,
        snapshot=args.snapshot,
    )

    # SIGTERM must unwind through serve_forever's cleanup so the session
    # snapshot is written; headless supervisors stop us with SIGTERM.
    def _terminate(signum, frame):
        raise SystemExit(0)

    signal.signal(signal.SIGTERM, _terminate)
    print(f"serving on http://127.0.0.1:{server.port}", flush=True)
    try:
        server.serve_forever()
    except (KeyboardInterrupt, SystemExit):
        server.close()
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pf",
        description="Inflection tables from interlinear glossed text: "
        "build, fill, evaluate, drill.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log debug detail"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check corpus tier alignment")
    p.add_argument("corpus", help="IGT corpus file")

    p = sub.add_parser("build-tables", help="corpus -> paradigm tables")
    p.add_argument("--corpus", help="IGT corpus file")
    p.add_argument("--morph-classes", help="morph class TSV")
    p.add_argument("--variants", help="variant registry TSV")
    p.add_argument("--out", help="output table directory")
    p.add_argument(
        "--include-covert", action="store_true",
        help="keep covert morphemes in slot names",
    )

    p = sub.add_parser("split", help="partition cells into train/dev/test")
    p.add_argument("tables", help="table directory")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--ratios", type=_parse_ratios,
                   help="train,dev,test ratios (default 0.668,0.235,0.097)")
    p.add_argument("--out", help="split file (default <tables>/splits.tsv)")

    p = sub.add_parser("train", help="train the rule transducer")
    p.add_argument("tables", help="table directory")
    p.add_argument("--splits", help="split file (default <tables>/splits.tsv)")
    p.add_argument("--out", help="model file (default <tables>/model.tsv)")
    p.add_argument("--pairs-out", help="pairs file (default <tables>/pairs.tsv)")

    p = sub.add_parser("fill", help="predict missing or held-out cells")
    p.add_argument("tables", help="table directory")
    p.add_argument("--model", help="model file (default <tables>/model.tsv)")
    p.add_argument("--out", help="filled-table directory (default <tables>/filled)")
    p.add_argument("--splits", help="split file (default <tables>/splits.tsv)")
    p.add_argument(
        "--holdout", choices=("dev", "test"),
        help="predict this held-out bucket from train cells instead of "
        "completing the tables",
    )
    p.add_argument("--preds-out", help="predictions TSV (holdout mode)")
    p.add_argument("--gold-out", help="gold TSV (holdout mode)")

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("preds", help="predictions TSV")
    p.add_argument("gold", help="gold TSV")
    p.add_argument("--variants", help="variant registry TSV for dialect groups")
    p.add_argument("--alpha", type=float, default=2,
                   help="generalized entropy exponent (default 2)")
    p.add_argument(
        "--gei-benefits", choices=(ev.BENEFIT_MODE_CELL, ev.BENEFIT_MODE_DIALECT),
        default=ev.BENEFIT_MODE_CELL,
        help="entropy benefits: per-cell indicators or per-dialect means",
    )
    p.add_argument("--out", help="write the report here as well")

    p = sub.add_parser("gen-exercises", help="filled tables -> drill file")
    p.add_argument("tables", help="filled table directory")
    p.add_argument("--out", help="exercises JSON file")
    p.add_argument("--dialect", action="append",
                   help="keep only this dialect (repeatable; 'unmarked' "
                   "selects non-dialect variants)")
    p.add_argument("--slot", action="append", help="keep only this slot (repeatable)")
    p.add_argument(
        "--include-predicted", action=argparse.BooleanOptionalAction,
        default=True, help="include machine-predicted cells (default on)",
    )
    p.add_argument("--descriptions", help="label description TSV overrides")

    p = sub.add_parser("serve", help="serve drills over HTTP")
    p.add_argument("--exercises", help="exercises JSON file")
    p.add_argument("--port", type=int, help="port (default 8000, 0 = ephemeral)")
    p.add_argument("--ui-dir", help="static UI directory")
    p.add_argument("--snapshot", help="session snapshot file")

    return parser


_CONFIG_KEYS = {
    "build-tables": ["corpus", "morph_classes", "variants", "out"],
    "split": ["seed", "ratios", "out"],
    "train": ["splits", "out", "pairs_out"],
    "fill": ["model", "out", "splits", "preds_out", "gold_out"],
    "eval": ["variants", "out"],
    "gen-exercises": ["out", "descriptions"],
    "serve": ["exercises", "port", "ui_dir", "snapshot"],
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    _fill_from_config(args, _CONFIG_KEYS.get(args.command, []))
    if args.command == "split" and isinstance(args.ratios, str):
        args.ratios = _parse_ratios(args.ratios)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "build-tables":
            return cmd_build_tables(args, parser)
        if args.command == "split":
            return cmd_split(args, parser)
        if args.command == "train":
            return cmd_train(args, parser)
        if args.command == "fill":
            return cmd_fill(args, parser)
        if args.command == "eval":
            return cmd_eval(args, parser)
        if args.command == "gen-exercises":
            return cmd_gen_exercises(args, parser)
        if args.command == "serve":
            return cmd_serve(args, parser)
        parser.error(f"unknown command {args.command!r}")
    except PipelineError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
