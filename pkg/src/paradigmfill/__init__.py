"""Inflection tables from interlinear glossed text.

Parse tiered IGT corpora, build sparse inflection tables keyed by lexeme
variant, fill missing cells with a counted string-rewrite transducer under
majority voting, score accuracy and dialect fairness, and serve generated
inflection drills over HTTP.
"""

from .evaluate import (
    EvalReport,
    accuracy,
    dialect_stddev,
    evaluate_predictions,
    generalized_entropy,
    per_dialect_report,
)
from .exercises import Exercise, ExerciseFilter, ExerciseService, generate_exercises
from .igt import (
    AnalyzedWord,
    Boundary,
    GlossKind,
    IgtEntry,
    Morpheme,
    classify_gloss_label,
    parse_document,
    parse_word,
    scan_document,
    serialize_document,
)
from .lexicon import (
    MorphClass,
    MorphClassLexicon,
    VariantEntry,
    VariantRegistry,
    classify_morph,
    load_morph_classes,
    load_variants,
    resolve_lexeme,
)
from .paradigms import (
    Cell,
    CellCandidate,
    ParadigmTable,
    Skip,
    SlotInventory,
    SlotTemplate,
    TableSet,
    analyze_word,
    build_tables,
    compute_inventory,
    read_table_tsv,
    write_table_tsv,
)
from .reinflect import (
    NeuralConfig,
    ReinflectionPair,
    RuleModel,
    SplitSpec,
    apply_rules,
    encode_neural_pair,
    fill_cell,
    fill_tables,
    generate_pairs,
    split_cells,
    train_rules,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
