"""Score predictions against gold cells, overall and per dialect.

Accuracy is exact string match.  Dialect fairness is reported two ways: the
population standard deviation of per-dialect accuracies, and a generalized
entropy index over per-example benefits (1 for a correct prediction, else
0), which is 0 exactly when all benefits are equal.  Cells are keyed by
(lexeme id, variant form, rendered slot), and the variant form decides the
dialect group; canonical and orthographic variants group as "unmarked".

Where inputs are integer counts the arithmetic runs on exact fractions, so
round figures like a stddev of 0.05 come out exact rather than
float-noisy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import DegenerateEvalSet, MissingPrediction, ZeroMeanBenefit
from .lexicon import VariantRegistry

CellKey = tuple[str, str, str]  # (lexeme_id, variant_form, rendered slot)

BENEFIT_MODE_CELL = "cell"
BENEFIT_MODE_DIALECT = "dialect"


@dataclass(frozen=True)
class DialectScore:
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total


@dataclass
class EvalReport:
    correct: int
    total: int
    accuracy: float
    per_dialect: dict[str, DialectScore] = field(default_factory=dict)
    dialect_stddev: float = 0.0
    gei: float = 0.0
    alpha: float = 2
    benefit_mode: str = BENEFIT_MODE_CELL

    def render(self) -> str:
        lines = [
            f"correct: {self.correct}",
            f"total: {self.total}",
            f"accuracy: {self.accuracy!r}",
            f"dialect_stddev: {self.dialect_stddev!r}",
            f"gei: {self.gei!r}",
            f"alpha: {self.alpha!r}",
            f"benefit_mode: {self.benefit_mode}",
        ]
        for name in sorted(self.per_dialect):
            score = self.per_dialect[name]
            lines.append(
                f"dialect.{name}: {score.correct}/{score.total} = "
                f"{score.accuracy!r}"
            )
        return "\n".join(lines) + "\n"

    def dialect_tsv(self) -> str:
        lines = []
        for name in sorted(self.per_dialect):
            score = self.per_dialect[name]
            lines.append(
                "\t".join(
                    [name, str(score.correct), str(score.total),
                     repr(score.accuracy)]
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")


def _check_coverage(
    predictions: Mapping[CellKey, str], golds: Mapping[CellKey, str]
) -> None:
    if not golds:
        raise DegenerateEvalSet("gold set is empty; nothing to score")
    missing = set(golds) - set(predictions)
    if missing:
        raise MissingPrediction(missing)


def accuracy(
    predictions: Mapping[CellKey, str], golds: Mapping[CellKey, str]
) -> EvalReport:
    """Exact-match accuracy over the gold cells."""
    _check_coverage(predictions, golds)
    correct = sum(1 for key, gold in golds.items() if predictions[key] == gold)
    return EvalReport(
        correct=correct, total=len(golds), accuracy=correct / len(golds)
    )


def per_dialect_report(
    predictions: Mapping[CellKey, str],
    golds: Mapping[CellKey, str],
    registry: VariantRegistry,
) -> dict[str, DialectScore]:
    """Group accuracy by the dialect of each cell's variant form.

    Dialects absent from the gold set are omitted, not reported as zero.
    """
    _check_coverage(predictions, golds)
    counts: dict[str, list[int]] = {}
    for key, gold in golds.items():
        _, variant_form, _ = key
        group = registry.resolve(variant_form).dialect_group()
        bucket = counts.setdefault(group, [0, 0])
        bucket[1] += 1
        if predictions[key] == gold:
            bucket[0] += 1
    return {
        name: DialectScore(correct=c, total=t) for name, (c, t) in counts.items()
    }


def _exact_sqrt(value: Fraction) -> float:
    if value == 0:
        return 0.0
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root == value.numerator and (
        den_root * den_root == value.denominator
    ):
        return float(Fraction(num_root, den_root))
    return math.sqrt(value.numerator / value.denominator)


def dialect_stddev(per_dialect: Mapping[str, DialectScore]) -> float:
    """Population standard deviation of the per-dialect accuracies.

    The dialect groups are the whole population under study, hence the
    population (not sample) estimator.
    """
    if not per_dialect:
        raise DegenerateEvalSet("no dialect groups")
    accuracies = [
        Fraction(score.correct, score.total) for score in per_dialect.values()
    ]
    mean = sum(accuracies) / len(accuracies)
    variance = sum((a - mean) ** 2 for a in accuracies) / len(accuracies)
    return _exact_sqrt(variance)


def generalized_entropy(benefits: Sequence[float], alpha: float = 2) -> float:
    """Generalized entropy index of a benefit vector.

    GE_a = 1/(n*a*(a-1)) * sum((b_i/mean)**a - 1).  Zero iff all benefits
    are equal; for binary benefits with a=2 this reduces to (1-mean)/(2*mean).
    ``alpha`` must not be 0 or 1 (those orders need different limits).
    """
    if alpha in (0, 1):
        raise ValueError("alpha must not be 0 or 1")
    n = len(benefits)
    if n == 0 or not any(benefits):
        raise ZeroMeanBenefit("mean benefit must be positive")
    exact = all(isinstance(b, int) for b in benefits) and (
        isinstance(alpha, int) or float(alpha).is_integer()
    )
    if exact:
        mean = Fraction(sum(benefits), n)
        a = int(alpha)
        total = sum((Fraction(b) / mean) ** a - 1 for b in benefits)
        return float(total / (n * a * (a - 1)))
    mean = sum(benefits) / n
    total = sum((b / mean) ** alpha - 1 for b in benefits)
    return total / (n * alpha * (alpha - 1))


def evaluate_predictions(
    predictions: Mapping[CellKey, str],
    golds: Mapping[CellKey, str],
    registry: VariantRegistry | None = None,
    alpha: float = 2,
    benefit_mode: str = BENEFIT_MODE_CELL,
) -> EvalReport:
    """Full report: accuracy, per-dialect scores, stddev, entropy index."""
    report = accuracy(predictions, golds)
    if registry is None:
        registry = VariantRegistry.empty()
    report.per_dialect = per_dialect_report(predictions, golds, registry)
    report.dialect_stddev = dialect_stddev(report.per_dialect)
    if benefit_mode == BENEFIT_MODE_CELL:
        benefits: list = [
            1 if predictions[key] == golds[key] else 0 for key in sorted(golds)
        ]
    elif benefit_mode == BENEFIT_MODE_DIALECT:
        benefits = [
            score.accuracy for _, score in sorted(report.per_dialect.items())
        ]
    else:
        raise ValueError(f"unknown benefit mode {benefit_mode!r}")
    report.gei = generalized_entropy(benefits, alpha)
    report.alpha = alpha
    report.benefit_mode = benefit_mode
    return report


# --- prediction/gold files --------------------------------------------------


def cells_to_tsv(cells: Mapping[CellKey, str]) -> str:
    """4-column TSV: lexeme id, variant form, slot, surface."""
    lines = [
        "\t".join([key[0], key[1], key[2], cells[key]]) for key in sorted(cells)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def cells_from_tsv(text: str) -> dict[CellKey, str]:
    from .errors import ColumnCountError

    cells: dict[CellKey, str] = {}
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ColumnCountError(
                f"cell line {line_no}: expected 4 columns, found {len(fields)}"
            )
        cells[(fields[0], fields[1], fields[2])] = fields[3]
    return cells
