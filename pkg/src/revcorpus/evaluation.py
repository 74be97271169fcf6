"""Quantitative evaluation instruments and the human-study harness.

Covers smoothed sentence-level BLEU-4 with per-partition breakdowns,
finite-population sample sizing, blinded sample drawing, Cohen's kappa,
and aggregation of adjudicated human annotations into report tables.
The human judgments themselves are inputs; nothing here auto-judges
semantics.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .experience import ExperienceClass
from .model import ReviewExample, format_timestamp, parse_timestamp

# ---------------------------------------------------------------------------
# BLEU-4


def tokenize(text: str) -> list[str]:
    """Lowercase tokens: maximal alphanumeric runs, single punctuation marks."""
    return re.findall(r"[^\W_]+|\S", text.lower(), flags=re.UNICODE)


@dataclass(frozen=True)
class BleuScore:
    """Sentence-level BLEU-4 on the 0..100 scale."""

    value: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(hypothesis: Sequence[str], reference: Sequence[str]) -> BleuScore:
    """Smoothed sentence BLEU-4 of one hypothesis against one reference.

    Add-one smoothing applies to any n-gram precision whose match count is
    zero, so an identical pair scores 100 even below length 4. The brevity
    penalty is exp(1 - |ref|/|hyp|) for short hypotheses, 1 otherwise. An
    empty hypothesis scores 0.
    """
    if not hypothesis:
        return BleuScore(0.0, (0.0, 0.0, 0.0, 0.0), 0.0)

    precisions = []
    for n in range(1, 5):
        hyp_counts = _ngrams(hypothesis, n)
        ref_counts = _ngrams(reference, n)
        matched = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
        total = max(len(hypothesis) - n + 1, 0)
        if matched == 0:
            precisions.append((matched + 1) / (total + 1))
        else:
            precisions.append(matched / total)

    if len(hypothesis) < len(reference):
        bp = math.exp(1.0 - len(reference) / len(hypothesis))
    else:
        bp = 1.0
    value = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / 4.0)
    return BleuScore(value, tuple(precisions), bp)


def corpus_bleu4(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    """Arithmetic mean of sentence BLEU-4 over (hypothesis, reference) pairs."""
    if not pairs:
        raise ValueError("no pairs to score")
    return sum(bleu4(h, r).value for h, r in pairs) / len(pairs)


@dataclass
class PartitionRow:
    label: str
    count: int
    bleu: float | None
    se_count: int | None = None
    se_total: int | None = None


def partitioned_metrics(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    quadrants: Sequence[ExperienceClass],
    se_flags: Sequence[bool | None] | None = None,
) -> dict[str, PartitionRow]:
    """BLEU-4 (and optionally semantic-equivalence counts) per ownership row.

    Rows overlap by design: the major-reviewer row holds every
    major-reviewer example, the major-author row every major-author one,
    and their intersection forms the both-major row.
    """
    if len(pairs) != len(quadrants):
        raise ValueError("pairs and quadrants must align")
    if se_flags is not None and len(se_flags) != len(pairs):
        raise ValueError("se_flags must align with pairs")

    selectors = {
        "all": lambda q: True,
        "mrma": lambda q: q.major_author and q.major_reviewer,
        "mr": lambda q: q.major_reviewer,
        "ma": lambda q: q.major_author,
    }
    rows = {}
    for label, selector in selectors.items():
        indices = [i for i, q in enumerate(quadrants) if selector(q)]
        bleu = (
            corpus_bleu4([pairs[i] for i in indices]) if indices else None
        )
        se_count = se_total = None
        if se_flags is not None:
            judged = [se_flags[i] for i in indices if se_flags[i] is not None]
            se_count = sum(1 for flag in judged if flag)
            se_total = len(judged)
        rows[label] = PartitionRow(label, len(indices), bleu, se_count, se_total)
    return rows


# ---------------------------------------------------------------------------
# Sample sizing and drawing


@dataclass
class SamplingParams:
    """Finite-population sample sizing inputs.

    Defaults give a 95% confidence level (z=1.96) with a 10% interval and
    the conservative p-hat of one half.
    """

    population: int | None
    z: float = 1.96
    margin: float = 0.10
    p_hat: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.population is not None and self.population <= 0:
            raise ValueError("population must be positive")
        if not 0.0 < self.margin <= 1.0:
            raise ValueError("margin must be in (0,1]")
        if not 0.0 < self.p_hat < 1.0:
            raise ValueError("p_hat must be in (0,1)")


def sample_size(params: SamplingParams) -> int:
    """Finite-population-corrected sample size, rounded up.

    n = ceil( n0 / (1 + n0/N) ) with n0 = z^2 * p(1-p) / e^2; the
    correction drops out when the population is unbounded (None).
    """
    n0 = (params.z**2) * params.p_hat * (1.0 - params.p_hat) / (params.margin**2)
    if params.population is None:
        return math.ceil(n0)
    corrected = n0 / (1.0 + n0 / params.population)
    return math.ceil(corrected)


@dataclass
class FrameItem:
    """One blinded evaluation item: context, reference, anonymous candidates."""

    sample_id: str
    m_pre: str
    reference: str
    quadrant: str
    candidates: list[tuple[str, str]]  # (alias, generated comment)


@dataclass
class SampleFrame:
    """A drawn, blinded sample with its server-side-only alias key."""

    items: list[FrameItem]
    key: dict[str, dict[str, str]]  # sample_id -> alias -> model_id
    seed: int

    @property
    def model_ids(self) -> list[str]:
        models = set()
        for aliases in self.key.values():
            models.update(aliases.values())
        return sorted(models)


_ALIASES = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _frame_sample_id(example: ReviewExample) -> str:
    return f"{example.repo.replace('/', '@')}@{example.pr_id}@{example.comment_id}"


def draw_sample(
    examples: Sequence[ReviewExample],
    generations: Mapping[str, Sequence[str]],
    n: int,
    seed: int,
) -> SampleFrame:
    """Draw a uniform, seeded sample and blind the per-model generations.

    `generations` maps model id to comments aligned with `examples`.
    Model identities are replaced by per-item aliases in a per-item
    randomized order; the alias key never leaves the frame object except
    through write_frame_key.
    """
    if n > len(examples):
        raise ValueError(f"cannot draw {n} from {len(examples)} examples")
    models = sorted(generations)
    if not models:
        raise ValueError("no generations supplied")
    if len(models) > len(_ALIASES):
        raise ValueError("too many models to alias")
    for model in models:
        if len(generations[model]) != len(examples):
            raise ValueError(f"generations for {model} do not align with examples")

    rng = random.Random(seed)
    indices = rng.sample(range(len(examples)), n)
    items = []
    key: dict[str, dict[str, str]] = {}
    for idx in indices:
        example = examples[idx]
        sample_id = _frame_sample_id(example)
        order = models[:]
        rng.shuffle(order)
        candidates = []
        aliases = {}
        for alias, model in zip(_ALIASES, order):
            candidates.append((alias, generations[model][idx]))
            aliases[alias] = model
        items.append(
            FrameItem(
                sample_id=sample_id,
                m_pre=example.m_pre,
                reference=example.r_nl,
                quadrant=example.quadrant or "",
                candidates=candidates,
            )
        )
        key[sample_id] = aliases
    return SampleFrame(items=items, key=key, seed=seed)


def write_frame(frame: SampleFrame, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for item in frame.items:
            fh.write(
                json.dumps(
                    {
                        "sample_id": item.sample_id,
                        "m_pre": item.m_pre,
                        "reference": item.reference,
                        "quadrant": item.quadrant,
                        "candidates": [
                            {"alias": a, "text": t} for a, t in item.candidates
                        ],
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
                + "\n"
            )


def write_frame_key(frame: SampleFrame, path: str | Path) -> None:
    """The alias-to-model key; keep this away from annotators."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample_id, aliases in frame.key.items():
            for alias, model in aliases.items():
                fh.write(
                    json.dumps(
                        {"sample_id": sample_id, "alias": alias, "model_id": model},
                        sort_keys=True,
                        separators=(",", ":"),
                    )
                    + "\n"
                )


def load_frame(path: str | Path, key_path: str | Path | None = None) -> SampleFrame:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            items.append(
                FrameItem(
                    sample_id=obj["sample_id"],
                    m_pre=obj["m_pre"],
                    reference=obj["reference"],
                    quadrant=obj.get("quadrant", ""),
                    candidates=[(c["alias"], c["text"]) for c in obj["candidates"]],
                )
            )
    key: dict[str, dict[str, str]] = {}
    if key_path is not None:
        key = load_frame_key(key_path)
    return SampleFrame(items=items, key=key, seed=0)


def load_frame_key(path: str | Path) -> dict[str, dict[str, str]]:
    key: dict[str, dict[str, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            key.setdefault(obj["sample_id"], {})[obj["alias"]] = obj["model_id"]
    return key


# ---------------------------------------------------------------------------
# Annotation records


class FeedbackType(Enum):
    SUGGESTION = "suggestion"
    CONCERN = "concern"
    CONFUSED_QUESTION = "confused_question"


class CommentCategory(Enum):
    LARGER_DEFECT = "larger_defect"
    VALIDATION = "validation"
    LOGICAL = "logical"
    INTERFACE = "interface"
    SOLUTION_APPROACH = "solution_approach"
    QUESTION = "question"
    DESIGN_DISCUSSION = "design_discussion"
    RESOURCE = "resource"
    DOCUMENTATION = "documentation"
    ORGANIZATION_OF_CODE = "organization_of_code"
    ALTERNATE_OUTPUT = "alternate_output"
    SUPPORT = "support"
    TIMING = "timing"
    NAMING_CONVENTION = "naming_convention"
    PRAISE = "praise"
    VISUAL_REPRESENTATION = "visual_representation"
    FALSE_POSITIVES = "false_positives"
    OTHERS = "others"


class InvalidAnnotationError(ValueError):
    """An annotation violates the conditional-field invariants."""


@dataclass
class AnnotationRecord:
    """One human judgment of one generated comment.

    feedback_type and category are present exactly when the comment was
    judged applicable.
    """

    sample_id: str
    annotator_id: str
    model_id: str
    semantic_equivalence: bool
    applicability: bool
    has_explanation: bool
    feedback_type: FeedbackType | None = None
    category: CommentCategory | None = None
    annotated_at: datetime | None = None

    def validate(self) -> None:
        if self.applicability:
            if self.feedback_type is None:
                raise InvalidAnnotationError(
                    f"{self.sample_id}: applicable comment needs a feedback_type"
                )
            if self.category is None:
                raise InvalidAnnotationError(
                    f"{self.sample_id}: applicable comment needs a category"
                )
        else:
            if self.feedback_type is not None or self.category is not None:
                raise InvalidAnnotationError(
                    f"{self.sample_id}: feedback_type/category set on a "
                    "non-applicable comment"
                )

    def to_dict(self) -> dict:
        d = {
            "sample_id": self.sample_id,
            "annotator_id": self.annotator_id,
            "model_id": self.model_id,
            "semantic_equivalence": self.semantic_equivalence,
            "applicability": self.applicability,
            "has_explanation": self.has_explanation,
            "feedback_type": self.feedback_type.value if self.feedback_type else None,
            "category": self.category.value if self.category else None,
        }
        if self.annotated_at is not None:
            d["annotated_at"] = format_timestamp(self.annotated_at)
        return d

    @classmethod
    def from_dict(cls, obj: Mapping) -> "AnnotationRecord":
        record = cls(
            sample_id=obj["sample_id"],
            annotator_id=obj.get("annotator_id", ""),
            model_id=obj.get("model_id", ""),
            semantic_equivalence=bool(obj["semantic_equivalence"]),
            applicability=bool(obj["applicability"]),
            has_explanation=bool(obj["has_explanation"]),
            feedback_type=FeedbackType(obj["feedback_type"])
            if obj.get("feedback_type")
            else None,
            category=CommentCategory(obj["category"]) if obj.get("category") else None,
            annotated_at=parse_timestamp(obj["annotated_at"])
            if obj.get("annotated_at")
            else None,
        )
        record.validate()
        return record


# ---------------------------------------------------------------------------
# Cohen's kappa


class UndefinedKappaError(ValueError):
    """Expected agreement is 1: kappa has no defined value."""


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed: float
    expected: float
    items: int


def cohen_kappa(labels_a: Sequence, labels_b: Sequence) -> KappaResult:
    """Chance-corrected agreement between two annotators.

    Expected agreement comes from the per-annotator marginal label
    distributions. Computed in exact rational arithmetic and converted to
    float at the end, so closed-form cases come out exact.
    """
    if len(labels_a) != len(labels_b):
        raise ValueError("label lists must have equal length")
    if not labels_a:
        raise ValueError("label lists must be non-empty")
    n = len(labels_a)
    observed = Fraction(sum(1 for a, b in zip(labels_a, labels_b) if a == b), n)
    count_a = Counter(labels_a)
    count_b = Counter(labels_b)
    expected = Fraction(
        sum(count_a[label] * count_b.get(label, 0) for label in count_a), n * n
    )
    if expected == 1:
        raise UndefinedKappaError(
            "both annotators are constant and identical; kappa is undefined"
        )
    kappa = (observed - expected) / (1 - expected)
    return KappaResult(float(kappa), float(observed), float(expected), n)


# ---------------------------------------------------------------------------
# Report aggregation


@dataclass
class ReportBundle:
    """Count tables for the quantitative write-up, one column per model."""

    models: list[str]
    applicability: dict[str, int]
    feedback: dict[str, dict[FeedbackType, int]]
    explanation: dict[str, int]
    categories: dict[str, dict[CommentCategory, int]]
    semantic_equivalence: dict[str, dict[str, tuple[int, int]]] = field(
        default_factory=dict
    )  # row label -> model -> (count, total)

    def applicability_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["measure"] + self.models)
        writer.writerow(["applicability"] + [self.applicability[m] for m in self.models])
        for ftype in FeedbackType:
            writer.writerow(
                [ftype.value] + [self.feedback[m][ftype] for m in self.models]
            )
        writer.writerow(["explanation"] + [self.explanation[m] for m in self.models])
        return out.getvalue()

    def categories_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["category"] + self.models)
        for category in CommentCategory:
            writer.writerow(
                [category.value] + [self.categories[m][category] for m in self.models]
            )
        return out.getvalue()

    def semantic_equivalence_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["partition"] + self.models)
        for row_label, per_model in self.semantic_equivalence.items():
            row = [row_label]
            for model in self.models:
                count, total = per_model[model]
                row.append(f"{count}/{total}")
            writer.writerow(row)
        return out.getvalue()

    def write_csvs(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "human_eval.csv").write_text(self.applicability_csv(), encoding="utf-8")
        (out / "categories.csv").write_text(self.categories_csv(), encoding="utf-8")
        if self.semantic_equivalence:
            (out / "semantic_equivalence.csv").write_text(
                self.semantic_equivalence_csv(), encoding="utf-8"
            )


def aggregate_report(
    annotations: Iterable[AnnotationRecord],
    quadrants: Mapping[str, ExperienceClass] | None = None,
) -> ReportBundle:
    """Fold adjudicated annotations into per-model count tables.

    Expects exactly one final record per sample and model; duplicates mean
    adjudication never finished and are an error. With `quadrants`
    (sample_id to ownership class) the semantic-equivalence counts are
    also broken down per partition row.
    """
    records = list(annotations)
    seen = set()
    duplicates = set()
    for record in records:
        record.validate()
        key = (record.sample_id, record.model_id)
        if key in seen:
            duplicates.add(record.sample_id)
        seen.add(key)
    if duplicates:
        raise ValueError(f"unadjudicated duplicates for samples {sorted(duplicates)}")

    models = sorted({r.model_id for r in records})
    applicability = {m: 0 for m in models}
    feedback = {m: {f: 0 for f in FeedbackType} for m in models}
    explanation = {m: 0 for m in models}
    categories = {m: {c: 0 for c in CommentCategory} for m in models}
    for record in records:
        m = record.model_id
        if record.applicability:
            applicability[m] += 1
            feedback[m][record.feedback_type] += 1
            categories[m][record.category] += 1
            if record.has_explanation:
                explanation[m] += 1

    selectors = {
        "all": lambda q: True,
        "mrma": lambda q: q.major_author and q.major_reviewer,
        "mr": lambda q: q.major_reviewer,
        "ma": lambda q: q.major_author,
    }
    semantic = {}
    if quadrants is not None:
        for label, selector in selectors.items():
            per_model = {}
            for model in models:
                rows = [
                    r
                    for r in records
                    if r.model_id == model
                    and r.sample_id in quadrants
                    and selector(quadrants[r.sample_id])
                ]
                per_model[model] = (
                    sum(1 for r in rows if r.semantic_equivalence),
                    len(rows),
                )
            semantic[label] = per_model
    else:
        semantic["all"] = {
            m: (
                sum(1 for r in records if r.model_id == m and r.semantic_equivalence),
                sum(1 for r in records if r.model_id == m),
            )
            for m in models
        }

    return ReportBundle(
        models=models,
        applicability=applicability,
        feedback=feedback,
        explanation=explanation,
        categories=categories,
        semantic_equivalence=semantic,
    )
