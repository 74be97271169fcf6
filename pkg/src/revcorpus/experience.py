"""Reviewer ownership scores, experience quadrants, partition statistics.

Ownership is measured at repository level, per example, at the example's
PR submission time: the same reviewer may land in different quadrants
across examples as their history grows.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .miner import CommitHistory, PrParticipation, count_commits, count_prs
from .model import DatasetSplit, ReviewExample

DEFAULT_THRESHOLD = 0.05


@dataclass(frozen=True)
class OwnershipScores:
    aco: float
    rso: float

    def __post_init__(self):
        for name, value in (("aco", self.aco), ("rso", self.rso)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {value}")


class ExperienceClass(Enum):
    MAJOR_AUTHOR_MAJOR_REVIEWER = "major_author_major_reviewer"
    MAJOR_AUTHOR_MINOR_REVIEWER = "major_author_minor_reviewer"
    MINOR_AUTHOR_MAJOR_REVIEWER = "minor_author_major_reviewer"
    MINOR_AUTHOR_MINOR_REVIEWER = "minor_author_minor_reviewer"

    @property
    def major_author(self) -> bool:
        return self.value.startswith("major_author")

    @property
    def major_reviewer(self) -> bool:
        return self.value.endswith("major_reviewer")


class TargetClass(Enum):
    MRMA = "mrma"
    MR = "mr"
    MA = "ma"


def compute_aco(alpha: int, c_total: int) -> float:
    """Authored-commit share; 0 when the repository has no prior commits."""
    if alpha > c_total:
        raise ValueError(f"alpha ({alpha}) exceeds total commits ({c_total})")
    if c_total == 0:
        return 0.0
    return alpha / c_total


def compute_rso(r: int, rho: int) -> float:
    """Reviewed-PR share; 0 when the repository has no prior closed reviews."""
    if r > rho:
        raise ValueError(f"r ({r}) exceeds total reviews ({rho})")
    if rho == 0:
        return 0.0
    return r / rho


def classify(scores: OwnershipScores, threshold: float = DEFAULT_THRESHOLD) -> ExperienceClass:
    """Place a reviewer in a quadrant; both thresholds are inclusive."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0,1], got {threshold}")
    major_author = scores.aco >= threshold
    major_reviewer = scores.rso >= threshold
    if major_author and major_reviewer:
        return ExperienceClass.MAJOR_AUTHOR_MAJOR_REVIEWER
    if major_author:
        return ExperienceClass.MAJOR_AUTHOR_MINOR_REVIEWER
    if major_reviewer:
        return ExperienceClass.MINOR_AUTHOR_MAJOR_REVIEWER
    return ExperienceClass.MINOR_AUTHOR_MINOR_REVIEWER


def in_target(cls: ExperienceClass, target: TargetClass) -> bool:
    if target is TargetClass.MRMA:
        return cls.major_author and cls.major_reviewer
    if target is TargetClass.MR:
        return cls.major_reviewer
    return cls.major_author


@dataclass
class PartitionStats:
    """Integer quadrant percentages per split (largest-remainder rounding)."""

    percentages: dict[DatasetSplit, dict[ExperienceClass, int]]

    def to_csv(self) -> str:
        """Author-axis rows by reviewer-axis/split columns, like the source table."""
        splits = list(self.percentages)
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        header = ["author"]
        for axis in ("major_reviewer", "minor_reviewer"):
            header.extend(f"{axis}_{s.value}" for s in splits)
        writer.writerow(header)
        for author_major, label in ((True, "major_author"), (False, "minor_author")):
            row = [label]
            for reviewer_major in (True, False):
                for split in splits:
                    quadrant = _quadrant_of(author_major, reviewer_major)
                    row.append(self.percentages[split][quadrant])
            writer.writerow(row)
        return out.getvalue()


def _quadrant_of(major_author: bool, major_reviewer: bool) -> ExperienceClass:
    for cls in ExperienceClass:
        if cls.major_author == major_author and cls.major_reviewer == major_reviewer:
            return cls
    raise AssertionError("unreachable")


def _largest_remainder(counts: Mapping[ExperienceClass, int], total: int) -> dict[ExperienceClass, int]:
    exact = {cls: 100.0 * counts.get(cls, 0) / total for cls in ExperienceClass}
    floored = {cls: int(exact[cls]) for cls in ExperienceClass}
    leftover = 100 - sum(floored.values())
    by_remainder = sorted(
        ExperienceClass, key=lambda cls: (exact[cls] - floored[cls], cls.value), reverse=True
    )
    for cls in by_remainder[:leftover]:
        floored[cls] += 1
    return floored


def partition_stats(
    examples: Sequence[ReviewExample],
    splits: Sequence[DatasetSplit] | None = None,
) -> PartitionStats:
    """Quadrant percentage distribution per split.

    Every example must carry a quadrant. With `splits` unset, the splits
    present in the data are reported; naming a split explicitly makes its
    emptiness an error.
    """
    if not examples:
        raise ValueError("no examples to summarize")
    grouped: dict[DatasetSplit, dict[ExperienceClass, int]] = {}
    for e in examples:
        if e.quadrant is None:
            raise ValueError(f"example {e.key} has no quadrant")
        cls = ExperienceClass(e.quadrant)
        grouped.setdefault(e.split, {}).setdefault(cls, 0)
        grouped[e.split][cls] += 1

    wanted = list(splits) if splits is not None else [s for s in DatasetSplit if s in grouped]
    percentages = {}
    for split in wanted:
        counts = grouped.get(split, {})
        total = sum(counts.values())
        if total == 0:
            raise ValueError(f"split {split.value} is empty")
        percentages[split] = _largest_remainder(counts, total)
    return PartitionStats(percentages)


def score_example(
    example: ReviewExample,
    history: CommitHistory,
    participation: PrParticipation,
    threshold: float = DEFAULT_THRESHOLD,
) -> ReviewExample:
    """Attach ACO/RSO and the quadrant at the example's PR submission time.

    The cutoff is the PR's recorded submission instant. When the PR is
    absent from the recorded history the comment time stands in; events
    landing between submission and comment then count, which is accepted
    as mining noise.
    """
    if not example.reviewer:
        raise ValueError(f"example {example.key} has no reviewer (run mining first)")
    cutoff = participation.submitted_at(example.pr_id) or example.created_at
    if cutoff is None:
        raise ValueError(f"example {example.key} has no usable cutoff time")
    alpha, c_total = count_commits(history, example.reviewer, cutoff)
    r, rho = count_prs(participation, example.reviewer, cutoff)
    scores = OwnershipScores(compute_aco(alpha, c_total), compute_rso(r, rho))
    quadrant = classify(scores, threshold)
    return replace(example, aco=scores.aco, rso=scores.rso, quadrant=quadrant.value)


def classify_corpus(
    examples: Iterable[ReviewExample],
    histories: Mapping[str, tuple[CommitHistory, PrParticipation]],
    threshold: float = DEFAULT_THRESHOLD,
) -> list[ReviewExample]:
    out = []
    for example in examples:
        if example.repo not in histories:
            raise KeyError(f"no recorded history for repository {example.repo}")
        history, participation = histories[example.repo]
        out.append(score_example(example, history, participation, threshold))
    return out
