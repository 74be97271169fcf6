"""Experience-aware training-set oversampling and split emission.

Replication is by exact duplication: a factor of k means each target
example appears k times in the training stream (k-1 extra copies). The
default k=4 realizes the intended 2:3 target-to-rest ratio when the
target class is the smallest (14%) training partition; see
achieved_ratio for the arithmetic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .experience import ExperienceClass, TargetClass, in_target
from .model import CorpusManifest, ReviewExample, write_corpus

DEFAULT_FACTOR = 4


@dataclass
class OversamplePlan:
    """What to replicate, how much, and how to order the result.

    Plans apply to the training split only; validation and test are never
    touched by any plan.
    """

    target: TargetClass
    factor: int = DEFAULT_FACTOR
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.factor < 1:
            raise ValueError(f"factor must be >= 1, got {self.factor}")

    def describe(self) -> dict:
        return {
            "target": self.target.value,
            "factor": self.factor,
            "seed": self.seed,
            "shuffle": self.shuffle,
        }


def achieved_ratio(p: float, k: int) -> float:
    """Target-to-rest multiset ratio after oversampling, k*p / (1-p).

    `p` is the fraction of training examples in the target class before
    oversampling. At p=0.14 and k=4 this is ~0.651, i.e. about 2:3.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must be in [0,1), got {p}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return k * p / (1.0 - p)


def oversample(train: Sequence[ReviewExample], plan: OversamplePlan) -> list[ReviewExample]:
    """Replicate target-class examples `plan.factor` times, others once.

    With shuffle on, the output order is a seeded deterministic shuffle;
    otherwise the originals keep input order and all copies follow.
    """
    if not train:
        raise ValueError("training set is empty")
    out: list[ReviewExample] = []
    copies: list[ReviewExample] = []
    for example in train:
        if example.quadrant is None:
            raise ValueError(f"example {example.key} has no quadrant")
        out.append(example)
        if in_target(ExperienceClass(example.quadrant), plan.target):
            copies.extend([example] * (plan.factor - 1))
    out.extend(copies)
    if plan.shuffle:
        random.Random(plan.seed).shuffle(out)
    return out


def emit_splits(
    train: Sequence[ReviewExample],
    val: Sequence[ReviewExample],
    test: Sequence[ReviewExample],
    out_dir: str | Path,
    seed: int | None = None,
    config: dict | None = None,
) -> CorpusManifest:
    """Write the three split files plus their manifest.

    Validation and test must be disjoint by example identity; the training
    stream may contain duplicates by design. Validation/test bytes depend
    only on their inputs, never on any oversample plan.
    """
    val_keys = {e.key for e in val}
    overlap = val_keys & {e.key for e in test}
    if overlap:
        raise ValueError(f"validation/test overlap on {sorted(overlap)[:5]}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = CorpusManifest(seed=seed, config=config or {})
    for name, examples in (("train", train), ("validation", val), ("test", test)):
        filename = f"{name}.jsonl"
        count, checksum = write_corpus(out / filename, examples)
        manifest.counts[name] = count
        manifest.checksums[filename] = checksum
    manifest.write(out / "manifest.json")
    return manifest
