"""Noise filters and the removal-accounting ledger.

Three filters run in a fixed precedence so every removed example lands in
exactly one ledger bucket: deleted review first, then bot reviewer, then
comment with no natural language left after stripping code.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .miner import FetchResult
from .model import DatasetSplit, ReviewExample


class BotRegistry:
    """Known-bot usernames plus suffix heuristics.

    The suffix rules (username ends with "bot" or "[bot]") fire unless the
    username is explicitly allow-listed with a leading "!" in the registry
    file. Membership tests are case-insensitive and deterministic.
    """

    def __init__(self, known: Iterable[str] = (), allowed: Iterable[str] = ()):
        self.known = {name.lower() for name in known}
        self.allowed = {name.lower() for name in allowed}

    @classmethod
    def from_file(cls, path: str | Path) -> "BotRegistry":
        """One username per line; '#' comments; '!' prefix allow-lists a name."""
        known, allowed = [], []
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("!"):
                allowed.append(line[1:].strip())
            else:
                known.append(line)
        return cls(known, allowed)

    @classmethod
    def bundled(cls) -> "BotRegistry":
        """The registry shipped with the package (user-replaceable)."""
        text = resources.files("revcorpus").joinpath("data/bots.txt").read_text("utf-8")
        known, allowed = [], []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("!"):
                allowed.append(line[1:].strip())
            else:
                known.append(line)
        return cls(known, allowed)


def is_bot(username: str, registry: BotRegistry) -> bool:
    """True iff the username looks like or is known to be a bot account."""
    if not username:
        raise ValueError("username must be non-empty")
    name = username.lower()
    if name in registry.allowed:
        return False
    if name.endswith("bot") or name.endswith("[bot]"):
        return True
    return name in registry.known


_FENCED_BLOCK = re.compile(r"```.*?```", re.DOTALL)
_DANGLING_FENCE = re.compile(r"```.*\Z", re.DOTALL)
_INLINE_CODE = re.compile(r"`[^`]*`")
_URL = re.compile(r"https?://\S+")


def has_natural_language(r_nl: str) -> bool:
    """True iff something alphabetic survives stripping code and links.

    Strips fenced code blocks (including ```suggestion blocks), inline
    code spans, URLs, and whitespace; a bare link or a pure code
    suggestion carries no reviewable prose.
    """
    text = _FENCED_BLOCK.sub(" ", r_nl)
    text = _DANGLING_FENCE.sub(" ", text)
    text = _INLINE_CODE.sub(" ", text)
    text = _URL.sub(" ", text)
    return any(ch.isalpha() for ch in text)


@dataclass
class SplitCounts:
    original: int = 0
    deleted: int = 0
    bots: int = 0
    code_only: int = 0
    final: int = 0
    bot_accounts: set[str] = field(default_factory=set)

    def conserved(self) -> bool:
        return self.original == self.final + self.deleted + self.bots + self.code_only


@dataclass
class CurationLedger:
    """Exact per-split accounting of every removal."""

    splits: dict[DatasetSplit, SplitCounts] = field(default_factory=dict)

    def bucket(self, split: DatasetSplit) -> SplitCounts:
        return self.splits.setdefault(split, SplitCounts())

    def check(self) -> None:
        for split, counts in self.splits.items():
            if not counts.conserved():
                raise AssertionError(
                    f"ledger broken for {split.value}: "
                    f"{counts.original} != {counts.final} + removals"
                )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["split", "original", "deleted", "bots", "code_only", "final"])
        for split in DatasetSplit:
            if split not in self.splits:
                continue
            c = self.splits[split]
            writer.writerow([split.value, c.original, c.deleted, c.bots, c.code_only, c.final])
        return out.getvalue()

    def bot_census_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["split", "bot_accounts", "accounts"])
        for split in DatasetSplit:
            if split not in self.splits:
                continue
            accounts = sorted(self.splits[split].bot_accounts)
            writer.writerow([split.value, len(accounts), ";".join(accounts)])
        return out.getvalue()


def curate(
    examples: Iterable[ReviewExample],
    fetch_results: Mapping[tuple[str, int, int], FetchResult],
    registry: BotRegistry,
) -> tuple[list[ReviewExample], CurationLedger]:
    """Apply the three noise filters and account for every removal.

    Every example must have a FetchResult keyed by (repo, pr_id,
    comment_id). Kept examples come back with reviewer and created_at
    populated from the fetch.
    """
    kept: list[ReviewExample] = []
    ledger = CurationLedger()
    for example in examples:
        counts = ledger.bucket(example.split)
        counts.original += 1
        try:
            result = fetch_results[example.key]
        except KeyError:
            raise KeyError(f"no fetch result for example {example.key}") from None
        if not result.found:
            counts.deleted += 1
            continue
        if is_bot(result.reviewer, registry):
            counts.bots += 1
            counts.bot_accounts.add(result.reviewer)
            continue
        if not has_natural_language(example.r_nl):
            counts.code_only += 1
            continue
        counts.final += 1
        kept.append(example.with_meta(result.reviewer, result.created_at))
    ledger.check()
    return kept, ledger
