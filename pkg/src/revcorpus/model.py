"""Canonical data model and line-delimited interchange format.

Every pipeline stage reads and writes the same record format: one JSON
object per line, keys in alphabetical order, UTF-8, newlines escaped by
JSON string encoding. Timestamps are normalized to UTC ISO-8601 with
seconds precision so temporal cutoffs compare cleanly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator


class ParseError(ValueError):
    """A record line could not be parsed into a ReviewExample."""


class DatasetSplit(Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp (zoned or 'Z'-suffixed) to aware UTC."""
    raw = value.replace("Z", "+00:00")
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ParseError(f"bad timestamp {value!r}: {exc}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    """Canonical UTC ISO-8601 form with seconds precision and 'Z' suffix."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class ReviewExample:
    """One (pre-review code, reviewer comment, post-review code) triplet.

    `reviewer` is empty and `created_at` is None until review metadata has
    been mined. `aco`/`rso`/`quadrant` are attached by the experience stage
    and stay None before it.
    """

    repo: str
    pr_id: int
    m_pre: str
    r_nl: str
    comment_id: int = 0
    reviewer: str = ""
    created_at: datetime | None = None
    m_post: str = ""
    language: str = ""
    split: DatasetSplit = DatasetSplit.TRAIN
    aco: float | None = None
    rso: float | None = None
    quadrant: str | None = None

    @property
    def key(self) -> tuple[str, int, int]:
        """Identity of the example within a corpus."""
        return (self.repo, self.pr_id, self.comment_id)

    def validate(self) -> None:
        if not self.repo:
            raise ParseError("field repo must be non-empty")
        if not isinstance(self.pr_id, int) or self.pr_id <= 0:
            raise ParseError("field pr_id must be a positive integer")
        if not self.m_pre:
            raise ParseError("field m_pre must be non-empty")

    def with_meta(self, reviewer: str, created_at: datetime) -> "ReviewExample":
        return replace(self, reviewer=reviewer, created_at=created_at)


_REQUIRED_KEYS = ("repo", "pr_id", "m_pre", "r_nl")

_STRING_KEYS = ("repo", "m_pre", "r_nl", "reviewer", "m_post", "language")
_INT_KEYS = ("pr_id", "comment_id")


def parse_example(line: str) -> ReviewExample:
    """Parse one record line into a ReviewExample.

    Unknown keys are ignored. A missing required key or a wrongly-typed
    value raises ParseError naming the offending key.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not a valid record line: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError("record line must be a JSON object")

    for key in _REQUIRED_KEYS:
        if key not in obj:
            raise ParseError(f"missing field {key}")
    for key in _STRING_KEYS:
        if key in obj and not isinstance(obj[key], str):
            raise ParseError(f"field {key} must be a string")
    for key in _INT_KEYS:
        if key in obj and (isinstance(obj[key], bool) or not isinstance(obj[key], int)):
            raise ParseError(f"field {key} must be an integer")

    created_at = None
    if obj.get("created_at"):
        if not isinstance(obj["created_at"], str):
            raise ParseError("field created_at must be a string")
        created_at = parse_timestamp(obj["created_at"])

    split_raw = obj.get("split", DatasetSplit.TRAIN.value)
    try:
        split = DatasetSplit(split_raw)
    except ValueError:
        raise ParseError(f"field split has unknown value {split_raw!r}") from None

    for key in ("aco", "rso"):
        if key in obj and not isinstance(obj[key], (int, float)):
            raise ParseError(f"field {key} must be a number")

    example = ReviewExample(
        repo=obj["repo"],
        pr_id=obj["pr_id"],
        m_pre=obj["m_pre"],
        r_nl=obj["r_nl"],
        comment_id=obj.get("comment_id", 0),
        reviewer=obj.get("reviewer", ""),
        created_at=created_at,
        m_post=obj.get("m_post", ""),
        language=obj.get("language", ""),
        split=split,
        aco=float(obj["aco"]) if "aco" in obj else None,
        rso=float(obj["rso"]) if "rso" in obj else None,
        quadrant=obj.get("quadrant"),
    )
    example.validate()
    return example


def serialize_example(e: ReviewExample) -> str:
    """Serialize to one canonical line: alphabetical keys, UTF-8, no raw newlines."""
    d: dict = {
        "repo": e.repo,
        "pr_id": e.pr_id,
        "comment_id": e.comment_id,
        "reviewer": e.reviewer,
        "m_pre": e.m_pre,
        "r_nl": e.r_nl,
        "m_post": e.m_post,
        "language": e.language,
        "split": e.split.value,
    }
    if e.created_at is not None:
        d["created_at"] = format_timestamp(e.created_at)
    if e.aco is not None:
        d["aco"] = e.aco
    if e.rso is not None:
        d["rso"] = e.rso
    if e.quadrant is not None:
        d["quadrant"] = e.quadrant
    return json.dumps(d, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def read_corpus(path: str | Path) -> list[ReviewExample]:
    return list(iter_corpus(path))


def iter_corpus(path: str | Path) -> Iterator[ReviewExample]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                yield parse_example(line)
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None


def write_corpus(path: str | Path, examples: Iterable[ReviewExample]) -> tuple[int, str]:
    """Write examples in record format; returns (count, sha256 of the bytes)."""
    digest = hashlib.sha256()
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in examples:
            line = serialize_example(e) + "\n"
            fh.write(line)
            digest.update(line.encode("utf-8"))
            count += 1
    return count, digest.hexdigest()


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


TOOL_VERSION = "0.1.0"


@dataclass
class CorpusManifest:
    """Accounting for a set of emitted corpus files."""

    counts: dict[str, int] = field(default_factory=dict)
    checksums: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    tool_version: str = TOOL_VERSION
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "counts": self.counts,
                "checksums": self.checksums,
                "seed": self.seed,
                "tool_version": self.tool_version,
                "config": self.config,
            },
            sort_keys=True,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CorpusManifest":
        obj = json.loads(text)
        return cls(
            counts=obj.get("counts", {}),
            checksums=obj.get("checksums", {}),
            seed=obj.get("seed"),
            tool_version=obj.get("tool_version", TOOL_VERSION),
            config=obj.get("config", {}),
        )

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "CorpusManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def verify_checksums(self, directory: str | Path) -> list[str]:
        """Return the names whose on-disk checksum no longer matches."""
        bad = []
        for name, expected in self.checksums.items():
            target = Path(directory) / name
            if not target.exists() or file_sha256(target) != expected:
                bad.append(name)
        return bad
