"""Forge metadata mining: review comments, commit and PR event counts.

All network access goes through a pluggable transport so the whole
pipeline can run offline against recorded fixtures. Responses are cached
on disk and never expire by default: the mined facts are historical and
immutable. Counting operations are pure and oracle-checkable.
"""

from __future__ import annotations

import json
import os
import threading
import time as _time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence

import requests

from .model import format_timestamp, parse_timestamp


class TransportError(RuntimeError):
    """Network failure that survived the retry budget."""


class AmbiguousMatchError(ValueError):
    """More than one candidate comment has the same normalized body."""

    def __init__(self, comment_ids: Sequence[int]):
        self.comment_ids = list(comment_ids)
        super().__init__(f"ambiguous comment match: ids {self.comment_ids}")


class FixtureMissingError(FileNotFoundError):
    """A fixture playback request had no recorded response."""


@dataclass
class FetchResult:
    """Outcome of looking up one review comment on the forge."""

    found: bool
    reviewer: str = ""
    created_at: datetime | None = None

    @classmethod
    def deleted(cls) -> "FetchResult":
        return cls(found=False)

    @classmethod
    def of(cls, reviewer: str, created_at: datetime) -> "FetchResult":
        if not reviewer:
            raise ValueError("Found result requires a non-empty reviewer")
        return cls(found=True, reviewer=reviewer, created_at=created_at)


# ---------------------------------------------------------------------------
# Rate budget


@dataclass
class RateBudget:
    """Request allowance with a reset horizon and an in-flight cap.

    `acquire` blocks (via the injectable sleep) until a request may be
    issued; no caller may issue a request without holding an acquire.
    """

    limit: int = 5000
    remaining: int = 5000
    reset_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc) + timedelta(hours=1)
    )
    max_in_flight: int = 4
    clock: Callable[[], datetime] = field(
        default=lambda: datetime.now(timezone.utc), repr=False
    )
    sleep: Callable[[float], None] = field(default=_time.sleep, repr=False)

    def __post_init__(self):
        self._slots = threading.BoundedSemaphore(self.max_in_flight)
        self._lock = threading.Lock()

    def acquire(self) -> None:
        self._slots.acquire()
        try:
            with self._lock:
                now = self.clock()
                if self.remaining <= 0:
                    if now < self.reset_at:
                        self.sleep((self.reset_at - now).total_seconds())
                    self.remaining = self.limit
                    self.reset_at = self.clock() + timedelta(hours=1)
                self.remaining -= 1
        except BaseException:
            self._slots.release()
            raise

    def release(self) -> None:
        self._slots.release()

    def update(self, remaining: int, reset_at: datetime) -> None:
        with self._lock:
            self.remaining = remaining
            self.reset_at = reset_at


# ---------------------------------------------------------------------------
# Response cache


def _sanitize_repo(repo: str) -> str:
    return repo.replace("/", "@")


class ResponseCache:
    """Disk cache of raw response bodies keyed by (kind, repo, identifier).

    Entries never expire; `invalidate` removes one entry explicitly.
    Concurrent readers are safe; writers go through an atomic rename.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, kind: str, repo: str, identifier: str) -> Path:
        return self.root / kind / _sanitize_repo(repo) / str(identifier)

    def get(self, kind: str, repo: str, identifier: str) -> bytes | None:
        path = self._path(kind, repo, identifier)
        if not path.exists():
            return None
        return path.read_bytes()

    def put(self, kind: str, repo: str, identifier: str, body: bytes) -> None:
        path = self._path(kind, repo, identifier)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(body)
        os.replace(tmp, path)

    def invalidate(self, kind: str, repo: str, identifier: str) -> bool:
        path = self._path(kind, repo, identifier)
        if path.exists():
            path.unlink()
            return True
        return False


class NullCache(ResponseCache):
    """Cache that stores nothing (used when no cache dir is configured)."""

    def __init__(self):
        pass

    def get(self, kind, repo, identifier):
        return None

    def put(self, kind, repo, identifier, body):
        pass

    def invalidate(self, kind, repo, identifier):
        return False


# ---------------------------------------------------------------------------
# Transports


@dataclass
class TransportResponse:
    status: int
    body: bytes


class FixtureTransport:
    """Plays back recorded response bodies from a directory tree.

    Files live under `<root>/<kind>/<owner>@<name>/<identifier>` and hold
    the raw response body. A body of GitHub's not-found shape counts as a
    404; a missing file is an error, never silently a 404.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.requests_made = 0

    def get(self, kind: str, repo: str, identifier: str) -> TransportResponse:
        self.requests_made += 1
        path = self.root / kind / _sanitize_repo(repo) / str(identifier)
        if not path.exists():
            raise FixtureMissingError(f"no fixture recorded at {path}")
        body = path.read_bytes()
        status = 200
        try:
            obj = json.loads(body)
            if isinstance(obj, dict) and obj.get("message") == "Not Found":
                status = 404
        except json.JSONDecodeError:
            pass
        return TransportResponse(status, body)


class LiveTransport:
    """GitHub REST transport. Token comes from GITHUB_TOKEN, never a flag."""

    BASE_URL = "https://api.github.com"

    _PATHS = {
        "pull_comments": "/repos/{repo}/pulls/{identifier}/comments",
        "pull": "/repos/{repo}/pulls/{identifier}",
    }

    def __init__(self, budget: RateBudget | None = None, base_url: str | None = None):
        token = os.environ.get("GITHUB_TOKEN", "")
        self._headers = {"Accept": "application/vnd.github+json"}
        if token:
            self._headers["Authorization"] = f"Bearer {token}"
        self.budget = budget or RateBudget()
        self.base_url = base_url or self.BASE_URL
        self._session = requests.Session()

    def get(self, kind: str, repo: str, identifier: str) -> TransportResponse:
        if kind not in self._PATHS:
            raise ValueError(f"unknown endpoint kind {kind!r}")
        url = self.base_url + self._PATHS[kind].format(repo=repo, identifier=identifier)
        merged: list | None = [] if kind == "pull_comments" else None
        # Budget acquisition is the caller's responsibility (fetch_review_meta
        # holds it around the whole call); here we only track the headers.
        while url:
            resp = self._session.get(url, headers=self._headers, params={"per_page": 100}, timeout=30)
            self._note_rate(resp)
            if resp.status_code == 404:
                return TransportResponse(404, resp.content)
            if resp.status_code != 200:
                raise TransportError(f"GET {url} -> {resp.status_code}")
            if merged is None:
                return TransportResponse(200, resp.content)
            merged.extend(resp.json())
            url = resp.links.get("next", {}).get("url")
        return TransportResponse(200, json.dumps(merged).encode("utf-8"))

    def _note_rate(self, resp: requests.Response) -> None:
        remaining = resp.headers.get("X-RateLimit-Remaining")
        reset = resp.headers.get("X-RateLimit-Reset")
        if remaining is not None and reset is not None:
            self.budget.update(
                int(remaining),
                datetime.fromtimestamp(int(reset), tz=timezone.utc),
            )


# ---------------------------------------------------------------------------
# Comment matching and metadata fetch


def normalize_body(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n").strip()


def match_review_comment(
    candidates: Iterable[tuple[int, str, str, datetime]], target_body: str
):
    """Find the unique candidate whose normalized body equals the target's.

    Returns the matching (comment_id, body, author, created_at) tuple, or
    None when nothing matches. Multiple matches raise AmbiguousMatchError.
    """
    if not target_body:
        raise ValueError("target_body must be non-empty")
    wanted = normalize_body(target_body)
    matches = [c for c in candidates if normalize_body(c[1]) == wanted]
    if not matches:
        return None
    if len(matches) > 1:
        raise AmbiguousMatchError([c[0] for c in matches])
    return matches[0]


def fetch_review_meta(
    repo: str,
    pr_id: int,
    target_body: str,
    budget: RateBudget,
    cache: ResponseCache,
    transport,
    max_retries: int = 3,
    backoff: Callable[[float], None] = _time.sleep,
) -> FetchResult:
    """Resolve the reviewer and comment time for one dataset example.

    Consults the cache first; a PR that no longer exists (404) or whose
    matching comment is gone maps to Deleted. Transient transport failures
    are retried with exponential backoff before giving up.
    """
    kind = "pull_comments"
    body = cache.get(kind, repo, str(pr_id))
    status = None
    if body is not None:
        try:
            obj = json.loads(body)
            status = 404 if isinstance(obj, dict) and obj.get("message") == "Not Found" else 200
        except json.JSONDecodeError:
            status = 200
    else:
        last_error = None
        for attempt in range(max_retries):
            budget.acquire()
            try:
                resp = transport.get(kind, repo, str(pr_id))
            except FixtureMissingError:
                raise
            except TransportError as exc:
                last_error = exc
                backoff(2**attempt)
                continue
            finally:
                budget.release()
            body, status = resp.body, resp.status
            break
        else:
            raise TransportError(f"{repo}#{pr_id}: {last_error}")
        cache.put(kind, repo, str(pr_id), body)

    if status == 404:
        return FetchResult.deleted()

    comments = json.loads(body)
    candidates = [
        (
            c["id"],
            c.get("body", ""),
            (c.get("user") or {}).get("login", ""),
            parse_timestamp(c["created_at"]),
        )
        for c in comments
    ]
    match = match_review_comment(candidates, target_body)
    if match is None:
        return FetchResult.deleted()
    _, _, author, created_at = match
    return FetchResult.of(author, created_at)


# ---------------------------------------------------------------------------
# Commit and PR event histories


@dataclass
class CommitHistory:
    """All commits of one repository, ordered by commit time."""

    repo: str
    commits: list[tuple[str, datetime]]

    def __post_init__(self):
        times = [t for _, t in self.commits]
        if any(a > b for a, b in zip(times, times[1:])):
            self.commits = sorted(self.commits, key=lambda c: c[1])


@dataclass
class PrParticipation:
    """Closed-review PR events of one repository: who commented on what, when."""

    repo: str
    prs: list[tuple[int, datetime, frozenset[str]]]

    def submitted_at(self, pr_number: int) -> datetime | None:
        for number, when, _ in self.prs:
            if number == pr_number:
                return when
        return None


def count_commits(
    history: CommitHistory, author: str, cutoff: datetime
) -> tuple[int, int]:
    """Commits by `author` and total commits strictly before `cutoff`.

    The cutoff is exclusive so a PR's own commits never count toward the
    reviewer's prior experience.
    """
    alpha = 0
    total = 0
    for who, when in history.commits:
        if when >= cutoff:
            break
        total += 1
        if who == author:
            alpha += 1
    return alpha, total


def count_prs(
    part: PrParticipation, reviewer: str, cutoff: datetime
) -> tuple[int, int]:
    """Reviewed-by-`reviewer` and total closed-review PRs strictly before `cutoff`."""
    r = 0
    rho = 0
    for _, when, participants in part.prs:
        if when >= cutoff:
            continue
        rho += 1
        if reviewer in participants:
            r += 1
    return r, rho


# ---------------------------------------------------------------------------
# History sources


def load_history_file(path: str | Path) -> tuple[CommitHistory, PrParticipation]:
    """Load one repository's recorded commit/PR event history.

    Format: {"repo": "owner/name",
             "commits": [[author, iso_time], ...],
             "prs": [[number, iso_time, [participant, ...]], ...]}
    """
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    repo = obj["repo"]
    commits = [(a, parse_timestamp(t)) for a, t in obj.get("commits", [])]
    prs = [
        (int(n), parse_timestamp(t), frozenset(p))
        for n, t, p in obj.get("prs", [])
    ]
    return CommitHistory(repo, commits), PrParticipation(repo, prs)


def load_history_dir(root: str | Path) -> dict[str, tuple[CommitHistory, PrParticipation]]:
    histories = {}
    for path in sorted(Path(root).glob("*.json")):
        history, participation = load_history_file(path)
        histories[history.repo] = (history, participation)
    return histories


def dump_history_file(
    path: str | Path, history: CommitHistory, participation: PrParticipation
) -> None:
    obj = {
        "repo": history.repo,
        "commits": [[a, format_timestamp(t)] for a, t in history.commits],
        "prs": [
            [n, format_timestamp(t), sorted(p)] for n, t, p in participation.prs
        ],
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def history_from_git_log(repo: str, clone_path: str | Path) -> CommitHistory:
    """Build a commit history from a local clone (no cloning is automated).

    Commit author identity is the local `name <email>` pair; forge logins
    are only available through recorded histories.
    """
    import subprocess

    out = subprocess.run(
        ["git", "log", "--reverse", "--format=%an <%ae>|%aI"],
        cwd=str(clone_path),
        capture_output=True,
        text=True,
        check=True,
    ).stdout
    commits = []
    for line in out.splitlines():
        if not line.strip():
            continue
        identity, _, stamp = line.rpartition("|")
        commits.append((identity, parse_timestamp(stamp)))
    return CommitHistory(repo, commits)
