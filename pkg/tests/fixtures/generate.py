"""Regenerate every test fixture deterministically.

Run from the repository root:

    python3 tests/fixtures/generate.py

The fixture world: two repositories with recorded commit/PR histories,
a 20-example raw corpus whose curation outcome is known by hand, and
recorded review-comment responses for every referenced pull request.

Planned curation outcome per split:

    train       12 original = 2 deleted + 2 bots + 2 code-only + 6 kept
    validation   4 original = 0 deleted + 0 bots + 1 code-only + 3 kept
    test         4 original = 1 deleted + 0 bots + 0 code-only + 3 kept

Planned ownership classes of the kept examples (at their PR cutoffs):

    alice  major author  (10/100 commits)  major reviewer (10+/40+ PRs)
    bob    minor author  (0 commits)       major reviewer (4+/40+ PRs)
    carol  major author  (10/100 commits)  minor reviewer (1/40+ PRs)
    dave   minor author  (1/100 commits)   minor reviewer (1/40+ PRs)
    erin   major author  (5/50 commits)    major reviewer (6+/20+ PRs)
"""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

HERE = Path(__file__).parent

WIDGET = "acme/widget"
GADGET = "acme/gadget"


def iso(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def day(base: str, offset: int) -> datetime:
    return datetime.fromisoformat(base).replace(tzinfo=timezone.utc) + timedelta(
        days=offset
    )


# ---------------------------------------------------------------------------
# Histories


def widget_history() -> dict:
    commits = []
    authors = ["alice"] * 10 + ["carol"] * 10 + ["dave"] * 1 + ["frank"] * 79
    for i, author in enumerate(authors):
        commits.append([author, iso(day("2020-01-01T09:00:00", i))])

    prs = []
    for n in range(1, 41):
        when = iso(day("2020-01-05T10:00:00", 8 * (n - 1)))
        if n <= 10:
            who = ["alice", "frank"]
        elif n <= 14:
            who = ["bob", "frank"]
        elif n == 15:
            who = ["carol", "frank"]
        elif n == 16:
            who = ["dave", "frank"]
        else:
            who = ["frank", "grace"]
        prs.append([n, when, who])

    # Pull requests the corpus examples come from, one week apart.
    example_prs = [
        (101, "2021-06-01", ["alice", "frank"]),
        (102, "2021-06-08", ["bob", "frank"]),
        (103, "2021-06-15", ["carol", "frank"]),
        (104, "2021-06-22", ["dave", "frank"]),
        (105, "2021-06-29", ["alice", "frank"]),
        (106, "2021-07-06", ["frank", "grace"]),
        (107, "2021-07-13", ["release-bot", "frank"]),
        (108, "2021-07-20", ["codecov-io", "frank"]),
        (109, "2021-07-27", ["frank", "grace"]),
        (110, "2021-08-03", ["frank", "grace"]),
        (111, "2021-08-10", ["frank", "grace"]),
        (120, "2021-08-17", ["alice", "frank"]),
        (121, "2021-08-24", ["bob", "frank"]),
        (122, "2021-08-31", ["hank", "frank"]),
        (123, "2021-09-07", ["dave", "frank"]),
        (130, "2021-09-14", ["alice", "frank"]),
        (131, "2021-09-21", ["carol", "frank"]),
        (132, "2021-09-28", ["frank", "grace"]),
    ]
    for n, date, who in example_prs:
        prs.append([n, iso(day(date + "T10:00:00", 0)), who])

    return {"repo": WIDGET, "commits": commits, "prs": prs}


def gadget_history() -> dict:
    commits = []
    authors = ["erin"] * 5 + ["frank"] * 45
    for i, author in enumerate(authors):
        commits.append([author, iso(day("2020-02-01T09:00:00", 2 * i))])

    prs = []
    for n in range(1, 21):
        when = iso(day("2020-02-10T10:00:00", 12 * (n - 1)))
        who = ["erin", "frank"] if n <= 6 else ["frank", "grace"]
        prs.append([n, when, who])
    prs.append([201, iso(day("2021-06-10T10:00:00", 0)), ["erin", "frank"]])
    prs.append([202, iso(day("2021-09-10T10:00:00", 0)), ["erin", "frank"]])

    return {"repo": GADGET, "commits": commits, "prs": prs}


# ---------------------------------------------------------------------------
# Corpus and recorded responses

# (split, repo, pr, comment_id, reviewer or None-if-deleted, r_nl, language)
# A reviewer of None means the recorded response will not contain the
# comment; a pr marked DELETED_PRS gets a not-found response body.

EXAMPLES = [
    ("train", WIDGET, 101, 9101, "alice",
     "Please extract this block into a helper method.", "java"),
    ("train", WIDGET, 102, 9102, "bob",
     "This loop never terminates when the list is empty.\nAdd a guard before iterating.",
     "java"),
    ("train", WIDGET, 103, 9103, "carol",
     "Why not reuse the existing validator here?", "java"),
    ("train", WIDGET, 104, 9104, "dave",
     "Consider renaming `tmp` to something meaningful.", "java"),
    ("train", WIDGET, 105, 9105, "alice",
     "The null check should come before dereferencing `owner`.", "java"),
    ("train", WIDGET, 106, 9106, None,
     "This comment was removed by its author later on.", "java"),
    ("train", WIDGET, 107, 9107, "release-bot",
     "Version bump detected, remember to update the changelog.", "java"),
    ("train", WIDGET, 108, 9108, "codecov-io",
     "Coverage decreased by 0.02% when pulling these changes.", "java"),
    ("train", WIDGET, 109, 9109, "frank",
     "```java\nint x = 0;\n```", "java"),
    ("train", WIDGET, 110, 9110, "frank",
     "https://example.com/docs/retry-policy", "java"),
    ("train", GADGET, 201, 9201, "erin",
     "Shouldn't this timeout be configurable?", "python"),
    ("train", WIDGET, 111, 9111, None,
     "The whole pull request was deleted afterwards.", "java"),
    ("validation", WIDGET, 120, 9120, "alice",
     "Move the lock acquisition outside the retry loop.", "java"),
    ("validation", WIDGET, 121, 9121, "bob",
     "Same pattern as above, please deduplicate.", "java"),
    ("validation", WIDGET, 122, 9122, "hank",
     "`retryCount`", "java"),
    ("validation", WIDGET, 123, 9123, "dave",
     "Missing unit test for the error branch.", "java"),
    ("test", WIDGET, 130, 9130, "alice",
     "This cast can fail at runtime, use a safe conversion.", "java"),
    ("test", WIDGET, 131, 9131, "carol",
     "Prefer a constant over the magic number 86400.", "java"),
    ("test", WIDGET, 132, 9132, None,
     "Gone together with its pull request.", "java"),
    ("test", GADGET, 202, 9202, "erin",
     "The new flag is never documented in the README.", "python"),
]

DELETED_PRS = {(WIDGET, 111), (WIDGET, 132)}

M_PRE = "public int size() {{\n    return items.length; // pr {pr}\n}}\n"
M_POST = "public int size() {{\n    return items == null ? 0 : items.length; // pr {pr}\n}}\n"


def write_corpus(path: Path) -> None:
    lines = []
    for split, repo, pr, cid, _reviewer, r_nl, language in EXAMPLES:
        record = {
            "repo": repo,
            "pr_id": pr,
            "comment_id": cid,
            "m_pre": M_PRE.format(pr=pr),
            "r_nl": r_nl,
            "m_post": M_POST.format(pr=pr),
            "language": language,
            "split": split,
        }
        lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_responses(root: Path, histories: dict[str, dict]) -> None:
    submitted = {
        (repo, n): when
        for repo, history in histories.items()
        for n, when, _ in history["prs"]
    }
    for split, repo, pr, cid, reviewer, r_nl, _language in EXAMPLES:
        out = root / "pull_comments" / repo.replace("/", "@") / str(pr)
        out.parent.mkdir(parents=True, exist_ok=True)
        if (repo, pr) in DELETED_PRS:
            body = {
                "message": "Not Found",
                "documentation_url": "https://docs.github.com/rest",
            }
            out.write_text(json.dumps(body, indent=2) + "\n", encoding="utf-8")
            continue
        when = datetime.fromisoformat(
            submitted[(repo, pr)].replace("Z", "+00:00")
        ) + timedelta(days=1)
        comments = [
            {
                "id": 8000 + pr,
                "body": "LGTM, thanks!",
                "user": {"login": "frank"},
                "created_at": iso(when - timedelta(hours=2)),
            }
        ]
        if reviewer is not None:
            body_text = r_nl
            if cid == 9102:
                # Recorded with Windows line endings; matching must
                # normalize them away.
                body_text = r_nl.replace("\n", "\r\n")
            comments.append(
                {
                    "id": cid,
                    "body": body_text,
                    "user": {"login": reviewer},
                    "created_at": iso(when),
                }
            )
        out.write_text(json.dumps(comments, indent=2) + "\n", encoding="utf-8")


def main() -> None:
    histories_dir = HERE / "histories"
    histories_dir.mkdir(parents=True, exist_ok=True)
    histories = {WIDGET: widget_history(), GADGET: gadget_history()}
    for repo, history in histories.items():
        name = repo.replace("/", "_") + ".json"
        (histories_dir / name).write_text(
            json.dumps(history, indent=2) + "\n", encoding="utf-8"
        )

    write_corpus(HERE / "raw_corpus.jsonl")
    write_responses(HERE / "github", histories)
    print("fixtures written under", HERE)


if __name__ == "__main__":
    main()
