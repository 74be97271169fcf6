"""Shared fixtures: the recorded corpus world and small builders."""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

import pytest

from revcorpus.miner import FixtureTransport, NullCache, RateBudget, fetch_review_meta
from revcorpus.model import DatasetSplit, ReviewExample, read_corpus

FIXTURES = Path(__file__).parent / "fixtures"
RAW_CORPUS = FIXTURES / "raw_corpus.jsonl"
GITHUB_FIXTURES = FIXTURES / "github"
HISTORIES = FIXTURES / "histories"


def utc(year, month, day, hour=0, minute=0, second=0) -> datetime:
    return datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)


def make_example(
    repo="acme/widget",
    pr_id=1,
    comment_id=1,
    m_pre="int a = 0;",
    r_nl="Please rename this.",
    split=DatasetSplit.TRAIN,
    **kwargs,
) -> ReviewExample:
    return ReviewExample(
        repo=repo,
        pr_id=pr_id,
        comment_id=comment_id,
        m_pre=m_pre,
        r_nl=r_nl,
        split=split,
        **kwargs,
    )


@pytest.fixture(scope="session")
def raw_examples():
    return read_corpus(RAW_CORPUS)


@pytest.fixture(scope="session")
def fixture_fetch_results(raw_examples):
    """Fetch results for the whole recorded corpus, played back offline."""
    transport = FixtureTransport(GITHUB_FIXTURES)
    budget = RateBudget(sleep=lambda s: None)
    results = {}
    for example in raw_examples:
        results[example.key] = fetch_review_meta(
            example.repo,
            example.pr_id,
            example.r_nl,
            budget,
            NullCache(),
            transport,
            backoff=lambda s: None,
        )
    return results
