"""Corpus curation and evaluation toolkit for review-comment generation.

Pipeline layout, one module per stage:

- model       record format, corpus IO, manifests
- miner       review metadata fetching and repository histories
- curation    deleted/bot/code-only filters with a removal ledger
- experience  ownership scores and four-class partition
- oversample  experienced-class replication for training corpora
- evaluation  BLEU-4, sampling, agreement, report aggregation
- service     HTTP annotation service for the human study
- cli         stage-per-subcommand entry point
"""

from .model import (
    CorpusManifest,
    DatasetSplit,
    ParseError,
    ReviewExample,
    read_corpus,
    write_corpus,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusManifest",
    "DatasetSplit",
    "ParseError",
    "ReviewExample",
    "read_corpus",
    "write_corpus",
    "__version__",
]
