"""Pipeline entry point: one subcommand per stage.

Stages run sequentially and talk through directories: each stage writes
its outputs plus a manifest (counts, checksums, seed, effective config)
and refuses to consume a directory whose manifest is missing or whose
files no longer hash to it. Re-running a stage with unchanged inputs
rewrites identical bytes.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 network
failure after retries. GitHub credentials come only from the
GITHUB_TOKEN environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import yaml

from .curation import BotRegistry, curate
from .evaluation import (
    AnnotationRecord,
    SamplingParams,
    corpus_bleu4,
    draw_sample,
    load_frame,
    load_frame_key,
    partitioned_metrics,
    sample_size,
    tokenize,
    write_frame,
    write_frame_key,
    aggregate_report,
)
from .experience import ExperienceClass, TargetClass, classify_corpus, partition_stats
from .miner import (
    FetchResult,
    FixtureTransport,
    LiveTransport,
    NullCache,
    RateBudget,
    ResponseCache,
    TransportError,
    fetch_review_meta,
    load_history_dir,
)
from .model import (
    CorpusManifest,
    DatasetSplit,
    ParseError,
    file_sha256,
    format_timestamp,
    parse_timestamp,
    read_corpus,
    write_corpus,
)
from .oversample import OversamplePlan, emit_splits, oversample


class CliError(ValueError):
    """Bad arguments, bad config, or bad stage inputs."""


@dataclass
class PipelineConfig:
    """File-loadable settings; every CLI flag overrides its key here."""

    corpus: str | None = None
    out_dir: str | None = None
    cache_dir: str | None = None
    fixtures_dir: str | None = None
    histories_dir: str | None = None
    bots: str | None = None
    threshold: float = 0.05
    target: str = "mrma"
    factor: int = 4
    shuffle: bool = True
    z: float = 1.96
    margin: float = 0.10
    p_hat: float = 0.5
    seed: int = 0

    @classmethod
    def load(cls, path: str | Path | None) -> "PipelineConfig":
        if path is None:
            return cls()
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if raw is None:
            return cls()
        if not isinstance(raw, dict):
            raise CliError(f"config {path} must be a mapping")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**raw)


def _setting(args: argparse.Namespace, config: PipelineConfig, name: str):
    """CLI flag when given, config value otherwise."""
    value = getattr(args, name, None)
    return getattr(config, name) if value is None else value


def _require_manifest(stage_dir: str | Path) -> CorpusManifest:
    path = Path(stage_dir) / "manifest.json"
    if not path.exists():
        raise CliError(f"{stage_dir} has no manifest.json; run the previous stage first")
    manifest = CorpusManifest.read(path)
    bad = manifest.verify_checksums(stage_dir)
    if bad:
        raise CliError(f"checksum mismatch in {stage_dir}: {', '.join(bad)}")
    return manifest


def _write_stage(
    out_dir: str | Path,
    counts: dict[str, int],
    checksums: dict[str, str],
    seed: int | None,
    config: dict,
) -> None:
    manifest = CorpusManifest(counts=counts, checksums=checksums, seed=seed, config=config)
    manifest.write(Path(out_dir) / "manifest.json")


def _stage_corpus_path(stage_dir: Path) -> Path:
    for name in ("corpus.jsonl", "test.jsonl"):
        candidate = stage_dir / name
        if candidate.exists():
            return candidate
    raise CliError(f"{stage_dir} holds no corpus file")


# ---------------------------------------------------------------------------
# Stages


def cmd_mine(args, config: PipelineConfig) -> int:
    corpus_path = _setting(args, config, "corpus")
    if corpus_path is None:
        raise CliError("mine needs --in (or `corpus` in the config)")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    fixtures = _setting(args, config, "fixtures_dir")
    cache_dir = _setting(args, config, "cache_dir")
    cache = ResponseCache(cache_dir) if cache_dir else NullCache()
    budget = RateBudget()
    if fixtures:
        transport = FixtureTransport(fixtures)
    else:
        transport = LiveTransport(budget=budget)

    examples = read_corpus(corpus_path)
    enriched = []
    fetch_lines = []
    found = 0
    for example in examples:
        result = fetch_review_meta(
            example.repo, example.pr_id, example.r_nl, budget, cache, transport
        )
        if result.found:
            found += 1
            enriched.append(example.with_meta(result.reviewer, result.created_at))
        else:
            enriched.append(example)
        fetch_lines.append(
            json.dumps(
                {
                    "repo": example.repo,
                    "pr_id": example.pr_id,
                    "comment_id": example.comment_id,
                    "found": result.found,
                    "reviewer": result.reviewer,
                    "created_at": format_timestamp(result.created_at)
                    if result.created_at
                    else None,
                },
                sort_keys=True,
                ensure_ascii=False,
            )
        )

    count, checksum = write_corpus(out_dir / "corpus.jsonl", enriched)
    fetch_path = out_dir / "fetch.jsonl"
    fetch_path.write_text("\n".join(fetch_lines) + "\n", encoding="utf-8")
    _write_stage(
        out_dir,
        counts={"corpus": count, "found": found},
        checksums={
            "corpus.jsonl": checksum,
            "fetch.jsonl": file_sha256(fetch_path),
        },
        seed=args.seed if args.seed is not None else config.seed,
        config={"stage": "mine", "fixtures": bool(fixtures), "corpus": str(corpus_path)},
    )
    print(f"mined {count} examples, {found} with live review metadata")
    return 0


def _load_fetch_results(path: Path) -> dict[tuple[str, int, int], FetchResult]:
    results = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            key = (obj["repo"], obj["pr_id"], obj["comment_id"])
            if obj["found"]:
                results[key] = FetchResult.of(
                    obj["reviewer"], parse_timestamp(obj["created_at"])
                )
            else:
                results[key] = FetchResult.deleted()
    return results


def cmd_curate(args, config: PipelineConfig) -> int:
    in_dir = Path(args.in_dir)
    _require_manifest(in_dir)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    examples = read_corpus(in_dir / "corpus.jsonl")
    fetch_results = _load_fetch_results(in_dir / "fetch.jsonl")
    bots_path = _setting(args, config, "bots")
    registry = BotRegistry.from_file(bots_path) if bots_path else BotRegistry.bundled()

    kept, ledger = curate(examples, fetch_results, registry)
    ledger.check()

    count, checksum = write_corpus(out_dir / "corpus.jsonl", kept)
    ledger_path = out_dir / "ledger.csv"
    ledger_path.write_text(ledger.to_csv(), encoding="utf-8")
    census_path = out_dir / "bot_census.csv"
    census_path.write_text(ledger.bot_census_csv(), encoding="utf-8")
    _write_stage(
        out_dir,
        counts={"kept": count, "original": len(examples)},
        checksums={
            "corpus.jsonl": checksum,
            "ledger.csv": file_sha256(ledger_path),
            "bot_census.csv": file_sha256(census_path),
        },
        seed=args.seed if args.seed is not None else config.seed,
        config={"stage": "curate", "bots": bots_path or "bundled"},
    )
    print(f"kept {count} of {len(examples)} examples")
    return 0


def cmd_experience(args, config: PipelineConfig) -> int:
    in_dir = Path(args.in_dir)
    _require_manifest(in_dir)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    histories_dir = _setting(args, config, "histories_dir")
    if histories_dir is None:
        raise CliError("experience needs --histories (or `histories_dir` in the config)")
    threshold = float(_setting(args, config, "threshold"))

    examples = read_corpus(_stage_corpus_path(in_dir))
    histories = load_history_dir(histories_dir)
    classified = classify_corpus(examples, histories, threshold)

    count, checksum = write_corpus(out_dir / "corpus.jsonl", classified)
    _write_stage(
        out_dir,
        counts={"classified": count},
        checksums={"corpus.jsonl": checksum},
        seed=args.seed if args.seed is not None else config.seed,
        config={"stage": "experience", "threshold": threshold},
    )
    print(f"classified {count} examples at threshold {threshold}")
    return 0


def cmd_stats(args, config: PipelineConfig) -> int:
    in_dir = Path(args.in_dir)
    _require_manifest(in_dir)
    examples = read_corpus(_stage_corpus_path(in_dir))
    stats = partition_stats(examples)
    text = stats.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_oversample(args, config: PipelineConfig) -> int:
    in_dir = Path(args.in_dir)
    _require_manifest(in_dir)
    out_dir = Path(args.out)

    target = _setting(args, config, "target")
    factor = int(_setting(args, config, "factor"))
    seed = args.seed if args.seed is not None else config.seed
    shuffle = config.shuffle and not args.no_shuffle

    examples = read_corpus(_stage_corpus_path(in_dir))
    by_split = {split: [] for split in DatasetSplit}
    for example in examples:
        by_split[example.split].append(example)

    plan = OversamplePlan(
        target=TargetClass(target), factor=factor, seed=seed, shuffle=shuffle
    )
    train = oversample(by_split[DatasetSplit.TRAIN], plan)
    manifest = emit_splits(
        train,
        by_split[DatasetSplit.VALIDATION],
        by_split[DatasetSplit.TEST],
        out_dir,
        seed=seed,
        config={"stage": "oversample", **plan.describe()},
    )
    print(
        "train {train} validation {validation} test {test}".format(**manifest.counts)
    )
    return 0


def _read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _reference_corpus(ref: str) -> list:
    path = Path(ref)
    if path.is_dir():
        _require_manifest(path)
        return read_corpus(_stage_corpus_path(path))
    # Bare file: verify against a sibling manifest when one lists it.
    sibling = path.parent / "manifest.json"
    if sibling.exists():
        manifest = CorpusManifest.read(sibling)
        if path.name in manifest.checksums:
            bad = manifest.verify_checksums(path.parent)
            if path.name in bad:
                raise CliError(f"checksum mismatch for {path}")
    return read_corpus(path)


def cmd_bleu(args, config: PipelineConfig) -> int:
    references = _reference_corpus(args.ref)
    hypotheses = _read_lines(args.hyp)
    if len(hypotheses) != len(references):
        raise CliError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    pairs = [
        (tokenize(h), tokenize(e.r_nl)) for h, e in zip(hypotheses, references)
    ]
    lines = [f"bleu4,{corpus_bleu4(pairs):.2f}"]
    if args.by_partition:
        quadrants = []
        for e in references:
            if e.quadrant is None:
                raise CliError(f"example {e.key} has no ownership class")
            quadrants.append(ExperienceClass(e.quadrant))
        rows = partitioned_metrics(pairs, quadrants)
        lines.append("partition,examples,bleu4")
        for label in ("all", "mrma", "mr", "ma"):
            row = rows[label]
            value = "" if row.bleu is None else f"{row.bleu:.2f}"
            lines.append(f"{label},{row.count},{value}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_sample(args, config: PipelineConfig) -> int:
    in_dir = Path(args.in_dir)
    _require_manifest(in_dir)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    examples = read_corpus(_stage_corpus_path(in_dir))
    seed = args.seed if args.seed is not None else config.seed
    if args.n is not None:
        n = args.n
    else:
        params = SamplingParams(
            population=len(examples),
            z=float(_setting(args, config, "z")),
            margin=float(_setting(args, config, "margin")),
            p_hat=float(_setting(args, config, "p_hat")),
            seed=seed,
        )
        n = sample_size(params)

    generations = {}
    for spec_arg in args.gen or []:
        name, _, path = spec_arg.partition("=")
        if not path:
            raise CliError(f"--gen wants NAME=FILE, got {spec_arg!r}")
        generations[name] = _read_lines(path)
    if not generations:
        raise CliError("sample needs at least one --gen NAME=FILE")

    frame = draw_sample(examples, generations, n, seed)
    frame_path = out_dir / "frame.jsonl"
    key_path = out_dir / "frame.key.jsonl"
    write_frame(frame, frame_path)
    write_frame_key(frame, key_path)
    _write_stage(
        out_dir,
        counts={"frame": len(frame.items), "models": len(frame.model_ids)},
        checksums={
            "frame.jsonl": file_sha256(frame_path),
            "frame.key.jsonl": file_sha256(key_path),
        },
        seed=seed,
        config={"stage": "sample", "n": n},
    )
    print(f"drew {len(frame.items)} of {len(examples)} (n={n})")
    return 0


def cmd_serve(args, config: PipelineConfig) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.log, args.frames, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _load_export(path: Path) -> list[dict]:
    text = path.read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    if isinstance(obj, dict) and "records" in obj:
        return obj["records"]
    if isinstance(obj, list):
        return obj
    raise CliError(f"{path} is not an export payload")


def cmd_report(args, config: PipelineConfig) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    exported = _load_export(Path(args.export))
    key = load_frame_key(args.key)
    records = []
    for obj in exported:
        sample_id = obj["sample_id"]
        alias = obj.get("alias")
        try:
            model_id = key[sample_id][alias]
        except KeyError:
            raise CliError(f"no key entry for {sample_id}/{alias}") from None
        records.append(
            AnnotationRecord.from_dict(
                {
                    "sample_id": sample_id,
                    "annotator_id": obj.get("annotator_id", ""),
                    "model_id": model_id,
                    "semantic_equivalence": obj["semantic_equivalence"],
                    "applicability": obj["applicability"],
                    "has_explanation": obj["has_explanation"],
                    "feedback_type": obj.get("feedback_type"),
                    "category": obj.get("category"),
                }
            )
        )

    quadrants = None
    if args.frame:
        frame = load_frame(args.frame)
        quadrants = {
            item.sample_id: ExperienceClass(item.quadrant)
            for item in frame.items
            if item.quadrant
        }

    bundle = aggregate_report(records, quadrants)
    bundle.write_csvs(out_dir)
    print(f"aggregated {len(records)} annotations for {len(bundle.models)} models")
    return 0


# ---------------------------------------------------------------------------
# Parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="revcorpus", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="YAML settings file")
    parser.add_argument("--seed", type=int, help="seed override for this stage")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("mine", help="resolve reviewer and comment time per example")
    p.add_argument("--in", dest="corpus", help="raw corpus file")
    p.add_argument("--out", required=True)
    p.add_argument("--fixtures", dest="fixtures_dir", help="recorded responses dir (offline)")
    p.add_argument("--cache", dest="cache_dir")
    p.set_defaults(handler=cmd_mine)

    p = sub.add_parser("curate", help="drop deleted, bot, and code-only examples")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bots", help="bot registry file")
    p.set_defaults(handler=cmd_curate)

    p = sub.add_parser("experience", help="attach ownership scores and class")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--histories", dest="histories_dir")
    p.add_argument("--threshold", type=float)
    p.set_defaults(handler=cmd_experience)

    p = sub.add_parser("stats", help="partition distribution table")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("oversample", help="replicate the target class in train")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--target", choices=[t.value for t in TargetClass])
    p.add_argument("--factor", type=int)
    p.add_argument("--no-shuffle", action="store_true")
    p.set_defaults(handler=cmd_oversample)

    p = sub.add_parser("bleu", help="score a hypothesis file against references")
    p.add_argument("--hyp", required=True, help="one generated comment per line")
    p.add_argument("--ref", required=True, help="reference corpus file or stage dir")
    p.add_argument("--by-partition", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_bleu)

    p = sub.add_parser("sample", help="size and draw a blinded evaluation sample")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gen", action="append", metavar="NAME=FILE")
    p.add_argument("-n", type=int, help="override the computed sample size")
    p.add_argument("--z", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--p-hat", dest="p_hat", type=float)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--log", required=True, help="event log path")
    p.add_argument("--frames", required=True, help="directory of sample frames")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="static frontend bundle to host at /ui")
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("report", help="aggregate exported annotations into tables")
    p.add_argument("--export", required=True, help="saved export payload")
    p.add_argument("--key", required=True, help="frame key file")
    p.add_argument("--frame", help="frame file, enables per-partition breakdown")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_report)

    return parser


def entrypoint(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "handler", None):
            parser.print_usage(sys.stderr)
            return 1
        config = PipelineConfig.load(args.config)
        return args.handler(args, config)
    except TransportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CliError, ParseError, ValueError, KeyError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(entrypoint())


if __name__ == "__main__":
    main()
