"""Single entry point wiring the pipeline end to end.

Exit codes are a stable scripting contract: 0 success, 1 usage error,
2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .canon import canonical_json
from .dump import DumpSource, StreamStats, open_dump
from .errors import (
    BadRangeError,
    BadTimestampError,
    CodecMismatchError,
    ConfigError,
    CorruptPayloadError,
    DumpIOError,
    FormatError,
    IndexClosedError,
    IndexCorruptError,
    MalformedXmlError,
    MissingFieldError,
    NotSeekableError,
    OutputExistsError,
    RevhistError,
    StageFailure,
    UnknownFieldError,
    UnknownKindError,
    UnknownSegmentError,
)
from .timeutil import parse_date

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

_DATA_ERRORS = (
    MalformedXmlError, MissingFieldError, BadTimestampError, CodecMismatchError,
    FormatError, UnknownKindError, CorruptPayloadError, IndexCorruptError,
    IndexClosedError, UnknownSegmentError, BadRangeError, UnknownFieldError,
    ConfigError, OutputExistsError, NotSeekableError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="revhist", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("gen-fixture", help="write a deterministic dump fixture")
    p.add_argument("--pages", type=int, default=10)
    p.add_argument("--revisions-per-page", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-date", default="2011-01-01")
    p.add_argument("--out", required=True)
    p.add_argument("--text-sentences", type=int, default=8)
    p.add_argument("--namespaces", default="0",
                   help="comma-separated namespace cycle, e.g. 0,0,1,14")
    p.add_argument("--pages-per-stream", type=int, default=0,
                   help="write .bz2 output as multistream with N pages per stream")
    p.add_argument("--scenario", choices=["default", "spikes"], default="default")
    p.add_argument("--weeks", type=int, default=26, help="spike scenario span")

    p = sub.add_parser("partition", help="re-partition a dump into split files")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=["entity", "document"], default="entity")
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--format", choices=["xml", "jsonl"], default="jsonl")
    p.add_argument("--from", dest="from_date")
    p.add_argument("--to", dest="to_date")
    p.add_argument("--namespaces", help="comma-separated namespace numbers")
    p.add_argument("--articles-only", action="store_true")
    p.add_argument("--entity-list", help="file of <key>TAB<id> lines")
    p.add_argument("--entity-norm",
                   choices=["title-exact", "title-case-fold", "url-decode"],
                   default="title-exact")
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract", help="run an operator chain over a partition")
    p.add_argument("--partition", required=True)
    p.add_argument("--ops", default="project:metadata",
                   help='e.g. "filter:from=2012-05-01,to=2012-06-01;project:fulltext"')
    p.add_argument("--out", required=True)

    p = sub.add_parser("index", help="feed emitted records into a temporal index")
    p.add_argument("--input", required=True, help="directory of emitted .jsonl files")
    p.add_argument("--index", required=True)
    p.add_argument("--seal-every", type=int, default=500_000)

    p = sub.add_parser("query", help="query a temporal index")
    p.add_argument("--index", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--timeline", metavar="Q")
    group.add_argument("--top-terms", metavar="Q")
    group.add_argument("--cooccur", metavar="A,B")
    group.add_argument("--entity-search", metavar="PREFIX")
    p.add_argument("--field", choices=["anchor", "fulltext"], default="anchor")
    p.add_argument("--granularity", choices=["day", "week"], default="week")
    p.add_argument("--from", dest="from_date")
    p.add_argument("--to", dest="to_date")
    p.add_argument("--match", choices=["term", "entity"], default="term")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--limit", type=int, default=20)

    p = sub.add_parser("serve", help="serve the index over HTTP")
    p.add_argument("--index")
    p.add_argument("--bind", default=None)
    p.add_argument("--config", help="key = value config file")

    p = sub.add_parser("pipeline", help="run a multi-stage pipeline from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", help="write job reports as json-lines here")

    p = sub.add_parser("inspect", help="summarize a dump (pages, revisions)")
    p.add_argument("--input", required=True)

    return parser


def _cmd_gen_fixture(args) -> int:
    from .fixtures import generate_dump, generate_spike_corpus

    out = Path(args.out)
    if args.scenario == "spikes":
        truth = generate_spike_corpus(
            out, seed=args.seed, start_date=args.start_date, weeks=args.weeks
        )
        truth_path = Path(str(out) + ".truth.json")
        truth_path.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")
        print(f"wrote {out} ({truth['revisions']} revisions) and {truth_path}")
        return EXIT_OK
    summary = generate_dump(
        out,
        pages=args.pages,
        revisions_per_page=args.revisions_per_page,
        seed=args.seed,
        start_date=args.start_date,
        text_sentences=args.text_sentences,
        namespaces=tuple(int(v) for v in args.namespaces.split(",")),
        pages_per_stream=args.pages_per_stream,
    )
    print(f"wrote {out}: {summary.pages} pages, {summary.revisions} revisions")
    return EXIT_OK


def _cmd_partition(args) -> int:
    from .filters import EntitySet, FilterSpec, Normalization
    from .partition import OutputFormat, PartitionMode, PartitionPlan, partition_stream

    time_range = None
    if args.from_date or args.to_date:
        start = parse_date(args.from_date) if args.from_date else 0
        end = parse_date(args.to_date) if args.to_date else 1 << 40
        time_range = (start, end)
    namespaces = None
    if args.namespaces:
        namespaces = frozenset(int(v) for v in args.namespaces.split(","))
    entity_set = None
    if args.entity_list:
        entity_set = EntitySet.from_file(args.entity_list, Normalization(args.entity_norm))
    plan = PartitionPlan(
        mode=PartitionMode.ENTITY if args.mode == "entity" else PartitionMode.DOCUMENT,
        partition_count=args.partitions,
        output_format=OutputFormat.XML if args.format == "xml" else OutputFormat.JSONL,
        output_dir=Path(args.out),
        filter=FilterSpec(
            time_range=time_range,
            namespaces=namespaces,
            entity_set=entity_set,
            articles_only=args.articles_only,
        ),
    )
    stats = StreamStats()
    manifest = partition_stream(
        open_dump(DumpSource.from_path(args.input), stats=stats), plan
    )
    print(
        f"kept {manifest.kept_revisions}/{manifest.input_revisions} revisions "
        f"into {plan.partition_count} partition(s) at {args.out}"
    )
    return EXIT_OK


def _cmd_extract(args) -> int:
    from .extract import TransformStats, parse_ops, transform, write_emitted

    stats = TransformStats()
    chain = parse_ops(args.ops)
    count = write_emitted(transform(args.partition, chain, stats), args.out)
    print(
        f"emitted {count} records to {args.out} "
        f"(read {stats.records_read}, dropped {stats.dropped_by_filter})"
    )
    return EXIT_OK


def _cmd_index(args) -> int:
    from .pipeline import _run_index

    report = _run_index(
        {"input": args.input, "seal_every": args.seal_every, "out": args.index},
        Path(args.index), Path("."), None, 0,
    )
    print(
        f"indexed {report.records_out} records "
        f"({report.counters['duplicates']} duplicates, "
        f"{report.counters['skipped_kinds']} skipped) digest {report.digest[:16]}…"
    )
    return EXIT_OK


def _cmd_query(args) -> int:
    from .index import TemporalIndex

    index = TemporalIndex.open(args.index)

    def need_range() -> tuple[int, int]:
        if not args.from_date or not args.to_date:
            raise UsageError("--from and --to are required for this query")
        return (parse_date(args.from_date), parse_date(args.to_date))

    if args.timeline is not None:
        result = index.query_timeline(
            args.timeline, field=args.field, granularity=args.granularity,
            time_range=need_range(), match=args.match, weighted=args.weighted,
        ).to_payload()
        result.update({"q": args.timeline, "field": args.field, "match": args.match,
                       "weighted": args.weighted})
    elif args.top_terms is not None:
        time_range = need_range()
        result = index.top_terms(
            args.top_terms, time_range=time_range, k=args.k,
            field=args.field, match=args.match,
        ).to_payload()
        result.update({"q": args.top_terms, "field": args.field, "match": args.match})
    elif args.cooccur is not None:
        if "," not in args.cooccur:
            raise UsageError("--cooccur expects A,B")
        a, b = args.cooccur.split(",", 1)
        result = index.co_occurrence(
            a.strip(), b.strip(), field=args.field, granularity=args.granularity,
            time_range=need_range(), weighted=args.weighted,
        ).to_payload()
        result["field"] = args.field
    else:
        entries = index.entity_search(args.entity_search, limit=args.limit)
        result = {
            "prefix": args.entity_search,
            "entities": [{"key": k, "postings": c} for k, c in entries],
        }
    sys.stdout.write(canonical_json(result).decode("utf-8") + "\n")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import load_config, serve

    config = load_config(args.config, index_dir=args.index, bind=args.bind)
    print(f"serving index {config.index_dir} on http://{config.bind_address}")
    serve(config)
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    from .pipeline import run_pipeline

    reports = run_pipeline(
        args.config, force=args.force, workers=args.workers, report_path=args.report,
    )
    for report in reports:
        digest = f" digest={report.digest[:16]}…" if report.digest else ""
        print(
            f"{report.stage}: in={report.records_in} out={report.records_out} "
            f"dropped={report.dropped_by_filter} "
            f"wall={report.wall_time_s:.1f}s{digest}"
        )
    return EXIT_OK


def _cmd_inspect(args) -> int:
    stats = StreamStats()
    for _ in open_dump(DumpSource.from_path(args.input), stats=stats):
        pass
    print(
        f"{args.input}: {stats.pages} pages, {stats.revisions} revisions, "
        f"{stats.deleted_texts} deleted texts, "
        f"{stats.replacement_chars} replacement chars"
    )
    return EXIT_OK


_COMMANDS = {
    "gen-fixture": _cmd_gen_fixture,
    "partition": _cmd_partition,
    "extract": _cmd_extract,
    "index": _cmd_index,
    "query": _cmd_query,
    "serve": _cmd_serve,
    "pipeline": _cmd_pipeline,
    "inspect": _cmd_inspect,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageFailure as exc:
        cause = exc.cause
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, _DATA_ERRORS):
            return EXIT_DATA
        if isinstance(cause, (DumpIOError, OSError)):
            return EXIT_IO
        return EXIT_DATA
    except _DATA_ERRORS as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DumpIOError,) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RevhistError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
