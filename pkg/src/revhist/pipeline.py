"""One-command pipeline: gen-fixture -> partition -> extract -> index.

The pipeline is described by a single JSON config so reports and
provenance stay attached to the run. Stages execute sequentially, each
one's outputs feeding the next; a failing stage halts the run leaving
earlier outputs intact. All randomness flows from the one top-level
seed, which is recorded in every report.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .canon import digest as canonical_digest
from .dump import DumpSource, StreamStats, open_dump
from .errors import ConfigError, OutputExistsError, RevhistError, StageFailure
from .extract import Kind, parse_ops, read_emitted, transform, write_emitted
from .filters import EntitySet, FilterSpec, Normalization
from .fixtures import generate_dump, generate_spike_corpus
from .index import TemporalIndex
from .partition import (
    OutputFormat,
    PartitionManifest,
    PartitionMode,
    PartitionPlan,
    partition_stream,
)
from .timeutil import parse_date

STAGES = ("gen-fixture", "partition", "extract", "index")

TransformStatsFields = ("records_read", "records_emitted", "dropped_by_filter",
                        "payloads_built", "text_payloads_built", "parent_missing")


@dataclass
class JobReport:
    stage: str
    inputs: list[str]
    outputs: list[str]
    records_in: int
    records_out: int
    dropped_by_filter: int
    wall_time_s: float
    seed: int
    counters: dict[str, int] = field(default_factory=dict)
    digest: str | None = None

    def to_json(self) -> dict:
        out = {
            "stage": self.stage,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "records_in": self.records_in,
            "records_out": self.records_out,
            "dropped_by_filter": self.dropped_by_filter,
            "wall_time_s": round(self.wall_time_s, 3),
            "seed": self.seed,
            "counters": self.counters,
        }
        if self.digest is not None:
            out["digest"] = self.digest
        return out


def load_pipeline_config(path: str | Path) -> dict:
    try:
        config = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read pipeline config: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"pipeline config is not valid JSON: {exc}") from exc
    validate_pipeline_config(config)
    return config


def validate_pipeline_config(config: dict):
    if not isinstance(config, dict):
        raise ConfigError("pipeline config must be a JSON object")
    stages = config.get("stages")
    if not isinstance(stages, list) or not stages:
        raise ConfigError("pipeline config needs a non-empty 'stages' list")
    for i, stage in enumerate(stages):
        if not isinstance(stage, dict) or "stage" not in stage:
            raise ConfigError(f"stage #{i} must be an object with a 'stage' name")
        name = stage["stage"]
        if name not in STAGES:
            raise ConfigError(f"unknown stage name {name!r} (expected one of {STAGES})")
        if "out" not in stage:
            raise ConfigError(f"stage #{i} ({name}) needs an 'out' path")
    if not isinstance(config.get("seed", 0), int):
        raise ConfigError("'seed' must be an integer")


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _stage_outputs_exist(name: str, out: Path) -> bool:
    if name == "gen-fixture":
        return out.exists()
    if name == "partition":
        return (out / "manifest.json").exists()
    if name == "extract":
        return out.exists() and any(out.glob("*.jsonl"))
    if name == "index":
        return (out / "meta.json").exists()
    return out.exists()


def _extract_one(partition: str, ops: str, out_path: str) -> dict:
    """Worker-safe single-partition extract; returns the stats counters."""
    from .extract import TransformStats

    stats = TransformStats()
    chain = parse_ops(ops)
    write_emitted(transform(partition, chain, stats), out_path)
    return {name: getattr(stats, name) for name in TransformStatsFields}


def _filter_from_config(cfg: dict, base: Path) -> FilterSpec:
    time_range = None
    if "from" in cfg or "to" in cfg:
        start = parse_date(cfg["from"]) if "from" in cfg else 0
        end = parse_date(cfg["to"]) if "to" in cfg else 1 << 40
        time_range = (start, end)
    namespaces = None
    if cfg.get("namespaces") is not None:
        namespaces = frozenset(int(v) for v in cfg["namespaces"])
    entity_set = None
    if cfg.get("entity_list"):
        entity_set = EntitySet.from_file(
            _resolve(base, cfg["entity_list"]),
            Normalization(cfg.get("entity_norm", "title-exact")),
        )
    return FilterSpec(
        time_range=time_range,
        namespaces=namespaces,
        entity_set=entity_set,
        articles_only=bool(cfg.get("articles_only", False)),
    )


def run_pipeline(
    config: dict | str | Path,
    *,
    force: bool = False,
    workers: int = 1,
    report_path: str | Path | None = None,
) -> list[JobReport]:
    """Execute the configured stages in order; returns one report each."""
    if not isinstance(config, dict):
        config = load_pipeline_config(config)
    else:
        validate_pipeline_config(config)

    seed = int(config.get("seed", 0))
    base = Path(config.get("out_dir", "."))
    stages = config["stages"]

    # fail fast: refuse to clobber existing outputs unless forced
    if not force:
        for stage in stages:
            out = _resolve(base, stage["out"])
            if _stage_outputs_exist(stage["stage"], out):
                raise OutputExistsError(
                    f"outputs of stage {stage['stage']!r} already exist at {out}; "
                    "pass --force to overwrite"
                )

    base.mkdir(parents=True, exist_ok=True)
    reports: list[JobReport] = []
    prev_output: Path | None = None

    for stage in stages:
        name = stage["stage"]
        out = _resolve(base, stage["out"])
        started = time.monotonic()
        try:
            if name == "gen-fixture":
                report = _run_gen_fixture(stage, out, seed)
            elif name == "partition":
                report = _run_partition(stage, out, base, prev_output, seed)
            elif name == "extract":
                report = _run_extract(stage, out, base, prev_output, seed, workers)
            elif name == "index":
                report = _run_index(stage, out, base, prev_output, seed)
            else:  # pragma: no cover - validated upfront
                raise ConfigError(f"unknown stage {name!r}")
        except RevhistError:
            raise
        except Exception as exc:
            raise StageFailure(name, exc) from exc
        report.wall_time_s = time.monotonic() - started
        reports.append(report)
        prev_output = out

    if report_path is not None:
        with open(report_path, "w", encoding="utf-8") as fh:
            for report in reports:
                fh.write(json.dumps(report.to_json(), sort_keys=True) + "\n")
    return reports


def _input_of(stage: dict, base: Path, prev_output: Path | None, name: str) -> Path:
    if "input" in stage:
        return _resolve(base, stage["input"])
    if prev_output is None:
        raise ConfigError(f"stage {name!r} has no 'input' and no preceding stage")
    return prev_output


def _run_gen_fixture(stage: dict, out: Path, seed: int) -> JobReport:
    scenario = stage.get("scenario")
    if scenario == "spikes":
        truth = generate_spike_corpus(
            out,
            seed=seed,
            start_date=stage.get("start_date", "2012-01-01"),
            weeks=int(stage.get("weeks", 26)),
        )
        truth_path = Path(str(out) + ".truth.json")
        truth_path.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")
        return JobReport(
            stage="gen-fixture", inputs=[], outputs=[str(out), str(truth_path)],
            records_in=0, records_out=truth["revisions"], dropped_by_filter=0,
            wall_time_s=0.0, seed=seed,
            counters={"bytes": out.stat().st_size},
        )
    if scenario not in (None, "default"):
        raise ConfigError(f"unknown gen-fixture scenario {scenario!r}")
    summary = generate_dump(
        out,
        pages=int(stage["pages"]),
        revisions_per_page=int(stage["revisions_per_page"]),
        seed=seed,
        start_date=stage.get("start_date", "2011-01-01"),
        text_sentences=int(stage.get("text_sentences", 8)),
        namespaces=tuple(stage.get("namespaces", (0,))),
        pages_per_stream=int(stage.get("pages_per_stream", 0)),
    )
    return JobReport(
        stage="gen-fixture", inputs=[], outputs=[str(out)],
        records_in=0, records_out=summary.revisions, dropped_by_filter=0,
        wall_time_s=0.0, seed=seed,
        counters={"pages": summary.pages, "bytes": out.stat().st_size},
    )


def _run_partition(
    stage: dict, out: Path, base: Path, prev_output: Path | None, seed: int
) -> JobReport:
    source_path = _input_of(stage, base, prev_output, "partition")
    plan = PartitionPlan(
        mode=PartitionMode.ENTITY
        if stage.get("mode", "entity") in ("entity", "entity-wise")
        else PartitionMode.DOCUMENT,
        partition_count=int(stage.get("partitions", 1)),
        output_format=OutputFormat.XML
        if stage.get("format", "jsonl") == "xml"
        else OutputFormat.JSONL,
        output_dir=out,
        filter=_filter_from_config(stage.get("filter", {}), base),
    )
    stats = StreamStats()
    manifest = partition_stream(
        open_dump(DumpSource.from_path(source_path), stats=stats), plan
    )
    return JobReport(
        stage="partition", inputs=[str(source_path)], outputs=[str(out)],
        records_in=manifest.input_revisions, records_out=manifest.kept_revisions,
        dropped_by_filter=manifest.dropped_by_filter,
        wall_time_s=0.0, seed=seed,
        counters={
            "pages": stats.pages,
            "partitions": plan.partition_count,
            "replacement_chars": stats.replacement_chars,
        },
    )


def _run_extract(
    stage: dict, out: Path, base: Path, prev_output: Path | None, seed: int,
    workers: int,
) -> JobReport:
    source = _input_of(stage, base, prev_output, "extract")
    ops = str(stage.get("ops", "project:metadata")).replace("{seed}", str(seed))
    parse_ops(ops)  # validate before any work
    out.mkdir(parents=True, exist_ok=True)

    if source.is_dir():
        manifest = PartitionManifest.load(source)
        partitions = [str(p) for p in manifest.partition_paths(source)]
    else:
        partitions = [str(source)]
    jobs = [
        (part, ops, str(out / f"emitted-{i:05d}.jsonl"))
        for i, part in enumerate(partitions)
    ]
    totals = dict.fromkeys(TransformStatsFields, 0)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for counters in pool.map(_extract_one, *zip(*jobs)):
                for key, value in counters.items():
                    totals[key] += value
    else:
        for job in jobs:
            counters = _extract_one(*job)
            for key, value in counters.items():
                totals[key] += value
    return JobReport(
        stage="extract", inputs=[str(source)], outputs=[str(out)],
        records_in=totals["records_read"], records_out=totals["records_emitted"],
        dropped_by_filter=totals["dropped_by_filter"],
        wall_time_s=0.0, seed=seed,
        counters={
            "payloads_built": totals["payloads_built"],
            "text_payloads_built": totals["text_payloads_built"],
            "parent_missing": totals["parent_missing"],
            "partitions": len(jobs),
        },
    )


def index_digest(index: TemporalIndex) -> str:
    """Merge-invariant digest over global aggregates and per-field stats."""
    stats = index.stats()
    return canonical_digest(
        {
            "doc_count": stats.doc_count,
            "time_span": list(stats.time_span) if stats.time_span else None,
            "fields": index.field_summary(),
        }
    )


def _run_index(
    stage: dict, out: Path, base: Path, prev_output: Path | None, seed: int
) -> JobReport:
    source = _input_of(stage, base, prev_output, "index")
    files = sorted(Path(source).glob("*.jsonl"))
    index = TemporalIndex.open_or_create(out)
    indexed = duplicates = skipped = read = 0
    try:
        for path in files:
            def indexable():
                nonlocal skipped, read
                for rec in read_emitted(path):
                    read += 1
                    if rec.kind in (Kind.ANCHORS, Kind.FULLTEXT):
                        yield rec
                    else:
                        skipped += 1

            n_new, n_dup = index.bulk_index(
                indexable(), seal_every=int(stage.get("seal_every", 500_000))
            )
            indexed += n_new
            duplicates += n_dup
        index.refresh()
    finally:
        index.close()

    reopened = TemporalIndex.open(out)
    digest = index_digest(reopened)
    stats = reopened.stats()
    return JobReport(
        stage="index", inputs=[str(source)], outputs=[str(out)],
        records_in=read, records_out=indexed,
        dropped_by_filter=0,
        wall_time_s=0.0, seed=seed,
        counters={
            "duplicates": duplicates,
            "skipped_kinds": skipped,
            "segments": stats.segments,
            "postings": stats.posting_count,
        },
        digest=digest,
    )
