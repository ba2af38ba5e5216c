"""Re-partition a revision stream into independent split files.

Entity-wise mode routes every revision of a page to the same partition
(a published hash of the page id); document-wise mode deals revisions
round-robin and relies on parent_id to preserve lineage. Output files
are themselves valid inputs: XML partitions are mini dumps readable by
the dump parser, json-lines partitions use a frozen field schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator
from xml.sax.saxutils import escape, quoteattr

from .dump import DumpEvent, DumpSource, PageHeader, RevisionRecord, open_dump
from .errors import FormatError
from .filters import FilterSpec, apply_filter
from .timeutil import format_timestamp, parse_timestamp

ROUTING_HASH = "splitmix64"

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

_MASK = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """Published 64-bit finalizer (Steele et al.); the routing hash."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def entity_route(page_id: int, partition_count: int) -> int:
    """Deterministic partition index for a page; depends on nothing else."""
    if partition_count < 1:
        raise ValueError("partition_count must be >= 1")
    return splitmix64(page_id) % partition_count


class PartitionMode(str, Enum):
    ENTITY = "entity-wise"
    DOCUMENT = "document-wise"


class OutputFormat(str, Enum):
    XML = "xml"
    JSONL = "json-lines"

    @property
    def extension(self) -> str:
        return "xml" if self is OutputFormat.XML else "jsonl"


@dataclass(frozen=True)
class PartitionPlan:
    mode: PartitionMode
    partition_count: int
    output_format: OutputFormat
    output_dir: Path
    filter: FilterSpec = field(default_factory=FilterSpec)

    def __post_init__(self):
        if self.partition_count < 1:
            raise ValueError("partition_count must be >= 1")
        object.__setattr__(self, "output_dir", Path(self.output_dir))


@dataclass
class PartitionInfo:
    path: str
    revision_count: int = 0
    byte_size: int = 0
    min_timestamp: int | None = None
    max_timestamp: int | None = None

    def to_json(self) -> dict:
        return {
            "path": self.path,
            "revision_count": self.revision_count,
            "byte_size": self.byte_size,
            "min_timestamp": None
            if self.min_timestamp is None
            else format_timestamp(self.min_timestamp),
            "max_timestamp": None
            if self.max_timestamp is None
            else format_timestamp(self.max_timestamp),
        }


@dataclass
class PartitionManifest:
    mode: PartitionMode
    output_format: OutputFormat
    partition_count: int
    routing: str
    filter: dict
    partitions: list[PartitionInfo]
    input_revisions: int = 0
    kept_revisions: int = 0
    dropped_by_filter: int = 0

    def to_json(self) -> dict:
        return {
            "version": MANIFEST_VERSION,
            "mode": self.mode.value,
            "output_format": self.output_format.value,
            "partition_count": self.partition_count,
            "routing": self.routing,
            "filter": self.filter,
            "input_revisions": self.input_revisions,
            "kept_revisions": self.kept_revisions,
            "dropped_by_filter": self.dropped_by_filter,
            "partitions": [p.to_json() for p in self.partitions],
        }

    def save(self, output_dir: Path):
        path = Path(output_dir) / MANIFEST_NAME
        path.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, output_dir: str | Path) -> "PartitionManifest":
        data = json.loads((Path(output_dir) / MANIFEST_NAME).read_text())
        partitions = [
            PartitionInfo(
                path=p["path"],
                revision_count=p["revision_count"],
                byte_size=p["byte_size"],
                min_timestamp=None
                if p["min_timestamp"] is None
                else parse_timestamp(p["min_timestamp"]),
                max_timestamp=None
                if p["max_timestamp"] is None
                else parse_timestamp(p["max_timestamp"]),
            )
            for p in data["partitions"]
        ]
        return cls(
            mode=PartitionMode(data["mode"]),
            output_format=OutputFormat(data["output_format"]),
            partition_count=data["partition_count"],
            routing=data["routing"],
            filter=data["filter"],
            partitions=partitions,
            input_revisions=data["input_revisions"],
            kept_revisions=data["kept_revisions"],
            dropped_by_filter=data["dropped_by_filter"],
        )

    def partition_paths(self, output_dir: str | Path) -> list[Path]:
        return [Path(output_dir) / p.path for p in self.partitions]


# ---------------------------------------------------------------------------
# Writers

_XML_HEADER = '<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/" version="0.10" xml:lang="en">\n'


class _XmlPartitionWriter:
    def __init__(self, fh: IO[str]):
        self.fh = fh
        self._open_page: int | None = None
        fh.write(_XML_HEADER)

    def _close_page(self):
        if self._open_page is not None:
            self.fh.write("  </page>\n")
            self._open_page = None

    def write(self, record: RevisionRecord):
        page = record.page
        if self._open_page != page.page_id:
            self._close_page()
            self.fh.write("  <page>\n")
            self.fh.write(f"    <title>{escape(page.title)}</title>\n")
            self.fh.write(f"    <ns>{page.namespace}</ns>\n")
            self.fh.write(f"    <id>{page.page_id}</id>\n")
            if page.redirect_target is not None:
                self.fh.write(f"    <redirect title={quoteattr(page.redirect_target)} />\n")
            self._open_page = page.page_id
        parts = ["    <revision>\n", f"      <id>{record.revision_id}</id>\n"]
        if record.parent_id is not None:
            parts.append(f"      <parentid>{record.parent_id}</parentid>\n")
        parts.append(f"      <timestamp>{format_timestamp(record.timestamp)}</timestamp>\n")
        if record.contributor is not None:
            parts.append(
                "      <contributor><username>%s</username></contributor>\n"
                % escape(record.contributor)
            )
        if record.comment is not None:
            parts.append(f"      <comment>{escape(record.comment)}</comment>\n")
        if record.text_deleted:
            parts.append('      <text deleted="deleted" />\n')
        else:
            parts.append(
                f'      <text xml:space="preserve">{escape(record.text)}</text>\n'
            )
        parts.append("    </revision>\n")
        self.fh.write("".join(parts))

    def close(self):
        self._close_page()
        self.fh.write("</mediawiki>\n")


class _JsonlPartitionWriter:
    # Field names are frozen; see the partition docs in the README.
    def __init__(self, fh: IO[str]):
        self.fh = fh

    def write(self, record: RevisionRecord):
        page = record.page
        obj = {
            "page_id": page.page_id,
            "title": page.title,
            "ns": page.namespace,
            "redirect": page.redirect_target,
            "rev_id": record.revision_id,
            "parent_id": record.parent_id,
            "timestamp": format_timestamp(record.timestamp),
            "contributor": record.contributor,
            "comment": record.comment,
            "text": record.text,
            "deleted": record.text_deleted,
        }
        try:
            self.fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
        except (TypeError, ValueError) as exc:
            raise FormatError(f"record not serializable as json-lines: {exc}") from exc

    def close(self):
        pass


def partition_stream(
    stream: Iterable[DumpEvent], plan: PartitionPlan
) -> PartitionManifest:
    """Write the stream into ``plan.partition_count`` files plus a manifest.

    Entity-wise: all revisions of one page land in exactly one file.
    Document-wise: revisions are dealt round-robin in arrival order.
    """
    out_dir = plan.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = plan.output_format.extension
    infos = [
        PartitionInfo(path=f"part-{i:05d}.{ext}") for i in range(plan.partition_count)
    ]
    handles = [open(out_dir / info.path, "w", encoding="utf-8") for info in infos]
    if plan.output_format == OutputFormat.XML:
        writers = [_XmlPartitionWriter(fh) for fh in handles]
    else:
        writers = [_JsonlPartitionWriter(fh) for fh in handles]

    manifest = PartitionManifest(
        mode=plan.mode,
        output_format=plan.output_format,
        partition_count=plan.partition_count,
        routing=ROUTING_HASH if plan.mode == PartitionMode.ENTITY else "round-robin",
        filter=plan.filter.describe(),
        partitions=infos,
    )
    rr = 0
    try:
        for event in stream:
            if not isinstance(event, RevisionRecord):
                continue
            manifest.input_revisions += 1
            if not apply_filter(event, plan.filter):
                manifest.dropped_by_filter += 1
                continue
            if plan.mode == PartitionMode.ENTITY:
                idx = entity_route(event.page.page_id, plan.partition_count)
            else:
                idx = rr % plan.partition_count
                rr += 1
            writers[idx].write(event)
            info = infos[idx]
            info.revision_count += 1
            ts = event.timestamp
            info.min_timestamp = ts if info.min_timestamp is None else min(info.min_timestamp, ts)
            info.max_timestamp = ts if info.max_timestamp is None else max(info.max_timestamp, ts)
            manifest.kept_revisions += 1
    finally:
        for writer in writers:
            writer.close()
        for fh in handles:
            fh.close()

    for info in infos:
        info.byte_size = (out_dir / info.path).stat().st_size
    manifest.save(out_dir)
    return manifest


# ---------------------------------------------------------------------------
# Partition readers (round-trip support)


def read_partition(path: str | Path) -> Iterator[RevisionRecord]:
    """Reload RevisionRecords from a partition file (either format)."""
    path = Path(path)
    if path.suffix == ".jsonl":
        yield from _read_jsonl(path)
    else:
        for event in open_dump(DumpSource.from_path(path)):
            if isinstance(event, RevisionRecord):
                yield event


def _read_jsonl(path: Path) -> Iterator[RevisionRecord]:
    pages: dict[int, PageHeader] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad json-lines record: {exc}") from exc
            try:
                header = pages.get(obj["page_id"])
                if (
                    header is None
                    or header.title != obj["title"]
                    or header.namespace != obj["ns"]
                    or header.redirect_target != obj["redirect"]
                ):
                    header = PageHeader(
                        page_id=obj["page_id"],
                        title=obj["title"],
                        namespace=obj["ns"],
                        redirect_target=obj["redirect"],
                    )
                    pages[obj["page_id"]] = header
                yield RevisionRecord(
                    page=header,
                    revision_id=obj["rev_id"],
                    timestamp=parse_timestamp(obj["timestamp"]),
                    text=obj["text"],
                    parent_id=obj["parent_id"],
                    contributor=obj["contributor"],
                    comment=obj["comment"],
                    text_deleted=obj["deleted"],
                )
            except KeyError as exc:
                raise FormatError(f"{path}:{lineno}: missing field {exc}") from exc
