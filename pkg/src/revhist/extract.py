"""The transformer layer: partition files in, (key, value) records out.

An operator chain of filters, at most one projection and optional
seeded sampling is pushed down in front of payload construction, so
text that a filter rejects is never tokenized, diffed or scanned for
links. Output is ordered by (page, timestamp) within a partition.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field as dc_field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Union

from .diff import diff_revisions
from .dump import RevisionRecord
from .errors import DumpIOError, FormatError, UnknownKindError
from .filters import EntitySet, FilterSpec, Normalization, apply_filter
from .partition import read_partition, splitmix64
from .timeutil import format_timestamp, parse_date, parse_timestamp
from .wikitext import extract_anchors, extract_fulltext


class Kind(str, Enum):
    METADATA = "metadata"
    FULLTEXT = "fulltext"
    ANCHORS = "anchors"
    DELTA = "delta"


def entity_key(title: str) -> str:
    """Canonical entity key for a page title: case-folded, underscored."""
    return title.strip().casefold().replace(" ", "_")


@dataclass(frozen=True)
class EmittedRecord:
    """One (key, value) pair; the key is (kind, page, revision)."""

    page_id: int
    entity: str
    revision_id: int
    timestamp: int
    kind: Kind
    payload: Mapping
    deleted: bool = False
    attributes: Mapping[str, str] = dc_field(default_factory=dict)

    @property
    def key(self) -> tuple[int, int]:
        return (self.page_id, self.revision_id)


@dataclass(frozen=True)
class FilterOp:
    spec: FilterSpec


@dataclass(frozen=True)
class ProjectOp:
    kind: Kind


@dataclass(frozen=True)
class SampleOp:
    rate: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.rate <= 1.0):
            raise ValueError(f"sample rate must be in (0, 1], got {self.rate}")

    def keeps(self, revision_id: int) -> bool:
        h = splitmix64(((self.seed & 0xFFFFFFFF) << 32) ^ splitmix64(revision_id))
        return h < int(self.rate * 2**64)


Operator = Union[FilterOp, ProjectOp, SampleOp]


@dataclass(frozen=True)
class OperatorChain:
    operators: tuple[Operator, ...]

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        projects = [op for op in self.operators if isinstance(op, ProjectOp)]
        if len(projects) > 1:
            raise ValueError("at most one project operator per chain")

    @property
    def kind(self) -> Kind:
        for op in self.operators:
            if isinstance(op, ProjectOp):
                return op.kind
        return Kind.METADATA

    def accepts(self, record: RevisionRecord) -> bool:
        for op in self.operators:
            if isinstance(op, FilterOp):
                if not apply_filter(record, op.spec):
                    return False
            elif isinstance(op, SampleOp):
                if not op.keeps(record.revision_id):
                    return False
        return True


def parse_ops(text: str) -> OperatorChain:
    """Parse the CLI chain grammar, e.g.
    ``filter:from=2012-05-01,to=2012-06-01;project:fulltext;sample:rate=0.5,seed=1``.
    """
    ops: list[Operator] = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        name, _, argtext = part.partition(":")
        name = name.strip()
        args: dict[str, str] = {}
        flags: list[str] = []
        for item in argtext.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" in item:
                k, v = item.split("=", 1)
                args[k.strip()] = v.strip()
            else:
                flags.append(item)
        if name == "project":
            kind_name = flags[0] if flags else argtext.strip()
            try:
                ops.append(ProjectOp(Kind(kind_name)))
            except ValueError:
                raise UnknownKindError(f"unknown projection kind: {kind_name!r}") from None
        elif name == "filter":
            ops.append(FilterOp(_parse_filter_args(args, flags)))
        elif name == "sample":
            try:
                rate = float(args["rate"])
                seed = int(args.get("seed", "0"))
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad sample operator args: {argtext!r}") from exc
            ops.append(SampleOp(rate, seed))
        else:
            raise FormatError(f"unknown operator: {name!r}")
    return OperatorChain(tuple(ops))


def _parse_when(value: str) -> int:
    if "T" in value:
        return parse_timestamp(value)
    return parse_date(value)


def _parse_filter_args(args: dict[str, str], flags: list[str]) -> FilterSpec:
    time_range = None
    if "from" in args or "to" in args:
        start = _parse_when(args["from"]) if "from" in args else 0
        end = _parse_when(args["to"]) if "to" in args else 1 << 40
        time_range = (start, end)
    namespaces = None
    if "ns" in args:
        namespaces = frozenset(int(v) for v in args["ns"].split("+") if v != "")
    entity_set = None
    if "entities" in args:
        norm = Normalization(args.get("entities-norm", "title-exact"))
        entity_set = EntitySet.from_file(args["entities"], norm)
    articles_only = "articles-only" in flags or args.get("articles-only") == "true"
    return FilterSpec(
        time_range=time_range,
        namespaces=namespaces,
        entity_set=entity_set,
        articles_only=articles_only,
    )


@dataclass
class TransformStats:
    records_read: int = 0
    records_emitted: int = 0
    dropped_by_filter: int = 0
    payloads_built: int = 0
    text_payloads_built: int = 0
    parent_missing: int = 0


def _metadata_payload(record: RevisionRecord) -> dict:
    page = record.page
    return {
        "title": page.title,
        "namespace": page.namespace,
        "redirect": page.redirect_target,
        "contributor": record.contributor,
        "comment": record.comment,
        "text_bytes": record.text_bytes,
    }


def _fulltext_payload(record: RevisionRecord) -> dict:
    terms = Counter(extract_fulltext(record.text))
    return {"terms": dict(sorted(terms.items()))}


def _anchors_payload(record: RevisionRecord) -> dict:
    links = extract_anchors(record.text, source_page_id=record.page.page_id)
    return {
        "links": [
            {"target": l.target_title, "anchor": l.anchor_text, "position": l.position}
            for l in links
        ]
    }


def transform(
    partition: str | Path,
    chain: OperatorChain,
    stats: TransformStats | None = None,
) -> Iterator[EmittedRecord]:
    """Run the operator chain over one partition file.

    Filters and sampling run before any payload is built (the pushdown);
    survivors are re-ordered by (page, timestamp, revision) and emitted.
    Delta payloads look parents up within this partition only; a parent
    living elsewhere degrades that delta to parent-absent semantics and
    bumps the ``parent_missing`` counter.
    """
    if stats is None:
        stats = TransformStats()
    kind = chain.kind
    want_parent_texts = kind == Kind.DELTA

    parent_texts: dict[int, str] = {}
    survivors: list[RevisionRecord] = []
    try:
        for record in read_partition(partition):
            stats.records_read += 1
            if want_parent_texts and not record.text_deleted:
                parent_texts[record.revision_id] = record.text
            if chain.accepts(record):
                survivors.append(record)
            else:
                stats.dropped_by_filter += 1
    except OSError as exc:
        raise DumpIOError(str(exc)) from exc

    survivors.sort(key=lambda r: (r.page.page_id, r.timestamp, r.revision_id))

    for record in survivors:
        attributes: dict[str, str] = {}
        if kind == Kind.METADATA:
            payload = _metadata_payload(record)
        elif kind == Kind.FULLTEXT:
            payload = _fulltext_payload(record)
            stats.text_payloads_built += 1
        elif kind == Kind.ANCHORS:
            payload = _anchors_payload(record)
            stats.text_payloads_built += 1
        elif kind == Kind.DELTA:
            parent_text = None
            if record.parent_id is not None:
                parent_text = parent_texts.get(record.parent_id)
                if parent_text is None:
                    stats.parent_missing += 1
                    attributes["parent_missing"] = "true"
            delta = diff_revisions(
                parent_text or "",
                record.text,
                revision_id=record.revision_id,
                parent_id=record.parent_id,
            )
            payload = delta.to_payload()
            stats.text_payloads_built += 1
        else:  # pragma: no cover - enum is closed
            raise UnknownKindError(str(kind))
        stats.payloads_built += 1
        stats.records_emitted += 1
        yield EmittedRecord(
            page_id=record.page.page_id,
            entity=entity_key(record.page.title),
            revision_id=record.revision_id,
            timestamp=record.timestamp,
            kind=kind,
            payload=payload,
            deleted=record.text_deleted,
            attributes=attributes,
        )


# ---------------------------------------------------------------------------
# Emitted-record json-lines IO (field names frozen; see README)


def write_emitted(records: Iterable[EmittedRecord], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "page_id": rec.page_id,
                "entity": rec.entity,
                "rev_id": rec.revision_id,
                "timestamp": format_timestamp(rec.timestamp),
                "kind": rec.kind.value,
                "deleted": rec.deleted,
                "payload": rec.payload,
            }
            if rec.attributes:
                obj["attributes"] = dict(rec.attributes)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_emitted(path: str | Path) -> Iterator[EmittedRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield EmittedRecord(
                    page_id=obj["page_id"],
                    entity=obj["entity"],
                    revision_id=obj["rev_id"],
                    timestamp=parse_timestamp(obj["timestamp"]),
                    kind=Kind(obj["kind"]),
                    payload=obj["payload"],
                    deleted=obj["deleted"],
                    attributes=obj.get("attributes", {}),
                )
            except (KeyError, ValueError) as exc:
                raise FormatError(
                    f"{path}:{lineno}: bad emitted record: {exc}"
                ) from exc
