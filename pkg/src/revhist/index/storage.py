"""On-disk segment format for the temporal index.

One segment file holds term and entity dictionaries plus columnar
posting arrays sorted by (field, term, timestamp, entity), a secondary
permutation ordered by (field, entity, timestamp), and the document
table used for idempotent re-indexing. Everything is little-endian;
each segment's sha256 lives in the index meta file and is verified on
open. Sealed segments are immutable.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import IndexCorruptError

MAGIC = b"RHIX"
FORMAT_VERSION = 1

_HEAD = struct.Struct("<4sHHIIQQ")  # magic, version, flags, terms, entities, postings, docs


@dataclass(frozen=True)
class SegmentMeta:
    """Descriptor of a sealed segment as recorded in meta.json."""

    segment_id: int
    file: str
    sha256: str
    posting_count: int
    doc_count: int
    min_ts: int | None
    max_ts: int | None

    def to_json(self) -> dict:
        return {
            "id": self.segment_id,
            "file": self.file,
            "sha256": self.sha256,
            "posting_count": self.posting_count,
            "doc_count": self.doc_count,
            "min_ts": self.min_ts,
            "max_ts": self.max_ts,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SegmentMeta":
        return cls(
            segment_id=obj["id"],
            file=obj["file"],
            sha256=obj["sha256"],
            posting_count=obj["posting_count"],
            doc_count=obj["doc_count"],
            min_ts=obj["min_ts"],
            max_ts=obj["max_ts"],
        )


class SegmentData:
    """A sealed segment loaded into memory, ready for range queries."""

    __slots__ = (
        "terms", "entities", "field", "term", "entity", "ts", "freq",
        "term_key", "ent_order", "ent_key", "ent_ts",
        "doc_field", "doc_page", "doc_rev",
    )

    def __init__(self, terms, entities, field, term, entity, ts, freq,
                 ent_order, doc_field, doc_page, doc_rev):
        self.terms: list[str] = terms
        self.entities: list[str] = entities
        self.field = field
        self.term = term
        self.entity = entity
        self.ts = ts
        self.freq = freq
        # composite keys for binary search
        self.term_key = (field.astype(np.uint64) << 32) | term.astype(np.uint64)
        self.ent_order = ent_order
        self.ent_key = (
            field[ent_order].astype(np.uint64) << 32
        ) | entity[ent_order].astype(np.uint64)
        self.ent_ts = ts[ent_order]
        self.doc_field = doc_field
        self.doc_page = doc_page
        self.doc_rev = doc_rev

    @property
    def posting_count(self) -> int:
        return int(self.field.shape[0])


def _pack_strings(strings: list[str]) -> bytes:
    parts = []
    for s in strings:
        raw = s.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise IndexCorruptError(f"dictionary entry too long ({len(raw)} bytes)")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
    return b"".join(parts)


def _unpack_strings(buf: memoryview, count: int, pos: int) -> tuple[list[str], int]:
    out = []
    for _ in range(count):
        (length,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        out.append(bytes(buf[pos : pos + length]).decode("utf-8"))
        pos += length
    return out, pos


def write_segment(
    path: Path,
    postings: dict[tuple[int, str, str, int], int],
    docs: set[tuple[int, int, int]],
) -> str:
    """Write aggregated postings and doc keys; returns the sha256 hex."""
    terms = sorted({key[1] for key in postings})
    entities = sorted({key[2] for key in postings})
    term_id = {t: i for i, t in enumerate(terms)}
    ent_id = {e: i for i, e in enumerate(entities)}

    n = len(postings)
    field = np.empty(n, dtype="<u1")
    term = np.empty(n, dtype="<u4")
    entity = np.empty(n, dtype="<u4")
    ts = np.empty(n, dtype="<i8")
    freq = np.empty(n, dtype="<u4")
    for i, ((f, t, e, when), count) in enumerate(postings.items()):
        field[i] = f
        term[i] = term_id[t]
        entity[i] = ent_id[e]
        ts[i] = when
        freq[i] = count

    doc_list = sorted(docs)
    d = len(doc_list)
    doc_field = np.empty(d, dtype="<u1")
    doc_page = np.empty(d, dtype="<u8")
    doc_rev = np.empty(d, dtype="<u8")
    for i, (f, p, r) in enumerate(doc_list):
        doc_field[i] = f
        doc_page[i] = p
        doc_rev[i] = r

    return write_segment_arrays(
        path, terms, entities, field, term, entity, ts, freq,
        doc_field, doc_page, doc_rev,
    )


def write_segment_arrays(
    path: Path,
    terms: list[str],
    entities: list[str],
    field, term, entity, ts, freq,
    doc_field, doc_page, doc_rev,
) -> str:
    """Array-level writer; sorts postings and builds the entity order."""
    field = np.asarray(field, dtype="<u1")
    term = np.asarray(term, dtype="<u4")
    entity = np.asarray(entity, dtype="<u4")
    ts = np.asarray(ts, dtype="<i8")
    freq = np.asarray(freq, dtype="<u4")
    order = np.lexsort((entity, ts, term, field))
    field, term, entity, ts, freq = (
        field[order], term[order], entity[order], ts[order], freq[order]
    )
    ent_order = np.lexsort((ts, entity, field)).astype("<u4")

    doc_field = np.asarray(doc_field, dtype="<u1")
    doc_page = np.asarray(doc_page, dtype="<u8")
    doc_rev = np.asarray(doc_rev, dtype="<u8")

    blob = b"".join(
        [
            _HEAD.pack(
                MAGIC, FORMAT_VERSION, 0, len(terms), len(entities),
                int(field.shape[0]), int(doc_field.shape[0]),
            ),
            _pack_strings(terms),
            _pack_strings(entities),
            field.tobytes(), term.tobytes(), entity.tobytes(),
            ts.tobytes(), freq.tobytes(), ent_order.tobytes(),
            doc_field.tobytes(), doc_page.tobytes(), doc_rev.tobytes(),
        ]
    )
    path.write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def read_segment(path: Path, expected_sha: str | None = None) -> SegmentData:
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IndexCorruptError(f"cannot read segment {path.name}: {exc}") from exc
    if expected_sha is not None:
        actual = hashlib.sha256(blob).hexdigest()
        if actual != expected_sha:
            raise IndexCorruptError(
                f"segment {path.name} checksum mismatch "
                f"(expected {expected_sha[:12]}…, got {actual[:12]}…)"
            )
    if len(blob) < _HEAD.size:
        raise IndexCorruptError(f"segment {path.name} truncated")
    magic, version, _flags, n_terms, n_entities, n_postings, n_docs = _HEAD.unpack_from(
        blob, 0
    )
    if magic != MAGIC:
        raise IndexCorruptError(f"segment {path.name} has bad magic")
    if version != FORMAT_VERSION:
        raise IndexCorruptError(
            f"segment {path.name} format version {version} unsupported"
        )
    view = memoryview(blob)
    pos = _HEAD.size
    terms, pos = _unpack_strings(view, n_terms, pos)
    entities, pos = _unpack_strings(view, n_entities, pos)

    def take(dtype: str, count: int):
        nonlocal pos
        arr = np.frombuffer(view, dtype=dtype, count=count, offset=pos)
        pos += arr.nbytes
        return arr

    try:
        field = take("<u1", n_postings)
        term = take("<u4", n_postings)
        entity = take("<u4", n_postings)
        ts = take("<i8", n_postings)
        freq = take("<u4", n_postings)
        ent_order = take("<u4", n_postings)
        doc_field = take("<u1", n_docs)
        doc_page = take("<u8", n_docs)
        doc_rev = take("<u8", n_docs)
    except ValueError as exc:
        raise IndexCorruptError(f"segment {path.name} truncated: {exc}") from exc
    return SegmentData(
        terms, entities, field, term, entity, ts, freq, ent_order,
        doc_field, doc_page, doc_rev,
    )
