"""Embedded incremental temporal inverted index.

Records are acknowledged into a pending buffer; ``refresh`` makes them
queryable; ``seal_segment`` persists the queryable buffer as an
immutable on-disk segment; size-tiered merges keep the segment count
logarithmic. A posting is the unique tuple (field, term, entity,
timestamp) with an aggregated frequency, so any ingestion order,
segmentation and merge schedule yields identical query results.

Queries gather matching postings from every source (sealed segments
plus the in-memory buffer) into one aggregation keyed by the full
tuple; counts are unique-posting counts unless frequency weighting is
requested.
"""

from __future__ import annotations

import json
import os
from bisect import bisect_left
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .._kernels import TOKENIZER_ID, tokenize
from ..errors import (
    BadRangeError,
    CorruptPayloadError,
    IndexClosedError,
    IndexCorruptError,
    UnknownFieldError,
    UnknownSegmentError,
)
from ..extract import EmittedRecord, Kind
from ..timeutil import bucket_start, bucket_starts, format_date
from .storage import (
    FORMAT_VERSION,
    SegmentData,
    SegmentMeta,
    read_segment,
    write_segment,
    write_segment_arrays,
)

META_NAME = "meta.json"

FIELDS = ("anchor", "fulltext")
_FIELD_CODE = {"anchor": 0, "fulltext": 1}
_KIND_FIELD = {Kind.ANCHORS: 0, Kind.FULLTEXT: 1}

# Size-tiered merge policy: merge whenever this many segments share a tier.
MERGE_FANIN = 4
_TIER_BASE = 1024


def _tier(posting_count: int) -> int:
    tier = 0
    size = max(posting_count, 1)
    while size >= _TIER_BASE:
        size //= MERGE_FANIN
        tier += 1
    return tier


def _field_code(name: str) -> int:
    try:
        return _FIELD_CODE[name]
    except KeyError:
        raise UnknownFieldError(f"unknown field {name!r} (expected anchor|fulltext)") from None


def _check_range(time_range: tuple[int, int]):
    start, end = time_range
    if start >= end:
        raise BadRangeError(f"range start must precede end, got [{start}, {end})")


@dataclass(frozen=True)
class TimelineHistogram:
    granularity: str
    time_range: tuple[int, int]
    buckets: tuple[tuple[int, int], ...]  # (bucket_start_ts, count)

    def total(self) -> int:
        return sum(c for _, c in self.buckets)

    def to_payload(self) -> dict:
        return {
            "granularity": self.granularity,
            "range": {
                "from": format_date(self.time_range[0]),
                "to": format_date(self.time_range[1]),
            },
            "buckets": [
                {"start": format_date(ts), "count": count} for ts, count in self.buckets
            ],
        }


@dataclass(frozen=True)
class TermRanking:
    k: int
    entries: tuple[tuple[str, int], ...]  # (term, score) best first

    def to_payload(self) -> dict:
        return {
            "k": self.k,
            "entries": [{"term": t, "score": s} for t, s in self.entries],
        }


@dataclass(frozen=True)
class CoOccurrence:
    key_a: str
    key_b: str
    series_a: TimelineHistogram
    series_b: TimelineHistogram
    overlap: tuple[tuple[int, int], ...]

    def to_payload(self) -> dict:
        return {
            "a": {"key": self.key_a, **self.series_a.to_payload()},
            "b": {"key": self.key_b, **self.series_b.to_payload()},
            "overlap": [
                {"start": format_date(ts), "count": count} for ts, count in self.overlap
            ],
        }


@dataclass(frozen=True)
class IndexSegment:
    """Public descriptor of one sealed segment."""

    segment_id: int
    path: Path
    posting_count: int
    doc_count: int
    min_ts: int | None
    max_ts: int | None


@dataclass
class IndexStats:
    segments: int
    doc_count: int
    posting_count: int
    pending: int
    time_span: tuple[int, int] | None
    attributes: dict = dc_field(default_factory=dict)


class TemporalIndex:
    """One-writer, many-reader temporal term index over emitted records."""

    def __init__(self, path: Path, metas: list[SegmentMeta], next_id: int,
                 attributes: dict):
        self.path = path
        self._metas = metas
        self._segments: dict[int, SegmentData] = {}
        self._next_id = next_id
        self.attributes = attributes
        self._pending: list[tuple[int, str, str, int, int]] = []
        self._pending_docs: set[tuple[int, int, int]] = set()
        self._visible: dict[tuple[int, str, str, int], int] = {}
        self._visible_docs: set[tuple[int, int, int]] = set()
        self._all_docs: set[tuple[int, int, int]] = set()
        self._closed = False

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def create(cls, path: str | Path) -> "TemporalIndex":
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        if (path / META_NAME).exists():
            raise IndexCorruptError(f"index already exists at {path}")
        index = cls(path, [], 1, {})
        index._write_meta()
        return index

    @classmethod
    def open(cls, path: str | Path) -> "TemporalIndex":
        path = Path(path)
        meta_path = path / META_NAME
        try:
            meta = json.loads(meta_path.read_text())
        except OSError as exc:
            raise IndexCorruptError(f"cannot open index at {path}: {exc}") from exc
        except ValueError as exc:
            raise IndexCorruptError(f"unreadable index meta: {exc}") from exc
        if meta.get("format_version") != FORMAT_VERSION:
            raise IndexCorruptError(
                f"index format version {meta.get('format_version')!r} unsupported"
            )
        if meta.get("tokenizer") != TOKENIZER_ID:
            raise IndexCorruptError(
                f"index built with tokenizer {meta.get('tokenizer')!r}, "
                f"this build uses {TOKENIZER_ID!r}"
            )
        metas = [SegmentMeta.from_json(o) for o in meta["segments"]]
        index = cls(path, metas, meta["next_segment_id"], meta.get("attributes", {}))
        for sm in metas:
            data = read_segment(path / sm.file, sm.sha256)
            index._segments[sm.segment_id] = data
            for f, p, r in zip(data.doc_field, data.doc_page, data.doc_rev):
                index._all_docs.add((int(f), int(p), int(r)))
        return index

    @classmethod
    def open_or_create(cls, path: str | Path) -> "TemporalIndex":
        if (Path(path) / META_NAME).exists():
            return cls.open(path)
        return cls.create(path)

    def close(self):
        """Persist everything (refresh + seal) and write the meta file."""
        if self._closed:
            return
        self.refresh()
        if self._visible or self._visible_docs:
            self.seal_segment()
        self._write_meta()
        self._closed = True

    def _write_meta(self):
        meta = {
            "format_version": FORMAT_VERSION,
            "tokenizer": TOKENIZER_ID,
            "next_segment_id": self._next_id,
            "segments": [m.to_json() for m in self._metas],
            "attributes": self.attributes,
        }
        tmp = self.path / (META_NAME + ".tmp")
        tmp.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, self.path / META_NAME)

    def _ensure_open(self):
        if self._closed:
            raise IndexClosedError("index has been closed")

    # -- writes --------------------------------------------------------------

    def index_record(self, record: EmittedRecord) -> bool:
        """Acknowledge one record; visible after the next refresh.

        Returns False (and does nothing) when this (kind, page,
        revision) was already indexed, making re-indexing idempotent.
        Deleted records register their key but contribute no postings.
        """
        self._ensure_open()
        fcode = _KIND_FIELD.get(record.kind)
        if fcode is None:
            raise CorruptPayloadError(
                f"kind {record.kind.value!r} is not indexable (need anchors|fulltext)"
            )
        doc_key = (fcode, record.page_id, record.revision_id)
        if doc_key in self._all_docs:
            return False
        terms = self._payload_terms(record, fcode)
        self._all_docs.add(doc_key)
        self._pending_docs.add(doc_key)
        if not record.deleted:
            ts = record.timestamp
            entity = record.entity
            append = self._pending.append
            for term, freq in terms.items():
                append((fcode, term, entity, ts, freq))
        return True

    @staticmethod
    def _payload_terms(record: EmittedRecord, fcode: int) -> dict[str, int]:
        payload = record.payload
        try:
            if fcode == 0:
                terms: dict[str, int] = {}
                for link in payload["links"]:
                    for token in tokenize(link["anchor"]):
                        terms[token] = terms.get(token, 0) + 1
                return terms
            terms = payload["terms"]
            if not isinstance(terms, dict) or not all(
                isinstance(v, int) and v >= 1 for v in terms.values()
            ):
                raise CorruptPayloadError("fulltext terms must map token -> count >= 1")
            return terms
        except (KeyError, TypeError) as exc:
            raise CorruptPayloadError(f"malformed {record.kind.value} payload: {exc}") from exc

    def bulk_index(self, records: Iterable[EmittedRecord], *,
                   seal_every: int = 500_000) -> tuple[int, int]:
        """Index many records with periodic seals and merges.

        Returns (indexed, duplicates). Non-indexable kinds are the
        caller's problem; filter them first.
        """
        indexed = duplicates = 0
        for record in records:
            if self.index_record(record):
                indexed += 1
            else:
                duplicates += 1
            if len(self._pending) >= seal_every:
                self.refresh()
                self.seal_segment()
                self.maybe_merge()
        return indexed, duplicates

    def refresh(self):
        """Visibility barrier: all acknowledged records become queryable."""
        self._ensure_open()
        visible = self._visible
        for fcode, term, entity, ts, freq in self._pending:
            key = (fcode, term, entity, ts)
            visible[key] = visible.get(key, 0) + freq
        self._pending.clear()
        self._visible_docs |= self._pending_docs
        self._pending_docs.clear()

    def seal_segment(self) -> IndexSegment:
        """Persist the queryable in-memory buffer as an immutable segment."""
        self._ensure_open()
        seg_id = self._next_id
        self._next_id += 1
        fname = f"seg-{seg_id:06d}.rhix"
        postings = self._visible
        docs = self._visible_docs
        sha = write_segment(self.path / fname, postings, docs)
        ts_values = [key[3] for key in postings]
        sm = SegmentMeta(
            segment_id=seg_id,
            file=fname,
            sha256=sha,
            posting_count=len(postings),
            doc_count=len(docs),
            min_ts=min(ts_values) if ts_values else None,
            max_ts=max(ts_values) if ts_values else None,
        )
        self._metas.append(sm)
        self._segments[seg_id] = read_segment(self.path / fname, sha)
        self._visible = {}
        self._visible_docs = set()
        self._write_meta()
        return self._describe(sm)

    def _describe(self, sm: SegmentMeta) -> IndexSegment:
        return IndexSegment(
            segment_id=sm.segment_id,
            path=self.path / sm.file,
            posting_count=sm.posting_count,
            doc_count=sm.doc_count,
            min_ts=sm.min_ts,
            max_ts=sm.max_ts,
        )

    def merge_segments(self, ids: Sequence[int]) -> IndexSegment:
        """Replace the given segments with one whose query results equal
        their union; the inputs are retired and deleted."""
        self._ensure_open()
        ids = list(ids)
        known = {m.segment_id for m in self._metas}
        for sid in ids:
            if sid not in known:
                raise UnknownSegmentError(f"no such segment: {sid}")
        if not ids:
            raise UnknownSegmentError("merge requires at least one segment id")

        datas = [self._segments[sid] for sid in ids]
        terms = sorted(set().union(*(d.terms for d in datas)))
        entities = sorted(set().union(*(d.entities for d in datas)))
        term_id = {t: i for i, t in enumerate(terms)}
        ent_id = {e: i for i, e in enumerate(entities)}

        def remap(data: SegmentData):
            tmap = np.array([term_id[t] for t in data.terms] or [0], dtype=np.uint32)
            emap = np.array([ent_id[e] for e in data.entities] or [0], dtype=np.uint32)
            return tmap[data.term], emap[data.entity]

        remapped = [remap(d) for d in datas]
        field = np.concatenate([d.field for d in datas])
        term = np.concatenate([r[0] for r in remapped])
        entity = np.concatenate([r[1] for r in remapped])
        ts = np.concatenate([d.ts for d in datas])
        freq = np.concatenate([d.freq for d in datas]).astype(np.int64)

        # aggregate duplicate (field, term, entity, ts) tuples
        order = np.lexsort((entity, ts, term, field))
        field, term, entity, ts, freq = (
            field[order], term[order], entity[order], ts[order], freq[order]
        )
        if field.shape[0]:
            same = (
                (field[1:] == field[:-1])
                & (term[1:] == term[:-1])
                & (entity[1:] == entity[:-1])
                & (ts[1:] == ts[:-1])
            )
            starts = np.concatenate(([0], np.nonzero(~same)[0] + 1))
            field, term, entity, ts = (
                field[starts], term[starts], entity[starts], ts[starts]
            )
            freq = np.add.reduceat(freq, starts)

        doc_stack = np.concatenate(
            [
                np.stack(
                    [d.doc_field.astype(np.uint64), d.doc_page, d.doc_rev], axis=1
                )
                for d in datas
            ]
        ) if datas else np.empty((0, 3), dtype=np.uint64)
        doc_stack = np.unique(doc_stack, axis=0) if doc_stack.shape[0] else doc_stack

        seg_id = self._next_id
        self._next_id += 1
        fname = f"seg-{seg_id:06d}.rhix"
        sha = write_segment_arrays(
            self.path / fname, terms, entities,
            field, term, entity, ts, freq.astype(np.uint32),
            doc_stack[:, 0].astype(np.uint8), doc_stack[:, 1], doc_stack[:, 2],
        )
        sm = SegmentMeta(
            segment_id=seg_id,
            file=fname,
            sha256=sha,
            posting_count=int(field.shape[0]),
            doc_count=int(doc_stack.shape[0]),
            min_ts=int(ts.min()) if ts.shape[0] else None,
            max_ts=int(ts.max()) if ts.shape[0] else None,
        )
        retired = [m for m in self._metas if m.segment_id in ids]
        self._metas = [m for m in self._metas if m.segment_id not in ids] + [sm]
        self._segments[seg_id] = read_segment(self.path / fname, sha)
        self._write_meta()
        for m in retired:
            self._segments.pop(m.segment_id, None)
            try:
                (self.path / m.file).unlink()
            except OSError:
                pass
        return self._describe(sm)

    def maybe_merge(self) -> list[IndexSegment]:
        """Apply the size-tiered policy until no tier holds MERGE_FANIN."""
        out = []
        while True:
            tiers: dict[int, list[SegmentMeta]] = {}
            for m in self._metas:
                tiers.setdefault(_tier(m.posting_count), []).append(m)
            candidates = None
            for metas in tiers.values():
                if len(metas) >= MERGE_FANIN:
                    metas.sort(key=lambda m: m.segment_id)
                    candidates = metas[:MERGE_FANIN]
                    break
            if candidates is None:
                return out
            out.append(self.merge_segments([m.segment_id for m in candidates]))

    # -- query helpers -------------------------------------------------------

    def _iter_term_postings(self, fcode: int, term: str, lo: int, hi: int):
        """Yield (entity, ts, freq) for postings of one (field, term)."""
        for data in self._segments.values():
            tid = bisect_left(data.terms, term)
            if tid >= len(data.terms) or data.terms[tid] != term:
                continue
            key = (fcode << 32) | tid
            a = int(np.searchsorted(data.term_key, key, "left"))
            b = int(np.searchsorted(data.term_key, key, "right"))
            if a == b:
                continue
            a2 = a + int(np.searchsorted(data.ts[a:b], lo, "left"))
            b2 = a + int(np.searchsorted(data.ts[a:b], hi, "left"))
            entities = data.entities
            e_arr, ts_arr, q_arr = data.entity, data.ts, data.freq
            for i in range(a2, b2):
                yield entities[e_arr[i]], int(ts_arr[i]), int(q_arr[i])
        for (f, t, e, ts), freq in self._visible.items():
            if f == fcode and t == term and lo <= ts < hi:
                yield e, ts, freq

    def _iter_entity_postings(self, fcode: int, entity: str, lo: int, hi: int):
        """Yield (term, ts, freq) for postings of one (field, entity)."""
        for data in self._segments.values():
            eid = bisect_left(data.entities, entity)
            if eid >= len(data.entities) or data.entities[eid] != entity:
                continue
            key = (fcode << 32) | eid
            a = int(np.searchsorted(data.ent_key, key, "left"))
            b = int(np.searchsorted(data.ent_key, key, "right"))
            if a == b:
                continue
            a2 = a + int(np.searchsorted(data.ent_ts[a:b], lo, "left"))
            b2 = a + int(np.searchsorted(data.ent_ts[a:b], hi, "left"))
            terms = data.terms
            rows = data.ent_order[a2:b2]
            t_arr, ts_arr, q_arr = data.term, data.ts, data.freq
            for row in rows:
                yield terms[t_arr[row]], int(ts_arr[row]), int(q_arr[row])
        for (f, t, e, ts), freq in self._visible.items():
            if f == fcode and e == entity and lo <= ts < hi:
                yield t, ts, freq

    def _gather(self, q: str, fcode: int, lo: int, hi: int, match: str):
        """Aggregated postings {(other_key, ts): freq} for a query.

        For match='term' the other key is the entity, for
        match='entity' it is the term. Aggregation across sources keyed
        by the full posting tuple keeps results independent of the
        segmentation.
        """
        agg: dict[tuple[str, int], int] = {}
        if match == "term":
            source = self._iter_term_postings(fcode, q, lo, hi)
        elif match == "entity":
            source = self._iter_entity_postings(fcode, q, lo, hi)
        else:
            raise BadRangeError(f"match must be term|entity, got {match!r}")
        for other, ts, freq in source:
            key = (other, ts)
            agg[key] = agg.get(key, 0) + freq
        return agg

    # -- queries ---------------------------------------------------------

    def query_timeline(
        self,
        q: str,
        *,
        field: str,
        granularity: str,
        time_range: tuple[int, int],
        match: str = "term",
        weighted: bool = False,
    ) -> TimelineHistogram:
        """Bucketed posting counts over [start, end), zero-filled.

        Counts are unique matching postings per bucket; with
        ``weighted=True`` frequencies are summed instead.
        """
        self._ensure_open()
        _check_range(time_range)
        fcode = _field_code(field)
        if granularity not in ("day", "week"):
            raise BadRangeError(f"granularity must be day|week, got {granularity!r}")
        starts = bucket_starts(time_range[0], time_range[1], granularity)
        counts = dict.fromkeys(starts, 0)
        agg = self._gather(q, fcode, time_range[0], time_range[1], match)
        for (_, ts), freq in agg.items():
            bucket = bucket_start(ts, granularity)
            counts[bucket] += freq if weighted else 1
        return TimelineHistogram(
            granularity=granularity,
            time_range=time_range,
            buckets=tuple((s, counts[s]) for s in starts),
        )

    def top_terms(
        self,
        q: str,
        *,
        time_range: tuple[int, int],
        k: int,
        field: str = "anchor",
        match: str = "term",
    ) -> TermRanking:
        """The k highest-scoring terms among postings of the revisions
        matched by the query; score is the total term frequency there.

        A term query matches every (entity, timestamp) that holds a
        posting of the term; an entity query matches all of that
        entity's (entity, timestamp) pairs in range.
        """
        self._ensure_open()
        _check_range(time_range)
        if k < 1:
            raise BadRangeError(f"k must be >= 1, got {k}")
        fcode = _field_code(field)
        lo, hi = time_range

        if match == "entity":
            keys = {(q, ts) for (_, ts) in self._gather(q, fcode, lo, hi, "entity")}
        else:
            keys = {
                (entity, ts) for (entity, ts) in self._gather(q, fcode, lo, hi, "term")
            }

        scores: dict[str, int] = {}
        by_entity: dict[str, set[int]] = {}
        for entity, ts in keys:
            by_entity.setdefault(entity, set()).add(ts)
        for entity, ts_set in by_entity.items():
            agg: dict[tuple[str, int], int] = {}
            for term, ts, freq in self._iter_entity_postings(fcode, entity, lo, hi):
                if ts in ts_set:
                    key = (term, ts)
                    agg[key] = agg.get(key, 0) + freq
            for (term, _), freq in agg.items():
                scores[term] = scores.get(term, 0) + freq
        ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        return TermRanking(k=k, entries=tuple(ranked))

    def co_occurrence(
        self,
        entity_a: str,
        entity_b: str,
        *,
        field: str,
        granularity: str,
        time_range: tuple[int, int],
        weighted: bool = False,
    ) -> CoOccurrence:
        """Aligned per-entity timelines plus the per-bucket overlap
        min(count_a, count_b)."""
        series_a = self.query_timeline(
            entity_a, field=field, granularity=granularity,
            time_range=time_range, match="entity", weighted=weighted,
        )
        series_b = self.query_timeline(
            entity_b, field=field, granularity=granularity,
            time_range=time_range, match="entity", weighted=weighted,
        )
        overlap = tuple(
            (sa[0], min(sa[1], sb[1]))
            for sa, sb in zip(series_a.buckets, series_b.buckets)
        )
        return CoOccurrence(
            key_a=entity_a, key_b=entity_b,
            series_a=series_a, series_b=series_b, overlap=overlap,
        )

    def entity_search(self, prefix: str, *, limit: int = 20) -> list[tuple[str, int]]:
        """Entity keys by case-folded prefix, with unique-posting counts."""
        self._ensure_open()
        folded = prefix.casefold()
        matched: set[str] = set()
        for data in self._segments.values():
            for key in data.entities:
                if key.casefold().startswith(folded):
                    matched.add(key)
        for (_, _, entity, _) in self._visible:
            if entity.casefold().startswith(folded):
                matched.add(entity)
        out = []
        for key in sorted(matched):
            seen: set[tuple[int, str, int]] = set()
            for fname, fcode in _FIELD_CODE.items():
                for term, ts, _ in self._iter_entity_postings(
                    fcode, key, -(1 << 62), 1 << 62
                ):
                    seen.add((fcode, term, ts))
            out.append((key, len(seen)))
        out.sort(key=lambda kv: (-kv[1], kv[0]))
        return out[:limit]

    def has_entity(self, key: str) -> bool:
        for data in self._segments.values():
            eid = bisect_left(data.entities, key)
            if eid < len(data.entities) and data.entities[eid] == key:
                return True
        return any(e == key for (_, _, e, _) in self._visible)

    # -- introspection -----------------------------------------------------

    @property
    def segments(self) -> list[IndexSegment]:
        return [self._describe(m) for m in self._metas]

    def stats(self) -> IndexStats:
        span = None
        minimum = maximum = None
        for m in self._metas:
            if m.min_ts is not None:
                minimum = m.min_ts if minimum is None else min(minimum, m.min_ts)
                maximum = m.max_ts if maximum is None else max(maximum, m.max_ts)
        for key in self._visible:
            ts = key[3]
            minimum = ts if minimum is None else min(minimum, ts)
            maximum = ts if maximum is None else max(maximum, ts)
        if minimum is not None:
            span = (minimum, maximum)
        return IndexStats(
            segments=len(self._metas),
            doc_count=len(self._all_docs) - len(self._pending_docs),
            posting_count=sum(m.posting_count for m in self._metas) + len(self._visible),
            pending=len(self._pending),
            time_span=span,
            attributes=dict(self.attributes),
        )

    def field_summary(self) -> dict:
        """Merge-invariant global aggregates used for result digests."""
        per_field: dict[str, dict] = {}
        for fname, fcode in _FIELD_CODE.items():
            freq_sum = 0
            vocab: dict[str, int] = {}
            entities: set[str] = set()
            for data in self._segments.values():
                mask = data.field == fcode
                if not mask.any():
                    continue
                freqs = data.freq[mask].astype(np.int64)
                freq_sum += int(freqs.sum())
                sums = np.bincount(data.term[mask], weights=freqs)
                for tid in np.nonzero(sums)[0]:
                    term = data.terms[tid]
                    vocab[term] = vocab.get(term, 0) + int(sums[tid])
                for eid in np.unique(data.entity[mask]):
                    entities.add(data.entities[eid])
            for (f, term, entity, _), freq in self._visible.items():
                if f == fcode:
                    freq_sum += freq
                    vocab[term] = vocab.get(term, 0) + freq
                    entities.add(entity)
            top = sorted(vocab.items(), key=lambda kv: (-kv[1], kv[0]))[:20]
            per_field[fname] = {
                "freq_sum": freq_sum,
                "vocabulary": len(vocab),
                "entities": len(entities),
                "top_terms": top,
            }
        return per_field
