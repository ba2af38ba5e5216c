from __future__ import annotations

import io
import random
import tracemalloc

import pytest

from revhist.dump import (
    Compression,
    DumpSource,
    PageHeader,
    RevisionRecord,
    StreamStats,
    open_dump,
    parse_revision,
    seek_page_boundary,
)
from revhist.errors import (
    CodecMismatchError,
    DumpIOError,
    MalformedXmlError,
    MissingFieldError,
    NotSeekableError,
)
from oracles import byte_scan_page_offset, dom_parse_events


def events_of(path, **kw):
    return list(open_dump(DumpSource.from_path(path), **kw))


def test_smallest_dump(make_dump):
    path, summary = make_dump(pages=1, revisions_per_page=1)
    events = events_of(path)
    assert len(events) == 2
    header, record = events
    assert isinstance(header, PageHeader) and header.page_id == 10
    assert isinstance(record, RevisionRecord)
    assert record.page is header
    assert record.revision_id > 0
    assert record.text_bytes == len(record.text.encode("utf-8"))


def test_streaming_equals_dom_oracle(make_dump):
    for seed in (1, 7, 42):
        path, _ = make_dump(f"d{seed}.xml", pages=5, revisions_per_page=6, seed=seed)
        assert events_of(path) == dom_parse_events(path)


def test_compression_transparency(make_dump):
    base, _ = make_dump("t.xml", pages=4, revisions_per_page=3, seed=3)
    gz, _ = make_dump("t.xml.gz", pages=4, revisions_per_page=3, seed=3)
    bz, _ = make_dump("t.xml.bz2", pages=4, revisions_per_page=3, seed=3)
    ms, _ = make_dump("tms.xml.bz2", pages=4, revisions_per_page=3, seed=3,
                      pages_per_stream=2)
    ref = events_of(base)
    assert events_of(gz) == ref
    assert events_of(bz) == ref
    assert events_of(ms) == ref


def test_page_ids_follow_file_order(make_dump):
    path, _ = make_dump(pages=3, revisions_per_page=1)
    ids = [e.page_id for e in events_of(path) if isinstance(e, PageHeader)]
    assert ids == [10, 20, 30]


def test_deleted_text_yields_flagged_empty_revision():
    xml = b"""<mediawiki><page><title>T</title><ns>0</ns><id>1</id>
    <revision><id>5</id><timestamp>2011-01-01T00:00:00Z</timestamp>
    <text deleted="deleted" /></revision></page></mediawiki>"""
    events = list(open_dump(DumpSource(io.BytesIO(xml))))
    record = events[1]
    assert record.text == "" and record.text_deleted is True


def test_missing_ns_defaults_to_zero():
    xml = b"""<mediawiki><page><title>T</title><id>1</id>
    <revision><id>5</id><timestamp>2011-01-01T00:00:00Z</timestamp>
    <text>x</text></revision></page></mediawiki>"""
    header = next(iter(open_dump(DumpSource(io.BytesIO(xml)))))
    assert header.namespace == 0


def test_unknown_elements_are_skipped():
    xml = b"""<mediawiki><siteinfo><sitename>x</sitename></siteinfo>
    <page><title>T</title><ns>0</ns><id>1</id><sha1>abc</sha1>
    <revision><id>5</id><timestamp>2011-01-01T00:00:00Z</timestamp>
    <minor /><sha1>zzz</sha1><model>wikitext</model>
    <text>body</text></revision></page></mediawiki>"""
    events = list(open_dump(DumpSource(io.BytesIO(xml))))
    assert events[1].text == "body"


class TestParseRevision:
    page = PageHeader(page_id=3, title="T")

    def test_direct_field_mapping(self):
        rec = parse_revision(
            "<revision><id>7</id><timestamp>2011-01-01T00:00:00Z</timestamp>"
            "<text>x</text></revision>",
            self.page,
        )
        assert rec.revision_id == 7
        assert rec.timestamp == 1293840000
        assert rec.text == "x"
        assert rec.parent_id is None

    def test_parent_id(self):
        rec = parse_revision(
            "<revision><parentid>7</parentid><id>9</id>"
            "<timestamp>2011-01-01T00:00:00Z</timestamp><text>x</text></revision>",
            self.page,
        )
        assert rec.parent_id == 7

    def test_missing_timestamp(self):
        with pytest.raises(MissingFieldError):
            parse_revision("<revision><id>7</id><text>x</text></revision>", self.page)

    def test_missing_id(self):
        with pytest.raises(MissingFieldError):
            parse_revision(
                "<revision><timestamp>2011-01-01T00:00:00Z</timestamp></revision>",
                self.page,
            )


class TestSeek:
    def test_matches_byte_scan_oracle(self, make_dump):
        path, _ = make_dump(pages=3, revisions_per_page=2)
        source = DumpSource.from_path(path)
        assert seek_page_boundary(source, 0) == byte_scan_page_offset(path, 0)

    def test_fixpoint(self, make_dump):
        path, _ = make_dump(pages=2, revisions_per_page=1)
        source = DumpSource.from_path(path)
        first = seek_page_boundary(source, 0)
        assert seek_page_boundary(source, first) == first

    def test_exhaustion(self, make_dump):
        path, _ = make_dump(pages=2, revisions_per_page=1)
        source = DumpSource.from_path(path)
        assert seek_page_boundary(source, path.stat().st_size) is None
        last = path.read_bytes().rfind(b"<page>")
        assert seek_page_boundary(source, last + 1) is None

    def test_not_seekable_codec(self, make_dump):
        path, _ = make_dump("z.xml.gz", pages=1, revisions_per_page=1)
        with pytest.raises(NotSeekableError):
            seek_page_boundary(DumpSource(path, Compression.GZIP), 0)


def _boundaries(source, seed, size):
    """Boundary set from randomized probe offsets, deduplicated, sorted."""
    rng = random.Random(seed)
    probes = sorted(rng.randrange(size) for _ in range(6))
    bounds = []
    for probe in probes:
        hit = seek_page_boundary(source, probe)
        if hit is not None and hit not in bounds:
            bounds.append(hit)
    first = seek_page_boundary(source, 0)
    if first not in bounds:
        bounds.insert(0, first)
    return sorted(bounds)


def _pages_in_spans(path, compression, bounds):
    pages = []
    for i, start in enumerate(bounds):
        end = bounds[i + 1] if i + 1 < len(bounds) else None
        events = open_dump(
            DumpSource(path, compression, start_offset=start), end_offset=end
        )
        pages.extend(e.page_id for e in events if isinstance(e, PageHeader))
    return pages


def test_split_completeness_uncompressed(make_dump):
    path, _ = make_dump(pages=8, revisions_per_page=3, seed=11)
    whole = [e.page_id for e in events_of(path) if isinstance(e, PageHeader)]
    source = DumpSource.from_path(path)
    for seed in range(5):
        bounds = _boundaries(source, seed, path.stat().st_size)
        pages = _pages_in_spans(path, Compression.NONE, bounds)
        assert sorted(pages) == sorted(whole)
        assert len(pages) == len(set(pages))


def test_split_completeness_multistream(make_dump):
    path, _ = make_dump("ms.xml.bz2", pages=9, revisions_per_page=2, seed=5,
                        pages_per_stream=2)
    whole = [e.page_id for e in events_of(path) if isinstance(e, PageHeader)]
    source = DumpSource(path, Compression.BZIP2_MULTISTREAM)
    for seed in range(3):
        bounds = _boundaries(source, seed, path.stat().st_size)
        pages = _pages_in_spans(path, Compression.BZIP2_MULTISTREAM, bounds)
        assert sorted(pages) == sorted(whole)
        assert len(pages) == len(set(pages))


class TestErrors:
    def test_missing_file(self):
        with pytest.raises(DumpIOError):
            DumpSource.from_path("/nonexistent/dump.xml")

    def test_codec_mismatch_declared_gzip(self, make_dump):
        path, _ = make_dump(pages=1, revisions_per_page=1)
        with pytest.raises(CodecMismatchError):
            list(open_dump(DumpSource(path, Compression.GZIP)))

    def test_codec_mismatch_declared_none(self, make_dump):
        path, _ = make_dump("c.xml.gz", pages=1, revisions_per_page=1)
        with pytest.raises(CodecMismatchError):
            list(open_dump(DumpSource(path, Compression.NONE)))

    def test_malformed_xml_reports_byte_offset(self, make_dump, tmp_path):
        path, _ = make_dump(pages=2, revisions_per_page=2)
        data = bytearray(path.read_bytes())
        inject_at = data.index(b"<revision>", len(data) // 3)
        data[inject_at:inject_at] = b"<<<garbage"
        bad = tmp_path / "bad.xml"
        bad.write_bytes(bytes(data))
        with pytest.raises(MalformedXmlError) as err:
            list(open_dump(DumpSource.from_path(bad)))
        assert inject_at <= err.value.byte_offset <= len(data)

    def test_start_offset_rejected_for_gzip(self, make_dump):
        path, _ = make_dump("s.xml.gz", pages=1, revisions_per_page=1)
        with pytest.raises(NotSeekableError):
            DumpSource(path, Compression.GZIP, start_offset=10)

    def test_empty_source(self):
        with pytest.raises(DumpIOError):
            list(open_dump(DumpSource(io.BytesIO(b""))))


def test_replacement_characters_counted(make_dump, tmp_path):
    path, _ = make_dump(pages=1, revisions_per_page=1)
    data = path.read_bytes()
    at = data.index(b"<comment>")
    bad = tmp_path / "enc.xml"
    bad.write_bytes(data[: at + 9] + b"\xff\xfe" + data[at + 9 :])
    stats = StreamStats()
    events = list(open_dump(DumpSource.from_path(bad), stats=stats))
    assert stats.replacement_chars == 2
    assert any(isinstance(e, RevisionRecord) for e in events)


def test_memory_constant_in_dump_size(tmp_path):
    from revhist.fixtures import generate_dump

    peaks = {}
    for n_pages, revs in ((10, 10), (10, 100), (100, 100)):
        path = tmp_path / f"m{n_pages}x{revs}.xml"
        generate_dump(path, pages=n_pages, revisions_per_page=revs, seed=2)
        tracemalloc.start()
        for _ in open_dump(DumpSource.from_path(path)):
            pass
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        peaks[n_pages * revs] = peak
    # peak growth must not scale with revision count (100x more data)
    assert peaks[10000] < 2 * peaks[100] + (1 << 20)


def test_record_invariants_enforced():
    page = PageHeader(page_id=1, title="T")
    with pytest.raises(ValueError):
        PageHeader(page_id=0, title="T")
    with pytest.raises(ValueError):
        PageHeader(page_id=1, title="   ")
    with pytest.raises(ValueError):
        RevisionRecord(page=page, revision_id=7, timestamp=0, text="", parent_id=7)


def test_contributor_ip_and_deleted():
    xml = b"""<mediawiki><page><title>T</title><ns>0</ns><id>1</id>
    <revision><id>5</id><timestamp>2011-01-01T00:00:00Z</timestamp>
    <contributor><ip>1.2.3.4</ip></contributor><text>a</text></revision>
    <revision><id>6</id><timestamp>2011-01-02T00:00:00Z</timestamp>
    <contributor deleted="deleted" /><text>b</text></revision>
    </page></mediawiki>"""
    events = list(open_dump(DumpSource(io.BytesIO(xml))))
    assert events[1].contributor == "1.2.3.4"
    assert events[2].contributor is None
