"""Deterministic MediaWiki-style dump fixtures.

Every byte of a generated dump is a pure function of the parameters and
the seed, so fixtures can be regenerated in tests and compared across
runs. Texts evolve revision by revision (small sentence-level edits on
top of the parent text) to mimic real edit histories.
"""

from __future__ import annotations

import bz2
import gzip
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence
from xml.sax.saxutils import escape, quoteattr

from .timeutil import SECONDS_PER_DAY, SECONDS_PER_WEEK, format_timestamp, parse_date, week_start

_NS_PREFIX = {0: "", 1: "Talk:", 6: "File:", 14: "Category:"}

_WORDS = (
    "archive record history stream partition index entity revision anchor "
    "timeline tournament election summer winter final sprint marathon city "
    "river bridge treaty council summit orbit signal memory ledger harbor "
    "garden meadow quartz copper cobalt границы данные 歴史 記録 données "
    "fièvre niño año straße größe team goal medal race vote debate poll "
    "campaign stadium ceremony torch relay recordholder quarter semifinal"
).split()

_USERS = ("Astrid", "Bela", "Chinedu", "Dana", "Eiko", "Farid", "Greta", "Hamid")

_HEADER = (
    '<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/" '
    'version="0.10" xml:lang="en">\n'
    "  <siteinfo>\n"
    "    <sitename>FixtureWiki</sitename>\n"
    "    <dbname>fixturewiki</dbname>\n"
    "    <generator>revhist gen-fixture</generator>\n"
    "  </siteinfo>\n"
)
_FOOTER = "</mediawiki>\n"


@dataclass(frozen=True)
class PageSpec:
    page_id: int
    title: str
    namespace: int
    revisions: int
    redirect_target: str | None = None


@dataclass
class GenerationSummary:
    path: Path
    pages: int
    revisions: int
    min_timestamp: int
    max_timestamp: int
    page_specs: list[PageSpec] = field(default_factory=list)


def _sentence_pool(rng: random.Random, titles: Sequence[str], size: int = 192) -> list[str]:
    pool = []
    for i in range(size):
        words = rng.choices(_WORDS, k=rng.randint(6, 14))
        roll = rng.random()
        if roll < 0.30 and titles:
            target = rng.choice(titles)
            if rng.random() < 0.5:
                words.insert(rng.randrange(len(words)), f"[[{target}]]")
            else:
                anchor = " ".join(rng.choices(_WORDS, k=2))
                words.insert(rng.randrange(len(words)), f"[[{target}|{anchor}]]")
        elif roll < 0.38:
            words.insert(0, "{{Infobox event|name=%s|year=2012}}" % rng.choice(_WORDS))
        elif roll < 0.42:
            words.append("<!-- %s -->" % rng.choice(_WORDS))
        elif roll < 0.45:
            words.append(rng.choice(("AT&T", "a<b", "x&y", "'''bold'''", "''it''")))
        pool.append(" ".join(words) + ".")
    return pool


def _evolve(rng: random.Random, sentences: list[str], pool: list[str]) -> list[str]:
    out = list(sentences)
    for _ in range(rng.randint(1, 3)):
        op = rng.random()
        if op < 0.45 or not out:
            out.insert(rng.randint(0, len(out)), rng.choice(pool))
        elif op < 0.75:
            out[rng.randrange(len(out))] = rng.choice(pool)
        elif len(out) > 4:
            del out[rng.randrange(len(out))]
    return out


class _Writer:
    """Streams XML text to the sink, honoring the chosen codec.

    In multistream mode each group of ``pages_per_stream`` pages becomes
    one independent bzip2 stream; the header and footer ride in their
    own or the final stream respectively.
    """

    def __init__(self, sink: IO[bytes], pages_per_stream: int, codec: str):
        self.sink = sink
        self.codec = codec  # none | gzip | bzip2 | multistream
        self.pages_per_stream = pages_per_stream
        self._parts: list[str] = []
        self._size = 0
        self._pages_in_stream = 0
        if codec == "gzip":
            self._gzip = gzip.GzipFile(fileobj=sink, mode="wb", mtime=0)
        elif codec == "bzip2":
            self._bz2 = bz2.BZ2Compressor()

    def emit(self, text: str, *, page_done: bool = False):
        self._parts.append(text)
        self._size += len(text)
        if self.codec == "multistream":
            if page_done:
                self._pages_in_stream += 1
                if self._pages_in_stream >= self.pages_per_stream:
                    self.end_stream()
        elif self._size > (1 << 20):
            self._flush_plain()

    def end_stream(self):
        """Force the buffered pages out as one complete bzip2 stream."""
        if self.codec != "multistream":
            return
        data = "".join(self._parts).encode("utf-8")
        self._parts = []
        self._size = 0
        self._pages_in_stream = 0
        if data:
            self.sink.write(bz2.compress(data))

    def _flush_plain(self):
        data = "".join(self._parts).encode("utf-8")
        self._parts = []
        self._size = 0
        if not data:
            return
        if self.codec == "none":
            self.sink.write(data)
        elif self.codec == "gzip":
            self._gzip.write(data)
        elif self.codec == "bzip2":
            self.sink.write(self._bz2.compress(data))

    def close(self):
        if self.codec == "multistream":
            self.end_stream()
        else:
            self._flush_plain()
            if self.codec == "gzip":
                self._gzip.close()
            elif self.codec == "bzip2":
                self.sink.write(self._bz2.flush())


def _codec_for(path: Path, pages_per_stream: int) -> str:
    name = str(path)
    if name.endswith(".gz"):
        return "gzip"
    if name.endswith(".bz2"):
        return "multistream" if pages_per_stream > 0 else "bzip2"
    return "none"


def _page_xml_open(spec: PageSpec) -> str:
    lines = [
        "  <page>\n",
        f"    <title>{escape(spec.title)}</title>\n",
        f"    <ns>{spec.namespace}</ns>\n",
        f"    <id>{spec.page_id}</id>\n",
    ]
    if spec.redirect_target is not None:
        lines.append(f"    <redirect title={quoteattr(spec.redirect_target)} />\n")
    return "".join(lines)


def _revision_xml(
    rev_id: int,
    parent_id: int | None,
    ts: int,
    contributor: str | None,
    is_ip: bool,
    comment: str | None,
    text: str,
    deleted: bool,
) -> str:
    lines = ["    <revision>\n", f"      <id>{rev_id}</id>\n"]
    if parent_id is not None:
        lines.append(f"      <parentid>{parent_id}</parentid>\n")
    lines.append(f"      <timestamp>{format_timestamp(ts)}</timestamp>\n")
    if contributor is None:
        lines.append('      <contributor deleted="deleted" />\n')
    elif is_ip:
        lines.append(f"      <contributor>\n        <ip>{contributor}</ip>\n      </contributor>\n")
    else:
        lines.append(
            f"      <contributor>\n        <username>{escape(contributor)}</username>\n"
            "      </contributor>\n"
        )
    if comment is not None:
        lines.append(f"      <comment>{escape(comment)}</comment>\n")
    lines.append("      <model>wikitext</model>\n")
    lines.append("      <format>text/x-wiki</format>\n")
    if deleted:
        lines.append('      <text deleted="deleted" />\n')
    else:
        body = escape(text)
        lines.append(
            f'      <text bytes="{len(text.encode("utf-8"))}" xml:space="preserve">{body}</text>\n'
        )
    lines.append("    </revision>\n")
    return "".join(lines)


def generate_dump(
    path: str | Path,
    *,
    pages: int,
    revisions_per_page: int,
    seed: int,
    start_date: str = "2011-01-01",
    text_sentences: int = 8,
    namespaces: Sequence[int] = (0,),
    revision_gap: tuple[int, int] = (3600, 3 * SECONDS_PER_DAY),
    deleted_rate: float = 0.02,
    redirect_rate: float = 0.04,
    pages_per_stream: int = 0,
) -> GenerationSummary:
    """Write a deterministic dump; compression decided by file extension."""
    path = Path(path)
    rng = random.Random(seed)
    base_ts = parse_date(start_date)

    specs: list[PageSpec] = []
    titles: list[str] = []
    for i in range(pages):
        ns = namespaces[i % len(namespaces)]
        stem = " ".join(w.capitalize() for w in rng.sample(_WORDS, 2))
        title = f"{_NS_PREFIX.get(ns, '')}{stem} {i + 1}"
        redirect = None
        if ns == 0 and i > 0 and rng.random() < redirect_rate:
            redirect = titles[rng.randrange(len(titles))]
        specs.append(PageSpec((i + 1) * 10, title, ns, revisions_per_page, redirect))
        titles.append(title)

    pool = _sentence_pool(rng, [t for t in titles if ":" not in t])

    summary = GenerationSummary(
        path=path, pages=pages, revisions=0, min_timestamp=0, max_timestamp=0,
        page_specs=specs,
    )
    min_ts, max_ts = None, None
    rev_counter = 0

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as sink:
        writer = _Writer(sink, pages_per_stream, _codec_for(path, pages_per_stream))
        writer.emit(_HEADER)
        writer.end_stream()  # the header never shares a stream with pages
        for idx, spec in enumerate(specs):
            writer.emit(_page_xml_open(spec))
            ts = base_ts + idx * 7 * 3600 + rng.randint(0, 3600)
            parent: int | None = None
            if spec.redirect_target is not None:
                sentences = [f"#REDIRECT [[{spec.redirect_target}]]"]
            else:
                sentences = [rng.choice(pool) for _ in range(text_sentences)]
            for _ in range(spec.revisions):
                rev_counter += 1
                rev_id = rev_counter * 3 + 1
                deleted = rng.random() < deleted_rate
                who_roll = rng.random()
                if who_roll < 0.08:
                    contributor, is_ip = None, False
                elif who_roll < 0.30:
                    contributor, is_ip = (
                        f"{rng.randint(1, 254)}.{rng.randint(0, 254)}.0.{rng.randint(1, 254)}",
                        True,
                    )
                else:
                    contributor, is_ip = rng.choice(_USERS), False
                comment = (
                    None
                    if rng.random() < 0.3
                    else " ".join(rng.choices(_WORDS, k=rng.randint(1, 5)))
                )
                writer.emit(
                    _revision_xml(
                        rev_id, parent, ts, contributor, is_ip, comment,
                        "\n".join(sentences), deleted,
                    )
                )
                summary.revisions += 1
                min_ts = ts if min_ts is None else min(min_ts, ts)
                max_ts = ts if max_ts is None else max(max_ts, ts)
                parent = rev_id
                ts += rng.randint(*revision_gap)
                if spec.redirect_target is None:
                    sentences = _evolve(rng, sentences, pool)
            writer.emit("  </page>\n", page_done=True)
        writer.emit(_FOOTER)
        writer.close()

    summary.min_timestamp = min_ts or base_ts
    summary.max_timestamp = max_ts or base_ts
    return summary


# ---------------------------------------------------------------------------
# Spike corpus: synthetic event dynamics with known ground truth.


def generate_spike_corpus(
    path: str | Path,
    *,
    seed: int = 7,
    start_date: str = "2012-01-01",
    weeks: int = 26,
) -> dict:
    """Dump with constructed activity spikes; returns the ground truth.

    One page ("United States Election") receives an edit burst in a
    known week and gains incoming links whose anchors carry the term
    "election" that same week; two athlete pages burst together in a
    different week. Background activity stays near one revision per
    page per week so the spike buckets are unique argmaxes.
    """
    path = Path(path)
    rng = random.Random(seed)
    base = week_start(parse_date(start_date) + SECONDS_PER_WEEK)
    election_week = base + 6 * SECONDS_PER_WEEK
    cospike_week = base + 17 * SECONDS_PER_WEEK

    named = ["United States Election", "Usain Bolt", "Mo Farah",
             "Barack Obama", "Euro 2012", "Olympic Games"]
    fillers = [f"Filler Topic {i + 1}" for i in range(10)]
    titles = named + fillers
    # background links avoid the spiking pages so their anchor terms
    # appear only in the constructed event sentences
    neutral_targets = fillers + ["Barack Obama", "Euro 2012", "Olympic Games"]

    events: dict[str, list[tuple[int, str]]] = {t: [] for t in titles}

    def week_ts(week_start_ts: int) -> int:
        return week_start_ts + rng.randint(0, SECONDS_PER_WEEK - 3600)

    plain = [
        " ".join(rng.choices(_WORDS, k=10)) + f" [[{rng.choice(neutral_targets)}]]."
        for _ in range(64)
    ]
    for w in range(weeks):
        wk = base + w * SECONDS_PER_WEEK
        for t in titles:
            if rng.random() < 0.8:
                events[t].append((week_ts(wk), rng.choice(plain)))

    for _ in range(12):
        events["United States Election"].append(
            (week_ts(election_week), rng.choice(plain))
        )
    for _ in range(10):
        f = rng.choice(fillers)
        events[f].append(
            (
                week_ts(election_week),
                "campaign news [[United States Election|election]] coverage.",
            )
        )
    for _ in range(10):
        events["Usain Bolt"].append(
            (week_ts(cospike_week), "sprint final [[Olympic Games|games]] report.")
        )
        events["Mo Farah"].append(
            (week_ts(cospike_week), "distance final [[Olympic Games|games]] report.")
        )
    for _ in range(6):
        f = rng.choice(fillers)
        events[f].append(
            (week_ts(cospike_week), "medal table [[Usain Bolt]] and [[Mo Farah]].")
        )

    path.parent.mkdir(parents=True, exist_ok=True)
    rev_counter = 0
    with open(path, "wb") as sink:
        writer = _Writer(sink, 0, _codec_for(path, 0))
        writer.emit(_HEADER)
        for idx, title in enumerate(titles):
            spec = PageSpec((idx + 1) * 10, title, 0, 0)
            writer.emit(_page_xml_open(spec))
            parent: int | None = None
            for ts, sentence in sorted(events[title]):
                rev_counter += 1
                rev_id = rev_counter * 3 + 1
                # each revision carries only its own event sentence, so
                # anchors never persist into later weeks
                text = f"{title} coverage.\n{sentence}"
                writer.emit(
                    _revision_xml(
                        rev_id, parent, ts, rng.choice(_USERS), False, None,
                        text, False,
                    )
                )
                parent = rev_id
            writer.emit("  </page>\n", page_done=True)
        writer.emit(_FOOTER)
        writer.close()

    from .extract import entity_key  # local import to avoid a cycle

    return {
        "dump": str(path),
        "revisions": rev_counter,
        "election_entity": entity_key("United States Election"),
        "election_term": "election",
        "election_week": election_week,
        "athlete_a": entity_key("Usain Bolt"),
        "athlete_b": entity_key("Mo Farah"),
        "cospike_week": cospike_week,
        "range_start": base,
        "range_end": base + weeks * SECONDS_PER_WEEK,
    }
