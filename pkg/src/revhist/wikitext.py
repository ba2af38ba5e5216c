"""Wikitext anchor extraction and markup stripping.

Both operations are total: malformed markup yields fewer links or less
text, never an error. The link grammar handled here is the internal
``[[target|anchor]]`` form; media and category inclusions are excluded
while a leading colon escapes the exclusion (it renders as a plain
link). Nested links only occur inside media captions; the caption link
is real and is emitted in document order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ._kernels import tokenize

_EXCLUDED_NS = ("file:", "image:", "category:")

_COMMENT_RE = re.compile(r"<!--.*?(?:-->|$)", re.DOTALL)
_REF_RE = re.compile(r"<ref[^>]*/>|<ref[^>]*>.*?(?:</ref\s*>|$)", re.DOTALL | re.IGNORECASE)
_EXT_LINK_RE = re.compile(r"\[(?:https?|ftp)://[^\s\]]+(?:\s+([^\]]*))?\]")
_TAG_RE = re.compile(r"<[^>]*>")
_QUOTES_RE = re.compile(r"'{2,}")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True, slots=True)
class AnchorLink:
    """One internal link: normalized target plus its visible anchor text."""

    source_page_id: int
    target_title: str
    anchor_text: str
    position: int


def _is_excluded(target: str) -> bool:
    return target.lstrip().casefold().startswith(_EXCLUDED_NS)


def _normalize_target(raw: str) -> str | None:
    """Fragment stripped, underscores to spaces, first letter upper-cased."""
    target = raw.split("#", 1)[0]
    target = _WS_RE.sub(" ", target.replace("_", " ")).strip()
    if not target:
        return None
    return target[0].upper() + target[1:]


def _balanced_end(text: str, start: int) -> int:
    """Index just past the ']]' closing the '[[' at ``start``."""
    depth = 0
    i = start
    n = len(text)
    while i < n - 1:
        pair = text[i : i + 2]
        if pair == "[[":
            depth += 1
            i += 2
        elif pair == "]]":
            depth -= 1
            i += 2
            if depth == 0:
                return i
        else:
            i += 1
    return n


def _scan_links(text: str, *, swallow_excluded: bool):
    """Yield ('link', start, body) for each well-formed innermost link,
    ('text', start, end) for literal stretches, and ('skip', start, end)
    for excluded media spans dropped whole.

    ``swallow_excluded`` controls what happens to a media link whose
    caption holds nested links: the fulltext replacer drops the whole
    balanced span (captions are not body text), while the anchor
    extractor keeps scanning inside it because a caption link is a real
    link.
    """
    i = 0
    n = len(text)
    while i < n:
        s = text.find("[[", i)
        if s < 0:
            yield ("text", i, n)
            return
        if s > i:
            yield ("text", i, s)
        close = text.find("]]", s + 2)
        if close < 0:
            # unclosed opener: brackets dropped, remainder is literal
            yield ("text", s + 2, n)
            return
        nxt = text.find("[[", s + 2)
        if 0 <= nxt < close:
            head = text[s + 2 : nxt]
            if swallow_excluded and _is_excluded(head.split("|", 1)[0]):
                end = _balanced_end(text, s)
                yield ("skip", s, end)
                i = end
            else:
                # abandoned outer link: its head is literal, rescan inner
                yield ("text", s + 2, nxt)
                i = nxt
            continue
        body = text[s + 2 : close]
        yield ("link", s, body)
        i = close + 2


def _link_parts(body: str) -> tuple[str | None, str | None] | None:
    """(normalized_target, anchor_or_None) for a link body, or None to drop."""
    pipe = body.find("|")
    raw_target = body if pipe < 0 else body[:pipe]
    if "\n" in raw_target:
        return None
    escaped = False
    stripped = raw_target.lstrip()
    if stripped.startswith(":"):
        raw_target = stripped[1:]
        escaped = True
    if not escaped and _is_excluded(raw_target):
        return None
    target = _normalize_target(raw_target)
    if target is None:
        return None
    anchor = None if pipe < 0 else body[body.rfind("|") + 1 :].strip()
    return target, anchor


def extract_anchors(wikitext: str, source_page_id: int = 0) -> list[AnchorLink]:
    """All internal links in document order.

    Piped links anchor on the text after the last pipe; bare links (and
    empty pipe anchors) fall back to the normalized target. Links in
    media or category namespaces are excluded, but a caption link nested
    inside one still counts. Links inside HTML comments do not.
    """
    text = _COMMENT_RE.sub("", wikitext)
    links: list[AnchorLink] = []
    for item in _scan_links(text, swallow_excluded=False):
        if item[0] != "link":
            continue
        parts = _link_parts(item[2])
        if parts is None:
            continue
        target, anchor = parts
        if not anchor:
            anchor = target
        links.append(AnchorLink(source_page_id, target, anchor, len(links)))
    return links


def _replace_links(text: str) -> str:
    out: list[str] = []
    for item in _scan_links(text, swallow_excluded=True):
        kind = item[0]
        if kind == "text":
            out.append(text[item[1] : item[2]])
        elif kind == "link":
            parts = _link_parts(item[2])
            if parts is None:
                continue
            target, anchor = parts
            out.append(anchor if anchor else target)
    return "".join(out)


def _strip_templates(text: str) -> str:
    """Remove balanced ``{{...}}`` spans wholesale; unclosed openers stay."""
    if "{{" not in text:
        return text
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        s = text.find("{{", i)
        if s < 0:
            out.append(text[i:])
            break
        out.append(text[i:s])
        depth = 0
        j = s
        closed = False
        while j < n - 1:
            pair = text[j : j + 2]
            if pair == "{{":
                depth += 1
                j += 2
            elif pair == "}}":
                depth -= 1
                j += 2
                if depth == 0:
                    closed = True
                    break
            else:
                j += 1
        if closed:
            i = j
        else:
            out.append(text[s:])
            break
    return "".join(out)


def strip_markup(wikitext: str) -> str:
    """Plain text: comments, refs, templates, tags and quotes removed,
    links replaced by their visible anchors."""
    text = _COMMENT_RE.sub("", wikitext)
    text = _REF_RE.sub(" ", text)
    text = _strip_templates(text)
    text = _replace_links(text)
    text = _EXT_LINK_RE.sub(lambda m: m.group(1) or " ", text)
    text = _TAG_RE.sub(" ", text)
    text = _QUOTES_RE.sub("", text)
    return text


def extract_fulltext(wikitext: str) -> list[str]:
    """Markup-stripped token list via the shared tokenizer."""
    return tokenize(strip_markup(wikitext))
