"""Declarative revision filters and knowledge-base entity sets.

A FilterSpec is a conjunction: a record passes only if every present
clause accepts it. Absent clauses accept everything, so the empty spec
is vacuously true and adding a clause can only shrink the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping
from urllib.parse import unquote

from .dump import RevisionRecord
from .errors import FormatError


class Normalization(str, Enum):
    TITLE_EXACT = "title-exact"
    TITLE_CASEFOLD = "title-case-fold"
    URL_DECODE = "url-decode"


def _normalize(key: str, mode: Normalization) -> str:
    if mode == Normalization.TITLE_EXACT:
        return key.strip()
    if mode == Normalization.TITLE_CASEFOLD:
        return key.strip().casefold()
    # url-decode: accept Wikipedia-derived URL fragments as keys
    return unquote(key.strip()).replace("_", " ").strip()


@dataclass(frozen=True)
class EntitySet:
    """Map from normalized entity key to entity identifier."""

    entries: Mapping[str, str]
    normalization: Normalization = Normalization.TITLE_EXACT

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[str, str]],
        normalization: Normalization = Normalization.TITLE_EXACT,
    ) -> "EntitySet":
        entries: dict[str, str] = {}
        for key, ident in pairs:
            norm = _normalize(key, normalization)
            if norm in entries and entries[norm] != ident:
                raise FormatError(f"duplicate entity key after normalization: {norm!r}")
            entries[norm] = ident
        return cls(entries, normalization)

    @classmethod
    def from_file(
        cls,
        path: str | Path,
        normalization: Normalization = Normalization.TITLE_EXACT,
    ) -> "EntitySet":
        """Load a `<key>TAB<id>` file, one entity per line."""
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                if "\t" not in line:
                    raise FormatError(f"{path}:{lineno}: expected <key>TAB<id>")
                key, ident = line.split("\t", 1)
                pairs.append((key, ident))
        return cls.from_pairs(pairs, normalization)

    def lookup_title(self, title: str) -> str | None:
        return self.entries.get(_normalize(title, self.normalization))

    def __len__(self) -> int:
        return len(self.entries)


def match_entity(record: RevisionRecord, entities: EntitySet) -> str | None:
    """Identifier of the entity whose key matches the record's page title."""
    return entities.lookup_title(record.page.title)


@dataclass(frozen=True)
class FilterSpec:
    """Conjunction of optional clauses over RevisionRecord.

    ``time_range`` is a half-open [start, end) pair of epoch seconds.
    ``articles_only`` forces the namespace clause to {0} regardless of
    ``namespaces``. ``custom`` is a named predicate for library users;
    its name is recorded in manifests for reproducibility.
    """

    time_range: tuple[int, int] | None = None
    namespaces: frozenset[int] | None = None
    entity_set: EntitySet | None = None
    articles_only: bool = False
    custom: Callable[[RevisionRecord], bool] | None = field(
        default=None, compare=False
    )
    custom_name: str | None = None

    def __post_init__(self):
        if self.time_range is not None and self.time_range[0] >= self.time_range[1]:
            raise ValueError("time_range start must be before end")
        if self.namespaces is not None and not isinstance(self.namespaces, frozenset):
            object.__setattr__(self, "namespaces", frozenset(self.namespaces))

    def describe(self) -> dict:
        """JSON-friendly summary for manifests and reports."""
        out: dict = {}
        if self.time_range is not None:
            out["time_range"] = list(self.time_range)
        if self.articles_only:
            out["articles_only"] = True
        elif self.namespaces is not None:
            out["namespaces"] = sorted(self.namespaces)
        if self.entity_set is not None:
            out["entities"] = len(self.entity_set)
        if self.custom is not None:
            out["custom"] = self.custom_name or "<unnamed>"
        return out


def apply_filter(record: RevisionRecord, spec: FilterSpec) -> bool:
    """True iff the record passes every present clause. Total: never raises."""
    if spec.time_range is not None:
        start, end = spec.time_range
        if not (start <= record.timestamp < end):
            return False
    if spec.articles_only:
        if record.page.namespace != 0:
            return False
    elif spec.namespaces is not None:
        if record.page.namespace not in spec.namespaces:
            return False
    if spec.entity_set is not None:
        if match_entity(record, spec.entity_set) is None:
            return False
    if spec.custom is not None:
        try:
            if not spec.custom(record):
                return False
        except Exception:
            return False
    return True
