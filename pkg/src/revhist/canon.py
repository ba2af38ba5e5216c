"""Canonical JSON encoding shared by the HTTP service, the CLI and the
result digests: sorted keys, no whitespace, UTF-8. Byte-identical for
equal payloads by construction."""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> bytes:
    return json.dumps(
        obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj)).hexdigest()
