"""Hot-kernel selection: compiled extension when available, else pure Python.

Set ``REVHIST_PURE=1`` to force the fallback (used by the benchmark and
the parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("REVHIST_PURE") == "1":
    from . import _fallback as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

tokenize = _impl.tokenize
match_blocks = _impl.match_blocks
IMPLEMENTATION = _impl.IMPLEMENTATION

TOKENIZER_ID = "unicode-word-casefold-v1"

__all__ = ["tokenize", "match_blocks", "IMPLEMENTATION", "TOKENIZER_ID"]
