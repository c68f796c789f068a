"""Atomic file writes and stable JSON dumps.

All output files go through atomic_write_* (temp file + rename) so an
interrupted command never leaves a half-written file, and all JSON is dumped
with sorted keys and compact separators so reruns are byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile


def atomic_write_text(path, text):
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def stable_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def atomic_write_json(path, obj):
    atomic_write_text(path, stable_json(obj))
