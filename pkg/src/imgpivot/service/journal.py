"""Append-only JSON-lines journal with per-event fsync and atomic snapshots.

Every campaign owns one journal file.  Events are written one JSON object per
line and flushed to disk before the call returns, so any state change that
was acknowledged is recoverable.  Events are never rewritten; snapshots are a
recovery accelerator, written to a sibling file via write-to-temp plus
atomic rename, and the journal keeps the complete history.
"""

from __future__ import annotations

import json
import os
from pathlib import Path


class CorruptJournal(ValueError):
    pass


class Journal:
    def __init__(self, path, fsync: bool = True):
        self.path = Path(path)
        self.fsync = fsync
        self._fh = None

    def _handle(self):
        if self._fh is None or self._fh.closed:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "a", encoding="utf-8", newline="")
        return self._fh

    def append(self, record: dict) -> None:
        fh = self._handle()
        fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        fh.flush()
        if self.fsync:
            os.fsync(fh.fileno())

    def read_all(self) -> list[dict]:
        """All complete records in order.

        A torn final line (a crash mid-append) is ignored; a malformed line
        anywhere else means real corruption and raises
        :class:`CorruptJournal`.
        """
        if not self.path.exists():
            return []
        with open(self.path, "r", encoding="utf-8", newline="") as f:
            lines = f.read().split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        records = []
        for idx, line in enumerate(lines):
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                if idx == len(lines) - 1:
                    break
                raise CorruptJournal(
                    f"{self.path}: malformed journal line {idx + 1}"
                ) from None
        return records

    def close(self) -> None:
        if self._fh is not None and not self._fh.closed:
            self._fh.close()


def write_snapshot(path, obj: dict) -> None:
    """Atomically replace ``path`` with the JSON serialization of ``obj``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        json.dump(obj, f, ensure_ascii=False, sort_keys=True)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def read_snapshot(path) -> dict | None:
    path = Path(path)
    if not path.exists():
        return None
    with open(path, "r", encoding="utf-8", newline="") as f:
        return json.load(f)
