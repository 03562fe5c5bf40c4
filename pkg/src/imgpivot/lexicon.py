"""Bilingual dictionary induction from hard alignment links.

Counting is literal: every link contributes one co-occurrence of the linked
source and target surface words.  A word pair enters the dictionary when it
clears at least one (p, c) threshold tier with *strict* inequalities on both
the link count and the conditional link probability
count(src, tgt) / total(src); acceptances across tiers are unioned.  The
shipped default tiers are (0.5, 20), (0.6, 5), (0.9, 2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .aligner import AlignmentData, TokenPair


class IndexOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdTier:
    """A tied probability/count threshold pair; both must be strictly
    exceeded."""

    p: float
    c: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"tier probability must be in [0, 1], got {self.p}")
        if self.c < 0:
            raise ValueError(f"tier count must be >= 0, got {self.c}")

    def admits(self, count: int, prob: float) -> bool:
        return count > self.c and prob > self.p


DEFAULT_TIERS: tuple[ThresholdTier, ...] = (
    ThresholdTier(p=0.5, c=20),
    ThresholdTier(p=0.6, c=5),
    ThresholdTier(p=0.9, c=2),
)


@dataclass(frozen=True)
class AlignmentCounts:
    """Link co-occurrence counts and per-source-word totals."""

    counts: Mapping[tuple[str, str], int]
    src_totals: Mapping[str, int]

    def prob(self, src_word: str, tgt_word: str) -> float:
        c = self.counts.get((src_word, tgt_word), 0)
        total = self.src_totals.get(src_word, 0)
        return c / total if total else 0.0


def count_alignments(
    alignments: AlignmentData, pairs: Sequence[TokenPair]
) -> AlignmentCounts:
    """Tabulate link counts over a corpus.

    ``alignments`` and ``pairs`` must be index-aligned; a link pointing
    outside its sentence raises :class:`IndexOutOfRange`.
    """
    if len(alignments) != len(pairs):
        raise ValueError(
            f"{len(alignments)} alignment rows for {len(pairs)} pairs"
        )
    counts: dict[tuple[str, str], int] = {}
    src_totals: dict[str, int] = {}
    for pair_idx, (links, (src_tokens, tgt_tokens)) in enumerate(
        zip(alignments.links, pairs)
    ):
        for i, j in links:
            if not (0 <= i < len(src_tokens)) or not (0 <= j < len(tgt_tokens)):
                raise IndexOutOfRange(
                    f"pair {pair_idx}: link {i}-{j} outside sentence bounds "
                    f"({len(src_tokens)}x{len(tgt_tokens)})"
                )
            key = (src_tokens[i], tgt_tokens[j])
            counts[key] = counts.get(key, 0) + 1
            src_totals[src_tokens[i]] = src_totals.get(src_tokens[i], 0) + 1
    return AlignmentCounts(counts=counts, src_totals=src_totals)


@dataclass(frozen=True)
class DictionaryEntry:
    src_word: str
    tgt_word: str
    count: int
    prob: float
    tiers_matched: tuple[ThresholdTier, ...]


def extract_dictionary(
    counts: AlignmentCounts, tiers: Sequence[ThresholdTier] = DEFAULT_TIERS
) -> list[DictionaryEntry]:
    """Emit every word pair passing at least one tier, sorted by source word
    and then descending probability."""
    if not tiers:
        raise ValueError("at least one threshold tier is required")
    entries = []
    for (src_word, tgt_word), count in counts.counts.items():
        prob = count / counts.src_totals[src_word]
        matched = tuple(t for t in tiers if t.admits(count, prob))
        if matched:
            entries.append(
                DictionaryEntry(
                    src_word=src_word,
                    tgt_word=tgt_word,
                    count=count,
                    prob=prob,
                    tiers_matched=matched,
                )
            )
    entries.sort(key=lambda e: (e.src_word, -e.prob, e.tgt_word))
    return entries


@dataclass(frozen=True)
class PrecisionReport:
    """Dictionary accuracy against human judgments.  ``precision`` is None
    when nothing was judged."""

    judged: int
    correct: int
    unjudged: int

    @property
    def precision(self) -> float | None:
        return self.correct / self.judged if self.judged else None

    def percent(self) -> str:
        if self.precision is None:
            return "undefined (0/0 judged)"
        return f"{self.precision * 100:.1f}%"

    def to_json(self) -> dict:
        return {
            "judged": self.judged,
            "correct": self.correct,
            "unjudged": self.unjudged,
            "precision": self.precision,
        }


def score_dictionary(
    entries: Iterable[DictionaryEntry],
    judgments: Mapping[tuple[str, str], bool],
) -> PrecisionReport:
    """Precision = correct / judged; entries without a judgment are reported
    as unjudged and excluded."""
    judged = correct = unjudged = 0
    for e in entries:
        verdict = judgments.get((e.src_word, e.tgt_word))
        if verdict is None:
            unjudged += 1
        else:
            judged += 1
            correct += int(verdict)
    return PrecisionReport(judged=judged, correct=correct, unjudged=unjudged)


DICTIONARY_COLUMNS = ("src_word", "tgt_word", "count", "prob", "tiers")


def _format_tiers(tiers: Sequence[ThresholdTier]) -> str:
    return ",".join(f"{t.p:g}:{t.c}" for t in tiers)


def parse_tiers(spec: str) -> tuple[ThresholdTier, ...]:
    """Parse a ``p:c`` comma-joined tier list such as ``0.5:20,0.6:5``."""
    tiers = []
    for chunk in spec.split(","):
        p, c = chunk.split(":")
        tiers.append(ThresholdTier(p=float(p), c=int(c)))
    return tuple(tiers)


def write_dictionary(path, entries: Iterable[DictionaryEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(DICTIONARY_COLUMNS)
        for e in entries:
            writer.writerow(
                (e.src_word, e.tgt_word, e.count, repr(e.prob), _format_tiers(e.tiers_matched))
            )


def read_dictionary(path) -> list[DictionaryEntry]:
    entries = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t")
        header = next(reader, None)
        if header is not None and tuple(header) != DICTIONARY_COLUMNS:
            raise ValueError(f"unexpected dictionary header {header!r}")
        for src_word, tgt_word, count, prob, tiers in reader:
            entries.append(
                DictionaryEntry(
                    src_word=src_word,
                    tgt_word=tgt_word,
                    count=int(count),
                    prob=float(prob),
                    tiers_matched=parse_tiers(tiers) if tiers else (),
                )
            )
    return entries


def read_judgments(path) -> dict[tuple[str, str], bool]:
    """Read a judgments TSV: ``src_word\\ttgt_word\\t0|1``."""
    judgments: dict[tuple[str, str], bool] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.reader(f, delimiter="\t"):
            if not row:
                continue
            src_word, tgt_word, verdict = row
            if verdict not in ("0", "1"):
                raise ValueError(
                    f"judgment for ({src_word!r}, {tgt_word!r}) must be 0 or 1, "
                    f"got {verdict!r}"
                )
            judgments[(src_word, tgt_word)] = verdict == "1"
    return judgments
