"""Caption-complexity scoring and image selection.

An image's complexity ``d`` is the sum of three terms computed over its
caption set: total token count ``l``, summed per-caption unique-token counts
``w``, and total pairwise edit distance ``e`` (each unordered caption pair
counted once).  Low ``d`` marks images whose captions are short, lexically
light, and consistent across annotators; selection keeps the k lowest.

Edit distance is unit-cost Levenshtein.  By default it is computed over the
characters of the normalized, single-space-joined caption; token-level
distance is available via ``granularity="token"``.  The inner DP loop is
JIT-compiled with numba when available (the pure-Python fallback is identical
but roughly 50x slower).
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import CaptionSet

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False


class EmptyCaptionSet(ValueError):
    pass


class UnknownImage(KeyError):
    pass


class DuplicateDecision(ValueError):
    pass


def _levenshtein_arrays_py(a: np.ndarray, b: np.ndarray) -> int:
    m, n = a.shape[0], b.shape[0]
    if m == 0:
        return n
    if n == 0:
        return m
    prev = list(range(n + 1))
    for i in range(1, m + 1):
        cur = [i] + [0] * n
        ca = a[i - 1]
        for j in range(1, n + 1):
            cost = 0 if ca == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[n]


if _HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _levenshtein_arrays(a, b):  # pragma: no cover - exercised via wrapper
        m, n = a.shape[0], b.shape[0]
        if m == 0:
            return n
        if n == 0:
            return m
        prev = np.arange(n + 1, dtype=np.int64)
        cur = np.empty(n + 1, dtype=np.int64)
        for i in range(1, m + 1):
            cur[0] = i
            ca = a[i - 1]
            for j in range(1, n + 1):
                best = prev[j - 1] + (0 if ca == b[j - 1] else 1)
                up = prev[j] + 1
                left = cur[j - 1] + 1
                if up < best:
                    best = up
                if left < best:
                    best = left
                cur[j] = best
            prev, cur = cur, prev
        return prev[n]

else:  # pragma: no cover
    _levenshtein_arrays = _levenshtein_arrays_py


def _encode_chars(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)


def _encode_tokens(tokens: Sequence[str], table: dict[str, int]) -> np.ndarray:
    out = np.empty(len(tokens), dtype=np.int64)
    for i, tok in enumerate(tokens):
        out[i] = table.setdefault(tok, len(table))
    return out


def edit_distance(a: str | Sequence[str], b: str | Sequence[str]) -> int:
    """Unit-cost Levenshtein distance between two strings (character level)
    or two token sequences (token level)."""
    if isinstance(a, str) != isinstance(b, str):
        raise TypeError("edit_distance arguments must both be strings or both sequences")
    if isinstance(a, str):
        ea, eb = _encode_chars(a), _encode_chars(b)
    else:
        table: dict[str, int] = {}
        ea, eb = _encode_tokens(a, table), _encode_tokens(b, table)
    return int(_levenshtein_arrays(ea, eb))


@dataclass(frozen=True)
class ComplexityScore:
    """The (l, w, e, d) complexity tuple for one image; d = l + w + e."""

    image_id: str
    l: int
    w: int
    e: int

    @property
    def d(self) -> int:
        return self.l + self.w + self.e

    def as_row(self) -> tuple[str, int, int, int, int]:
        return (self.image_id, self.l, self.w, self.e, self.d)


def _caption_arrays(captions: CaptionSet, granularity: str) -> list[np.ndarray]:
    if granularity == "char":
        return [_encode_chars(" ".join(c.tokens)) for c in captions.captions]
    if granularity == "token":
        table: dict[str, int] = {}
        return [_encode_tokens(c.tokens, table) for c in captions.captions]
    raise ValueError(f"granularity must be 'char' or 'token', got {granularity!r}")


def complexity_score(captions: CaptionSet, granularity: str = "char") -> ComplexityScore:
    """Score one image's caption set.

    l sums token counts, w sums per-caption unique-token counts (no
    deduplication across captions), e sums edit distance over unordered
    caption pairs.
    """
    if len(captions) == 0:
        raise EmptyCaptionSet(f"no captions for image {captions.image_id!r}")
    l = sum(len(c.tokens) for c in captions.captions)
    w = sum(len(set(c.tokens)) for c in captions.captions)
    arrays = _caption_arrays(captions, granularity)
    e = 0
    for j in range(len(arrays)):
        for k in range(j + 1, len(arrays)):
            e += int(_levenshtein_arrays(arrays[j], arrays[k]))
    return ComplexityScore(image_id=captions.image_id, l=l, w=w, e=e)


def score_corpus(
    corpus: Mapping[str, CaptionSet],
    granularity: str = "char",
    jobs: int = 1,
) -> list[ComplexityScore]:
    """Score every image, in ascending image-id order.

    Scoring is independent per image; with ``jobs > 1`` images are scored on a
    thread pool (the DP kernel releases the GIL) and merged back in id order,
    so the result does not depend on ``jobs``.
    """
    image_ids = sorted(corpus)
    if jobs > 1 and _HAVE_NUMBA and len(image_ids) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(
                pool.map(
                    lambda i: complexity_score(corpus[i], granularity), image_ids
                )
            )
    return [complexity_score(corpus[i], granularity) for i in image_ids]


def rank_images(
    corpus: Mapping[str, CaptionSet],
    k: int,
    granularity: str = "char",
    jobs: int = 1,
) -> list[tuple[str, ComplexityScore]]:
    """Return the k lowest-complexity images, ascending by (d, image_id).

    ``k`` larger than the corpus returns everything, sorted; ``k=0`` returns
    an empty list.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    scores = score_corpus(corpus, granularity=granularity, jobs=jobs)
    scores.sort(key=lambda s: (s.d, s.image_id))
    return [(s.image_id, s) for s in scores[:k]]


@dataclass(frozen=True)
class ReviewDecision:
    """One manual keep/prune verdict from the universality review pass."""

    image_id: str
    verdict: str  # "keep" | "prune"
    reason: str = ""
    reviewer: str | None = None

    def __post_init__(self):
        if self.verdict not in ("keep", "prune"):
            raise ValueError(f"verdict must be 'keep' or 'prune', got {self.verdict!r}")


def apply_review(
    selected: Sequence[str], decisions: Iterable[ReviewDecision]
) -> list[str]:
    """Apply review decisions to a selected image list.

    Images with a prune verdict are dropped; images without a decision are
    kept; relative order is preserved.  A decision naming an image outside
    ``selected`` raises :class:`UnknownImage`; two decisions for one image
    raise :class:`DuplicateDecision`.
    """
    selected_set = set(selected)
    verdicts: dict[str, str] = {}
    for d in decisions:
        if d.image_id not in selected_set:
            raise UnknownImage(d.image_id)
        if d.image_id in verdicts:
            raise DuplicateDecision(d.image_id)
        verdicts[d.image_id] = d.verdict
    return [i for i in selected if verdicts.get(i) != "prune"]


SCORE_COLUMNS = ("image_id", "l", "w", "e", "d")


def write_scores(path, scores: Iterable[ComplexityScore]) -> None:
    """Write the score table as TSV, sorted ascending by (d, image_id)."""
    rows = sorted(scores, key=lambda s: (s.d, s.image_id))
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(SCORE_COLUMNS)
        for s in rows:
            writer.writerow(s.as_row())


def read_scores(path) -> list[ComplexityScore]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t")
        header = next(reader, None)
        if header is not None and tuple(header) != SCORE_COLUMNS:
            raise ValueError(f"unexpected score header {header!r}")
        out = []
        for row in reader:
            image_id, l, w, e, d = row
            score = ComplexityScore(image_id=image_id, l=int(l), w=int(w), e=int(e))
            if score.d != int(d):
                raise ValueError(
                    f"inconsistent score row for {image_id!r}: l+w+e != d"
                )
            out.append(score)
        return out


def write_review_decisions(path, decisions: Iterable[ReviewDecision]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        for d in decisions:
            writer.writerow((d.image_id, d.verdict, d.reason))


def read_review_decisions(path) -> list[ReviewDecision]:
    """Read a review-decision TSV: ``image_id\\tkeep|prune\\treason``; the
    reason column may be absent."""
    decisions = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.reader(f, delimiter="\t"):
            if not row:
                continue
            image_id, verdict = row[0], row[1]
            reason = row[2] if len(row) > 2 else ""
            decisions.append(
                ReviewDecision(image_id=image_id, verdict=verdict, reason=reason)
            )
    return decisions
