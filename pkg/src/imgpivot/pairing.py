"""Build comparable corpora by pairing source- and target-language caption
sets of the same image, and split them for training/evaluation.

Two pairing schemes:

* ``cross``  - full Cartesian product, P*Q pairs per image, enumerated
  target-major (all source captions for target caption 0, then 1, ...).
* ``random`` - a uniformly random injection from the smaller caption set into
  the larger, min(P, Q) pairs per image, each caption used at most once.

All randomness comes from ``random.Random`` (Mersenne Twister, MT19937)
seeded deterministically; per-image seeds are derived from the corpus seed
and image id by SHA-256, so per-image work can run in parallel and still
merge to identical output.  Splits shuffle whole images, never individual
pairs, so captions of one image can never leak across the train/test line.
"""

from __future__ import annotations

import csv
import hashlib
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import CaptionSet, normalize, profile_for

CROSS = "cross"
RANDOM = "random"


class ImageMismatch(ValueError):
    pass


class EmptySide(ValueError):
    pass


class DegenerateSplit(ValueError):
    pass


@dataclass(frozen=True)
class ComparablePair:
    image_id: str
    src_index: int
    tgt_index: int
    src_text: str
    tgt_text: str
    method: str


@dataclass(frozen=True)
class ComparableCorpus:
    pairs: tuple[ComparablePair, ...]
    src_language: str
    tgt_language: str
    method: str
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.pairs)

    def image_ids(self) -> list[str]:
        """Unique image ids in first-appearance order."""
        seen: dict[str, None] = {}
        for p in self.pairs:
            seen.setdefault(p.image_id, None)
        return list(seen)


def _check_sides(src: CaptionSet, tgt: CaptionSet) -> None:
    if src.image_id != tgt.image_id:
        raise ImageMismatch(
            f"source image {src.image_id!r} != target image {tgt.image_id!r}"
        )
    if len(src) == 0 or len(tgt) == 0:
        raise EmptySide(f"image {src.image_id!r} has an empty caption side")
    if src.language == tgt.language:
        raise ValueError(
            f"source and target language are both {src.language!r}"
        )


def pair_cross(src: CaptionSet, tgt: CaptionSet) -> list[ComparablePair]:
    """All P*Q source/target combinations for one image, target-major."""
    _check_sides(src, tgt)
    pairs = []
    for tc in tgt.captions:
        for sc in src.captions:
            pairs.append(
                ComparablePair(
                    image_id=src.image_id,
                    src_index=sc.index,
                    tgt_index=tc.index,
                    src_text=sc.raw_text,
                    tgt_text=tc.raw_text,
                    method=CROSS,
                )
            )
    return pairs


def pair_random(src: CaptionSet, tgt: CaptionSet, seed: int) -> list[ComparablePair]:
    """A seeded random injection between the caption sets of one image.

    Yields min(P, Q) pairs; no caption index is used twice.  The smaller side
    is enumerated in order and matched against a uniform sample (without
    replacement) from the larger side.
    """
    _check_sides(src, tgt)
    rng = random.Random(seed)
    q, p = len(src), len(tgt)
    pairs = []
    if q <= p:
        chosen_tgt = rng.sample(range(p), q)
        for sc, tj in zip(src.captions, chosen_tgt):
            tc = tgt.captions[tj]
            pairs.append(
                ComparablePair(
                    image_id=src.image_id,
                    src_index=sc.index,
                    tgt_index=tc.index,
                    src_text=sc.raw_text,
                    tgt_text=tc.raw_text,
                    method=RANDOM,
                )
            )
    else:
        chosen_src = rng.sample(range(q), p)
        for tc, sk in zip(tgt.captions, chosen_src):
            sc = src.captions[sk]
            pairs.append(
                ComparablePair(
                    image_id=src.image_id,
                    src_index=sc.index,
                    tgt_index=tc.index,
                    src_text=sc.raw_text,
                    tgt_text=tc.raw_text,
                    method=RANDOM,
                )
            )
    return pairs


def image_seed(seed: int, image_id: str) -> int:
    """Stable per-image sub-seed: first 8 bytes of SHA-256 over seed:image."""
    digest = hashlib.sha256(f"{seed}:{image_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def build_corpus(
    src_sets: Mapping[str, CaptionSet],
    tgt_sets: Mapping[str, CaptionSet],
    method: str,
    seed: int | None = None,
    images: Sequence[str] | None = None,
) -> ComparableCorpus:
    """Pair caption sets image by image into one comparable corpus.

    ``images`` restricts (and orders by id) the set of images; every listed
    image must have captions on both sides.  Without it, the intersection of
    the two sides is used.  ``seed`` is required for the random method.
    """
    if method not in (CROSS, RANDOM):
        raise ValueError(f"method must be 'cross' or 'random', got {method!r}")
    if method == RANDOM and seed is None:
        raise ValueError("random pairing requires a seed")
    if images is None:
        chosen = sorted(set(src_sets) & set(tgt_sets))
    else:
        chosen = sorted(images)
        for image_id in chosen:
            if image_id not in src_sets or image_id not in tgt_sets:
                raise ImageMismatch(
                    f"image {image_id!r} lacks captions on one side"
                )
    src_language = next(iter(src_sets.values())).language if src_sets else ""
    tgt_language = next(iter(tgt_sets.values())).language if tgt_sets else ""
    pairs: list[ComparablePair] = []
    for image_id in chosen:
        if method == CROSS:
            pairs.extend(pair_cross(src_sets[image_id], tgt_sets[image_id]))
        else:
            pairs.extend(
                pair_random(
                    src_sets[image_id],
                    tgt_sets[image_id],
                    image_seed(seed, image_id),
                )
            )
    return ComparableCorpus(
        pairs=tuple(pairs),
        src_language=src_language,
        tgt_language=tgt_language,
        method=method,
        seed=seed,
    )


def split_corpus(
    corpus: ComparableCorpus, test_fraction: float, seed: int
) -> tuple[ComparableCorpus, ComparableCorpus]:
    """Deterministic image-level train/test partition.

    The number of test images is round(test_fraction * N), half up, clamped
    so both sides keep at least one image.  All pairs of an image land on the
    same side; pair order within each side follows the input corpus.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if len(corpus) == 0:
        raise EmptySide("cannot split an empty corpus")
    image_ids = sorted(set(p.image_id for p in corpus.pairs))
    n = len(image_ids)
    if n < 2:
        raise DegenerateSplit(
            f"need at least 2 images to split, corpus has {n}"
        )
    n_test = int(test_fraction * n + 0.5)
    n_test = max(1, min(n - 1, n_test))
    rng = random.Random(seed)
    shuffled = list(image_ids)
    rng.shuffle(shuffled)
    test_images = set(shuffled[:n_test])
    train_pairs = tuple(p for p in corpus.pairs if p.image_id not in test_images)
    test_pairs = tuple(p for p in corpus.pairs if p.image_id in test_images)
    train = ComparableCorpus(
        pairs=train_pairs,
        src_language=corpus.src_language,
        tgt_language=corpus.tgt_language,
        method=corpus.method,
        seed=corpus.seed,
    )
    test = ComparableCorpus(
        pairs=test_pairs,
        src_language=corpus.src_language,
        tgt_language=corpus.tgt_language,
        method=corpus.method,
        seed=corpus.seed,
    )
    return train, test


META_COLUMNS = ("image_id", "src_index", "tgt_index", "method")


def write_corpus(prefix, corpus: ComparableCorpus) -> list[str]:
    """Write ``<prefix>.src`` / ``<prefix>.tgt`` (line-aligned text) and
    ``<prefix>.meta.tsv``.  Returns the written paths."""
    prefix = str(prefix)
    src_path, tgt_path = prefix + ".src", prefix + ".tgt"
    meta_path = prefix + ".meta.tsv"
    with open(src_path, "w", encoding="utf-8", newline="") as f:
        for p in corpus.pairs:
            f.write(p.src_text + "\n")
    with open(tgt_path, "w", encoding="utf-8", newline="") as f:
        for p in corpus.pairs:
            f.write(p.tgt_text + "\n")
    with open(meta_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(META_COLUMNS)
        for p in corpus.pairs:
            writer.writerow((p.image_id, p.src_index, p.tgt_index, p.method))
    return [src_path, tgt_path, meta_path]


def read_corpus(
    prefix, src_language: str, tgt_language: str
) -> ComparableCorpus:
    """Read a corpus previously written by :func:`write_corpus`."""
    prefix = str(prefix)
    with open(prefix + ".src", "r", encoding="utf-8", newline="") as f:
        src_lines = f.read().splitlines()
    with open(prefix + ".tgt", "r", encoding="utf-8", newline="") as f:
        tgt_lines = f.read().splitlines()
    with open(prefix + ".meta.tsv", "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t")
        header = next(reader, None)
        if header is not None and tuple(header) != META_COLUMNS:
            raise ValueError(f"unexpected corpus meta header {header!r}")
        meta = list(reader)
    if not (len(src_lines) == len(tgt_lines) == len(meta)):
        raise ValueError(
            f"corpus files disagree on length: {len(src_lines)} src, "
            f"{len(tgt_lines)} tgt, {len(meta)} meta rows"
        )
    pairs = []
    methods = set()
    for (image_id, src_index, tgt_index, method), src_text, tgt_text in zip(
        meta, src_lines, tgt_lines
    ):
        methods.add(method)
        pairs.append(
            ComparablePair(
                image_id=image_id,
                src_index=int(src_index),
                tgt_index=int(tgt_index),
                src_text=src_text,
                tgt_text=tgt_text,
                method=method,
            )
        )
    method = methods.pop() if len(methods) == 1 else "mixed"
    return ComparableCorpus(
        pairs=tuple(pairs),
        src_language=src_language,
        tgt_language=tgt_language,
        method=method,
    )


def corpus_token_pairs(
    corpus: ComparableCorpus,
) -> list[tuple[list[str], list[str]]]:
    """Normalized (source tokens, target tokens) for every pair, ready for
    alignment training."""
    src_profile = profile_for(corpus.src_language)
    tgt_profile = profile_for(corpus.tgt_language)
    return [
        (normalize(p.src_text, src_profile), normalize(p.tgt_text, tgt_profile))
        for p in corpus.pairs
    ]
