"""Core corpus types: captions, caption sets, language-aware normalization,
and the tab-separated caption file format (``<image_id>#<index>\\t<text>``,
the layout used by the public Flickr8k ``*.token.txt`` files).

All objects here are immutable; every function is pure and safe to call from
concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

DEVANAGARI_DANDA = "।"

#: Characters treated as sentence terminators at token boundaries.  The ASCII
#: pipe and the Devanagari danda both occur as end-of-sentence marks in
#: crowdsourced Hindi captions.
SENTENCE_TERMINATORS = frozenset({".", "!", "?", "|", DEVANAGARI_DANDA})

#: Additional punctuation stripped from token edges on top of the terminators.
EDGE_PUNCTUATION = frozenset({",", ";", ":", '"', "'", "(", ")"})


class MalformedLine(ValueError):
    """A caption-file line that does not parse as ``<image_id>#<index>\\t<text>``."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class DuplicateKey(ValueError):
    """Two captions share the same (image_id, index) within one file."""

    def __init__(self, line_number: int, image_id: str, index: int):
        self.line_number = line_number
        self.image_id = image_id
        self.index = index
        super().__init__(
            f"line {line_number}: duplicate caption key ({image_id!r}, {index})"
        )


@dataclass(frozen=True)
class LanguageProfile:
    """Per-language normalization settings.

    ``sentence_terminators`` are stripped from token edges together with
    ``EDGE_PUNCTUATION``; ``case_folding`` lowercases tokens (identity for
    scripts without case, such as Devanagari).
    """

    code: str
    sentence_terminators: frozenset[str] = SENTENCE_TERMINATORS
    case_folding: bool = True

    @property
    def strip_chars(self) -> str:
        return "".join(sorted(self.sentence_terminators | EDGE_PUNCTUATION))


_BUILTIN_PROFILES: dict[str, LanguageProfile] = {
    "en": LanguageProfile(code="en", case_folding=True),
    "hi": LanguageProfile(code="hi", case_folding=False),
}

DEFAULT_PROFILE = LanguageProfile(code="default", case_folding=True)


def profile_for(language: str) -> LanguageProfile:
    """Return the built-in profile for ``language``, or the default profile
    (case folding on) under the requested code for unknown languages."""
    try:
        return _BUILTIN_PROFILES[language]
    except KeyError:
        return replace(DEFAULT_PROFILE, code=language)


def normalize(raw_text: str, profile: LanguageProfile) -> list[str]:
    """Tokenize ``raw_text``: split on Unicode whitespace, strip terminator and
    edge punctuation from both ends of each token, case-fold if the profile
    says so, and drop tokens that end up empty.

    Idempotent at the token level: normalizing the space-join of the output
    yields the same list.  May return ``[]`` for punctuation-only input.
    """
    strip_chars = profile.strip_chars
    tokens = []
    for piece in raw_text.split():
        token = piece.strip(strip_chars)
        if not token:
            continue
        if profile.case_folding:
            token = token.lower()
        tokens.append(token)
    return tokens


@dataclass(frozen=True)
class Caption:
    """One caption of one image in one language.

    ``tokens`` is always ``normalize(raw_text, profile_for(language))``; use
    :func:`make_caption` so the two can never drift apart.
    """

    image_id: str
    language: str
    index: int
    raw_text: str
    tokens: tuple[str, ...]
    annotator_id: str | None = None


def make_caption(
    image_id: str,
    language: str,
    index: int,
    raw_text: str,
    annotator_id: str | None = None,
) -> Caption:
    if not image_id:
        raise ValueError("image_id must be non-empty")
    if index < 0:
        raise ValueError(f"caption index must be >= 0, got {index}")
    if not raw_text.strip():
        raise ValueError("caption text is empty after trimming whitespace")
    tokens = tuple(normalize(raw_text, profile_for(language)))
    return Caption(
        image_id=image_id,
        language=language,
        index=index,
        raw_text=raw_text,
        tokens=tokens,
        annotator_id=annotator_id,
    )


@dataclass(frozen=True)
class CaptionSet:
    """All captions of one image in one language, ordered by index."""

    image_id: str
    language: str
    captions: tuple[Caption, ...]

    def __post_init__(self):
        seen: set[int] = set()
        for c in self.captions:
            if c.image_id != self.image_id:
                raise ValueError(
                    f"caption for image {c.image_id!r} in set for {self.image_id!r}"
                )
            if c.language != self.language:
                raise ValueError(
                    f"caption language {c.language!r} in {self.language!r} set"
                )
            if c.index in seen:
                raise ValueError(
                    f"duplicate caption index {c.index} for image {self.image_id!r}"
                )
            seen.add(c.index)

    def __len__(self) -> int:
        return len(self.captions)

    @property
    def token_lists(self) -> list[tuple[str, ...]]:
        return [c.tokens for c in self.captions]


class Status(str, Enum):
    CANDIDATE = "candidate"
    SELECTED = "selected"
    PRUNED = "pruned"


_ALLOWED_TRANSITIONS = {
    (Status.CANDIDATE, Status.SELECTED),
    (Status.CANDIDATE, Status.PRUNED),
    (Status.SELECTED, Status.PRUNED),
}


class InvalidTransition(ValueError):
    pass


@dataclass(frozen=True)
class ImageRecord:
    """An image known to the toolkit.  Only the identifier and an optional
    asset locator are stored; pixels are out of scope."""

    id: str
    uri: str | None = None
    status: Status = Status.CANDIDATE

    def __post_init__(self):
        if not self.id:
            raise ValueError("image id must be non-empty")

    def with_status(self, new: Status) -> "ImageRecord":
        if new == self.status:
            return self
        if (self.status, new) not in _ALLOWED_TRANSITIONS:
            raise InvalidTransition(
                f"image {self.id!r}: {self.status.value} -> {new.value}"
            )
        return replace(self, status=new)


def parse_caption_file(content: str, language: str) -> list[Caption]:
    """Parse caption-file text into :class:`Caption` objects.

    Each line is ``<image_id>#<index>\\t<caption text>``.  The index separator
    is the last ``#`` before the tab, so image ids may themselves contain
    ``#``.  Raises :class:`MalformedLine` (with the 1-based line number) on any
    line that does not fit, and :class:`DuplicateKey` on a repeated
    (image_id, index).
    """
    captions: list[Caption] = []
    seen: set[tuple[str, int]] = set()
    for line_number, line in enumerate(content.splitlines(), start=1):
        if "\t" not in line:
            raise MalformedLine(line_number, "missing tab separator")
        key, text = line.split("\t", 1)
        if "#" not in key:
            raise MalformedLine(line_number, "missing '#' between image id and index")
        image_id, index_str = key.rsplit("#", 1)
        if not image_id:
            raise MalformedLine(line_number, "empty image id")
        try:
            index = int(index_str)
        except ValueError:
            raise MalformedLine(
                line_number, f"caption index {index_str!r} is not an integer"
            ) from None
        if index < 0:
            raise MalformedLine(line_number, f"negative caption index {index}")
        if not text.strip():
            raise MalformedLine(line_number, "empty caption text")
        if (image_id, index) in seen:
            raise DuplicateKey(line_number, image_id, index)
        seen.add((image_id, index))
        captions.append(make_caption(image_id, language, index, text))
    return captions


def serialize_captions(captions: Iterable[Caption]) -> str:
    """Inverse of :func:`parse_caption_file`: one LF-terminated line per
    caption, in input order."""
    lines = [f"{c.image_id}#{c.index}\t{c.raw_text}" for c in captions]
    return "".join(line + "\n" for line in lines)


def read_caption_file(path, language: str) -> list[Caption]:
    """Read and parse a caption file.  The file must be valid UTF-8; invalid
    bytes raise ``UnicodeDecodeError`` rather than being replaced."""
    with open(path, "r", encoding="utf-8", errors="strict", newline="") as f:
        return parse_caption_file(f.read(), language)


def write_caption_file(path, captions: Iterable[Caption]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(serialize_captions(captions))


def build_caption_sets(captions: Iterable[Caption]) -> dict[str, CaptionSet]:
    """Group captions into per-image sets, keyed by image id.

    Captions within a set are ordered by index; all captions must share one
    language.
    """
    by_image: dict[str, list[Caption]] = {}
    language: str | None = None
    for c in captions:
        if language is None:
            language = c.language
        elif c.language != language:
            raise ValueError(
                f"mixed languages in caption stream: {language!r} and {c.language!r}"
            )
        by_image.setdefault(c.image_id, []).append(c)
    return {
        image_id: CaptionSet(
            image_id=image_id,
            language=language or "",
            captions=tuple(sorted(group, key=lambda c: c.index)),
        )
        for image_id, group in by_image.items()
    }
