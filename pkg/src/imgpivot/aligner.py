"""EM-trained lexical translation models and Viterbi word alignment.

Two model variants share one latent-variable structure: every target word
chooses one source position from {NULL, 1..n}.  The NULL choice always
carries probability ``p0``; the remaining (1 - p0) is spread over real
positions either uniformly (``model1``) or by a diagonal preference
``exp(-lambda * |j/m - i/n|)`` renormalized over the real positions
(``diagonal``), with 1-based position ratios.  Conditioning is one-way,
source -> target; there is no symmetrization.

Training is plain EM over the translation table t(tgt | src): the E-step
collects expected link counts under the current table, the M-step normalizes
them per source word, flooring probabilities at ``prob_floor`` before
renormalizing so the log-domain likelihood never underflows.  The corpus
log-likelihood under the pre-update table is recorded every iteration and is
non-decreasing up to flooring noise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

NULL_TOKEN = "<NULL>"
NULL_ID = 0

MODEL1 = "model1"
DIAGONAL = "diagonal"

#: Hard cap on sentence length; caption data never approaches it and the
#: E-step is quadratic in it.
MAX_SENTENCE_TOKENS = 200


class EmptyCorpus(ValueError):
    pass


class InvalidConfig(ValueError):
    pass


class UntrainedModel(ValueError):
    pass


class SentenceTooLong(ValueError):
    pass


@dataclass(frozen=True)
class AlignerConfig:
    model: str = MODEL1
    iterations: int = 5
    diagonal_tension: float = 4.0
    null_prob: float = 0.08
    prob_floor: float = 1e-12

    def validate(self) -> None:
        if self.model not in (MODEL1, DIAGONAL):
            raise InvalidConfig(f"unknown model {self.model!r}")
        if self.iterations < 1:
            raise InvalidConfig(f"iterations must be >= 1, got {self.iterations}")
        if self.diagonal_tension <= 0:
            raise InvalidConfig(
                f"diagonal_tension must be > 0, got {self.diagonal_tension}"
            )
        if not 0.0 <= self.null_prob < 1.0:
            raise InvalidConfig(f"null_prob must be in [0, 1), got {self.null_prob}")
        if self.prob_floor <= 0:
            raise InvalidConfig(f"prob_floor must be > 0, got {self.prob_floor}")


class Vocab:
    """Bidirectional token <-> integer-id table."""

    def __init__(self, reserved: Sequence[str] = ()):
        self._ids: dict[str, int] = {}
        self._tokens: list[str] = []
        for tok in reserved:
            self.add(tok)

    def add(self, token: str) -> int:
        if token not in self._ids:
            self._ids[token] = len(self._tokens)
            self._tokens.append(token)
        return self._ids[token]

    def id_of(self, token: str) -> int | None:
        return self._ids.get(token)

    def token_of(self, idx: int) -> str:
        return self._tokens[idx]

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids


TokenPair = tuple[Sequence[str], Sequence[str]]


@dataclass
class TranslationModel:
    """A trained lexical translation table plus the vocabularies and config
    that produced it.  ``t[src_id][tgt_id]`` is t(tgt | src); src id 0 is the
    NULL word.  Every row sums to 1 within 1e-6."""

    src_vocab: Vocab
    tgt_vocab: Vocab
    t: dict[int, dict[int, float]]
    config: AlignerConfig
    log_likelihood_trace: list[float] = field(default_factory=list)
    skipped_pairs: int = 0

    def prob(self, src_word: str, tgt_word: str) -> float:
        si = self.src_vocab.id_of(src_word)
        ti = self.tgt_vocab.id_of(tgt_word)
        if si is None or ti is None:
            return 0.0
        return self.t.get(si, {}).get(ti, 0.0)


def _real_weights(
    model: str, j: int, m: int, n: int, tension: float
) -> list[float]:
    """Distribution over real source positions 1..n for target position j of
    m (both 1-based)."""
    if model == MODEL1:
        return [1.0 / n] * n
    weights = [
        math.exp(-tension * abs(j / m - i / n)) for i in range(1, n + 1)
    ]
    total = sum(weights)
    return [w / total for w in weights]


def _delta(
    config: AlignerConfig, j: int, m: int, n: int
) -> tuple[float, list[float]]:
    """(NULL weight, per-real-position weights) for target position j."""
    reals = _real_weights(config.model, j, m, n, config.diagonal_tension)
    p0 = config.null_prob
    return p0, [(1.0 - p0) * w for w in reals]


def _prepare(
    pairs: Iterable[TokenPair], config: AlignerConfig
) -> tuple[list[tuple[list[int], list[int]]], Vocab, Vocab, int]:
    src_vocab = Vocab(reserved=(NULL_TOKEN,))
    tgt_vocab = Vocab()
    encoded = []
    skipped = 0
    for idx, (src_tokens, tgt_tokens) in enumerate(pairs):
        if len(src_tokens) > MAX_SENTENCE_TOKENS or len(tgt_tokens) > MAX_SENTENCE_TOKENS:
            raise SentenceTooLong(
                f"pair {idx}: sentence exceeds {MAX_SENTENCE_TOKENS} tokens"
            )
        if not src_tokens or not tgt_tokens:
            skipped += 1
            continue
        encoded.append(
            (
                [src_vocab.add(t) for t in src_tokens],
                [tgt_vocab.add(t) for t in tgt_tokens],
            )
        )
    return encoded, src_vocab, tgt_vocab, skipped


def _initial_table(
    encoded: list[tuple[list[int], list[int]]]
) -> dict[int, dict[int, float]]:
    # Uniform over co-occurring target words only; NULL co-occurs with every
    # target word of every sentence it appears in (i.e. all of them).
    support: dict[int, set[int]] = {}
    for src_ids, tgt_ids in encoded:
        for si in set(src_ids) | {NULL_ID}:
            support.setdefault(si, set()).update(tgt_ids)
    return {
        si: {ti: 1.0 / len(tgts) for ti in tgts}
        for si, tgts in support.items()
    }


def train(pairs: Sequence[TokenPair], config: AlignerConfig | None = None) -> TranslationModel:
    """Run EM for ``config.iterations`` rounds over tokenized sentence pairs.

    Pairs with an empty side are skipped (counted in ``skipped_pairs``); an
    entirely empty corpus raises :class:`EmptyCorpus`.
    """
    config = config or AlignerConfig()
    config.validate()
    encoded, src_vocab, tgt_vocab, skipped = _prepare(pairs, config)
    if not encoded:
        raise EmptyCorpus("no usable sentence pairs")
    t = _initial_table(encoded)
    trace: list[float] = []
    floor = config.prob_floor
    for _ in range(config.iterations):
        counts: dict[int, dict[int, float]] = {}
        totals: dict[int, float] = {}
        log_likelihood = 0.0
        for src_ids, tgt_ids in encoded:
            n, m = len(src_ids), len(tgt_ids)
            for j, ti in enumerate(tgt_ids, start=1):
                null_w, real_w = _delta(config, j, m, n)
                scores = [null_w * t[NULL_ID].get(ti, 0.0)]
                for i, si in enumerate(src_ids):
                    scores.append(real_w[i] * t[si].get(ti, 0.0))
                z = sum(scores)
                if z <= 0.0:
                    # All candidates floored away; skip the word, it carries
                    # no usable signal this round.
                    continue
                log_likelihood += math.log(z)
                posterior_src = [NULL_ID] + list(src_ids)
                for si, score in zip(posterior_src, scores):
                    gamma = score / z
                    row = counts.setdefault(si, {})
                    row[ti] = row.get(ti, 0.0) + gamma
                    totals[si] = totals.get(si, 0.0) + gamma
        trace.append(log_likelihood)
        new_t: dict[int, dict[int, float]] = {}
        for si, row in counts.items():
            total = totals[si]
            floored = {ti: max(c / total, floor) for ti, c in row.items()}
            z = sum(floored.values())
            new_t[si] = {ti: p / z for ti, p in floored.items()}
        # Source words that received no posterior mass keep their old rows.
        for si, row in t.items():
            new_t.setdefault(si, row)
        t = new_t
    return TranslationModel(
        src_vocab=src_vocab,
        tgt_vocab=tgt_vocab,
        t=t,
        config=config,
        log_likelihood_trace=trace,
        skipped_pairs=skipped,
    )


Link = tuple[int, int]


def viterbi_align(model: TranslationModel, pair: TokenPair) -> list[Link]:
    """Best source position for every target word of one pair, as 0-based
    (src_position, tgt_position) links.

    The NULL choice emits no link.  Target words unseen in training align to
    NULL.  Among real positions, ties break toward the smallest position;
    NULL loses ties to any real position.
    """
    if not model.t:
        raise UntrainedModel("translation table is empty")
    src_tokens, tgt_tokens = pair
    src_ids = [model.src_vocab.id_of(tok) for tok in src_tokens]
    n, m = len(src_tokens), len(tgt_tokens)
    links: list[Link] = []
    for j, tgt_tok in enumerate(tgt_tokens, start=1):
        ti = model.tgt_vocab.id_of(tgt_tok)
        if ti is None:
            continue  # OOV target word: NULL-aligned
        null_w, real_w = _delta(model.config, j, m, n)
        best_score = null_w * model.t.get(NULL_ID, {}).get(ti, 0.0)
        best_i: int | None = None  # None encodes NULL
        for i, si in enumerate(src_ids):
            if si is None:
                continue  # OOV source word: cannot be chosen
            score = real_w[i] * model.t.get(si, {}).get(ti, 0.0)
            # Strictly-greater keeps the smallest real position on real-real
            # ties; >= makes any real position beat NULL on a tie.
            if score > best_score or (score == best_score and best_i is None):
                best_score = score
                best_i = i
        if best_i is not None:
            links.append((best_i, j - 1))
    return links


@dataclass(frozen=True)
class AlignmentData:
    """Viterbi links for a list of sentence pairs, index-aligned with it."""

    links: tuple[tuple[Link, ...], ...]

    def __len__(self) -> int:
        return len(self.links)


def align_corpus(model: TranslationModel, pairs: Sequence[TokenPair]) -> AlignmentData:
    return AlignmentData(
        links=tuple(tuple(viterbi_align(model, pair)) for pair in pairs)
    )


def write_alignments(path, alignments: AlignmentData) -> None:
    """One line per pair, links as space-separated ``i-j`` (source-target,
    0-based)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        for links in alignments.links:
            f.write(" ".join(f"{i}-{j}" for i, j in links) + "\n")


def read_alignments(path) -> AlignmentData:
    links = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line in f.read().splitlines():
            pair_links = []
            for chunk in line.split():
                i, j = chunk.split("-")
                pair_links.append((int(i), int(j)))
            links.append(tuple(pair_links))
    return AlignmentData(links=tuple(links))


def write_model(path, model: TranslationModel) -> None:
    """Dump the translation table as TSV with a config header line."""
    cfg = model.config
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(
            "# model={} iterations={} diagonal_tension={} null_prob={} prob_floor={}\n".format(
                cfg.model,
                cfg.iterations,
                repr(cfg.diagonal_tension),
                repr(cfg.null_prob),
                repr(cfg.prob_floor),
            )
        )
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        for si in sorted(model.t):
            src_word = model.src_vocab.token_of(si)
            row = model.t[si]
            for ti in sorted(row, key=lambda k: (-row[k], k)):
                writer.writerow((src_word, model.tgt_vocab.token_of(ti), repr(row[ti])))


def read_model(path) -> TranslationModel:
    with open(path, "r", encoding="utf-8", newline="") as f:
        header = f.readline()
        if not header.startswith("# "):
            raise ValueError("model dump is missing its config header")
        fields = dict(
            item.split("=", 1) for item in header[2:].strip().split(" ")
        )
        config = AlignerConfig(
            model=fields["model"],
            iterations=int(fields["iterations"]),
            diagonal_tension=float(fields["diagonal_tension"]),
            null_prob=float(fields["null_prob"]),
            prob_floor=float(fields["prob_floor"]),
        )
        src_vocab = Vocab(reserved=(NULL_TOKEN,))
        tgt_vocab = Vocab()
        t: dict[int, dict[int, float]] = {}
        for src_word, tgt_word, prob in csv.reader(f, delimiter="\t"):
            si = src_vocab.add(src_word)
            ti = tgt_vocab.add(tgt_word)
            t.setdefault(si, {})[ti] = float(prob)
    return TranslationModel(
        src_vocab=src_vocab, tgt_vocab=tgt_vocab, t=t, config=config
    )
