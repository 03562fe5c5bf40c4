"""End-to-end orchestration: score, select, pair, align, dict.

Each stage writes under a ``.partial`` marker and is renamed into place only
on success, so an aborted run never leaves a file that looks finished.  The
run emits a manifest of every artifact with its content digest, plus a
lockfile echoing the fully resolved configuration; identical inputs and
config reproduce identical digests.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from .aligner import AlignerConfig, DIAGONAL, MODEL1, align_corpus, train, write_alignments, write_model
from .corpus import build_caption_sets, read_caption_file
from .lexicon import count_alignments, extract_dictionary, parse_tiers, write_dictionary
from .pairing import CROSS, RANDOM, build_corpus, corpus_token_pairs, image_seed, write_corpus
from .selection import apply_review, read_review_decisions, score_corpus, write_scores

log = logging.getLogger(__name__)

LOCKFILE_NAME = "pipeline.lock.yaml"
MANIFEST_NAME = "manifest.json"
PARTIAL_SUFFIX = ".partial"


class PipelineError(RuntimeError):
    """A stage failed; ``stage`` names it, ``__cause__`` holds the reason."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass
class PipelineConfig:
    src_captions: str
    tgt_captions: str
    out_dir: str
    src_language: str = "en"
    tgt_language: str = "hi"
    k: int = 700
    review_decisions: str | None = None
    method: str = CROSS
    seed: int = 0
    granularity: str = "char"
    jobs: int = 1
    aligner_model: str = DIAGONAL
    iterations: int = 5
    diagonal_tension: float = 4.0
    null_prob: float = 0.08
    tiers: str = "0.5:20,0.6:5,0.9:2"

    def validate(self) -> "PipelineConfig":
        if self.method not in (CROSS, RANDOM):
            raise ValueError(f"method must be 'cross' or 'random', got {self.method!r}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.aligner_model not in (MODEL1, DIAGONAL):
            raise ValueError(f"unknown aligner model {self.aligner_model!r}")
        if not self.src_language or not self.tgt_language:
            raise ValueError("both language codes must be non-empty")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        parse_tiers(self.tiers)
        self.aligner_config().validate()
        return self

    def aligner_config(self) -> AlignerConfig:
        return AlignerConfig(
            model=self.aligner_model,
            iterations=self.iterations,
            diagonal_tension=self.diagonal_tension,
            null_prob=self.null_prob,
        )

    def resolved(self) -> dict:
        """All fields with defaults materialized, for the lockfile."""
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, raw: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown pipeline config keys: {sorted(unknown)}")
        return cls(**raw).validate()


def stage_seed(seed: int, stage: str) -> int:
    """Per-stage seed: first 8 bytes of sha256("<seed>:<stage>"), the same
    derivation the pairing module applies per image."""
    return image_seed(seed, stage)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class _StageWriter:
    """Collects artifacts for one stage; files are written under temporary
    names and promoted together when the stage completes."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.pending: list[tuple[Path, Path]] = []  # (tmp, final)

    def path_for(self, name: str) -> Path:
        final = self.out_dir / name
        tmp = self.out_dir / (name + PARTIAL_SUFFIX)
        self.pending.append((tmp, final))
        return tmp

    def corpus_prefix(self, stem: str) -> str:
        # write_corpus appends .src/.tgt/.meta.tsv to the prefix, so the
        # partial marker has to sit inside the name rather than at the end.
        for ext in (".src", ".tgt", ".meta.tsv"):
            tmp = self.out_dir / (stem + PARTIAL_SUFFIX + ext)
            self.pending.append((tmp, self.out_dir / (stem + ext)))
        return str(self.out_dir / (stem + PARTIAL_SUFFIX))

    def promote(self) -> list[Path]:
        finals = []
        for tmp, final in self.pending:
            os.replace(tmp, final)
            finals.append(final)
        return finals


def run_end_to_end(config: PipelineConfig) -> dict:
    """Run score, select, pair, align, dict; return the manifest.

    The manifest lists one entry per stage with relative artifact paths and
    hex sha256 digests, no timestamps.  It is also written to
    ``out_dir/manifest.json``; the resolved config goes to
    ``out_dir/pipeline.lock.yaml``.
    """
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lockfile = out_dir / LOCKFILE_NAME
    lockfile.write_text(
        yaml.safe_dump(config.resolved(), sort_keys=True), encoding="utf-8"
    )

    manifest: dict = {"seed": config.seed, "stages": []}

    def record(stage: str, finals: list[Path], **extra) -> None:
        entry = {
            "name": stage,
            "artifacts": [
                {"path": p.name, "sha256": _sha256(p)} for p in finals
            ],
        }
        entry.update(extra)
        manifest["stages"].append(entry)
        log.info("stage %s: %d artifact(s)", stage, len(finals))

    def run_stage(stage: str, body) -> None:
        writer = _StageWriter(out_dir)
        try:
            extra = body(writer) or {}
        except Exception as exc:
            raise PipelineError(stage, exc) from exc
        record(stage, writer.promote(), **extra)

    state: dict = {}

    def do_score(writer: _StageWriter):
        captions = read_caption_file(config.src_captions, config.src_language)
        state["src_sets"] = build_caption_sets(captions)
        state["scores"] = score_corpus(
            state["src_sets"], granularity=config.granularity, jobs=config.jobs
        )
        write_scores(writer.path_for("scores.tsv"), state["scores"])

    def do_select(writer: _StageWriter):
        ranked = sorted(state["scores"], key=lambda s: (s.d, s.image_id))
        selected = [s.image_id for s in ranked[: config.k]]
        if config.review_decisions:
            decisions = read_review_decisions(config.review_decisions)
            selected = apply_review(selected, decisions)
        state["selected"] = selected
        writer.path_for("selected.txt").write_text(
            "".join(i + "\n" for i in selected), encoding="utf-8"
        )

    def do_pair(writer: _StageWriter):
        captions = read_caption_file(config.tgt_captions, config.tgt_language)
        tgt_sets = build_caption_sets(captions)
        seed = stage_seed(config.seed, "pair")
        usable = [i for i in state["selected"] if i in tgt_sets]
        missing = len(state["selected"]) - len(usable)
        if missing:
            log.warning("pair: %d selected image(s) lack target captions", missing)
        corpus = build_corpus(
            state["src_sets"], tgt_sets, config.method, seed=seed, images=usable
        )
        state["corpus"] = corpus
        write_corpus(writer.corpus_prefix("corpus"), corpus)
        return {"seed": seed, "pairs": len(corpus)}

    def do_align(writer: _StageWriter):
        token_pairs = corpus_token_pairs(state["corpus"])
        state["token_pairs"] = token_pairs
        model = train(token_pairs, config.aligner_config())
        state["alignments"] = align_corpus(model, token_pairs)
        write_alignments(writer.path_for("corpus.align"), state["alignments"])
        write_model(writer.path_for("model.tsv"), model)
        return {"iterations": config.iterations}

    def do_dict(writer: _StageWriter):
        counts = count_alignments(state["alignments"], state["token_pairs"])
        entries = extract_dictionary(counts, parse_tiers(config.tiers))
        write_dictionary(writer.path_for("dict.tsv"), entries)
        return {"entries": len(entries)}

    run_stage("score", do_score)
    run_stage("select", do_select)
    run_stage("pair", do_pair)
    run_stage("align", do_align)
    run_stage("dict", do_dict)

    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
