"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure (I/O, validation), 2 usage error.
Logs go to standard error; data goes to files or standard output.
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click
import yaml

from . import __version__
from . import evaluation, lexicon, selection
from .aligner import AlignerConfig, DIAGONAL, MODEL1, align_corpus, read_alignments, train, write_alignments, write_model
from .corpus import build_caption_sets, read_caption_file, write_caption_file
from .pairing import CROSS, RANDOM, build_corpus, corpus_token_pairs, read_corpus, split_corpus, write_corpus
from .pipeline import PipelineConfig, PipelineError, run_end_to_end

log = logging.getLogger("imgpivot")

_RUNTIME_ERRORS = (
    OSError,
    ValueError,
    KeyError,
    LookupError,
    ArithmeticError,
    PipelineError,
)


def _friendly(fn):
    """Map expected runtime failures onto exit code 1 with a one-line
    diagnostic instead of a traceback."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except _RUNTIME_ERRORS as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True, ensure_ascii=False))


_in_file = click.Path(exists=True, dir_okay=False)
_out_file = click.Path(dir_okay=False, writable=True)


@click.group()
@click.version_option(version=__version__, message="%(version)s")
@click.option("-v", "--verbose", is_flag=True, help="Debug-level logging.")
def main(verbose: bool) -> None:
    """Caption corpus curation, comparable-corpus pairing, word alignment,
    dictionary extraction, and the evaluation toolkit."""
    # force: rebind the handler on every invocation so repeated in-process
    # calls (tests, embedding) log to the stderr that is current *now*
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


# ---------------------------------------------------------------------------
# Corpus curation
# ---------------------------------------------------------------------------


@main.command()
@click.option("--captions", "captions_path", required=True, type=_in_file,
              help="Caption file, <image_id>#<index><TAB><text> per line.")
@click.option("--language", required=True, help="Language code for all captions.")
@click.option("--out", "out_path", type=_out_file,
              help="Optional re-serialized copy (validated, sorted).")
@_friendly
def ingest(captions_path: str, language: str, out_path: str | None) -> None:
    """Validate a caption file and report its shape."""
    captions = read_caption_file(captions_path, language)
    sets = build_caption_sets(captions)
    log.info("parsed %d captions across %d images", len(captions), len(sets))
    if out_path:
        write_caption_file(out_path, captions)
    _echo_json({"captions": len(captions), "images": len(sets)})


@main.command()
@click.option("--captions", "captions_path", required=True, type=_in_file)
@click.option("--language", default="en", show_default=True)
@click.option("--granularity", type=click.Choice(["char", "token"]),
              default="char", show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--out", "out_path", required=True, type=_out_file)
@_friendly
def score(captions_path: str, language: str, granularity: str, jobs: int,
          out_path: str) -> None:
    """Score caption complexity per image; write a TSV sorted by d."""
    sets = build_caption_sets(read_caption_file(captions_path, language))
    scores = selection.score_corpus(sets, granularity=granularity, jobs=jobs)
    selection.write_scores(out_path, scores)
    log.info("scored %d images -> %s", len(scores), out_path)


@main.command()
@click.option("--scores", "scores_path", required=True, type=_in_file)
@click.option("--k", required=True, type=int, help="How many images to keep.")
@click.option("--out", "out_path", required=True, type=_out_file)
@_friendly
def select(scores_path: str, k: int, out_path: str) -> None:
    """Keep the k lowest-complexity images (ascending d, ties by id)."""
    if k < 0:
        raise click.ClickException(f"k must be >= 0, got {k}")
    scores = selection.read_scores(scores_path)
    scores.sort(key=lambda s: (s.d, s.image_id))
    chosen = [s.image_id for s in scores[:k]]
    if len(chosen) < k:
        log.warning("only %d images available for k=%d", len(chosen), k)
    Path(out_path).write_text("".join(i + "\n" for i in chosen), encoding="utf-8")
    log.info("selected %d images -> %s", len(chosen), out_path)


@main.command()
@click.option("--selected", "selected_path", required=True, type=_in_file,
              help="Image id list, one per line.")
@click.option("--decisions", "decisions_path", required=True, type=_in_file,
              help="TSV of image_id, keep|prune, optional reason.")
@click.option("--out", "out_path", required=True, type=_out_file)
@_friendly
def review(selected_path: str, decisions_path: str, out_path: str) -> None:
    """Apply manual keep/prune decisions to a selected image list."""
    selected = Path(selected_path).read_text(encoding="utf-8").split()
    decisions = selection.read_review_decisions(decisions_path)
    kept = selection.apply_review(selected, decisions)
    Path(out_path).write_text("".join(i + "\n" for i in kept), encoding="utf-8")
    log.info("review kept %d of %d images -> %s", len(kept), len(selected), out_path)


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------


@main.command()
@click.option("--src", "src_path", required=True, type=_in_file)
@click.option("--tgt", "tgt_path", required=True, type=_in_file)
@click.option("--src-language", default="en", show_default=True)
@click.option("--tgt-language", default="hi", show_default=True)
@click.option("--method", type=click.Choice([CROSS, RANDOM]), default=CROSS,
              show_default=True)
@click.option("--seed", type=int, default=None,
              help="Required for random pairing.")
@click.option("--images", "images_path", type=_in_file,
              help="Restrict to these image ids (one per line).")
@click.option("--out-prefix", required=True,
              help="Writes <prefix>.src, <prefix>.tgt, <prefix>.meta.tsv.")
@_friendly
def pair(src_path: str, tgt_path: str, src_language: str, tgt_language: str,
         method: str, seed: int | None, images_path: str | None,
         out_prefix: str) -> None:
    """Pair caption sets image by image into a comparable corpus."""
    src_sets = build_caption_sets(read_caption_file(src_path, src_language))
    tgt_sets = build_caption_sets(read_caption_file(tgt_path, tgt_language))
    images = None
    if images_path:
        images = Path(images_path).read_text(encoding="utf-8").split()
    corpus = build_corpus(src_sets, tgt_sets, method, seed=seed, images=images)
    paths = write_corpus(out_prefix, corpus)
    log.info("wrote %d pairs across %d images -> %s",
             len(corpus), len(corpus.image_ids()), ", ".join(map(str, paths)))


@main.command()
@click.option("--prefix", required=True, help="Corpus prefix to read.")
@click.option("--src-language", default="en", show_default=True)
@click.option("--tgt-language", default="hi", show_default=True)
@click.option("--test-fraction", type=float, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--train-prefix", required=True)
@click.option("--test-prefix", required=True)
@_friendly
def split(prefix: str, src_language: str, tgt_language: str,
          test_fraction: float, seed: int, train_prefix: str,
          test_prefix: str) -> None:
    """Split a corpus into train/test at the image level."""
    corpus = read_corpus(prefix, src_language, tgt_language)
    train_set, test_set = split_corpus(corpus, test_fraction, seed)
    write_corpus(train_prefix, train_set)
    write_corpus(test_prefix, test_set)
    log.info("split %d pairs into %d train / %d test",
             len(corpus), len(train_set), len(test_set))


# ---------------------------------------------------------------------------
# Alignment and dictionary
# ---------------------------------------------------------------------------


@main.command()
@click.option("--prefix", required=True, help="Corpus prefix to align.")
@click.option("--src-language", default="en", show_default=True)
@click.option("--tgt-language", default="hi", show_default=True)
@click.option("--model", "model_kind", type=click.Choice([MODEL1, DIAGONAL]),
              default=DIAGONAL, show_default=True)
@click.option("--iterations", default=5, show_default=True)
@click.option("--diagonal-tension", default=4.0, show_default=True)
@click.option("--null-prob", default=0.08, show_default=True)
@click.option("--alignments-out", required=True, type=_out_file)
@click.option("--model-out", type=_out_file)
@_friendly
def align(prefix: str, src_language: str, tgt_language: str, model_kind: str,
          iterations: int, diagonal_tension: float, null_prob: float,
          alignments_out: str, model_out: str | None) -> None:
    """Train a word aligner on a corpus and write Viterbi alignments."""
    corpus = read_corpus(prefix, src_language, tgt_language)
    pairs = corpus_token_pairs(corpus)
    config = AlignerConfig(model=model_kind, iterations=iterations,
                           diagonal_tension=diagonal_tension,
                           null_prob=null_prob)
    model = train(pairs, config)
    for i, ll in enumerate(model.log_likelihood_trace, start=1):
        log.debug("iteration %d: log-likelihood %.4f", i, ll)
    alignments = align_corpus(model, pairs)
    write_alignments(alignments_out, alignments)
    if model_out:
        write_model(model_out, model)
    log.info("aligned %d pairs (final log-likelihood %.4f)",
             len(pairs), model.log_likelihood_trace[-1])


@main.command(name="dict")
@click.option("--prefix", required=True, help="Corpus prefix the alignments refer to.")
@click.option("--src-language", default="en", show_default=True)
@click.option("--tgt-language", default="hi", show_default=True)
@click.option("--alignments", "alignments_path", required=True, type=_in_file)
@click.option("--tiers", default="0.5:20,0.6:5,0.9:2", show_default=True,
              help="Comma-separated prob:count thresholds; a pair passing any tier is kept.")
@click.option("--out", "out_path", required=True, type=_out_file)
@_friendly
def dict_cmd(prefix: str, src_language: str, tgt_language: str,
             alignments_path: str, tiers: str, out_path: str) -> None:
    """Extract a bilingual dictionary from hard alignment links."""
    corpus = read_corpus(prefix, src_language, tgt_language)
    pairs = corpus_token_pairs(corpus)
    alignments = read_alignments(alignments_path)
    counts = lexicon.count_alignments(alignments, pairs)
    entries = lexicon.extract_dictionary(counts, lexicon.parse_tiers(tiers))
    lexicon.write_dictionary(out_path, entries)
    log.info("extracted %d entries -> %s", len(entries), out_path)


@main.command(name="dict-score")
@click.option("--dictionary", "dictionary_path", required=True, type=_in_file)
@click.option("--judgments", "judgments_path", required=True, type=_in_file,
              help="TSV of src, tgt, 0|1 manual correctness labels.")
@_friendly
def dict_score(dictionary_path: str, judgments_path: str) -> None:
    """Score dictionary precision against manual judgments."""
    entries = lexicon.read_dictionary(dictionary_path)
    judgments = lexicon.read_judgments(judgments_path)
    report = lexicon.score_dictionary(entries, judgments)
    _echo_json(report.to_json())


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _read_token_lines(path: str) -> list[list[str]]:
    text = Path(path).read_text(encoding="utf-8")
    return [line.split() for line in text.splitlines()]


@main.command()
@click.option("--hypothesis", "hypothesis_path", required=True, type=_in_file,
              help="One whitespace-tokenized sentence per line.")
@click.option("--reference", "reference_paths", required=True, type=_in_file,
              multiple=True, help="Repeatable for multiple references.")
@click.option("--max-order", default=4, show_default=True)
@click.option("--smooth/--no-smooth", default=False, show_default=True,
              help="Add-one smoothing for orders above 1.")
@click.option("--bp", "bp_reference",
              type=click.Choice([evaluation.SHORTEST, evaluation.CLOSEST]),
              default=evaluation.SHORTEST, show_default=True,
              help="Reference-length convention for the brevity penalty.")
@_friendly
def bleu(hypothesis_path: str, reference_paths: tuple[str, ...], max_order: int,
         smooth: bool, bp_reference: str) -> None:
    """Corpus BLEU of a hypothesis file against reference file(s)."""
    hyps = _read_token_lines(hypothesis_path)
    ref_files = [_read_token_lines(p) for p in reference_paths]
    for p, rf in zip(reference_paths, ref_files):
        if len(rf) != len(hyps):
            raise click.ClickException(
                f"{p}: {len(rf)} lines, hypothesis has {len(hyps)}"
            )
    references = [[rf[i] for rf in ref_files] for i in range(len(hyps))]
    result = evaluation.bleu_details(hyps, references, max_n=max_order,
                                     smoothing=smooth,
                                     bp_reference=bp_reference)
    _echo_json(result.to_json())


@main.command()
@click.option("--ratings", "ratings_path", required=True, type=_in_file,
              help="TSV: image_id, src_index, tgt_index, rating, rater_id.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]),
              default="table", show_default=True)
@_friendly
def likert(ratings_path: str, fmt: str) -> None:
    """Summarize Likert ratings per category with cumulative percentages."""
    report = evaluation.likert_summary(evaluation.read_ratings(ratings_path))
    if fmt == "json":
        _echo_json(report.to_json())
    else:
        click.echo(report.format_table())


def _read_floats(path: str) -> list[float]:
    return [float(x) for x in Path(path).read_text(encoding="utf-8").split()]


@main.command()
@click.option("--baseline", "baseline_path", required=True, type=_in_file,
              help="One score per line.")
@click.option("--contrast", "contrast_path", required=True, type=_in_file,
              help="One score per line, paired with the baseline by position.")
@click.option("--alpha", default=0.05, show_default=True)
@_friendly
def ttest(baseline_path: str, contrast_path: str, alpha: float) -> None:
    """Two-sided paired t-test between two score columns."""
    a = _read_floats(baseline_path)
    b = _read_floats(contrast_path)
    result = evaluation.paired_t_test(a, b, alpha=alpha)
    _echo_json(result.to_json())


@main.command()
@click.option("--captions", "n_captions", default=2500, show_default=True)
@click.option("--total-cost", default="197", show_default=True,
              help="Total crowd spend in currency units.")
@click.option("--minutes-per-caption", default="4.04", show_default=True)
@click.option("--words", "total_words", default=114433, show_default=True)
@click.option("--per-word-rate", default="0.1", show_default=True)
@click.option("--hourly-rate", default="31.56", show_default=True)
@click.option("--reference", "references", multiple=True, metavar="KEY=VALUE",
              help="Externally quoted totals to echo beside derived figures.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]),
              default="table", show_default=True)
@_friendly
def cost(n_captions: int, total_cost: str, minutes_per_caption: str,
         total_words: int, per_word_rate: str, hourly_rate: str,
         references: tuple[str, ...], fmt: str) -> None:
    """Compare crowd annotation cost against professional translation rates."""
    reference_totals = None
    if references:
        reference_totals = {}
        for item in references:
            key, _, value = item.partition("=")
            if not key or not value:
                raise click.ClickException(f"--reference needs KEY=VALUE, got {item!r}")
            reference_totals[key] = value
    inputs = evaluation.make_cost_inputs(
        n_captions, total_cost, minutes_per_caption, total_words,
        per_word_rate, hourly_rate,
    )
    report = evaluation.cost_report(inputs, reference_totals=reference_totals)
    if fmt == "json":
        _echo_json(report.to_json())
    else:
        click.echo(report.format_table())


# ---------------------------------------------------------------------------
# Campaign service
# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", type=_in_file,
              help="YAML service config; IMGPIVOT_* env vars override it.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--data-dir", default=None)
@click.option("--ui-dir", default=None)
@_friendly
def serve(config_path: str | None, host: str | None, port: int | None,
          data_dir: str | None, ui_dir: str | None) -> None:
    """Run the caption/rating campaign HTTP service."""
    import uvicorn

    from .service import load_config
    from .service.app import create_app

    config = load_config(config_path)
    if host is not None:
        config.host = host
    if port is not None:
        config.port = port
    if data_dir is not None:
        config.data_dir = data_dir
    if ui_dir is not None:
        config.ui_dir = ui_dir
    config.validate()
    log.info("serving on %s:%d (data: %s)", config.host, config.port, config.data_dir)
    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="info")


@main.command()
@click.option("--data-dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--campaign", "campaign_id", required=True)
@click.option("--format", "fmt", required=True,
              type=click.Choice(["captions", "ratings"]))
@click.option("--out", "out_path", type=_out_file,
              help="Defaults to standard output.")
@_friendly
def export(data_dir: str, campaign_id: str, fmt: str,
           out_path: str | None) -> None:
    """Export collected campaign data straight from the journal directory."""
    from .service import CampaignStore

    store = CampaignStore(data_dir)
    try:
        content, collected, expected = store.export_campaign(campaign_id, fmt)
    finally:
        store.close()
    log.info("export %s: %d/%d submissions", campaign_id, collected, expected)
    if out_path:
        Path(out_path).write_text(content, encoding="utf-8")
    else:
        click.echo(content, nl=False)


# ---------------------------------------------------------------------------
# End to end
# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", required=True, type=_in_file,
              help="YAML file of pipeline settings.")
@click.option("--out-dir", default=None, help="Override the configured out_dir.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@_friendly
def run(config_path: str, out_dir: str | None, seed: int | None) -> None:
    """Run score, select, pair, align, dict end to end; print the manifest."""
    raw = yaml.safe_load(Path(config_path).read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise click.ClickException(f"{config_path} must hold a mapping")
    if out_dir is not None:
        raw["out_dir"] = out_dir
    if seed is not None:
        raw["seed"] = seed
    config = PipelineConfig.from_mapping(raw)
    manifest = run_end_to_end(config)
    _echo_json(manifest)


if __name__ == "__main__":
    main()
