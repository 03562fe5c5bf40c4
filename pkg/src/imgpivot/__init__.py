"""Bilingual comparable corpora from image captions.

Curates caption corpora by per-image complexity, pairs captions across
languages through their shared image, trains a word aligner on the result,
extracts a bilingual dictionary, and evaluates the output (BLEU, Likert
summaries, significance tests, cost accounting).  A small HTTP service runs
caption and rating collection campaigns.
"""

__version__ = "0.1.0"

from .corpus import (
    Caption,
    CaptionSet,
    ImageRecord,
    LanguageProfile,
    Status,
    build_caption_sets,
    make_caption,
    normalize,
    parse_caption_file,
    profile_for,
    read_caption_file,
    serialize_captions,
    write_caption_file,
)
from .selection import (
    ComplexityScore,
    ReviewDecision,
    apply_review,
    complexity_score,
    edit_distance,
    rank_images,
    score_corpus,
)
from .pairing import (
    ComparableCorpus,
    ComparablePair,
    build_corpus,
    pair_cross,
    pair_random,
    split_corpus,
)
from .aligner import (
    AlignerConfig,
    TranslationModel,
    align_corpus,
    train,
    viterbi_align,
)
from .lexicon import (
    DictionaryEntry,
    PrecisionReport,
    ThresholdTier,
    count_alignments,
    extract_dictionary,
    score_dictionary,
)
from .evaluation import (
    BleuResult,
    CostReport,
    LikertRating,
    LikertReport,
    TTestResult,
    bleu,
    bleu_details,
    cost_report,
    likert_summary,
    make_cost_inputs,
    paired_t_test,
)
from .pipeline import PipelineConfig, run_end_to_end
