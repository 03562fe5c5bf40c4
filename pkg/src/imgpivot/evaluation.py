"""Corpus-quality measurement: corpus BLEU, Likert-rating aggregation,
paired t-tests, and the annotation-vs-professional cost model.

BLEU here is the classic unsmoothed corpus score: clipped modified n-gram
precisions (counts clipped by the maximum over references), geometric mean
with uniform weights, times a brevity penalty, reported on a 0-100 scale.
Any zero precision zeroes the whole score unless add-one smoothing is
switched on.  The brevity-penalty reference length defaults to the shortest
reference per sentence; that convention (unlike closest-length matching,
also available) makes the score monotone under added references.  The t-test
computes its own Student-t tail probabilities through the regularized
incomplete beta function, evaluated by continued fraction, so no statistics
package is needed at runtime.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

Tokens = Sequence[str]


class LengthMismatch(ValueError):
    pass


class EmptyRatings(ValueError):
    pass


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

SHORTEST = "shortest"
CLOSEST = "closest"


def _ngram_counts(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _reference_length(c: int, ref_lens: Sequence[int], convention: str) -> int:
    if convention == SHORTEST:
        return min(ref_lens)
    if convention == CLOSEST:
        # Closest to the candidate length; equally close lengths resolve to
        # the shorter one.
        return min(ref_lens, key=lambda r: (abs(r - c), r))
    raise ValueError(f"unknown brevity-penalty convention {convention!r}")


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_length: int
    ref_length: int

    def to_json(self) -> dict:
        return {
            "bleu": self.score,
            "precisions": list(self.precisions),
            "brevity_penalty": self.brevity_penalty,
            "hyp_length": self.hyp_length,
            "ref_length": self.ref_length,
        }


def bleu_details(
    hypotheses: Sequence[Tokens],
    references: Sequence[Sequence[Tokens]],
    max_n: int = 4,
    smoothing: bool = False,
    bp_reference: str = SHORTEST,
) -> BleuResult:
    """Corpus-level BLEU with the full precision/penalty breakdown.

    ``references[i]`` is the list of reference token sequences for
    ``hypotheses[i]``.  With ``smoothing`` enabled, orders above 1 get
    add-one counts, keeping tiny test sets away from hard zeros.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if len(hypotheses) != len(references):
        raise LengthMismatch(
            f"{len(hypotheses)} hypotheses vs {len(references)} reference sets"
        )
    if not hypotheses:
        raise LengthMismatch("empty corpus")
    clipped = [0] * max_n
    totals = [0] * max_n
    hyp_length = 0
    ref_length = 0
    for hyp, refs in zip(hypotheses, references):
        if not refs:
            raise LengthMismatch("a hypothesis has no references")
        c = len(hyp)
        hyp_length += c
        ref_length += _reference_length(c, [len(r) for r in refs], bp_reference)
        for n in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            max_ref: Counter = Counter()
            for ref in refs:
                for ngram, count in _ngram_counts(ref, n).items():
                    if count > max_ref[ngram]:
                        max_ref[ngram] = count
            totals[n - 1] += sum(hyp_counts.values())
            clipped[n - 1] += sum(
                min(count, max_ref[ngram]) for ngram, count in hyp_counts.items()
            )
    precisions = []
    for n in range(max_n):
        num, den = clipped[n], totals[n]
        if smoothing and n > 0:
            num, den = num + 1, den + 1
        precisions.append(num / den if den else 0.0)
    if hyp_length == 0 or ref_length == 0:
        bp = 0.0 if ref_length else 1.0
    elif hyp_length > ref_length:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_length / hyp_length)
    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        log_mean = sum(math.log(p) for p in precisions) / max_n
        score = bp * math.exp(log_mean) * 100.0
    return BleuResult(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=bp,
        hyp_length=hyp_length,
        ref_length=ref_length,
    )


def bleu(
    hypotheses: Sequence[Tokens],
    references: Sequence[Sequence[Tokens]],
    max_n: int = 4,
    smoothing: bool = False,
    bp_reference: str = SHORTEST,
) -> float:
    """Corpus BLEU in [0, 100]."""
    return bleu_details(hypotheses, references, max_n, smoothing, bp_reference).score


# ---------------------------------------------------------------------------
# Likert ratings
# ---------------------------------------------------------------------------

#: Rating rubric shown to bilingual raters, best first.  Index 0 is rating 5.
LIKERT_CATEGORIES: tuple[tuple[int, str, str], ...] = (
    (5, "Perfect", "The translation is flawless."),
    (
        4,
        "Good",
        "The translation is good. The differences between a perfect and a "
        "good translation are not very important to the meaning of the "
        "source sentence",
    ),
    (
        3,
        "Acceptable",
        "The translation conveys the meaning adequately but can be improved",
    ),
    (
        2,
        "Bad",
        "The translation conveys the meaning to some degree but is a bad "
        "translation",
    ),
    (
        1,
        "Not a translation",
        "There is no relation whatsoever between the source and the target "
        "sentence",
    ),
)


@dataclass(frozen=True)
class LikertRating:
    image_id: str
    src_index: int
    tgt_index: int
    rating: int
    rater_id: str | None = None

    def __post_init__(self):
        if self.rating not in (1, 2, 3, 4, 5):
            raise ValueError(f"rating must be 1..5, got {self.rating}")


@dataclass(frozen=True)
class LikertRow:
    rating: int
    label: str
    criteria: str
    count: int
    percent: float
    cumulative_percent: float


@dataclass(frozen=True)
class LikertReport:
    total: int
    rows: tuple[LikertRow, ...]

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "rows": [
                {
                    "rating": r.rating,
                    "label": r.label,
                    "criteria": r.criteria,
                    "count": r.count,
                    "percent": r.percent,
                    "cumulative_percent": r.cumulative_percent,
                }
                for r in self.rows
            ],
        }

    def format_table(self) -> str:
        width = max(len(r.label) for r in self.rows)
        lines = [f"{'Quality':<{width}}  {'Count':>6}  {'%':>7}  {'Cum. %':>7}"]
        for r in self.rows:
            lines.append(
                f"{r.label:<{width}}  {r.count:>6}  {r.percent:>7.2f}  "
                f"{r.cumulative_percent:>7.2f}"
            )
        lines.append(f"{'Total':<{width}}  {self.total:>6}")
        return "\n".join(lines)


def likert_summary(ratings: Sequence[LikertRating]) -> LikertReport:
    """Per-category and cumulative percentages, best category first.

    Each rating counts as one observation.  Percentages are rounded to two
    decimals; the cumulative column is computed from exact counts (not from
    rounded percentages) and its final row is pinned at 100.00.
    """
    if not ratings:
        raise EmptyRatings("no ratings to summarize")
    counts = Counter(r.rating for r in ratings)
    total = len(ratings)
    rows = []
    running = 0
    for idx, (value, label, criteria) in enumerate(LIKERT_CATEGORIES):
        count = counts.get(value, 0)
        running += count
        if idx == len(LIKERT_CATEGORIES) - 1:
            cumulative = 100.0
        else:
            cumulative = round(running / total * 100.0, 2)
        rows.append(
            LikertRow(
                rating=value,
                label=label,
                criteria=criteria,
                count=count,
                percent=round(count / total * 100.0, 2),
                cumulative_percent=cumulative,
            )
        )
    return LikertReport(total=total, rows=tuple(rows))


LIKERT_COLUMNS = ("image_id", "src_index", "tgt_index", "rating", "rater_id")


def write_ratings(path, ratings: Iterable[LikertRating]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(LIKERT_COLUMNS)
        for r in ratings:
            writer.writerow(
                (r.image_id, r.src_index, r.tgt_index, r.rating, r.rater_id or "")
            )


def read_ratings(path) -> list[LikertRating]:
    ratings = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t")
        header = next(reader, None)
        if header is not None and tuple(header) != LIKERT_COLUMNS:
            raise ValueError(f"unexpected ratings header {header!r}")
        for image_id, src_index, tgt_index, rating, rater_id in reader:
            ratings.append(
                LikertRating(
                    image_id=image_id,
                    src_index=int(src_index),
                    tgt_index=int(tgt_index),
                    rating=int(rating),
                    rater_id=rater_id or None,
                )
            )
    return ratings


# ---------------------------------------------------------------------------
# Paired t-test
# ---------------------------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    max_iter = 200
    eps = 3e-16
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def _regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: int) -> float:
    """Two-sided tail probability P(|T| >= t) for Student's t with ``df``
    degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    t = abs(t)
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return _regularized_incomplete_beta(df / 2.0, 0.5, x)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p_value: float
    significant: bool

    def to_json(self) -> dict:
        return {"t": self.t, "p_value": self.p_value, "significant": self.significant}


def paired_t_test(
    a: Sequence[float], b: Sequence[float], alpha: float = 0.05
) -> TTestResult:
    """Two-sided paired t-test on differences a - b.

    Identical constant nonzero differences have zero variance; that case is
    reported as significant with an infinite t (sign of the mean) and p = 0.
    All-zero differences give t = 0, p = 1.
    """
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} vs {len(b)} observations")
    n = len(a)
    if n < 2:
        raise ValueError(f"need at least 2 paired observations, got {n}")
    diffs = [x - y for x, y in zip(a, b)]
    mean = sum(diffs) / n
    ss = sum((d - mean) ** 2 for d in diffs)
    if ss == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, p_value=1.0, significant=False)
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t=t, p_value=0.0, significant=True)
    sd = math.sqrt(ss / (n - 1))
    t = mean / (sd / math.sqrt(n))
    p = student_t_sf(t, n - 1)
    return TTestResult(t=t, p_value=p, significant=p < alpha)


# ---------------------------------------------------------------------------
# Cost model
# ---------------------------------------------------------------------------


def _decimal(value) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(str(value))
    return Decimal(value)


@dataclass(frozen=True)
class CostInputs:
    """Observed collection figures plus professional-rate benchmarks."""

    n_captions: int
    total_cost: Decimal
    avg_minutes_per_caption: Decimal
    total_words: int
    pro_per_word_rate: Decimal
    pro_hourly_rate: Decimal

    def __post_init__(self):
        for name in (
            "n_captions",
            "total_cost",
            "avg_minutes_per_caption",
            "total_words",
            "pro_per_word_rate",
            "pro_hourly_rate",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


def make_cost_inputs(
    n_captions: int,
    total_cost,
    avg_minutes_per_caption,
    total_words: int,
    pro_per_word_rate,
    pro_hourly_rate,
) -> CostInputs:
    """Build :class:`CostInputs`, converting currency/rate figures to
    ``Decimal`` so totals come out in exact decimal arithmetic."""
    return CostInputs(
        n_captions=n_captions,
        total_cost=_decimal(total_cost),
        avg_minutes_per_caption=_decimal(avg_minutes_per_caption),
        total_words=total_words,
        pro_per_word_rate=_decimal(pro_per_word_rate),
        pro_hourly_rate=_decimal(pro_hourly_rate),
    )


@dataclass(frozen=True)
class CostReport:
    cost_per_caption: float
    total_hours: float
    pro_hourly_total: float
    pro_per_word_total: float
    savings_ratio: float
    reference_totals: dict | None = None

    def to_json(self) -> dict:
        out = {
            "cost_per_caption": self.cost_per_caption,
            "total_hours": self.total_hours,
            "pro_hourly_total": self.pro_hourly_total,
            "pro_per_word_total": self.pro_per_word_total,
            "savings_ratio": self.savings_ratio,
        }
        if self.reference_totals is not None:
            out["reference_totals"] = self.reference_totals
        return out

    def format_table(self) -> str:
        lines = [
            f"cost per caption     {self.cost_per_caption:>12.4f}",
            f"total hours          {self.total_hours:>12.2f}",
            f"pro hourly total     {self.pro_hourly_total:>12.2f}",
            f"pro per-word total   {self.pro_per_word_total:>12.2f}",
            f"savings ratio        {self.savings_ratio:>12.2f}x",
        ]
        if self.reference_totals:
            lines.append("externally quoted totals for comparison:")
            for key, value in self.reference_totals.items():
                lines.append(f"  {key:<20} {value}")
        return "\n".join(lines)


def cost_report(
    inputs: CostInputs, reference_totals: dict | None = None
) -> CostReport:
    """Derive per-caption cost, total annotation hours, both professional
    cost estimates, and the savings ratio against the *cheaper* professional
    estimate.

    ``reference_totals`` may carry externally quoted totals (for example from
    a published cost comparison); they are echoed in the report next to the
    derived figures, never substituted for them.
    """
    n = Decimal(inputs.n_captions)
    cost_per_caption = inputs.total_cost / n
    total_hours = n * inputs.avg_minutes_per_caption / Decimal(60)
    pro_hourly_total = total_hours * inputs.pro_hourly_rate
    pro_per_word_total = Decimal(inputs.total_words) * inputs.pro_per_word_rate
    savings_ratio = min(pro_hourly_total, pro_per_word_total) / inputs.total_cost
    return CostReport(
        cost_per_caption=float(cost_per_caption),
        total_hours=float(total_hours),
        pro_hourly_total=float(pro_hourly_total),
        pro_per_word_total=float(pro_per_word_total),
        savings_ratio=float(savings_ratio),
        reference_totals=reference_totals,
    )
