import math
import random

import pytest
import scipy.stats

from imgpivot.evaluation import (
    CLOSEST,
    LIKERT_CATEGORIES,
    SHORTEST,
    EmptyRatings,
    LengthMismatch,
    LikertRating,
    bleu,
    bleu_details,
    cost_report,
    likert_summary,
    make_cost_inputs,
    paired_t_test,
    read_ratings,
    student_t_sf,
    write_ratings,
)

from oracles import bleu_ref, t_pvalue_quad


def random_corpus(rng, n_sentences, vocab, n_refs=1, max_len=12):
    hyps, refs = [], []
    for _ in range(n_sentences):
        hyps.append(rng.choices(vocab, k=rng.randint(1, max_len)))
        refs.append([rng.choices(vocab, k=rng.randint(1, max_len))
                     for _ in range(n_refs)])
    return hyps, refs


class TestBleu:
    def test_identity_is_100(self):
        hyp = ["the cat sat on the mat".split(), "a dog runs".split()]
        refs = [[h] for h in hyp]
        assert bleu(hyp, refs) == pytest.approx(100.0, abs=1e-9)

    def test_clipped_unigram_fixture(self):
        hyp = [["the"] * 7]
        refs = [["the cat is on the mat".split(),
                 "there is a cat on the mat".split()]]
        result = bleu_details(hyp, refs)
        assert result.precisions[0] == 2 / 7
        assert result.score == 0.0  # no higher-order matches, unsmoothed

    def test_brevity_penalty_applied_when_short(self):
        result = bleu_details([["a", "b"]], [[["a", "b", "c", "d"]]], max_n=1)
        assert result.brevity_penalty == pytest.approx(math.exp(1 - 4 / 2))
        assert result.score == pytest.approx(100.0 * math.exp(-1.0))

    def test_no_penalty_when_long(self):
        result = bleu_details([["a", "b", "c"]], [[["a", "b"]]], max_n=1)
        assert result.brevity_penalty == 1.0

    def test_reference_length_conventions(self):
        hyp = [["w"] * 7]
        refs = [[["w"] * 4, ["w"] * 8]]
        shortest = bleu_details(hyp, refs, max_n=1, bp_reference=SHORTEST)
        closest = bleu_details(hyp, refs, max_n=1, bp_reference=CLOSEST)
        assert shortest.ref_length == 4
        assert shortest.brevity_penalty == 1.0
        assert closest.ref_length == 8
        assert closest.brevity_penalty == pytest.approx(math.exp(1 - 8 / 7))

    def test_closest_tie_resolves_to_shorter(self):
        result = bleu_details([["w"] * 3], [[["w"] * 2, ["w"] * 4]],
                              max_n=1, bp_reference=CLOSEST)
        assert result.ref_length == 2

    def test_smoothing_touches_only_higher_orders(self):
        hyp = [["a", "b"]]
        refs = [[["a", "c"]]]
        plain = bleu_details(hyp, refs, max_n=2)
        smoothed = bleu_details(hyp, refs, max_n=2, smoothing=True)
        assert plain.score == 0.0
        assert smoothed.precisions[0] == 0.5          # unigrams untouched
        assert smoothed.precisions[1] == 0.5          # (0+1)/(1+1)
        assert smoothed.score == pytest.approx(50.0)

    def test_matches_reference_implementation(self):
        rng = random.Random(1954)
        vocab = [f"w{i}" for i in range(12)]
        for _ in range(100):
            hyps, refs = random_corpus(rng, rng.randint(1, 6), vocab,
                                       n_refs=rng.randint(1, 3))
            for convention in (CLOSEST, SHORTEST):
                got = bleu(hyps, refs, bp_reference=convention)
                want = bleu_ref(hyps, refs, bp=convention)
                assert got == pytest.approx(want, abs=1e-9)

    def test_default_convention_is_shortest(self):
        hyp = [["w"] * 7]
        refs = [[["w"] * 4, ["w"] * 8]]
        assert bleu_details(hyp, refs).ref_length == 4

    def test_adding_a_reference_never_hurts(self):
        # holds for the shortest convention (the default): min lengths can
        # only shrink and clipped counts can only grow
        rng = random.Random(1955)
        vocab = [f"w{i}" for i in range(8)]
        for _ in range(60):
            hyps, refs = random_corpus(rng, rng.randint(1, 5), vocab)
            base = bleu(hyps, refs)
            grown = [r + [rng.choices(vocab, k=rng.randint(1, 12))]
                     for r in refs]
            assert bleu(hyps, grown) >= base - 1e-12

    def test_closest_convention_is_not_monotone(self):
        # why closest cannot be the default: a new reference that is nearer
        # the candidate length but longer can drag the pooled length past
        # the candidate and shrink the brevity penalty
        hyp = [["a", "b", "c", "d", "e", "f"]]
        refs = [[["a", "b", "c"]]]
        grown = [[["a", "b", "c"], ["x"] * 8]]
        base = bleu(hyp, refs, max_n=1, bp_reference=CLOSEST)
        widened = bleu(hyp, grown, max_n=1, bp_reference=CLOSEST)
        assert base == pytest.approx(50.0)
        assert widened == pytest.approx(50.0 * math.exp(1 - 8 / 6))
        assert widened < base

    def test_score_bounds(self):
        rng = random.Random(1956)
        vocab = [f"w{i}" for i in range(5)]
        for _ in range(50):
            hyps, refs = random_corpus(rng, rng.randint(1, 4), vocab)
            s = bleu(hyps, refs, smoothing=rng.random() < 0.5)
            assert 0.0 <= s <= 100.0 + 1e-9

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            bleu([["a"]], [])

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            bleu([], [])

    def test_json_shape(self):
        result = bleu_details([["a"]], [[["a"]]])
        data = result.to_json()
        assert set(data) == {"bleu", "precisions", "brevity_penalty",
                             "hyp_length", "ref_length"}


class TestLikert:
    def test_category_labels(self):
        assert [(c[0], c[1]) for c in LIKERT_CATEGORIES] == [
            (5, "Perfect"), (4, "Good"), (3, "Acceptable"),
            (2, "Bad"), (1, "Not a translation"),
        ]

    def make_ratings(self, counts):
        ratings = []
        i = 0
        for value, count in counts.items():
            for _ in range(count):
                ratings.append(LikertRating(f"im{i}", 0, 0, value, "r1"))
                i += 1
        return ratings

    def test_counts_and_percentages(self):
        report = likert_summary(self.make_ratings({5: 2, 3: 1, 1: 1}))
        by_rating = {r.rating: r for r in report.rows}
        assert report.total == 4
        assert by_rating[5].count == 2
        assert by_rating[5].percent == 50.0
        assert by_rating[4].count == 0
        assert by_rating[3].cumulative_percent == 75.0
        assert report.rows[-1].cumulative_percent == 100.0

    def test_cumulative_from_exact_counts(self):
        # 1/3 twice rounds to 33.33 + 33.33, but the cumulative column must
        # show 66.67, not 66.66
        report = likert_summary(self.make_ratings({5: 1, 4: 1, 3: 1}))
        assert report.rows[0].percent == 33.33
        assert report.rows[1].cumulative_percent == 66.67

    def test_best_category_first(self):
        report = likert_summary(self.make_ratings({1: 1, 5: 1}))
        assert [r.rating for r in report.rows] == [5, 4, 3, 2, 1]

    def test_empty_rejected(self):
        with pytest.raises(EmptyRatings):
            likert_summary([])

    def test_rating_bounds(self):
        with pytest.raises(ValueError):
            LikertRating("i", 0, 0, 6)
        with pytest.raises(ValueError):
            LikertRating("i", 0, 0, 0)

    def test_file_round_trip(self, tmp_path):
        ratings = [
            LikertRating("im1", 0, 2, 5, "rater-a"),
            LikertRating("im2", 1, 0, 3, None),
        ]
        path = tmp_path / "ratings.tsv"
        write_ratings(path, ratings)
        assert read_ratings(path) == ratings

    def test_table_has_labels_and_totals(self):
        report = likert_summary(self.make_ratings({3: 2}))
        table = report.format_table()
        assert "Acceptable" in table
        assert "100.00" in table


class TestPairedTTest:
    def test_fixture_against_closed_form(self):
        # diffs 1..5: t = 3 / (sqrt(2.5)/sqrt(5)) = 3*sqrt(2)
        result = paired_t_test([2, 4, 6, 8, 10], [1, 2, 3, 4, 5])
        assert result.t == pytest.approx(3 * math.sqrt(2), abs=1e-12)
        assert result.p_value == pytest.approx(0.013236, abs=1e-5)
        assert result.significant

    def test_fixture_against_quadrature(self):
        result = paired_t_test([2, 4, 6, 8, 10], [1, 2, 3, 4, 5])
        assert result.p_value == pytest.approx(t_pvalue_quad(result.t, 4), abs=1e-9)

    def test_matches_scipy_on_random_samples(self):
        rng = random.Random(314)
        for _ in range(100):
            n = rng.randint(2, 30)
            a = [rng.gauss(0, 1) for _ in range(n)]
            b = [rng.gauss(0.3, 1.2) for _ in range(n)]
            got = paired_t_test(a, b)
            want = scipy.stats.ttest_rel(a, b)
            assert got.t == pytest.approx(float(want.statistic), abs=1e-9)
            assert got.p_value == pytest.approx(float(want.pvalue), abs=1e-9)

    def test_antisymmetry_is_exact(self):
        rng = random.Random(315)
        for _ in range(200):
            n = rng.randint(2, 20)
            a = [rng.gauss(0, 1) for _ in range(n)]
            b = [rng.gauss(0, 1) for _ in range(n)]
            fwd = paired_t_test(a, b)
            rev = paired_t_test(b, a)
            assert fwd.t == -rev.t
            assert fwd.p_value == rev.p_value

    def test_constant_nonzero_difference(self):
        result = paired_t_test([2, 3, 4], [1, 2, 3])
        assert result.t == math.inf
        assert result.p_value == 0.0
        assert result.significant
        neg = paired_t_test([1, 2, 3], [2, 3, 4])
        assert neg.t == -math.inf

    def test_all_zero_differences(self):
        result = paired_t_test([1, 2, 3], [1, 2, 3])
        assert result.t == 0.0
        assert result.p_value == 1.0
        assert not result.significant

    def test_input_validation(self):
        with pytest.raises(LengthMismatch):
            paired_t_test([1, 2], [1])
        with pytest.raises(ValueError):
            paired_t_test([1], [1])

    def test_survival_function_edges(self):
        assert student_t_sf(0.0, 5) == pytest.approx(1.0, abs=1e-12)
        assert student_t_sf(math.inf, 5) == 0.0
        with pytest.raises(ValueError):
            student_t_sf(1.0, 0)


STUDY_INPUTS = dict(
    n_captions=2500,
    total_cost="197",
    avg_minutes_per_caption="4.04",
    total_words=114433,
    pro_per_word_rate="0.1",
    pro_hourly_rate="31.56",
)


class TestCostModel:
    def report(self, **overrides):
        kwargs = {**STUDY_INPUTS, **overrides}
        return cost_report(make_cost_inputs(*kwargs.values()))

    def test_exact_decimal_arithmetic(self):
        report = self.report()
        assert report.cost_per_caption == 0.0788
        assert report.total_hours == pytest.approx(10100 / 60, rel=1e-15)
        assert report.pro_hourly_total == 5312.60
        assert report.pro_per_word_total == 11443.30  # 114433 * 0.1, exactly

    def test_savings_uses_cheaper_professional_estimate(self):
        report = self.report()
        assert report.savings_ratio == pytest.approx(5312.60 / 197, rel=1e-12)

    def test_reference_totals_are_echoed_not_substituted(self):
        inputs = make_cost_inputs(*STUDY_INPUTS.values())
        quoted = {"pro_hourly_total": "5539", "pro_per_word_total": "12107",
                  "savings_ratio": "28x"}
        report = cost_report(inputs, reference_totals=quoted)
        assert report.pro_hourly_total == 5312.60
        assert report.to_json()["reference_totals"] == quoted
        table = report.format_table()
        assert "5539" in table and "12107" in table
        assert f"{report.savings_ratio:.2f}" in table

    def test_positive_inputs_required(self):
        with pytest.raises(ValueError):
            make_cost_inputs(0, "197", "4.04", 114433, "0.1", "31.56")
        with pytest.raises(ValueError):
            make_cost_inputs(2500, "-1", "4.04", 114433, "0.1", "31.56")
