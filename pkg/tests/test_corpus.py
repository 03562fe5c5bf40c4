import random

import pytest

from imgpivot.corpus import (
    Caption,
    CaptionSet,
    DuplicateKey,
    ImageRecord,
    InvalidTransition,
    MalformedLine,
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

EN = profile_for("en")
HI = profile_for("hi")


class TestNormalize:
    def test_whitespace_split_and_lowercase(self):
        assert normalize("A black Dog runs", EN) == ["a", "black", "dog", "runs"]

    def test_terminators_stripped_at_edges(self):
        assert normalize("the dog runs .", EN) == ["the", "dog", "runs"]
        assert normalize("really?!", EN) == ["really"]
        assert normalize("ends with pipe |", EN) == ["ends", "with", "pipe"]

    def test_danda_stripped_in_every_profile(self):
        assert normalize("कुत्ता दौड़ता है ।", HI) == ["कुत्ता", "दौड़ता", "है"]
        assert normalize("x ।", EN) == ["x"]

    def test_hindi_profile_keeps_case(self):
        # no case folding: Latin text embedded in Hindi captions stays as is
        assert normalize("Nikon कैमरा", HI) == ["Nikon", "कैमरा"]

    def test_edge_punctuation_stripped_interior_kept(self):
        assert normalize('"hello," she said', EN) == ["hello", "she", "said"]
        assert normalize("the dog's ball", EN) == ["the", "dog's", "ball"]

    def test_token_reduced_to_nothing_is_dropped(self):
        assert normalize("wait ... what", EN) == ["wait", "what"]

    def test_collapses_any_whitespace(self):
        assert normalize("a\t b  c\n", EN) == ["a", "b", "c"]


class TestCaption:
    def test_make_caption_normalizes(self):
        cap = make_caption("img1.jpg", "en", 0, "A big Dog .")
        assert cap.tokens == ("a", "big", "dog")
        assert cap.raw_text == "A big Dog ."

    def test_blank_text_rejected(self):
        with pytest.raises(ValueError):
            make_caption("img1.jpg", "en", 0, "   ")

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            make_caption("img1.jpg", "en", -1, "a dog")

    def test_caption_is_immutable(self):
        cap = make_caption("img1.jpg", "en", 0, "a dog")
        with pytest.raises(AttributeError):
            cap.raw_text = "other"


class TestCaptionSet:
    def test_orders_and_exposes_token_lists(self):
        caps = [
            make_caption("i", "en", 1, "b dog"),
            make_caption("i", "en", 0, "a dog"),
        ]
        cs = CaptionSet(image_id="i", language="en", captions=tuple(sorted(caps, key=lambda c: c.index)))
        assert [c.index for c in cs.captions] == [0, 1]
        assert cs.token_lists == [("a", "dog"), ("b", "dog")]

    def test_mixed_image_ids_rejected(self):
        caps = (
            make_caption("i", "en", 0, "a dog"),
            make_caption("j", "en", 1, "a dog"),
        )
        with pytest.raises(ValueError):
            CaptionSet(image_id="i", language="en", captions=caps)

    def test_duplicate_indices_rejected(self):
        caps = (
            make_caption("i", "en", 0, "a dog"),
            make_caption("i", "en", 0, "b dog"),
        )
        with pytest.raises(ValueError):
            CaptionSet(image_id="i", language="en", captions=caps)


class TestStatusTransitions:
    def test_allowed(self):
        rec = ImageRecord(id="x")
        assert rec.status is Status.CANDIDATE
        selected = rec.with_status(Status.SELECTED)
        assert selected.status is Status.SELECTED
        assert selected.with_status(Status.PRUNED).status is Status.PRUNED
        assert rec.with_status(Status.PRUNED).status is Status.PRUNED

    def test_no_way_back(self):
        pruned = ImageRecord(id="x").with_status(Status.PRUNED)
        with pytest.raises(InvalidTransition):
            pruned.with_status(Status.SELECTED)
        with pytest.raises(InvalidTransition):
            pruned.with_status(Status.CANDIDATE)

    def test_same_status_is_a_no_op(self):
        rec = ImageRecord(id="x")
        assert rec.with_status(Status.CANDIDATE) is rec


FLICKR_SAMPLE = (
    "1000268201_693b08cb0e.jpg#0\tA child in a pink dress is climbing up a set of stairs in an entry way .\n"
    "1000268201_693b08cb0e.jpg#1\tA girl going into a wooden building .\n"
    "1001773457_577c3a7d70.jpg#0\tA black dog and a spotted dog are fighting\n"
)


class TestParseCaptionFile:
    def test_parses_flickr_layout(self):
        caps = parse_caption_file(FLICKR_SAMPLE, "en")
        assert len(caps) == 3
        assert caps[0].image_id == "1000268201_693b08cb0e.jpg"
        assert caps[0].index == 0
        assert caps[1].index == 1
        assert caps[2].image_id == "1001773457_577c3a7d70.jpg"

    def test_missing_tab(self):
        with pytest.raises(MalformedLine) as exc:
            parse_caption_file("img.jpg#0 no tab here\n", "en")
        assert exc.value.line_number == 1

    def test_missing_hash(self):
        with pytest.raises(MalformedLine):
            parse_caption_file("img.jpg0\ttext\n", "en")

    def test_non_integer_index(self):
        with pytest.raises(MalformedLine):
            parse_caption_file("img.jpg#zero\ttext\n", "en")

    def test_line_numbers_are_one_based(self):
        content = FLICKR_SAMPLE + "broken line\n"
        with pytest.raises(MalformedLine) as exc:
            parse_caption_file(content, "en")
        assert exc.value.line_number == 4

    def test_duplicate_key(self):
        content = "i.jpg#0\ta dog\ni.jpg#0\tanother dog\n"
        with pytest.raises(DuplicateKey):
            parse_caption_file(content, "en")

    def test_image_id_may_contain_hash(self):
        # rightmost '#' separates the index
        caps = parse_caption_file("odd#name.jpg#2\ta dog\n", "en")
        assert caps[0].image_id == "odd#name.jpg"
        assert caps[0].index == 2

    def test_empty_text_is_malformed(self):
        with pytest.raises(MalformedLine):
            parse_caption_file("i.jpg#0\t   \n", "en")


class TestRoundTrip:
    def test_sample_round_trips(self):
        caps = parse_caption_file(FLICKR_SAMPLE, "en")
        assert parse_caption_file(serialize_captions(caps), "en") == caps

    def test_random_round_trips(self):
        rng = random.Random(1402)
        words = ["dog", "cat", "runs", "jumps", "red", "ball", "देखता", "कुत्ता"]
        for _ in range(200):
            caps = []
            for img in range(rng.randint(1, 5)):
                for idx in range(rng.randint(1, 4)):
                    text = " ".join(rng.choices(words, k=rng.randint(1, 7)))
                    caps.append(make_caption(f"im{img}.jpg", "en", idx, text))
            assert parse_caption_file(serialize_captions(caps), "en") == caps

    def test_file_round_trip(self, tmp_path):
        caps = parse_caption_file(FLICKR_SAMPLE, "en")
        path = tmp_path / "caps.txt"
        write_caption_file(path, caps)
        assert read_caption_file(path, "en") == caps

    def test_invalid_utf8_is_a_hard_error(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_bytes(b"i.jpg#0\tcaf\xe9 dog\n")  # latin-1 e-acute, not UTF-8
        with pytest.raises(UnicodeDecodeError):
            read_caption_file(path, "en")


class TestBuildCaptionSets:
    def test_groups_by_image_sorted_by_index(self):
        caps = parse_caption_file(FLICKR_SAMPLE, "en")
        sets = build_caption_sets(caps)
        assert set(sets) == {"1000268201_693b08cb0e.jpg", "1001773457_577c3a7d70.jpg"}
        assert [c.index for c in sets["1000268201_693b08cb0e.jpg"].captions] == [0, 1]

    def test_mixed_languages_rejected(self):
        caps = [
            make_caption("i", "en", 0, "a dog"),
            make_caption("i", "hi", 1, "कुत्ता"),
        ]
        with pytest.raises(ValueError):
            build_caption_sets(caps)
