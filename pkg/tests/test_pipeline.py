import json
import random

import pytest
import yaml

from imgpivot.pairing import image_seed
from imgpivot.pipeline import (
    PipelineConfig,
    PipelineError,
    _StageWriter,
    run_end_to_end,
    stage_seed,
)

EN_WORDS = ["a", "man", "dog", "woman", "ball", "red", "runs", "sits", "small",
            "big", "street", "park", "holds", "jumps", "two", "tree"]
HI_WORDS = ["एक", "आदमी", "कुत्ता", "औरत", "गेंद", "लाल", "दौड़ता", "बैठता",
            "छोटा", "बड़ा", "सड़क", "पार्क", "पकड़ता", "कूदता", "दो", "पेड़"]


def write_captions(path, words, n_images=12, per_image=3, seed=7):
    rng = random.Random(seed)
    lines = []
    for i in range(n_images):
        for idx in range(per_image):
            text = " ".join(rng.choice(words) for _ in range(rng.randint(3, 6)))
            lines.append(f"im{i:03d}#{idx}\t{text} .")
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@pytest.fixture
def toy_config(tmp_path):
    src = tmp_path / "en.txt"
    tgt = tmp_path / "hi.txt"
    write_captions(src, EN_WORDS, seed=7)
    write_captions(tgt, HI_WORDS, seed=8)
    return PipelineConfig(
        src_captions=str(src),
        tgt_captions=str(tgt),
        out_dir=str(tmp_path / "out"),
        k=8,
        iterations=3,
        seed=31,
        tiers="0.1:1",
    )


class TestConfig:
    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown pipeline config keys"):
            PipelineConfig.from_mapping(
                {"src_captions": "a", "tgt_captions": "b", "out_dir": "c",
                 "granularty": "char"})

    @pytest.mark.parametrize("override", [
        {"method": "zip"},
        {"k": 0},
        {"aligner_model": "ibm4"},
        {"src_language": ""},
        {"jobs": 0},
        {"tiers": "not-a-tier"},
        {"iterations": 0},
    ])
    def test_validation(self, override):
        base = dict(src_captions="a", tgt_captions="b", out_dir="c")
        base.update(override)
        with pytest.raises(ValueError):
            PipelineConfig(**base).validate()

    def test_resolved_materializes_defaults(self):
        resolved = PipelineConfig("a", "b", "c").resolved()
        assert resolved["k"] == 700
        assert resolved["method"] == "cross"
        assert resolved["tiers"] == "0.5:20,0.6:5,0.9:2"

    def test_stage_seed_uses_the_per_image_derivation(self):
        assert stage_seed(31, "pair") == image_seed(31, "pair")
        assert stage_seed(31, "pair") != stage_seed(31, "split")
        assert stage_seed(31, "pair") != stage_seed(32, "pair")


class TestStageWriter:
    def test_partial_until_promoted(self, tmp_path):
        writer = _StageWriter(tmp_path)
        tmp = writer.path_for("scores.tsv")
        assert tmp.name == "scores.tsv.partial"
        tmp.write_text("data\n", encoding="utf-8")
        assert not (tmp_path / "scores.tsv").exists()
        finals = writer.promote()
        assert finals == [tmp_path / "scores.tsv"]
        assert not tmp.exists()
        assert (tmp_path / "scores.tsv").read_text(encoding="utf-8") == "data\n"

    def test_corpus_prefix_registers_three_files(self, tmp_path):
        writer = _StageWriter(tmp_path)
        prefix = writer.corpus_prefix("corpus")
        assert prefix.endswith("corpus.partial")
        for ext in (".src", ".tgt", ".meta.tsv"):
            (tmp_path / ("corpus.partial" + ext)).write_text("x", encoding="utf-8")
        finals = writer.promote()
        assert sorted(p.name for p in finals) == [
            "corpus.meta.tsv", "corpus.src", "corpus.tgt"]
        assert not list(tmp_path.glob("*partial*"))


class TestEndToEnd:
    def test_stage_roster_and_artifacts(self, toy_config, tmp_path):
        manifest = run_end_to_end(toy_config)
        assert [s["name"] for s in manifest["stages"]] == [
            "score", "select", "pair", "align", "dict"]
        out = tmp_path / "out"
        produced = {p.name for p in out.iterdir()}
        assert produced == {
            "scores.tsv", "selected.txt",
            "corpus.src", "corpus.tgt", "corpus.meta.tsv",
            "corpus.align", "model.tsv", "dict.tsv",
            "manifest.json", "pipeline.lock.yaml",
        }
        by_name = {s["name"]: s for s in manifest["stages"]}
        assert by_name["pair"]["seed"] == stage_seed(31, "pair")
        assert by_name["pair"]["pairs"] == 8 * 9  # k images x 3*3 cross pairs
        assert by_name["align"]["iterations"] == 3
        assert by_name["dict"]["entries"] > 0
        assert (out / "selected.txt").read_text(
            encoding="utf-8").count("\n") == 8

    def test_manifest_file_matches_return_value(self, toy_config, tmp_path):
        manifest = run_end_to_end(toy_config)
        on_disk = json.loads((tmp_path / "out" / "manifest.json").read_text(
            encoding="utf-8"))
        assert on_disk == manifest

    def test_lockfile_echoes_resolved_config(self, toy_config, tmp_path):
        run_end_to_end(toy_config)
        lock = yaml.safe_load((tmp_path / "out" / "pipeline.lock.yaml").read_text(
            encoding="utf-8"))
        assert lock == toy_config.resolved()

    def test_reruns_reproduce_identical_digests(self, toy_config, tmp_path):
        first = run_end_to_end(toy_config)
        second_config = PipelineConfig(**{
            **toy_config.resolved(), "out_dir": str(tmp_path / "out2")})
        second = run_end_to_end(second_config)
        assert first == second
        a = (tmp_path / "out" / "manifest.json").read_bytes()
        b = (tmp_path / "out2" / "manifest.json").read_bytes()
        assert a == b

    def test_seed_changes_random_pairing_digests(self, toy_config, tmp_path):
        config = PipelineConfig(**{**toy_config.resolved(), "method": "random"})
        first = run_end_to_end(config)
        reseeded = PipelineConfig(**{
            **config.resolved(), "seed": 32, "out_dir": str(tmp_path / "out2")})
        second = run_end_to_end(reseeded)
        digest = lambda m, stage: [a["sha256"] for s in m["stages"]
                                   if s["name"] == stage for a in s["artifacts"]]
        assert digest(first, "score") == digest(second, "score")
        assert digest(first, "pair") != digest(second, "pair")

    def test_failure_names_the_stage(self, toy_config):
        broken = PipelineConfig(**{
            **toy_config.resolved(), "src_captions": "/nonexistent/en.txt"})
        with pytest.raises(PipelineError) as exc:
            run_end_to_end(broken)
        assert exc.value.stage == "score"
        assert isinstance(exc.value.__cause__, OSError)

    def test_aborted_run_promotes_nothing_for_the_failed_stage(
            self, toy_config, tmp_path):
        broken = PipelineConfig(**{
            **toy_config.resolved(), "tgt_captions": "/nonexistent/hi.txt"})
        with pytest.raises(PipelineError) as exc:
            run_end_to_end(broken)
        assert exc.value.stage == "pair"
        out = tmp_path / "out"
        produced = {p.name for p in out.iterdir()}
        assert "scores.tsv" in produced  # earlier stages stay promoted
        assert "selected.txt" in produced
        assert not any(n.startswith("corpus") for n in produced)
        assert "manifest.json" not in produced
