import os
import random
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from bitextmine import cli
from bitextmine.model import SentencePair, parse_pairs, serialize_pairs
from bitextmine.pipeline import Config, atomic_open, corpus_stats, read_corpus
from bitextmine.synthetic import build_fixture, load_gold
from conftest import FIXTURE_DIR
from oracles import precision_recall


@pytest.fixture
def fixture_copy(tmp_path):
    dest = tmp_path / "fixture"
    shutil.copytree(FIXTURE_DIR, dest)
    return dest


@pytest.fixture(scope="module")
def pipeline_run(tmp_path_factory):
    dest = tmp_path_factory.mktemp("run") / "fixture"
    shutil.copytree(FIXTURE_DIR, dest)
    assert cli.main(["pipeline", "-c", str(dest / "pipeline.ini")]) == 0
    return dest


def write_corpus(path, pairs):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        serialize_pairs(pairs, fh)


def sp(src, tgt="テスト"):
    return SentencePair("http://a.example/en", "http://a.example/ja", src, tgt, 0.5, 1.0)


class TestPipeline:
    def test_outputs(self, pipeline_run):
        work = pipeline_run / "work"
        for name in ("corpus.raw.tsv", "corpus.filtered.tsv", "corpus_stats.tsv", "reject_report.tsv",
                     "filter_model.txt", "domains.txt", "docpairs.jsonl"):
            assert (work / name).is_file(), name
        lines = (work / "corpus_stats.tsv").read_text().splitlines()
        assert lines[0] == "corpus\tsentences\tsrc_words\ttgt_chars"
        assert [line.split("\t")[0] for line in lines[1:]] == ["Raw", "Filtered"]

    def test_quality(self, pipeline_run):
        gold = load_gold(pipeline_run / "gold.tsv")
        precision, recall = precision_recall(read_corpus(pipeline_run / "work" / "corpus.filtered.tsv"), gold)
        assert precision >= 0.9 and recall >= 0.9

    def test_monolingual_domain_not_mined(self, pipeline_run):
        domains = (pipeline_run / "work" / "domains.txt").read_text().split()
        assert domains[-1] == "blog.gamma-notes.example"
        assert sorted(domains[:2]) == ["news.beta-shop.example", "www.alpha-travel.example"]
        pairs = read_corpus(pipeline_run / "work" / "corpus.raw.tsv")
        assert pairs and not [p for p in pairs if "gamma" in p.src_url]

    def test_no_temp_files_left(self, pipeline_run):
        assert not [p for p in (pipeline_run / "work").rglob("*.tmp")]

    def test_single_stage_rerun_is_identical(self, pipeline_run):
        path = pipeline_run / "work" / "corpus.raw.tsv"
        before = path.read_bytes()
        assert cli.main(["align", "-c", str(pipeline_run / "pipeline.ini")]) == 0
        assert path.read_bytes() == before


class TestStages:
    def test_stats_on_empty_corpus(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[general]\nwork_dir = w\n")
        write_corpus(tmp_path / "w" / "corpus.raw.tsv", [])
        assert cli.main(["stats", "-c", str(cfg)]) == 0
        assert (tmp_path / "w" / "corpus_stats.tsv").read_text() == (
            "corpus\tsentences\tsrc_words\ttgt_chars\nRaw\t0\t0\t0\n")

    def test_align_without_docpairs(self, fixture_copy, capsys):
        code = cli.main(["align", "-c", str(fixture_copy / "pipeline.ini")])
        assert code == 1
        assert "docpairs.jsonl" in capsys.readouterr().err

    def test_malformed_corpus(self, tmp_path, capsys):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[general]\nwork_dir = w\n")
        (tmp_path / "w").mkdir()
        (tmp_path / "w" / "corpus.raw.tsv").write_text("only\tthree\tcolumns\n")
        assert cli.main(["stats", "-c", str(cfg)]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_missing_config(self, tmp_path, capsys):
        assert cli.main(["stats", "-c", str(tmp_path / "none.ini")]) == 1
        assert "none.ini" in capsys.readouterr().err

    def test_io_failure(self, tmp_path):
        cfg = tmp_path / "c.ini"
        blocker = tmp_path / "w"
        blocker.write_text("a file where the work directory should be")
        cfg.write_text("[general]\nwork_dir = w/sub\n")
        write_corpus(tmp_path / "corpus.tsv", [])
        code = cli.run_stage("stats", str(cfg), [f"general.work_dir={blocker}/sub"])
        assert code in (1, 2)

    def test_env_var_and_overrides(self, tmp_path, monkeypatch):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[general]\nwork_dir = w\nseed = 3\n")
        monkeypatch.setenv("BITEXTMINE_CONFIG", str(cfg))
        config = Config.load(None, ["general.seed=9", "align.lex_weight=1.5"])
        assert config.seed == 9
        assert config.getfloat("align", "lex_weight") == 1.5
        assert config.work_dir == tmp_path / "w"
        write_corpus(tmp_path / "w" / "corpus.raw.tsv", [sp("a b")])
        assert cli.main(["stats"]) == 0
        assert "Raw\t1\t2\t3" in (tmp_path / "w" / "corpus_stats.tsv").read_text()

    def test_bad_override(self):
        with pytest.raises(ValueError):
            Config.load(None, ["noequals"])

    def test_module_entry_point(self, tmp_path):
        out = subprocess.run([sys.executable, "-m", "bitextmine", "--help"], capture_output=True, text=True)
        assert out.returncode == 0 and "pipeline" in out.stdout


class TestAtomic:
    def test_interrupted_write_keeps_old_file(self, tmp_path):
        target = tmp_path / "out.tsv"
        target.write_text("old\n")
        with pytest.raises(RuntimeError):
            with atomic_open(target, "w") as fh:
                fh.write("partial")
                raise RuntimeError("interrupted")
        assert target.read_text() == "old\n"
        assert os.listdir(tmp_path) == ["out.tsv"]


class TestCorpusStats:
    def test_counting(self):
        stats = corpus_stats([sp("a b", "あい"), sp("c", "う")], "Raw")
        assert (stats.n_sentences, stats.n_src_words, stats.n_tgt_chars) == (2, 3, 3)

    def test_permutation_invariant(self, pipeline_run):
        pairs = read_corpus(pipeline_run / "work" / "corpus.raw.tsv")
        base = corpus_stats(pairs)
        rng = random.Random(0)
        for _ in range(5):
            rng.shuffle(pairs)
            assert corpus_stats(pairs) == base


class TestFixture:
    def test_bundled_fixture_is_reproducible(self, tmp_path):
        build_fixture(tmp_path / "regen")
        bundled = sorted(p.relative_to(FIXTURE_DIR) for p in FIXTURE_DIR.rglob("*") if p.is_file())
        regen = sorted(p.relative_to(tmp_path / "regen") for p in (tmp_path / "regen").rglob("*") if p.is_file())
        assert bundled == regen
        for rel in bundled:
            assert (FIXTURE_DIR / rel).read_bytes() == (tmp_path / "regen" / rel).read_bytes(), rel

    def test_gold_size(self):
        gold = load_gold(FIXTURE_DIR / "gold.tsv")
        assert len(gold) == 300 and len(set(gold)) == 300

    def test_seed_corpus_parses(self):
        with open(FIXTURE_DIR / "seed_corpus.tsv", "rb") as fh:
            assert len(parse_pairs(fh)) >= 100


def test_paths_resolve_relative_to_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = Config.load(FIXTURE_DIR / "pipeline.ini")
    assert config.path("paths", "lexicon") == Path(FIXTURE_DIR / "lexicon.tsv").resolve()
