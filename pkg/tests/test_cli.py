import os

import pytest

from csgen.cli import main
from csgen.corpus import FormatConfig, corpus_stats, load_corpus
from csgen.experiments import (
    CharLmSettings,
    ModelSettings,
    RunConfig,
    SynthSettings,
    TrainSettings,
    run_config_text,
)


def write_tiny_config(path, **overrides):
    base = dict(
        seed=3,
        synth=SynthSettings(n_train=50, n_dev=12, n_test=16, n_refs=8),
        model=ModelSettings(emb_dim=16, hidden_dim=8, fc_dim=8, pos_emb_dim=4),
        train=TrainSettings(epochs=1, batch_size=16),
        charlm=CharLmSettings(hidden_dim=8, epochs=1, step_size=0.05),
    )
    base.update(overrides)
    path.write_text(run_config_text(RunConfig(**base)), encoding="utf-8")
    return str(path)


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("一一 ok 二二\n三三 四四\n", encoding="utf-8")
    return str(path)


class TestBasicCommands:
    def test_unknown_subcommand_exits_nonzero(self, capsys):
        assert main(["definitely-not-a-command"]) != 0

    def test_usage_on_no_args(self):
        assert main([]) != 0

    def test_stats_matches_corpus_stats(self, corpus_file, capsys):
        assert main(["stats", "--corpus", corpus_file]) == 0
        printed = capsys.readouterr().out
        report = corpus_stats(load_corpus(corpus_file))
        for name, value in report.as_rows():
            assert f"{name} = {value}" in printed

    def test_stats_csv_and_manifest(self, corpus_file, tmp_path):
        out = tmp_path / "stats.csv"
        assert main(["stats", "--corpus", corpus_file, "--csv", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "name,value"
        assert (tmp_path / "stats.csv.manifest.txt").exists()

    def test_ingest_round_trip(self, corpus_file, tmp_path):
        out = tmp_path / "tagged.txt"
        assert main(["ingest", "--corpus", corpus_file, "--out", str(out)]) == 0
        corpus = load_corpus(out, FormatConfig(tagged=True))
        assert len(corpus) == 2

    def test_clean_removes_markers(self, tmp_path, capsys):
        src = tmp_path / "noisy.txt"
        src.write_text("一一 <noise> 二二\n", encoding="utf-8")
        out = tmp_path / "clean.txt"
        code = main([
            "clean", "--corpus", str(src), "--out", str(out),
            "--drop-pattern", "<[^>]*>",
        ])
        assert code == 0
        assert "removed_tokens = 1" in capsys.readouterr().out

    def test_error_reported_to_stderr(self, tmp_path, capsys):
        code = main(["stats", "--corpus", str(tmp_path / "missing.txt")])
        assert code == 1
        assert "csgen: error" in capsys.readouterr().err


class TestSynthCommand:
    def test_synth_writes_world(self, tmp_path):
        out = tmp_path / "world"
        assert main(["synth", "--out-dir", str(out), "--n", "20", "--seed", "7"]) == 0
        for name in ("host.txt", "cs.txt", "refs.tsv", "lexicon.tsv",
                     "pos_lexicon.tsv", "tags.txt", "manifest.txt"):
            assert (out / name).exists()

    def test_synth_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        main(["synth", "--out-dir", str(a), "--n", "30", "--seed", "7"])
        main(["synth", "--out-dir", str(b), "--n", "30", "--seed", "7"])
        for name in os.listdir(a):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestPipelineCommands:
    def test_baseline_command(self, tmp_path):
        world = tmp_path / "world"
        main(["synth", "--out-dir", str(world), "--n", "15", "--seed", "1"])
        out = tmp_path / "en.txt"
        code = main([
            "baseline", "--baseline", "en",
            "--host", str(world / "host.txt"),
            "--lexicon", str(world / "lexicon.tsv"),
            "--out", str(out),
        ])
        assert code == 0
        generated = load_corpus(out)
        assert all(s.has_guest() for s in generated)

    def test_train_lm_and_ppl(self, tmp_path, capsys):
        world = tmp_path / "world"
        main(["synth", "--out-dir", str(world), "--n", "25", "--seed", "2"])
        model_path = tmp_path / "model.kn"
        cfg = write_tiny_config(tmp_path / "run.ini")
        code = main([
            "train-lm", "--kind", "ngram", "--train", str(world / "cs.txt"),
            "--out", str(model_path), "--config", cfg,
        ])
        assert code == 0
        capsys.readouterr()
        code = main([
            "ppl", "--kind", "ngram", "--model", str(model_path),
            "--corpus", str(world / "cs.txt"),
        ])
        assert code == 0
        assert "ppl = " in capsys.readouterr().out

    def test_eval_csp_command(self, tmp_path, capsys):
        world = tmp_path / "world"
        main(["synth", "--out-dir", str(world), "--n", "12", "--seed", "4"])
        code = main([
            "eval-csp", "--refs", str(world / "refs.tsv"),
            "--hyps", str(world / "cs.txt"),
            "--lexicon", str(world / "lexicon.tsv"),
        ])
        assert code == 0
        out = capsys.readouterr().out
        # hypotheses ARE the references here, so the metrics are perfect
        assert "1.000000,1.000000,1.000000" in out

    def test_augment_counts(self, tmp_path, capsys):
        world = tmp_path / "world"
        main(["synth", "--out-dir", str(world), "--n", "10", "--seed", "5"])
        out = tmp_path / "aug.txt"
        code = main([
            "augment", "--train", str(world / "cs.txt"),
            "--host", str(world / "host.txt"),
            "--strategy", "random", "--p", "0.3",
            "--lexicon", str(world / "lexicon.tsv"),
            "--out", str(out), "--seed", "9",
        ])
        assert code == 0
        assert len(load_corpus(out)) == 20
        report = (tmp_path / "aug.txt.report.csv").read_text()
        assert "random,9,10,10" in report

    def test_train_gan_and_generate(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "run.ini")
        model_dir = tmp_path / "model"
        assert main(["train-gan", "--config", cfg, "--out-dir", str(model_dir)]) == 0
        assert (model_dir / "gan.npz").exists()
        assert (model_dir / "history.csv").exists()
        world = tmp_path / "world"
        main(["synth", "--out-dir", str(world), "--n", "8", "--seed", "3"])
        out = tmp_path / "generated.txt"
        code = main([
            "generate", "--model-dir", str(model_dir),
            "--host", str(world / "host.txt"),
            "--lexicon", str(world / "lexicon.tsv"),
            "--out", str(out), "--mode", "threshold",
        ])
        assert code == 0
        assert len(load_corpus(out)) == 8


class TestExperimentCommand:
    def test_exp1_table_has_six_rows(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "run.ini")
        out = tmp_path / "exp1"
        assert main(["experiment", "--exp", "1", "--config", cfg,
                     "--out-dir", str(out)]) == 0
        lines = (out / "exp1_metrics.csv").read_text().splitlines()
        assert len(lines) == 7
        systems = [line.split(",")[0] for line in lines[1:]]
        assert systems == ["zh", "en", "random", "noun", "proposed", "proposed_pos"]
