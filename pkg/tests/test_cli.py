import json

import pytest

from goalrec.cli import main, parse_config_file
from goalrec.errors import InvalidConfigError


def run(argv):
    return main([str(part) for part in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A tiny end-to-end workspace: pairs, instances, and a trained checkpoint."""
    root = tmp_path_factory.mktemp("cli")
    pairs = root / "pairs.jsonl"
    instances = root / "instances.jsonl"
    ckpt = root / "model.ckpt"
    assert run([
        "gen-data", "--blocks", 5, "--kind", "pairs", "--count", 60,
        "--goal-size", "1:3", "--seed", 4, "--out", pairs,
    ]) == 0
    assert run([
        "gen-data", "--blocks", 5, "--kind", "instances", "--count", 5,
        "--per-group", 2, "--goal-size", "1:3", "--goal-set-size", "3:5",
        "--seed", 5, "--out", instances,
    ]) == 0
    assert run([
        "train", "--pairs", pairs, "--out", ckpt,
        "--embedding-dim", 8, "--hidden-size", 10, "--batch-size", 16,
        "--epochs", 2, "--seed", 6,
    ]) == 0
    return root, pairs, instances, ckpt


class TestGenData:
    def test_pairs_file_contents(self, workspace):
        _, pairs, _, _ = workspace
        lines = pairs.read_text().strip().split("\n")
        assert len(lines) == 60
        record = json.loads(lines[0])
        assert record["domain"] == "blocksworld-5"
        assert len(record["goals"]) == 1

    def test_instances_file_contents(self, workspace):
        _, _, instances, _ = workspace
        lines = instances.read_text().strip().split("\n")
        assert len(lines) == 5 * 2 * 3
        record = json.loads(lines[0])
        assert 3 <= len(record["goals"]) <= 5


class TestTrainEval:
    def test_eval_writes_reports(self, workspace):
        root, _, instances, ckpt = workspace
        report = root / "report.jsonl"
        assert run(["eval", "--dataset", instances, "--checkpoint", ckpt,
                    "--report", report]) == 0
        assert report.exists()
        summary = root / "report.summary.csv"
        assert summary.exists()
        header = summary.read_text().split("\n")[0]
        assert header.startswith("observability,count,accuracy")

    def test_recognize_prints_selection(self, workspace, capsys):
        _, _, instances, ckpt = workspace
        assert run(["recognize", "--instance", instances, "--checkpoint", ckpt]) == 0
        out = capsys.readouterr().out
        assert "selected G" in out
        assert "score=" in out

    def test_buckets_runs(self, workspace, capsys):
        root, _, instances, ckpt = workspace
        out_csv = root / "buckets.csv"
        assert run(["buckets", "--dataset", instances, "--checkpoint", ckpt,
                    "--out", out_csv]) == 0
        assert out_csv.read_text().startswith("bucket,observability,count,accuracy")

    def test_size_study_runs(self, workspace):
        root, pairs, instances, _ = workspace
        out_csv = root / "sizes.csv"
        assert run([
            "size-study", "--pairs", pairs, "--test", instances,
            "--fractions", "0.5,1.0", "--embedding-dim", 8, "--hidden-size", 10,
            "--batch-size", 16, "--epochs", 1, "--seed", 6, "--out", out_csv,
        ]) == 0
        lines = out_csv.read_text().strip().split("\n")
        assert lines[0] == "fraction,pairs,accuracy"
        assert len(lines) == 3


class TestExitCodes:
    def test_usage_error_is_1(self):
        assert run(["gen-data", "--blocks", 5]) == 1  # missing required flags
        assert run(["no-such-command"]) == 1

    def test_incompatibility_is_2(self, workspace, tmp_path):
        root, _, instances, ckpt = workspace
        # dataset from a different vocabulary than the checkpoint
        other = tmp_path / "other.jsonl"
        assert run([
            "gen-data", "--blocks", 6, "--kind", "instances", "--count", 2,
            "--goal-size", "1:2", "--goal-set-size", "3:3", "--seed", 1,
            "--out", other,
        ]) == 0
        assert run(["eval", "--dataset", other, "--checkpoint", ckpt,
                    "--report", tmp_path / "r.jsonl"]) == 2

    def test_runtime_failure_is_3(self, workspace, tmp_path):
        _, _, instances, _ = workspace
        assert run(["eval", "--dataset", instances,
                    "--checkpoint", tmp_path / "missing.ckpt",
                    "--report", tmp_path / "r.jsonl"]) == 3

    def test_bad_flag_value_is_1(self, workspace, tmp_path):
        assert run([
            "gen-data", "--blocks", 5, "--count", 5, "--goal-size", "9:1",
            "--out", tmp_path / "x.jsonl",
        ]) == 1

    def test_out_of_range_index_is_1(self, workspace):
        _, _, instances, ckpt = workspace
        assert run(["recognize", "--instance", instances, "--checkpoint", ckpt,
                    "--index", 10_000]) == 1

    def test_bad_fractions_is_1(self, workspace):
        _, pairs, instances, _ = workspace
        assert run([
            "size-study", "--pairs", pairs, "--test", instances,
            "--fractions", "half,full",
        ]) == 1


class TestConfigFile:
    def test_parse_round_trip(self, tmp_path):
        path = tmp_path / "model.cfg"
        path.write_text(
            "# desk config\n"
            "embedding_dim = 24\n"
            "hidden_size = 32\n"
            "learning_rate = 0.005\n"
            "epochs = 7\n"
        )
        config = parse_config_file(path)
        assert config.embedding_dim == 24
        assert config.hidden_size == 32
        assert config.learning_rate == 0.005
        assert config.epochs == 7

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "model.cfg"
        path.write_text("width = 3\n")
        with pytest.raises(InvalidConfigError):
            parse_config_file(path)

    def test_cli_flags_override_config(self, tmp_path, workspace):
        root, pairs, _, _ = workspace
        cfg = tmp_path / "model.cfg"
        cfg.write_text("embedding_dim = 8\nhidden_size = 10\nepochs = 1\nbatch_size = 16\n")
        out = tmp_path / "m.ckpt"
        assert run([
            "train", "--pairs", pairs, "--out", out, "--config", cfg, "--epochs", 2,
        ]) == 0
        from goalrec.checkpoint import load_checkpoint

        assert load_checkpoint(out).config.epochs == 2
