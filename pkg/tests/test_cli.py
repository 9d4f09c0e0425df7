import json

import numpy as np
import pytest

from swarmhmm.cli import main
from swarmhmm.model import sample_sequence
from swarmhmm.serialize import load_model, load_sequence, save_model, save_sequence

from test_model import deterministic_model


@pytest.fixture
def det_model_file(tmp_path):
    path = tmp_path / "det_model.json"
    save_model(deterministic_model(), path)
    return path


@pytest.fixture
def sequence_file(tmp_path):
    model = deterministic_model()
    obs = sample_sequence(model, 6, np.random.default_rng(0))
    path = tmp_path / "seq.txt"
    save_sequence(obs, path, metadata={"n": 2, "m": 2, "d": 1, "seed": 0})
    return path


class TestGenerate:
    def test_default_group_shapes(self, tmp_path):
        out = tmp_path / "ds"
        assert main(["generate", "--group", "1dim", "--seed", "7", "--out", str(out)]) == 0
        seq_files = sorted(out.glob("1dim_seq*.txt"))
        truth_files = sorted(out.glob("1dim_truth*.json"))
        assert len(seq_files) == 5 and len(truth_files) == 5
        obs, meta = load_sequence(seq_files[0])
        assert obs.T == 100 and obs.d == 1
        assert meta["m"] == 5 and meta["seed"] == 7

    def test_parameter_passthrough(self, tmp_path):
        out = tmp_path / "ds"
        assert main(["generate", "--t", "10", "--count", "1", "--out", str(out)]) == 0
        seq_files = list(out.glob("1dim_seq*.txt"))
        assert len(seq_files) == 1
        obs, _ = load_sequence(seq_files[0])
        assert obs.T == 10

    def test_repeat_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["generate", "--group", "2dim", "--seed", "3", "--out", str(out)]) == 0
        for path in sorted(a.iterdir()):
            assert path.read_bytes() == (b / path.name).read_bytes()


class TestTrain:
    def test_bw_zero_iterations(self, tmp_path, sequence_file, capsys):
        out = tmp_path / "run"
        code = main(["train", "--method", "bw", "--input", str(sequence_file),
                     "--iters", "0", "--seed", "5", "--out", str(out)])
        assert code == 0
        trace_lines = (out / "trace.csv").read_text().splitlines()
        assert len(trace_lines) == 2  # header + initial likelihood only
        model = load_model(out / "model.json")
        assert model.n == 2 and model.m == 2
        assert "final log-likelihood" in capsys.readouterr().out

    def test_pso_determinism(self, tmp_path, sequence_file):
        outs = [tmp_path / "r1", tmp_path / "r2"]
        for out in outs:
            code = main(["train", "--method", "pso", "--input", str(sequence_file),
                         "--seed", "3", "--particles", "4", "--iters", "3", "--out", str(out)])
            assert code == 0
        assert (outs[0] / "model.json").read_bytes() == (outs[1] / "model.json").read_bytes()
        assert (outs[0] / "trace.csv").read_bytes() == (outs[1] / "trace.csv").read_bytes()

    def test_header_metadata_supplies_model_shape(self, tmp_path, sequence_file):
        out = tmp_path / "run"
        assert main(["train", "--method", "bw", "--input", str(sequence_file),
                     "--iters", "2", "--out", str(out)]) == 0
        model = load_model(out / "model.json")
        assert model.m == 2  # from the sequence header, not the m=5 default

    def test_explicit_shape_overrides_header(self, tmp_path, sequence_file):
        out = tmp_path / "run"
        assert main(["train", "--method", "bw", "--input", str(sequence_file),
                     "--iters", "2", "--m", "4", "--out", str(out)]) == 0
        assert load_model(out / "model.json").m == 4

    def test_missing_input_fails(self, tmp_path, capsys):
        code = main(["train", "--method", "bw", "--input", str(tmp_path / "nope.txt"),
                     "--out", str(tmp_path)])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestCompare:
    def test_row_counting_with_one_seed(self, tmp_path, capsys):
        out = tmp_path / "report"
        code = main(["compare", "--seeds", "1", "--t", "25", "--particles", "4",
                     "--iterations", "2", "--bw-iterations", "3", "--out", str(out)])
        assert code == 0
        lines = (out / "comparison.csv").read_text().splitlines()
        assert len(lines) == 1 + 5 * 1 * 2
        assert (out / "report.json").exists()
        assert (out / "timings.csv").exists()
        assert (out / "datasets" / "1dim_seq0.txt").exists()

    def test_group_tagging(self, tmp_path):
        out = tmp_path / "report"
        code = main(["compare", "--group", "2dim", "--count", "2", "--seeds", "1",
                     "--t", "20", "--particles", "3", "--iterations", "2",
                     "--bw-iterations", "2", "--out", str(out)])
        assert code == 0
        lines = (out / "comparison.csv").read_text().splitlines()[1:]
        assert all(line.startswith("2dim,") for line in lines)

    def test_load_datasets_from_directory(self, tmp_path):
        data = tmp_path / "data"
        assert main(["generate", "--count", "2", "--t", "20", "--out", str(data)]) == 0
        out = tmp_path / "report"
        code = main(["compare", "--data-dir", str(data), "--count", "2", "--seeds", "1",
                     "--particles", "3", "--iterations", "2", "--bw-iterations", "2",
                     "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["dataset"]["source"] == ["1dim_seq0.txt", "1dim_seq1.txt"]


class TestDecode:
    def test_probability_one_path(self, tmp_path, det_model_file, sequence_file, capsys):
        assert main(["decode", "--model", str(det_model_file), "--input", str(sequence_file)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "0 1 0 1 0 1"
        assert "0.0" in out[1]

    def test_mismatched_shapes_fail(self, tmp_path, det_model_file, capsys):
        seq = tmp_path / "wide.txt"
        seq.write_text("1,1\n0,0\n")
        assert main(["decode", "--model", str(det_model_file), "--input", str(seq)]) == 1
        assert "dimensions" in capsys.readouterr().err


class TestSample:
    def test_deterministic_model_fixed_output(self, tmp_path, det_model_file):
        out = tmp_path / "s"
        assert main(["sample", "--model", str(det_model_file), "--t", "4",
                     "--seed", "1", "--out", str(out)]) == 0
        obs, meta = load_sequence(out / "sampled.txt")
        assert obs.steps[:, 0].tolist() == [0, 1, 0, 1]
        assert meta["seed"] == 1

    def test_same_seed_identical_file(self, tmp_path, det_model_file):
        outs = [tmp_path / "a", tmp_path / "b"]
        for out in outs:
            assert main(["sample", "--model", str(det_model_file), "--t", "12",
                         "--seed", "9", "--out", str(out)]) == 0
        assert (outs[0] / "sampled.txt").read_bytes() == (outs[1] / "sampled.txt").read_bytes()

    def test_zero_length_rejected(self, tmp_path, det_model_file, capsys):
        code = main(["sample", "--model", str(det_model_file), "--t", "0",
                     "--out", str(tmp_path)])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestConfigResolution:
    def test_show_config_prints_resolved_settings(self, tmp_path, capsys):
        out = tmp_path / "ds"
        assert main(["generate", "--count", "1", "--t", "5", "--show-config",
                     "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        resolved = json.loads(stdout[: stdout.index("\n}") + 2])
        assert resolved["count"] == 1 and resolved["t"] == 5
        assert resolved["particles"] == 25  # untouched default

    def test_config_file_overrides_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"count": 2, "t": 8, "seed": 4}))
        out = tmp_path / "ds"
        assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
        seqs = list(out.glob("1dim_seq*.txt"))
        assert len(seqs) == 2
        obs, meta = load_sequence(seqs[0])
        assert obs.T == 8 and meta["seed"] == 4

    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t": 8}))
        out = tmp_path / "ds"
        assert main(["generate", "--config", str(cfg), "--t", "3", "--count", "1",
                     "--out", str(out)]) == 0
        obs, _ = load_sequence(next(out.glob("1dim_seq*.txt")))
        assert obs.T == 3

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"particless": 9}))
        assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "d")]) == 1
        assert "unknown keys" in capsys.readouterr().err

    def test_invalid_flag_value_exits_nonzero(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["generate", "--group", "4dim"])
        assert excinfo.value.code == 2
