import numpy as np
import pytest

from swarmhmm.harness import (
    ComparisonRow,
    DatasetSpec,
    ExperimentReport,
    emit_report,
    emit_timings,
    generate_datasets,
    run_comparison,
)
from swarmhmm.model import ObservationSequence, validate_model
from swarmhmm.pso import FitnessTrace, SwarmConfig
from swarmhmm.serialize import format_sequence


def small_cfg(**overrides) -> SwarmConfig:
    base = dict(particle_count=4, iterations=3, seed=0)
    base.update(overrides)
    return SwarmConfig(**base)


class TestDatasetSpec:
    def test_group_dimensionality(self):
        assert DatasetSpec(group="1dim").d == 1
        assert DatasetSpec(group="2dim").d == 2

    def test_unknown_group_rejected(self):
        with pytest.raises(ValueError, match="group"):
            DatasetSpec(group="3dim")

    def test_nonpositive_counts_rejected(self):
        with pytest.raises(ValueError):
            DatasetSpec(T=0)


class TestGenerateDatasets:
    def test_default_one_dim_shape(self):
        sequences, truths = generate_datasets(DatasetSpec(group="1dim", seed=3))
        assert len(sequences) == 5 and len(truths) == 5
        for seq, truth in zip(sequences, truths):
            assert seq.T == 100 and seq.d == 1
            assert seq.steps.max() < 5
            assert validate_model(truth) == []
            assert truth.n == 2 and truth.m == 5

    def test_default_two_dim_shape(self):
        sequences, _ = generate_datasets(DatasetSpec(group="2dim", seed=3))
        assert all(seq.d == 2 for seq in sequences)

    def test_same_seed_is_byte_identical(self):
        spec = DatasetSpec(group="1dim", seed=5)
        first_seqs, _ = generate_datasets(spec)
        second_seqs, _ = generate_datasets(spec)
        for a, b in zip(first_seqs, second_seqs):
            assert format_sequence(a) == format_sequence(b)

    def test_sequences_use_independent_streams(self):
        sequences, _ = generate_datasets(DatasetSpec(group="1dim", seed=5))
        assert not np.array_equal(sequences[0].steps, sequences[1].steps)


class TestRunComparison:
    @pytest.fixture(scope="class")
    def small_report(self):
        spec = DatasetSpec(group="1dim", sequence_count=2, T=30, seed=1)
        sequences, _ = generate_datasets(spec)
        return run_comparison(sequences, n=2, m=5, pso_cfg=small_cfg(),
                              bw_iterations=5, seeds=[0, 1], group="1dim")

    def test_row_count(self, small_report):
        assert len(small_report.rows) == 2 * 2 * 2  # datasets x seeds x methods

    def test_rows_are_finite_and_nonpositive(self, small_report):
        for row in small_report.rows:
            assert row.error is None
            assert row.final_loglik <= 0.0
            assert np.isfinite(row.final_loglik)

    def test_pso_rows_match_trace_end(self, small_report):
        for row in small_report.rows:
            key = f"1dim_ds{row.dataset_index}_seed{row.seed}"
            if row.method == "pso":
                trace = small_report.traces[key]["pso"]
                assert row.final_loglik == trace.gbest_loglik[-1]
                assert np.all(np.diff(trace.gbest_loglik) >= 0.0)
            else:
                trace = small_report.traces[key]["bw"]
                assert row.final_loglik == trace[-1]
                assert np.all(np.diff(trace) >= -1e-9)

    def test_eval_counts_expose_budgets(self, small_report):
        for row in small_report.rows:
            if row.method == "pso":
                assert row.likelihood_evals == 4 * (3 + 1)
            else:
                assert row.likelihood_evals == 5 + 1

    def test_config_echo(self, small_report):
        cfg = small_report.config
        assert cfg["n"] == 2 and cfg["m"] == 5 and cfg["d"] == 1
        assert cfg["seeds"] == [0, 1]
        assert cfg["pso"]["particles"] == 4

    def test_failed_runs_become_error_rows(self):
        # Symbol 7 is outside m=5, so every run on this sequence fails.
        bad = ObservationSequence(steps=np.array([[7], [1], [2]]))
        report = run_comparison([bad], n=2, m=5, pso_cfg=small_cfg(),
                                bw_iterations=3, seeds=[0], group="1dim")
        assert len(report.rows) == 2
        for row in report.rows:
            assert row.error is not None
            assert row.final_loglik is None

    def test_empty_datasets_rejected(self):
        with pytest.raises(ValueError):
            run_comparison([], n=2, m=5, pso_cfg=small_cfg(), bw_iterations=1, seeds=[0])


class TestEmitReport:
    @pytest.fixture(scope="class")
    def report(self):
        spec = DatasetSpec(group="1dim", sequence_count=2, T=25, seed=2)
        sequences, _ = generate_datasets(spec)
        return run_comparison(sequences, n=2, m=5, pso_cfg=small_cfg(),
                              bw_iterations=4, seeds=[0], group="1dim")

    def test_files_written(self, report, tmp_path):
        written = emit_report(report, tmp_path)
        names = {p.name for p in written}
        assert "comparison.csv" in names
        assert "report.json" in names
        assert "pso_trace_1dim_ds0_seed0.csv" in names
        assert "convergence_1dim_ds1_seed0.csv" in names

    def test_comparison_csv_row_count(self, report, tmp_path):
        emit_report(report, tmp_path)
        lines = (tmp_path / "comparison.csv").read_text().splitlines()
        assert len(lines) == 1 + len(report.rows)
        assert lines[0] == "group,dataset,method,seed,final_loglik,iterations,likelihood_evals,error"

    def test_convergence_csv_holds_both_methods(self, report, tmp_path):
        emit_report(report, tmp_path)
        lines = (tmp_path / "convergence_1dim_ds0_seed0.csv").read_text().splitlines()
        assert lines[0] == "method,iteration,loglik"
        methods = {line.split(",")[0] for line in lines[1:]}
        assert methods == {"pso", "bw"}

    def test_re_emit_is_byte_identical(self, report, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        emit_report(report, first)
        emit_report(report, second)
        for path in sorted(first.iterdir()):
            assert path.read_bytes() == (second / path.name).read_bytes()

    def test_empty_report_writes_headers_only(self, tmp_path):
        written = emit_report(ExperimentReport(), tmp_path)
        names = {p.name for p in written}
        assert names == {"comparison.csv", "report.json"}
        assert (tmp_path / "comparison.csv").read_text().splitlines()[0].startswith("group,")
        import json

        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["rows"] == [] and payload["traces"] == {}

    def test_report_json_round_trips(self, report, tmp_path):
        import json

        emit_report(report, tmp_path)
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["config"]["seeds"] == [0]
        assert len(payload["rows"]) == len(report.rows)
        key = "1dim_ds0_seed0"
        assert payload["traces"][key]["pso"]["gbest_loglik"] == report.traces[key]["pso"].gbest_loglik
        assert payload["traces"][key]["bw"]["loglik"] == report.traces[key]["bw"]

    def test_timings_sidecar(self, report, tmp_path):
        path = emit_timings(report, tmp_path)
        lines = path.read_text().splitlines()
        assert lines[0] == "group,dataset,method,seed,wall_seconds"
        assert len(lines) == 1 + len(report.rows)
