"""Experiment harness: synthetic datasets, swarm-vs-EM comparison runs, artifacts.

Datasets are sampled from random ground-truth HMMs so the sequences carry
real hidden-state structure. Each (dataset, seed) pair trains one model per
method on that single sequence; the report collects final log-likelihoods,
per-iteration traces, and a config echo sufficient to re-run the experiment
bit-identically.
"""

import csv
import io
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import json

import numpy as np

from .model import HmmModel, ObservationSequence, random_model, sample_sequence
from .baumwelch import baum_welch_train
from .pso import FitnessTrace, SwarmConfig, pso_train
from .serialize import format_pso_trace

GROUP_DIMS = {"1dim": 1, "2dim": 2}

# Namespace tag for dataset seed derivation; keeps ground-truth draws
# independent of any trainer that happens to reuse the same seed integer.
_STREAM_TAG = 0x44415441


@dataclass
class DatasetSpec:
    """Shape of one synthetic dataset group."""

    group: str = "1dim"
    sequence_count: int = 5
    T: int = 100
    m: int = 5
    n_hidden: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.group not in GROUP_DIMS:
            raise ValueError(f"group must be one of {sorted(GROUP_DIMS)}, got {self.group!r}")
        if min(self.sequence_count, self.T, self.m, self.n_hidden) < 1:
            raise ValueError("sequence_count, T, m, n_hidden must all be positive")

    @property
    def d(self) -> int:
        return GROUP_DIMS[self.group]


@dataclass
class ComparisonRow:
    """Outcome of one (dataset, seed, method) training run."""

    group: str
    dataset_index: int
    method: str
    seed: int
    final_loglik: float | None
    wall_seconds: float
    iterations: int
    likelihood_evals: int
    error: str | None = None


@dataclass
class ExperimentReport:
    """Comparison rows plus per-run traces and the resolved configuration."""

    rows: list[ComparisonRow] = field(default_factory=list)
    traces: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)


def generate_datasets(spec: DatasetSpec) -> tuple[list[ObservationSequence], list[HmmModel]]:
    """Sample ``sequence_count`` sequences, each from its own random ground truth.

    Every sequence gets an independent child stream of ``spec.seed``, so the
    whole group is reproducible from the one seed. The generating models are
    returned for diagnostics; training never sees them.
    """
    sequences: list[ObservationSequence] = []
    models: list[HmmModel] = []
    for child in np.random.SeedSequence([spec.seed, _STREAM_TAG]).spawn(spec.sequence_count):
        rng = np.random.default_rng(child)
        truth = random_model(spec.n_hidden, spec.m, spec.d, rng)
        sequences.append(sample_sequence(truth, spec.T, rng))
        models.append(truth)
    return sequences, models


def _run_key(group: str, dataset_index: int, seed: int) -> str:
    return f"{group}_ds{dataset_index}_seed{seed}"


def run_comparison(
    sequences: list[ObservationSequence],
    n: int,
    m: int,
    pso_cfg: SwarmConfig,
    bw_iterations: int,
    seeds: list[int],
    group: str = "1dim",
    extra_config: dict | None = None,
) -> ExperimentReport:
    """Train both methods on every (sequence, seed) pair.

    The swarm trainer runs with ``pso_cfg`` reseeded per pair; the EM
    baseline starts from a random model drawn with the same seed. A failed
    or non-finite run becomes an error row instead of aborting the batch.
    """
    if not sequences:
        raise ValueError("need at least one dataset sequence")
    d = sequences[0].d
    report = ExperimentReport()
    report.config = {
        "group": group,
        "n": n,
        "m": m,
        "d": d,
        "sequence_lengths": [seq.T for seq in sequences],
        "pso": pso_cfg.to_mapping(),
        "bw_iterations": bw_iterations,
        "seeds": list(seeds),
    }
    if extra_config:
        report.config.update(extra_config)

    for index, seq in enumerate(sequences):
        for seed in seeds:
            key = _run_key(group, index, seed)
            report.traces[key] = {}

            start = time.perf_counter()
            try:
                _, trace = pso_train(seq, n, m, d, replace(pso_cfg, seed=seed))
                final = trace.gbest_loglik[-1]
                error = None if np.isfinite(final) else "non-finite log-likelihood"
            except (ValueError, FloatingPointError) as err:
                trace, final, error = FitnessTrace(), None, str(err)
            report.traces[key]["pso"] = trace
            report.rows.append(
                ComparisonRow(
                    group=group,
                    dataset_index=index,
                    method="pso",
                    seed=seed,
                    final_loglik=None if error else float(final),
                    wall_seconds=time.perf_counter() - start,
                    iterations=pso_cfg.iterations,
                    likelihood_evals=pso_cfg.particle_count * (pso_cfg.iterations + 1),
                    error=error,
                )
            )

            start = time.perf_counter()
            try:
                init = random_model(n, m, d, np.random.default_rng(seed))
                _, bw_trace = baum_welch_train(init, seq, bw_iterations)
                final = bw_trace[-1]
                error = None if np.isfinite(final) else "non-finite log-likelihood"
            except (ValueError, FloatingPointError) as err:
                bw_trace, final, error = [], None, str(err)
            report.traces[key]["bw"] = bw_trace
            report.rows.append(
                ComparisonRow(
                    group=group,
                    dataset_index=index,
                    method="bw",
                    seed=seed,
                    final_loglik=None if error else float(final),
                    wall_seconds=time.perf_counter() - start,
                    iterations=bw_iterations,
                    likelihood_evals=bw_iterations + 1,
                    error=error,
                )
            )
    return report


COMPARISON_COLUMNS = [
    "group", "dataset", "method", "seed",
    "final_loglik", "iterations", "likelihood_evals", "error",
]


def _comparison_csv(rows: list[ComparisonRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COMPARISON_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.group,
                row.dataset_index,
                row.method,
                row.seed,
                "" if row.final_loglik is None else repr(row.final_loglik),
                row.iterations,
                row.likelihood_evals,
                row.error or "",
            ]
        )
    return buffer.getvalue()


def _convergence_csv(pso_trace: FitnessTrace, bw_trace: list[float]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["method", "iteration", "loglik"])
    for i, value in enumerate(pso_trace.gbest_loglik):
        writer.writerow(["pso", i, repr(value)])
    for i, value in enumerate(bw_trace):
        writer.writerow(["bw", i, repr(value)])
    return buffer.getvalue()


def _report_json(report: ExperimentReport) -> str:
    traces = {}
    for key in sorted(report.traces):
        entry = report.traces[key]
        out: dict = {}
        if "pso" in entry:
            out["pso"] = {
                "gbest_loglik": entry["pso"].gbest_loglik,
                "mean_pbest_gap": entry["pso"].mean_pbest_gap,
            }
        if "bw" in entry:
            out["bw"] = {"loglik": entry["bw"]}
        traces[key] = out
    rows = [
        {
            "group": row.group,
            "dataset": row.dataset_index,
            "method": row.method,
            "seed": row.seed,
            "final_loglik": row.final_loglik,
            "iterations": row.iterations,
            "likelihood_evals": row.likelihood_evals,
            "error": row.error,
        }
        for row in report.rows
    ]
    payload = {"config": report.config, "rows": rows, "traces": traces}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit_report(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write the deterministic artifacts: comparison table, traces, full JSON.

    Wall-clock timings are deliberately left out of these files (see
    ``emit_timings``) so that identical configurations always produce
    byte-identical artifacts.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, text: str) -> None:
        path = out / name
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as err:
            raise OSError(f"failed to write {path}: {err}") from err
        written.append(path)

    emit("comparison.csv", _comparison_csv(report.rows))
    for key in sorted(report.traces):
        entry = report.traces[key]
        pso_trace = entry.get("pso", FitnessTrace())
        bw_trace = entry.get("bw", [])
        emit(f"pso_trace_{key}.csv", format_pso_trace(pso_trace))
        emit(f"convergence_{key}.csv", _convergence_csv(pso_trace, bw_trace))
    emit("report.json", _report_json(report))
    return written


def emit_timings(report: ExperimentReport, out_dir: str | Path) -> Path:
    """Write wall-clock seconds per run; excluded from the determinism guarantee."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["group", "dataset", "method", "seed", "wall_seconds"])
    for row in report.rows:
        writer.writerow([row.group, row.dataset_index, row.method, row.seed, repr(row.wall_seconds)])
    path = out / "timings.csv"
    path.write_text(buffer.getvalue(), encoding="utf-8")
    return path
