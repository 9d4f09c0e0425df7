"""Command-line entry point.

Subcommands: generate | train | compare | decode | sample. Settings are
resolved as defaults < config file (--config, JSON) < command-line flags;
the resolved configuration is printable with --show-config and echoed into
every report for reproducibility.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .model import random_model, sample_sequence
from .likelihood import forward_log_likelihood, viterbi_decode
from .baumwelch import baum_welch_train
from .pso import SwarmConfig, pso_train
from .harness import DatasetSpec, generate_datasets, run_comparison, emit_report, emit_timings
from .serialize import (
    format_loglik_trace,
    format_pso_trace,
    load_model,
    load_sequence,
    save_model,
    save_sequence,
)

DEFAULTS = {
    "group": "1dim",
    "count": 5,
    "t": 100,
    "m": 5,
    "n": 2,
    "seed": 0,
    "particles": 25,
    "iterations": 10,
    "omega": 0.729,
    "c1": 1.49445,
    "c2": 1.49445,
    "topology": "global",
    "neighborhood_k": 2,
    "bw_iterations": 50,
    "seeds": 10,
}

# Keys a config file may set; anything else is rejected as a typo guard.
CONFIG_KEYS = set(DEFAULTS)


def _resolve_config(args: argparse.Namespace) -> tuple[dict, set[str]]:
    """Merge defaults, config file, and flags; track explicitly set keys."""
    resolved = dict(DEFAULTS)
    explicit: set[str] = set()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ValueError(f"--config {args.config}: invalid JSON ({err})")
        if not isinstance(data, dict):
            raise ValueError(f"--config {args.config}: expected a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ValueError(f"--config {args.config}: unknown keys {sorted(unknown)}")
        resolved.update(data)
        explicit |= set(data)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
            explicit.add(key)
    return resolved, explicit


def _swarm_config(resolved: dict) -> SwarmConfig:
    return SwarmConfig(
        particle_count=resolved["particles"],
        iterations=resolved["iterations"],
        omega=resolved["omega"],
        c1=resolved["c1"],
        c2=resolved["c2"],
        topology=resolved["topology"],
        neighborhood_k=resolved["neighborhood_k"],
        seed=resolved["seed"],
    )


def _show_config(args: argparse.Namespace, resolved: dict) -> None:
    if args.show_config:
        print(json.dumps(resolved, indent=2, sort_keys=True))


def _dataset_paths(out: Path, group: str, index: int) -> tuple[Path, Path]:
    return out / f"{group}_seq{index}.txt", out / f"{group}_truth{index}.json"


def cmd_generate(args: argparse.Namespace) -> int:
    resolved, _ = _resolve_config(args)
    _show_config(args, resolved)
    spec = DatasetSpec(
        group=resolved["group"],
        sequence_count=resolved["count"],
        T=resolved["t"],
        m=resolved["m"],
        n_hidden=resolved["n"],
        seed=resolved["seed"],
    )
    sequences, truths = generate_datasets(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"n": spec.n_hidden, "m": spec.m, "d": spec.d, "seed": spec.seed}
    for i, (seq, truth) in enumerate(zip(sequences, truths)):
        seq_path, truth_path = _dataset_paths(out, spec.group, i)
        save_sequence(seq, seq_path, metadata=meta)
        save_model(truth, truth_path)
    print(f"wrote {len(sequences)} sequences (+ ground-truth models) to {out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    resolved, explicit = _resolve_config(args)
    obs, header = load_sequence(args.input)
    # Fall back to the sequence header for model shape unless overridden.
    for key in ("n", "m"):
        if key not in explicit and isinstance(header.get(key), int):
            resolved[key] = header[key]
    if args.iters is not None:
        resolved["iterations" if args.method == "pso" else "bw_iterations"] = args.iters
    _show_config(args, resolved)

    n, m, d = resolved["n"], resolved["m"], obs.d
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model_path = Path(args.model_out) if args.model_out else out / "model.json"
    trace_path = Path(args.trace_out) if args.trace_out else out / "trace.csv"

    if args.method == "pso":
        model, trace = pso_train(obs, n, m, d, _swarm_config(resolved))
        trace_text = format_pso_trace(trace)
        final = trace.gbest_loglik[-1]
    else:
        init = random_model(n, m, d, np.random.default_rng(resolved["seed"]))
        model, loglik_trace = baum_welch_train(init, obs, resolved["bw_iterations"])
        trace_text = format_loglik_trace(loglik_trace)
        final = loglik_trace[-1]

    save_model(model, model_path)
    trace_path.write_text(trace_text, encoding="utf-8")
    print(f"final log-likelihood: {final!r}")
    print(f"model: {model_path}")
    print(f"trace: {trace_path}")
    return 0


def _load_group_sequences(data_dir: Path, group: str):
    paths = sorted(
        data_dir.glob(f"{group}_seq*.txt"),
        key=lambda p: int("".join(ch for ch in p.stem if ch.isdigit()) or 0),
    )
    if not paths:
        raise ValueError(f"no {group}_seq*.txt files found in {data_dir}")
    sequences = []
    for path in paths:
        seq, _ = load_sequence(path)
        sequences.append(seq)
    return sequences, [p.name for p in paths]


def cmd_compare(args: argparse.Namespace) -> int:
    resolved, _ = _resolve_config(args)
    _show_config(args, resolved)
    out = Path(args.out)
    group = resolved["group"]
    spec = DatasetSpec(
        group=group,
        sequence_count=resolved["count"],
        T=resolved["t"],
        m=resolved["m"],
        n_hidden=resolved["n"],
        seed=resolved["seed"],
    )
    dataset_echo: dict = {
        "dataset": {
            "group": group,
            "count": spec.sequence_count,
            "t": spec.T,
            "m": spec.m,
            "n": spec.n_hidden,
            "seed": spec.seed,
        }
    }
    if args.data_dir:
        sequences, names = _load_group_sequences(Path(args.data_dir), group)
        dataset_echo["dataset"]["source"] = names
    else:
        sequences, truths = generate_datasets(spec)
        data_out = out / "datasets"
        data_out.mkdir(parents=True, exist_ok=True)
        meta = {"n": spec.n_hidden, "m": spec.m, "d": spec.d, "seed": spec.seed}
        for i, (seq, truth) in enumerate(zip(sequences, truths)):
            seq_path, truth_path = _dataset_paths(data_out, group, i)
            save_sequence(seq, seq_path, metadata=meta)
            save_model(truth, truth_path)
        dataset_echo["dataset"]["source"] = "generated"

    seeds = [resolved["seed"] + i for i in range(resolved["seeds"])]
    report = run_comparison(
        sequences,
        n=resolved["n"],
        m=resolved["m"],
        pso_cfg=_swarm_config(resolved),
        bw_iterations=resolved["bw_iterations"],
        seeds=seeds,
        group=group,
        extra_config=dataset_echo,
    )
    emit_report(report, out)
    emit_timings(report, out)

    finals = {
        (row.dataset_index, row.seed, row.method): row.final_loglik
        for row in report.rows
        if row.error is None
    }
    pso_wins = sum(
        1
        for (i, s, method), value in finals.items()
        if method == "pso" and (i, s, "bw") in finals and value >= finals[(i, s, "bw")]
    )
    pairs = sum(1 for key in finals if key[2] == "pso" and (key[0], key[1], "bw") in finals)
    errors = sum(1 for row in report.rows if row.error is not None)
    print(f"rows: {len(report.rows)}  pairs: {pairs}  pso>=bw: {pso_wins}  errors: {errors}")
    print(f"report written to {out}")
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    obs, _ = load_sequence(args.input)
    path, log_prob = viterbi_decode(model, obs)
    print(" ".join(str(int(s)) for s in path))
    print(f"log probability: {log_prob!r}")
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    resolved, _ = _resolve_config(args)
    _show_config(args, resolved)
    model = load_model(args.model)
    if args.t is not None and args.t < 1:
        raise ValueError(f"--t must be >= 1, got {args.t}")
    T = resolved["t"]
    seed = resolved["seed"]
    obs = sample_sequence(model, T, np.random.default_rng(seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sampled.txt"
    save_sequence(obs, path, metadata={"n": model.n, "m": model.m, "d": model.d, "seed": seed})
    print(f"log-likelihood under the model: {forward_log_likelihood(model, obs)!r}")
    print(f"sequence: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmhmm",
        description="Discrete HMM training with a constrained particle swarm and a Baum-Welch baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, out_default: str) -> None:
        p.add_argument("--seed", type=int, help="root seed (default 0)")
        p.add_argument("--config", type=str, help="JSON config file")
        p.add_argument("--out", type=str, default=out_default, help="output directory")
        p.add_argument("--show-config", action="store_true", help="print the resolved configuration")

    gen = sub.add_parser("generate", help="generate a synthetic dataset group")
    add_common(gen, "datasets")
    gen.add_argument("--group", choices=["1dim", "2dim"])
    gen.add_argument("--count", type=int, help="number of sequences")
    gen.add_argument("--t", type=int, help="sequence length")
    gen.add_argument("--m", type=int, help="symbols per dimension")
    gen.add_argument("--n", type=int, help="hidden states of the ground truth")
    gen.set_defaults(func=cmd_generate)

    train = sub.add_parser("train", help="train one model on one sequence")
    add_common(train, "out")
    train.add_argument("--method", choices=["pso", "bw"], required=True)
    train.add_argument("--input", required=True, help="observation sequence file")
    train.add_argument("--model-out", help="trained model path (default <out>/model.json)")
    train.add_argument("--trace-out", help="trace CSV path (default <out>/trace.csv)")
    train.add_argument("--iters", type=int, help="iterations for the chosen method")
    train.add_argument("--particles", type=int)
    train.add_argument("--omega", type=float)
    train.add_argument("--c1", type=float)
    train.add_argument("--c2", type=float)
    train.add_argument("--topology", choices=["global", "ring"])
    train.add_argument("--neighborhood-k", dest="neighborhood_k", type=int)
    train.add_argument("--n", type=int, help="hidden states")
    train.add_argument("--m", type=int, help="symbols per dimension")
    train.set_defaults(func=cmd_train)

    comp = sub.add_parser("compare", help="swarm-vs-EM comparison over a dataset group")
    add_common(comp, "report")
    comp.add_argument("--group", choices=["1dim", "2dim"])
    comp.add_argument("--count", type=int, help="number of sequences")
    comp.add_argument("--t", type=int, help="sequence length")
    comp.add_argument("--m", type=int)
    comp.add_argument("--n", type=int)
    comp.add_argument("--seeds", type=int, help="runs per dataset (seeds seed..seed+k-1)")
    comp.add_argument("--particles", type=int)
    comp.add_argument("--iterations", type=int, help="swarm iterations")
    comp.add_argument("--bw-iterations", dest="bw_iterations", type=int)
    comp.add_argument("--omega", type=float)
    comp.add_argument("--c1", type=float)
    comp.add_argument("--c2", type=float)
    comp.add_argument("--topology", choices=["global", "ring"])
    comp.add_argument("--neighborhood-k", dest="neighborhood_k", type=int)
    comp.add_argument("--data-dir", help="load sequences from here instead of generating")
    comp.set_defaults(func=cmd_compare)

    dec = sub.add_parser("decode", help="most probable hidden path for a sequence")
    dec.add_argument("--model", required=True)
    dec.add_argument("--input", required=True)
    dec.set_defaults(func=cmd_decode)

    samp = sub.add_parser("sample", help="sample a sequence from a model file")
    add_common(samp, "out")
    samp.add_argument("--model", required=True)
    samp.add_argument("--t", type=int, help="sequence length")
    samp.set_defaults(func=cmd_sample)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
