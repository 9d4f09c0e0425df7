"""File formats: model JSON, observation sequence text, trace CSV.

All floats are written with shortest round-trip formatting (``repr``),
so parse(serialize(x)) reproduces x bit for bit and re-serializing a
parsed file is byte-identical.
"""

import json
from pathlib import Path

import numpy as np

from .model import HmmModel, ObservationSequence
from .pso import FitnessTrace


def model_to_dict(model: HmmModel) -> dict:
    return {
        "n": model.n,
        "m": model.m,
        "d": model.d,
        "pi": model.pi.tolist(),
        "trans": model.trans.tolist(),
        "emit": model.emit.tolist(),
    }


def model_from_dict(data: dict) -> HmmModel:
    try:
        return HmmModel(
            n=int(data["n"]),
            m=int(data["m"]),
            d=int(data["d"]),
            pi=np.array(data["pi"], dtype=float),
            trans=np.array(data["trans"], dtype=float),
            emit=np.array(data["emit"], dtype=float),
        )
    except KeyError as missing:
        raise ValueError(f"model document is missing key {missing}") from None


def save_model(model: HmmModel, path: str | Path) -> None:
    text = json.dumps(model_to_dict(model), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path: str | Path) -> HmmModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ValueError(f"{path}: not a valid model file ({err})") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path}: not a valid model file (expected a JSON object)")
    return model_from_dict(data)


def format_sequence(obs: ObservationSequence, metadata: dict | None = None) -> str:
    """One step per line, d comma-separated symbol indices per step.

    ``metadata`` (e.g. n/m/d/seed of the generating model) is recorded in
    ``#``-prefixed header comments.
    """
    lines = ["# observation sequence"]
    meta = dict(metadata or {})
    meta.setdefault("d", obs.d)
    lines.append("# " + " ".join(f"{key}={meta[key]}" for key in sorted(meta)))
    for step in obs.steps:
        lines.append(",".join(str(int(s)) for s in step))
    return "\n".join(lines) + "\n"


def parse_sequence(text: str) -> tuple[ObservationSequence, dict]:
    """Inverse of ``format_sequence``; returns the sequence and header metadata."""
    metadata: dict = {}
    rows: list[list[int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line.lstrip("#").split():
                if "=" in token:
                    key, _, value = token.partition("=")
                    try:
                        metadata[key] = int(value)
                    except ValueError:
                        metadata[key] = value
            continue
        try:
            rows.append([int(part) for part in line.split(",")])
        except ValueError:
            raise ValueError(f"line {lineno}: expected comma-separated symbol indices, got {line!r}")
    if not rows:
        raise ValueError("sequence file contains no observation steps")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise ValueError(f"inconsistent step widths {sorted(widths)}; every step needs the same d")
    return ObservationSequence(steps=np.array(rows, dtype=np.int64)), metadata


def save_sequence(obs: ObservationSequence, path: str | Path, metadata: dict | None = None) -> None:
    Path(path).write_text(format_sequence(obs, metadata), encoding="utf-8")


def load_sequence(path: str | Path) -> tuple[ObservationSequence, dict]:
    return parse_sequence(Path(path).read_text(encoding="utf-8"))


def format_pso_trace(trace: FitnessTrace) -> str:
    lines = ["iteration,gbest_loglik,mean_pbest_gap"]
    for i, (best, gap) in enumerate(zip(trace.gbest_loglik, trace.mean_pbest_gap)):
        lines.append(f"{i},{best!r},{gap!r}")
    return "\n".join(lines) + "\n"


def format_loglik_trace(values: list[float]) -> str:
    lines = ["iteration,loglik"]
    for i, value in enumerate(values):
        lines.append(f"{i},{value!r}")
    return "\n".join(lines) + "\n"
