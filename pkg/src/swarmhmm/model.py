"""Discrete-observation hidden Markov model parameters and sampling.

A model is the triple (pi, trans, emit): initial state distribution,
row-stochastic transition matrix, and one row-stochastic emission matrix
per observation dimension. Observation dimensions are conditionally
independent given the hidden state, so a step's emission probability is
the product of the per-dimension entries.
"""

from dataclasses import dataclass

import numpy as np

# Row sums may drift from 1 by accumulated rounding; this is the accepted slack.
SUM_TOLERANCE = 1e-9


class InvalidModelError(ValueError):
    """Raised when an operation requiring a valid model receives one that is not.

    Attributes:
        violations: List of human-readable constraint violations.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid model: " + "; ".join(self.violations))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HmmModel:
    """HMM parameter triple over n hidden states and m symbols per dimension.

    Attributes:
        n: Number of hidden states.
        m: Number of observation symbols per dimension.
        d: Number of observation dimensions.
        pi: Initial state probabilities, shape (n,).
        trans: Transition probabilities, shape (n, n); trans[i, j] is the
            probability of moving from state i to state j.
        emit: Emission probabilities, shape (d, n, m); emit[r, i, k] is the
            probability of symbol k in dimension r given hidden state i.

    Construction only checks shapes; probability constraints are reported
    by ``validate_model`` so that invalid candidates can be inspected as data.
    """

    n: int
    m: int
    d: int
    pi: np.ndarray
    trans: np.ndarray
    emit: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.d < 1:
            raise ValueError(f"n, m, d must be >= 1, got n={self.n} m={self.m} d={self.d}")
        object.__setattr__(self, "pi", _readonly(self.pi))
        object.__setattr__(self, "trans", _readonly(self.trans))
        object.__setattr__(self, "emit", _readonly(self.emit))
        if self.pi.shape != (self.n,):
            raise ValueError(f"pi has shape {self.pi.shape}, expected ({self.n},)")
        if self.trans.shape != (self.n, self.n):
            raise ValueError(f"trans has shape {self.trans.shape}, expected ({self.n}, {self.n})")
        if self.emit.shape != (self.d, self.n, self.m):
            raise ValueError(
                f"emit has shape {self.emit.shape}, expected ({self.d}, {self.n}, {self.m})"
            )


@dataclass(frozen=True)
class ObservationSequence:
    """A length-T sequence of discrete observation steps.

    Attributes:
        steps: Integer array of shape (T, d); steps[t, r] is the symbol
            observed at time t in dimension r.
    """

    steps: np.ndarray

    def __post_init__(self):
        steps = np.array(self.steps, dtype=np.int64)
        if steps.ndim == 1:
            steps = steps[:, None]
        if steps.ndim != 2 or steps.shape[0] < 1 or steps.shape[1] < 1:
            raise ValueError(f"steps must be a (T, d) array with T, d >= 1, got shape {steps.shape}")
        if np.any(steps < 0):
            raise ValueError("symbol indices must be non-negative")
        steps.flags.writeable = False
        object.__setattr__(self, "steps", steps)

    @property
    def T(self) -> int:
        return self.steps.shape[0]

    @property
    def d(self) -> int:
        return self.steps.shape[1]

    def __len__(self) -> int:
        return self.steps.shape[0]


def validate_model(model: HmmModel) -> list[str]:
    """Check all probability constraints, returning one entry per violation.

    Three constraint families are checked: non-negativity of every entry,
    the [0, 1] probability range of every entry, and row normalization
    (sums within ``SUM_TOLERANCE`` of 1). A negative entry violates both
    the non-negativity and the range constraint, so it is reported twice.

    Returns:
        Empty list iff the model is valid; otherwise messages naming the
        offending row/entry and the deviation magnitude.
    """
    violations: list[str] = []

    def check_row(name: str, row: np.ndarray) -> None:
        for k, value in enumerate(row):
            if value < 0.0:
                violations.append(f"{name} entry {k} is negative: {value!r}")
            if value < 0.0 or value > 1.0:
                violations.append(f"{name} entry {k} outside [0, 1]: {value!r}")
        total = float(np.sum(row))
        if abs(total - 1.0) > SUM_TOLERANCE:
            violations.append(f"{name} sums to {total!r} (deviation {abs(total - 1.0):.3e})")

    check_row("pi", model.pi)
    for i in range(model.n):
        check_row(f"trans row {i}", model.trans[i])
    for r in range(model.d):
        for i in range(model.n):
            check_row(f"emit dim {r} row {i}", model.emit[r, i])
    return violations


def require_valid(model: HmmModel) -> None:
    """Raise InvalidModelError if the model violates any constraint."""
    violations = validate_model(model)
    if violations:
        raise InvalidModelError(violations)


def random_model(n: int, m: int, d: int, rng: np.random.Generator) -> HmmModel:
    """Draw a random valid model: rows uniform on (0, 1] then normalized.

    Deterministic given the generator state; n=m=d=1 collapses to the
    all-ones model.
    """
    if n < 1 or m < 1 or d < 1:
        raise ValueError(f"n, m, d must be >= 1, got n={n} m={m} d={d}")

    def rows(shape: tuple[int, ...]) -> np.ndarray:
        # 1 - U[0,1) lies in (0,1]: rows can never be all-zero.
        raw = 1.0 - rng.random(shape)
        return raw / raw.sum(axis=-1, keepdims=True)

    return HmmModel(n=n, m=m, d=d, pi=rows((n,)), trans=rows((n, n)), emit=rows((d, n, m)))


def sample_sequence(model: HmmModel, T: int, rng: np.random.Generator) -> ObservationSequence:
    """Sample a length-T observation sequence from a valid model.

    The hidden path is drawn from pi and trans; each step's d symbols are
    drawn independently per dimension from the current state's emission row.

    Raises:
        InvalidModelError: If the model violates its constraints.
        ValueError: If T < 1.
    """
    require_valid(model)
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    steps = np.empty((T, model.d), dtype=np.int64)
    state = rng.choice(model.n, p=model.pi)
    for t in range(T):
        if t > 0:
            state = rng.choice(model.n, p=model.trans[state])
        for r in range(model.d):
            steps[t, r] = rng.choice(model.m, p=model.emit[r, state])
    return ObservationSequence(steps=steps)


def check_compatible(model: HmmModel, obs: ObservationSequence) -> None:
    """Reject observation sequences whose dimensions or symbols do not fit the model."""
    if obs.d != model.d:
        raise ValueError(f"observation has {obs.d} dimensions, model expects {model.d}")
    top = int(obs.steps.max())
    if top >= model.m:
        raise ValueError(f"observation contains symbol {top}, model has only {model.m} symbols")
