"""Constrained particle swarm optimizer over flattened HMM parameters.

A particle's position is the flat vector [pi | trans rows | emission rows
per dimension]; plain swarm dynamics would leave the probability simplices,
so every move is followed by a two-stage repair: a reflecting re-mapping
into the [0, 1] box, then per-row re-normalization. The velocity is then
re-synchronized to the displacement actually realized, keeping the swarm's
memory consistent with where particles ended up.
"""

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .model import HmmModel, ObservationSequence, random_model, require_valid
from .likelihood import forward_log_likelihood

LOWER_BOUND = 0.0
UPPER_BOUND = 1.0

# Namespace tag mixed into seed derivation so swarm streams never collide
# with other seeded subsystems (e.g. dataset generation) using the same seed.
_STREAM_TAG = 0x50534F

# Reflection contracts the violation by a uniform factor each pass, so this
# cap is only reachable on a measure-zero run of draws; clamping ends it.
MAX_REPAIR_PASSES = 100


@dataclass
class SwarmConfig:
    """Swarm hyperparameters.

    Attributes:
        particle_count: Swarm size.
        iterations: Update sweeps over the swarm.
        omega: Inertia weight on the previous velocity.
        c1: Pull toward the particle's personal best.
        c2: Pull toward the social best.
        topology: "global" (one swarm-wide best) or "ring" (best within a
            neighborhood of +-neighborhood_k indices).
        neighborhood_k: Ring radius; ignored for the global topology.
        seed: Root seed; every particle derives its own stream from it.
    """

    particle_count: int = 25
    iterations: int = 10
    omega: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    topology: str = "global"
    neighborhood_k: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.particle_count < 1:
            raise ValueError(f"particle_count must be >= 1, got {self.particle_count}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.omega < 0 or self.c1 < 0 or self.c2 < 0:
            raise ValueError("omega, c1, c2 must be non-negative")
        if self.topology not in ("global", "ring"):
            raise ValueError(f"topology must be 'global' or 'ring', got {self.topology!r}")
        if self.topology == "ring" and self.neighborhood_k < 1:
            raise ValueError(f"neighborhood_k must be >= 1, got {self.neighborhood_k}")

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "SwarmConfig":
        """Build a config from the documented key-value schema (unknown keys ignored)."""
        kwargs = {}
        renames = {"particles": "particle_count"}
        fields = {
            "particles", "iterations", "omega", "c1", "c2",
            "topology", "neighborhood_k", "seed",
        }
        for key, value in mapping.items():
            if key in fields:
                kwargs[renames.get(key, key)] = value
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return {
            "particles": self.particle_count,
            "iterations": self.iterations,
            "omega": self.omega,
            "c1": self.c1,
            "c2": self.c2,
            "topology": self.topology,
            "neighborhood_k": self.neighborhood_k,
            "seed": self.seed,
        }


@dataclass
class Particle:
    """Current state and personal-best record of one particle."""

    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float


@dataclass
class ParticleUpdate:
    """One particle's move within an iteration, kept for inspection."""

    old_position: np.ndarray
    raw_position: np.ndarray
    repaired_position: np.ndarray
    velocity: np.ndarray


@dataclass
class FitnessTrace:
    """Per-iteration swarm summaries; index 0 is the initialized swarm.

    ``gbest_loglik`` is the swarm-wide best personal-best fitness and never
    decreases. ``mean_pbest_gap`` is the mean of (gbest - pbest) over
    particles, the quantity that shrinks as the swarm converges.
    """

    gbest_loglik: list[float] = field(default_factory=list)
    mean_pbest_gap: list[float] = field(default_factory=list)


def dimension(n: int, m: int, d: int) -> int:
    """Length of the flattened parameter vector: n + n**2 + d*n*m."""
    return n + n * n + d * n * m


def encode(model: HmmModel) -> np.ndarray:
    """Flatten a model into a position vector.

    Layout: pi (n entries), then trans in row-major order (n*n), then each
    dimension's emission matrix in row-major order (n*m each).
    """
    require_valid(model)
    return np.concatenate([model.pi, model.trans.ravel(), model.emit.ravel()])


def decode(position: np.ndarray, n: int, m: int, d: int) -> HmmModel:
    """Rebuild the model from a repaired position vector.

    Raises:
        ValueError: If the vector length does not match (n, m, d).
        InvalidModelError: If the position is not feasible (out of bounds
            or rows not normalized), i.e. repair has not been applied.
    """
    position = np.asarray(position, dtype=float)
    expected = dimension(n, m, d)
    if position.shape != (expected,):
        raise ValueError(f"position has shape {position.shape}, expected ({expected},)")
    pi = position[:n]
    trans = position[n : n + n * n].reshape(n, n)
    emit = position[n + n * n :].reshape(d, n, m)
    model = HmmModel(n=n, m=m, d=d, pi=pi, trans=trans, emit=emit)
    require_valid(model)
    return model


def velocity_update(
    particle: Particle, social_best: np.ndarray, cfg: SwarmConfig, rng: np.random.Generator
) -> np.ndarray:
    """Inertia plus randomly weighted pulls toward personal and social bests.

    The random weights are drawn per component, first the personal-best
    vector then the social-best vector, from ``rng``.
    """
    size = particle.position.shape[0]
    xi1 = rng.random(size)
    xi2 = rng.random(size)
    return (
        cfg.omega * particle.velocity
        + cfg.c1 * xi1 * (particle.pbest_position - particle.position)
        + cfg.c2 * xi2 * (social_best - particle.position)
    )


def position_update(position: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    """Entrywise move; the result may leave [0, 1] and awaits repair."""
    return position + velocity


def remap_repair(raw: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Reflect out-of-bounds entries back into [0, 1].

    An entry v above the upper bound U becomes U - xi*(v - U); one below the
    lower bound L becomes L + xi*(L - v), with xi drawn fresh and uniform on
    [0, 1] per offending entry. A single reflection can overshoot the other
    bound when the violation exceeds the box width, so passes repeat (above-
    bound entries first, in index order) until all entries are feasible,
    with a clamp after ``MAX_REPAIR_PASSES``. In-bounds entries pass through
    untouched.
    """
    values = np.array(raw, dtype=float)
    for _ in range(MAX_REPAIR_PASSES):
        high = values > UPPER_BOUND
        low = values < LOWER_BOUND
        if not high.any() and not low.any():
            return values
        if high.any():
            xi = rng.random(int(high.sum()))
            values[high] = UPPER_BOUND - xi * (values[high] - UPPER_BOUND)
        if low.any():
            xi = rng.random(int(low.sum()))
            values[low] = LOWER_BOUND + xi * (LOWER_BOUND - values[low])
    return np.clip(values, LOWER_BOUND, UPPER_BOUND)


def renormalize(position: np.ndarray, n: int, m: int, d: int) -> np.ndarray:
    """Rescale each logical block row to sum 1.

    Assumes entries already lie in [0, 1] (run after ``remap_repair``).
    The pi block and every trans/emit row are divided by their sums;
    a row that sums to zero is reset to uniform.
    """
    values = np.array(position, dtype=float)

    def fix(block: np.ndarray) -> None:
        for row in block:
            total = row.sum()
            if total <= 0.0:
                row[:] = 1.0 / row.shape[0]
            else:
                row /= total

    fix(values[:n].reshape(1, n))
    fix(values[n : n + n * n].reshape(n, n))
    fix(values[n + n * n :].reshape(d * n, m))
    return values


def velocity_resync(old_position: np.ndarray, repaired_position: np.ndarray) -> np.ndarray:
    """Velocity consistent with the realized move: repaired - old.

    Consistency is exact: ``position_update(old, v) == repaired`` entry for
    entry. Floating-point subtraction alone can land one ulp off at
    round-to-even ties, so entries where the plain difference would not
    reconstruct the repaired position are nudged by single ulps until it
    does (at most one ulp of adjustment in practice).
    """
    velocity = repaired_position - old_position
    for _ in range(8):
        rebuilt = old_position + velocity
        off = rebuilt != repaired_position
        if not off.any():
            break
        direction = np.where(rebuilt[off] < repaired_position[off], np.inf, -np.inf)
        velocity[off] = np.nextafter(velocity[off], direction)
    return velocity


def fitness(position: np.ndarray, obs: ObservationSequence, n: int, m: int, d: int) -> float:
    """Log-likelihood of ``obs`` under the decoded position.

    Log space is a strictly monotone transform of the raw sequence
    probability, so best-position selection is unchanged while fitness
    stays finite at any sequence length.
    """
    return forward_log_likelihood(decode(position, n, m, d), obs)


def _social_bests(particles: list[Particle], cfg: SwarmConfig) -> list[np.ndarray]:
    """Per-particle attraction target from the personal-best snapshot."""
    pbest_fits = np.array([p.pbest_fitness for p in particles])
    if cfg.topology == "global":
        best = particles[int(np.argmax(pbest_fits))].pbest_position
        return [best] * len(particles)
    count = len(particles)
    targets = []
    for i in range(count):
        hood = [(i + j) % count for j in range(-cfg.neighborhood_k, cfg.neighborhood_k + 1)]
        winner = hood[int(np.argmax(pbest_fits[hood]))]
        targets.append(particles[winner].pbest_position)
    return targets


IterationObserver = Callable[[int, Sequence[Particle], Sequence[ParticleUpdate]], None]


def pso_train(
    obs: ObservationSequence,
    n: int,
    m: int,
    d: int,
    cfg: SwarmConfig,
    on_iteration: IterationObserver | None = None,
) -> tuple[HmmModel, FitnessTrace]:
    """Maximize the observation log-likelihood with the constrained swarm.

    The swarm starts from ``particle_count`` independent random valid
    models with zero velocities. Each iteration moves every particle
    through velocity update, position update, re-mapping repair,
    re-normalization, velocity re-sync, and fitness evaluation, then
    refreshes the personal/social bests. Social bests are taken from the
    snapshot at the start of the iteration, and each particle consumes
    only its own seed-derived random stream, so results do not depend on
    evaluation order.

    Args:
        obs: Training sequence; must have ``d`` dimensions.
        n, m, d: Model shape to optimize over.
        cfg: Swarm hyperparameters, including the root seed.
        on_iteration: Optional inspection hook, called with
            (iteration, particles, updates) after initialization
            (iteration 0, no updates) and after every sweep.

    Returns:
        (best model, trace): the decoded best personal-best position ever
        seen, and the per-iteration fitness trace (``iterations + 1``
        entries, the initialized swarm first).
    """
    if obs.d != d:
        raise ValueError(f"observation has {obs.d} dimensions, expected {d}")
    streams = [
        np.random.default_rng(child)
        for child in np.random.SeedSequence([cfg.seed, _STREAM_TAG]).spawn(cfg.particle_count)
    ]
    particles: list[Particle] = []
    for rng in streams:
        position = encode(random_model(n, m, d, rng))
        particles.append(
            Particle(
                position=position,
                velocity=np.zeros_like(position),
                pbest_position=position,
                pbest_fitness=fitness(position, obs, n, m, d),
            )
        )

    trace = FitnessTrace()

    def record() -> None:
        fits = np.array([p.pbest_fitness for p in particles])
        best = float(fits.max())
        trace.gbest_loglik.append(best)
        trace.mean_pbest_gap.append(float(np.mean(best - fits)))

    record()
    if on_iteration is not None:
        on_iteration(0, particles, [])

    for iteration in range(1, cfg.iterations + 1):
        targets = _social_bests(particles, cfg)
        updates: list[ParticleUpdate] = []
        for particle, target, rng in zip(particles, targets, streams):
            velocity = velocity_update(particle, target, cfg, rng)
            raw = position_update(particle.position, velocity)
            repaired = renormalize(remap_repair(raw, rng), n, m, d)
            velocity = velocity_resync(particle.position, repaired)
            updates.append(
                ParticleUpdate(
                    old_position=particle.position,
                    raw_position=raw,
                    repaired_position=repaired,
                    velocity=velocity,
                )
            )
            fit = fitness(repaired, obs, n, m, d)
            particle.position = repaired
            particle.velocity = velocity
            if fit > particle.pbest_fitness:
                particle.pbest_fitness = fit
                particle.pbest_position = repaired
        record()
        if on_iteration is not None:
            on_iteration(iteration, particles, updates)

    best = particles[int(np.argmax([p.pbest_fitness for p in particles]))]
    return decode(best.pbest_position, n, m, d), trace
