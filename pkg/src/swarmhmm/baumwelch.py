"""Baum-Welch (EM) re-estimation for discrete HMMs.

Each step runs the scaled forward-backward pass, then re-estimates pi,
trans, and the per-dimension emission matrices from the state and
transition posteriors. The observation log-likelihood never decreases
across a step.
"""

import numpy as np

from .model import HmmModel, ObservationSequence, check_compatible, require_valid
from .likelihood import emission_probs, forward_log_likelihood


class DegenerateInputError(ValueError):
    """The model assigns probability zero to the observations; posteriors are undefined."""


def _normalized_or_uniform(row_counts: np.ndarray) -> np.ndarray:
    """Rows scaled to sum 1; rows with no posterior mass reset to uniform."""
    out = np.empty_like(row_counts)
    width = row_counts.shape[-1]
    for i, row in enumerate(row_counts):
        total = row.sum()
        if total <= 0.0:
            out[i] = 1.0 / width
        else:
            out[i] = row / total
    return out


def _em_step(model: HmmModel, obs: ObservationSequence) -> tuple[HmmModel, float]:
    """One EM update. Returns (updated model, log-likelihood of the input model)."""
    require_valid(model)
    check_compatible(model, obs)
    T, n = obs.T, model.n
    b = emission_probs(model, obs)

    # Scaled forward pass; scale[t] is the per-step normalizer. The
    # accumulation order matches forward_log_likelihood bit for bit.
    ahat = np.empty((T, n))
    scale = np.empty(T)
    log_likelihood = 0.0
    alpha = model.pi * b[0]
    for t in range(T):
        if t > 0:
            alpha = (ahat[t - 1] @ model.trans) * b[t]
        scale[t] = alpha.sum()
        if scale[t] <= 0.0:
            raise DegenerateInputError(
                f"observations have probability 0 under the model (first dead end at step {t})"
            )
        log_likelihood += np.log(scale[t])
        ahat[t] = alpha / scale[t]
    log_likelihood = float(log_likelihood)

    # Backward pass under the same scaling, so gamma = ahat * bhat directly.
    bhat = np.empty((T, n))
    bhat[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        bhat[t] = (model.trans @ (b[t + 1] * bhat[t + 1])) / scale[t + 1]

    gamma = ahat * bhat

    # Transition posteriors summed over t: xi_sum[i, j] = sum_t P(q_t=i, q_t+1=j | obs).
    xi_sum = np.zeros((n, n))
    for t in range(T - 1):
        xi_sum += (ahat[t][:, None] * model.trans) * (b[t + 1] * bhat[t + 1])[None, :] / scale[t + 1]

    new_pi = gamma[0] / gamma[0].sum()
    new_trans = _normalized_or_uniform(xi_sum)

    new_emit = np.empty_like(model.emit)
    for r in range(model.d):
        counts = np.zeros((n, model.m))
        for k in range(model.m):
            mask = obs.steps[:, r] == k
            counts[:, k] = gamma[mask].sum(axis=0)
        new_emit[r] = _normalized_or_uniform(counts)

    updated = HmmModel(n=n, m=model.m, d=model.d, pi=new_pi, trans=new_trans, emit=new_emit)
    return updated, log_likelihood


def baum_welch_step(model: HmmModel, obs: ObservationSequence) -> HmmModel:
    """Apply one Baum-Welch re-estimation step.

    Returns:
        A valid model whose log-likelihood on ``obs`` is at least that of
        the input model (up to roundoff).

    Raises:
        DegenerateInputError: If the observations have probability 0, in
            which case the posteriors (and hence the update) are undefined.
    """
    return _em_step(model, obs)[0]


def baum_welch_train(
    model: HmmModel, obs: ObservationSequence, iterations: int
) -> tuple[HmmModel, list[float]]:
    """Run ``iterations`` Baum-Welch steps from the given starting model.

    Returns:
        (trained model, trace) where trace holds ``iterations + 1``
        log-likelihoods: the starting model's first, then one per step.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    trace: list[float] = []
    current = model
    for _ in range(iterations):
        current, log_likelihood = _em_step(current, obs)
        trace.append(log_likelihood)
    trace.append(forward_log_likelihood(current, obs))
    return current, trace
