"""Sequence likelihood evaluation and decoding.

``forward_log_likelihood`` is the production path: the forward recursion
with per-step scaling, exact in log space at any sequence length.
``brute_force_log_likelihood`` evaluates the same quantity by enumerating
all n**T hidden paths and exists as an independent cross-check for small
instances.
"""

import itertools

import numpy as np

from .model import HmmModel, ObservationSequence, check_compatible, require_valid

# Enumeration guard: refuse instances with more than this many hidden paths.
MAX_BRUTE_FORCE_PATHS = 10**6


def emission_probs(model: HmmModel, obs: ObservationSequence) -> np.ndarray:
    """Per-step emission probabilities, shape (T, n).

    Entry [t, i] is the product over dimensions r of emit[r, i, obs[t, r]].
    """
    T = obs.T
    probs = np.ones((T, model.n))
    for r in range(model.d):
        probs *= model.emit[r][:, obs.steps[:, r]].T
    return probs


def forward_log_likelihood(model: HmmModel, obs: ObservationSequence) -> float:
    """Log-probability of the observation sequence under the model.

    Uses the scaled forward recursion: each step's state distribution is
    renormalized and the log of the normalizer accumulated, so the result
    does not underflow at large T.

    Returns:
        ln P(obs | model), or -inf when every hidden path has probability 0.
    """
    require_valid(model)
    check_compatible(model, obs)
    b = emission_probs(model, obs)

    alpha = model.pi * b[0]
    log_likelihood = 0.0
    for t in range(obs.T):
        if t > 0:
            alpha = (alpha @ model.trans) * b[t]
        total = alpha.sum()
        if total <= 0.0:
            return float("-inf")
        log_likelihood += np.log(total)
        alpha = alpha / total
    return float(log_likelihood)


def brute_force_log_likelihood(model: HmmModel, obs: ObservationSequence) -> float:
    """Log-likelihood by direct summation over every hidden state path.

    For each of the n**T paths (q_1, ..., q_T) the joint probability
    pi[q_1] * b[q_1](o_1) * a[q_1, q_2] * b[q_2](o_2) * ... is accumulated.
    Exact up to floating point; intended as a test oracle.

    Raises:
        ValueError: If n**T exceeds ``MAX_BRUTE_FORCE_PATHS``.
    """
    require_valid(model)
    check_compatible(model, obs)
    if model.n**obs.T > MAX_BRUTE_FORCE_PATHS:
        raise ValueError(
            f"{model.n}**{obs.T} hidden paths exceed the enumeration guard "
            f"of {MAX_BRUTE_FORCE_PATHS}"
        )
    b = emission_probs(model, obs)

    total = 0.0
    for path in itertools.product(range(model.n), repeat=obs.T):
        p = model.pi[path[0]] * b[0, path[0]]
        for t in range(1, obs.T):
            p *= model.trans[path[t - 1], path[t]] * b[t, path[t]]
        total += p
    if total <= 0.0:
        return float("-inf")
    return float(np.log(total))


def viterbi_decode(model: HmmModel, obs: ObservationSequence) -> tuple[np.ndarray, float]:
    """Most probable hidden state path and its log joint probability.

    Ties are broken toward the lower state index at every step, so the
    result is deterministic.

    Returns:
        (path, log_prob) where path has shape (T,) and log_prob is
        ln P(obs, path | model), -inf when no path has positive probability.
    """
    require_valid(model)
    check_compatible(model, obs)
    with np.errstate(divide="ignore"):
        log_b = np.log(emission_probs(model, obs))
        log_pi = np.log(model.pi)
        log_trans = np.log(model.trans)

    T, n = obs.T, model.n
    delta = log_pi + log_b[0]
    back = np.zeros((T, n), dtype=np.int64)
    for t in range(1, T):
        # scores[i, j]: best path ending in i extended to j; argmax picks
        # the first (lowest-index) maximizer.
        scores = delta[:, None] + log_trans
        back[t] = np.argmax(scores, axis=0)
        delta = scores[back[t], np.arange(n)] + log_b[t]

    path = np.empty(T, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, float(delta[path[-1]])
