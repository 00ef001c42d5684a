"""Linear-chain CRF: log-likelihood, forward/backward marginals, Viterbi.

Scores a tag path y over emissions e as

    start[y_0] + sum_t e[t, y_t] + sum_t trans[y_{t-1}, y_t] + end[y_{L-1}]

with the log-partition computed by the forward algorithm in log space.
All arrays are float64; functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError


@dataclass
class CrfTransitions:
    """Transition scores: matrix[i, j] scores tag i followed by tag j."""

    matrix: np.ndarray  # (T, T)
    start: np.ndarray  # (T,)
    end: np.ndarray  # (T,)

    def __post_init__(self) -> None:
        t = self.matrix.shape[0]
        if self.matrix.shape != (t, t) or self.start.shape != (t,) or self.end.shape != (t,):
            raise ContractError(
                f"inconsistent CRF shapes: {self.matrix.shape}, {self.start.shape}, {self.end.shape}"
            )

    @property
    def n_tags(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def zeros(cls, n_tags: int) -> "CrfTransitions":
        return cls(
            matrix=np.zeros((n_tags, n_tags)),
            start=np.zeros(n_tags),
            end=np.zeros(n_tags),
        )


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def _check(emissions: np.ndarray, transitions: CrfTransitions) -> None:
    if emissions.ndim != 2:
        raise ContractError(f"emissions must be 2-d, got shape {emissions.shape}")
    if emissions.shape[1] != transitions.n_tags:
        raise ContractError(
            f"emissions width {emissions.shape[1]} != tag count {transitions.n_tags}"
        )
    if not (np.isfinite(emissions).all() and np.isfinite(transitions.matrix).all()
            and np.isfinite(transitions.start).all() and np.isfinite(transitions.end).all()):
        raise FloatingPointError("non-finite values in CRF inputs")


def path_score(emissions: np.ndarray, transitions: CrfTransitions, tags: np.ndarray) -> float:
    tags = np.asarray(tags, dtype=np.int64)
    score = float(transitions.start[tags[0]] + emissions[0, tags[0]])
    for t in range(1, len(tags)):
        score += float(transitions.matrix[tags[t - 1], tags[t]] + emissions[t, tags[t]])
    score += float(transitions.end[tags[-1]])
    return score


def log_partition(emissions: np.ndarray, transitions: CrfTransitions) -> float:
    """Forward algorithm in log space."""
    _check(emissions, transitions)
    if emissions.shape[0] == 0:
        raise ContractError("log_partition needs at least one emission row")
    alpha = transitions.start + emissions[0]
    for t in range(1, emissions.shape[0]):
        alpha = _logsumexp(alpha[:, None] + transitions.matrix, axis=0) + emissions[t]
    return float(_logsumexp(alpha + transitions.end, axis=0))


def crf_log_likelihood(
    emissions: np.ndarray,
    transitions: CrfTransitions,
    gold_tags: np.ndarray,
) -> float:
    """log P(gold | emissions) = score(gold) - log-partition; always <= 0."""
    gold = np.asarray(gold_tags, dtype=np.int64)
    if len(gold) != emissions.shape[0]:
        raise ContractError(
            f"gold length {len(gold)} != emission rows {emissions.shape[0]}"
        )
    if len(gold) == 0:
        raise ContractError("empty tag sequence")
    if gold.min() < 0 or gold.max() >= transitions.n_tags:
        raise ContractError("gold tag id out of range")
    return path_score(emissions, transitions, gold) - log_partition(emissions, transitions)


def crf_nll_and_grads(
    emissions: np.ndarray,
    transitions: CrfTransitions,
    gold_tags: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Negative log-likelihood and its gradients via forward-backward.

    Returns (nll, d_emissions, d_matrix, d_start, d_end) where each gradient
    is expectation-minus-observation: for example d_emissions[t, k] =
    P(y_t = k) - 1[gold_t = k].
    """
    _check(emissions, transitions)
    gold = np.asarray(gold_tags, dtype=np.int64)
    length, n_tags = emissions.shape
    if len(gold) != length or length == 0:
        raise ContractError(f"gold length {len(gold)} != emission rows {length}")

    # forward
    alphas = np.empty((length, n_tags))
    alphas[0] = transitions.start + emissions[0]
    for t in range(1, length):
        alphas[t] = _logsumexp(alphas[t - 1][:, None] + transitions.matrix, axis=0) + emissions[t]
    log_z = float(_logsumexp(alphas[-1] + transitions.end, axis=0))

    # backward
    betas = np.empty((length, n_tags))
    betas[-1] = transitions.end
    for t in range(length - 2, -1, -1):
        betas[t] = _logsumexp(
            transitions.matrix + (emissions[t + 1] + betas[t + 1])[None, :], axis=1
        )

    # unary marginals P(y_t = k)
    gamma = np.exp(alphas + betas - log_z)
    d_em = gamma.copy()
    d_em[np.arange(length), gold] -= 1.0

    # pairwise marginals P(y_t = i, y_{t+1} = j)
    d_matrix = np.zeros_like(transitions.matrix)
    for t in range(length - 1):
        xi = np.exp(
            alphas[t][:, None]
            + transitions.matrix
            + (emissions[t + 1] + betas[t + 1])[None, :]
            - log_z
        )
        d_matrix += xi
    for t in range(length - 1):
        d_matrix[gold[t], gold[t + 1]] -= 1.0

    d_start = np.exp(alphas[0] + betas[0] - log_z)
    d_start[gold[0]] -= 1.0
    d_end = np.exp(alphas[-1] + transitions.end - log_z)
    d_end[gold[-1]] -= 1.0

    nll = log_z - path_score(emissions, transitions, gold)
    return nll, d_em, d_matrix, d_start, d_end


def viterbi(
    emissions: np.ndarray,
    transitions: CrfTransitions,
) -> tuple[list[int], float]:
    """Exact argmax decoding; ties break toward the lower tag id.

    Returns (tag id sequence, path score).
    """
    _check(emissions, transitions)
    length = emissions.shape[0]
    if length == 0:
        raise ContractError("viterbi needs at least one emission row")
    delta = transitions.start + emissions[0]
    backptr = np.empty((length, transitions.n_tags), dtype=np.int64)
    for t in range(1, length):
        scores = delta[:, None] + transitions.matrix  # (from, to)
        backptr[t] = np.argmax(scores, axis=0)  # argmax picks the lowest id on ties
        delta = scores[backptr[t], np.arange(transitions.n_tags)] + emissions[t]
    final = delta + transitions.end
    last = int(np.argmax(final))
    best_score = float(final[last])
    path = [last]
    for t in range(length - 1, 0, -1):
        last = int(backptr[t, last])
        path.append(last)
    path.reverse()
    return path, best_score
