"""Log-probabilities of source, output and joint sequences by dynamic programming.

Three recursions are provided:

* :func:`forward_log_prob_embedded` runs the classical scaled HMM forward pass
  on the embedded chain. It gives ``P(Y_1^t)`` for a length-``t`` window of
  the output process, whatever the number of segments behind it.
* :func:`forward_log_prob_conditional` gives ``P(Y | S)`` where ``Y`` is the
  complete output of ``len(S)`` channel uses, marginalizing the durations.
* :func:`exact_log_prob_output_constrained` gives ``P(Y_1^{T_m} = y)`` with the
  segment count fixed at ``m``, marginalizing both inputs and durations.

The two segment-aware recursions accept ``prune``: states whose share of the
normalized forward mass drops below it are discarded. ``prune=0`` is exact.
All log-probabilities are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .embedding import EmbeddedChain
from .errors import LengthError, ZeroProbabilityError
from .model import DurationDistribution, MarkovSource, NoiseModel, check_compatible


@dataclass(frozen=True)
class ForwardResult:
    """``log_prob`` in bits; ``per_step_log_normalizers`` is kept on request.

    For the segment-aware recursions the normalizer sequence has one more
    entry than ``steps``: the final factor that closes the last segment.
    """

    log_prob: float
    steps: int
    per_step_log_normalizers: Optional[np.ndarray] = None


def _as_index_array(seq) -> np.ndarray:
    a = np.ascontiguousarray(seq, dtype=np.int64)
    if a.ndim != 1 or a.size == 0:
        raise LengthError("sequence must be one-dimensional and nonempty")
    return a


def _result(log_prob, fail, norms, steps, keep, what) -> ForwardResult:
    if fail >= 0:
        raise ZeroProbabilityError(f"{what} has probability zero (mass vanished at step {fail})")
    return ForwardResult(float(log_prob), steps, norms if keep else None)


def feasible_band(duration: DurationDistribution, m: int) -> tuple[int, int]:
    return m * duration.k_min, m * duration.k_max


def _check_band(duration: DurationDistribution, m: int, t: int) -> None:
    lo, hi = feasible_band(duration, m)
    if not lo <= t <= hi:
        raise LengthError(f"output length {t} outside feasible band [{lo}, {hi}] for m={m}")


def log_prob_source(source: MarkovSource, s_seq: Sequence[int]) -> ForwardResult:
    s = _as_index_array(s_seq)
    factors = np.concatenate(([source.initial[s[0]]], source.transition[s[:-1], s[1:]]))
    if np.any(factors <= 0):
        raise ZeroProbabilityError("source sequence has probability zero")
    return ForwardResult(float(np.log2(factors).sum()), int(s.size))


def forward_log_prob_embedded(
    chain: EmbeddedChain, y_seq: Sequence[int], keep_normalizers: bool = False
) -> ForwardResult:
    y = _as_index_array(y_seq)
    csr = chain.csr()
    lp, fail, norms = _kernels.forward_csr(
        csr.indptr.astype(np.int64),
        csr.indices.astype(np.int64),
        csr.data.astype(np.float64),
        np.ascontiguousarray(chain.emission),
        np.ascontiguousarray(chain.start),
        y,
        keep_normalizers,
    )
    return _result(lp, fail, norms, int(y.size), keep_normalizers, "output sequence")


def forward_log_prob_conditional(
    s_seq: Sequence[int],
    duration: DurationDistribution,
    noise: NoiseModel,
    y_seq: Sequence[int],
    prune: float = 0.0,
    keep_normalizers: bool = False,
) -> ForwardResult:
    """``log2 P(Y_1^{T_m} = y | S_1^m = s)`` summed over all duration vectors."""
    s = _as_index_array(s_seq)
    y = np.asarray(y_seq)
    _check_band(duration, s.size, y.size)
    y = _as_index_array(y)
    extend, terminate = duration.hazards()
    lp, fail, norms = _kernels.conditional_forward(
        s, extend, terminate, np.ascontiguousarray(noise.emission), y,
        duration.k_min, float(prune), keep_normalizers,
    )
    return _result(lp, fail, norms, int(y.size), keep_normalizers, "output given input")


def exact_log_prob_output_constrained(
    source: MarkovSource,
    duration: DurationDistribution,
    noise: NoiseModel,
    m: int,
    y_seq: Sequence[int],
    prune: float = 0.0,
    keep_normalizers: bool = False,
) -> ForwardResult:
    """``log2 P(Y_1^{T_m} = y)`` with exactly ``m`` segments, inputs marginalized.

    Cost is ``O(|y| * m * |Omega|^2 * k_max)`` without pruning.
    """
    check_compatible(source, noise)
    y = np.asarray(y_seq)
    _check_band(duration, m, y.size)
    y = _as_index_array(y)
    extend, terminate = duration.hazards()
    lp, fail, norms = _kernels.constrained_forward(
        np.ascontiguousarray(source.transition), np.ascontiguousarray(source.initial),
        extend, terminate, np.ascontiguousarray(noise.emission), y,
        int(m), duration.k_min, float(prune), keep_normalizers,
    )
    return _result(lp, fail, norms, int(y.size), keep_normalizers, "output sequence")


def direct_log_prob_embedded(chain: EmbeddedChain, y_seq: Sequence[int]) -> float:
    """Unscaled forward pass; underflows for long sequences, used as a cross-check."""
    y = _as_index_array(y_seq)
    alpha = chain.start * chain.emission[:, y[0]]
    for yt in y[1:]:
        alpha = (alpha @ chain.transition) * chain.emission[:, yt]
    total = alpha.sum()
    if total <= 0:
        raise ZeroProbabilityError("output sequence has probability zero")
    return float(np.log2(total))


from .enumeration import (  # noqa: E402  re-exported oracles
    brute_force_output_marginal,
    brute_force_conditional,
    exact_block_entropies,
    format_table,
)

__all__ = [
    "ForwardResult",
    "feasible_band",
    "log_prob_source",
    "forward_log_prob_embedded",
    "forward_log_prob_conditional",
    "exact_log_prob_output_constrained",
    "direct_log_prob_embedded",
    "brute_force_output_marginal",
    "brute_force_conditional",
    "exact_block_entropies",
    "format_table",
]
