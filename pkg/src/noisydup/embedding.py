"""Markov embedding of the duplicated (semi-Markov) state process.

The state ``(s, k)`` means "symbol ``s`` is being repeated and the current
sample is its ``k``-th copy". From ``(s', k')`` the chain either extends the
segment to ``(s', k'+1)`` with probability ``P(K > k' | K >= k')`` or
terminates it and opens ``(s, 1)`` with probability
``P(s | s') P(K = k' | K >= k')``. This path law reproduces the generative
model exactly, so the classical HMM forward pass applies.

States are ordered symbol-major, then by ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import RowSumError
from .model import (
    DurationDistribution,
    MarkovSource,
    NoiseModel,
    check_compatible,
    is_irreducible,
    stationary_vector,
)


@dataclass(frozen=True, eq=False)
class EmbeddedChain:
    states: tuple[tuple[int, int], ...]
    transition: np.ndarray
    emission: np.ndarray
    start: np.ndarray
    source: MarkovSource
    duration: DurationDistribution

    @property
    def n_states(self) -> int:
        return len(self.states)

    def index(self, s: int, k: int) -> int:
        return self.states.index((s, k))

    def row_sum_error(self) -> float:
        return float(np.max(np.abs(self.transition.sum(axis=1) - 1.0)))

    def csr(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(self.transition)


@dataclass(frozen=True, eq=False)
class StationaryAnalysis:
    pi: np.ndarray
    segment_start_mass: float
    expected_duration_check: float
    renewal_form: np.ndarray

    @property
    def renewal_gap(self) -> float:
        """Largest deviation between the solved ``pi`` and ``pi_S(s) P(K>=k) / E[K]``."""
        return float(np.max(np.abs(self.pi - self.renewal_form)))


def build_embedded_chain(
    source: MarkovSource,
    duration: DurationDistribution,
    noise: NoiseModel,
    *,
    literal_first_case: bool = False,
) -> EmbeddedChain:
    """Embedded chain on ``(s, k)`` pairs with ``k`` up to the largest possible duration.

    ``literal_first_case`` uses ``P(s|s') P(K=1)`` as the terminating
    probability for every ``k'`` (and the unshifted survival ratio for
    extending); the result is generally not row-stochastic and exists only as
    a negative control for verification.
    """
    check_compatible(source, noise)
    n_sym = source.size
    k_max = duration.k_max
    extend, terminate = duration.hazards()
    if literal_first_case:
        # terminate w.p. P(s|s') P(K=1); extend w.p. P(K > k'+1 | K > k')
        terminate = np.full(k_max, duration.dense_pmf()[0])
        gt = np.append(duration.survival()[1:], 0.0)  # P(K > k)
        extend = np.divide(np.append(gt[1:], 0.0), gt, out=np.zeros(k_max), where=gt > 0)
    states = tuple((s, k) for s in range(n_sym) for k in range(1, k_max + 1))
    n = len(states)
    T = np.zeros((n, n))
    for i, (s, k) in enumerate(states):
        if k < k_max:
            T[i, i + 1] = extend[k - 1]
        for s2 in range(n_sym):
            T[i, s2 * k_max] += source.transition[s, s2] * terminate[k - 1]
    if not literal_first_case:
        err = np.max(np.abs(T.sum(axis=1) - 1.0))
        if err > 1e-12:
            raise RowSumError(f"embedded transition rows off by {err}")
        T /= T.sum(axis=1, keepdims=True)
    B = np.repeat(noise.emission, k_max, axis=0)
    start = np.zeros(n)
    start[::k_max] = source.initial
    for a in (T, B, start):
        a.setflags(write=False)
    return EmbeddedChain(states, T, B, start, source, duration)


def stationary_distribution(chain: EmbeddedChain) -> StationaryAnalysis:
    pi = stationary_vector(chain.transition)
    seg_start = float(sum(pi[i] for i, (_, k) in enumerate(chain.states) if k == 1))
    pi_s = chain.source.stationary()
    surv = chain.duration.survival()
    renewal = np.array([pi_s[s] * surv[k - 1] / chain.duration.mean for s, k in chain.states])
    return StationaryAnalysis(pi, seg_start, 1.0 / seg_start, renewal)


def chain_is_irreducible(chain: EmbeddedChain) -> bool:
    return is_irreducible(chain.transition)


def format_matrix(chain: EmbeddedChain, precision: int = 17) -> str:
    """Row-per-line dump of the transition matrix with a state-label header."""
    labels = " ".join(f"({s},{k})" for s, k in chain.states)
    rows = [" ".join(f"{x:.{precision}g}" for x in row) for row in chain.transition]
    return f"# states: {labels}\n" + "\n".join(rows) + "\n"


def parse_matrix(text: str) -> tuple[list[tuple[int, int]], np.ndarray]:
    lines = text.strip().splitlines()
    header = lines[0]
    if not header.startswith("# states:"):
        raise ValueError("missing '# states:' header")
    states = []
    for tok in header.split(":", 1)[1].split():
        s, k = tok.strip("()").split(",")
        states.append((int(s), int(k)))
    return states, np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
