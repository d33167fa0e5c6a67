"""Building blocks of a noisy duplication channel.

A channel is the composition of three independent pieces:

* a :class:`MarkovSource` producing the input states ``S_1, S_2, ...``,
* a :class:`DurationDistribution` giving the i.i.d. number of copies ``K_l``
  of each input state,
* a :class:`NoiseModel`, a discrete memoryless channel applied to every copy.

The channel mapping and the noise kernel are stored fused, as a single
emission matrix ``W[s, y]``. All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import DimensionError, RangeError, ReducibleError, RowSumError, SingularSystemError

ROW_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_rows(matrix: np.ndarray, what: str) -> np.ndarray:
    if np.any(matrix < 0) or np.any(matrix > 1 + ROW_TOL):
        raise RowSumError(f"{what} has entries outside [0, 1]")
    sums = matrix.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
    if bad.size:
        raise RowSumError(f"{what} row {bad[0]} sums to {sums[bad[0]]!r}")
    # absorb rounding so rows sum to 1 within 1e-12
    return matrix / sums[:, None]


def is_irreducible(transition: np.ndarray) -> bool:
    n_comp, _ = connected_components(np.asarray(transition) > 0, directed=True, connection="strong")
    return n_comp == 1


def stationary_vector(transition: np.ndarray) -> np.ndarray:
    """Solve ``pi P = pi`` with ``sum(pi) = 1`` appended as an extra equation."""
    P = np.asarray(transition, dtype=float)
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < n:
        raise SingularSystemError(f"stationarity system has rank {rank} < {n}")
    if np.max(np.abs(A @ pi - b)) > 1e-9:
        raise SingularSystemError("stationarity system has no consistent solution")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def entropy_bits(pmf) -> float:
    p = np.asarray(pmf, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def binary_entropy(p: float) -> float:
    return entropy_bits([p, 1.0 - p])


@dataclass(frozen=True, eq=False)
class MarkovSource:
    """Homogeneous Markov chain on a finite alphabet.

    ``transition[i, j]`` is the probability of moving from ``alphabet[i]`` to
    ``alphabet[j]``.
    """

    alphabet: tuple
    transition: np.ndarray
    initial: np.ndarray

    @property
    def size(self) -> int:
        return len(self.alphabet)

    def stationary(self) -> np.ndarray:
        return stationary_vector(self.transition)


@dataclass(frozen=True, eq=False)
class DurationDistribution:
    """Distribution of the number of copies of each input symbol."""

    support: tuple[int, ...]
    pmf: np.ndarray
    mean: float
    family: str = "custom"
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def k_min(self) -> int:
        """Smallest duration with positive probability."""
        return int(self.support[int(np.flatnonzero(self.pmf > 0)[0])])

    @property
    def k_max(self) -> int:
        """Largest duration with positive probability."""
        return int(self.support[int(np.flatnonzero(self.pmf > 0)[-1])])

    def dense_pmf(self) -> np.ndarray:
        """pmf as a vector indexed by ``k - 1`` for ``k = 1..k_max``."""
        out = np.zeros(self.k_max)
        for k, w in zip(self.support, self.pmf):
            if k <= self.k_max:
                out[k - 1] = w
        return out

    def survival(self) -> np.ndarray:
        """``P(K >= k)`` for ``k = 1..k_max``."""
        d = self.dense_pmf()
        return np.cumsum(d[::-1])[::-1]

    def hazards(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-length (extend, terminate) probabilities.

        ``terminate[k-1] = P(K = k | K >= k)`` and
        ``extend[k-1] = P(K > k | K >= k)``, both taken as ratios so that tiny
        extension probabilities do not cancel to zero. The last entry always
        terminates.
        """
        d = self.dense_pmf()
        surv = self.survival()
        beyond = np.append(surv[1:], 0.0)
        term = np.divide(d, surv, out=np.ones_like(d), where=surv > 0)
        ext = np.divide(beyond, surv, out=np.zeros_like(d), where=surv > 0)
        term[-1], ext[-1] = 1.0, 0.0
        return ext, term

    def sample_space_size(self) -> int:
        return int(np.count_nonzero(self.pmf > 0))


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Memoryless channel applied independently to every duplicated state."""

    input_alphabet: tuple
    output_alphabet: tuple
    emission: np.ndarray

    @property
    def n_outputs(self) -> int:
        return len(self.output_alphabet)


def make_markov_source(alphabet: Sequence, transition, initial=None) -> MarkovSource:
    """Validate and freeze a Markov source.

    ``initial=None`` starts the chain from its stationary distribution.
    """
    alphabet = tuple(alphabet)
    P = np.asarray(transition, dtype=float)
    n = len(alphabet)
    if P.shape != (n, n):
        raise DimensionError(f"transition shape {P.shape} does not match alphabet of size {n}")
    P = _check_rows(P, "transition")
    if not is_irreducible(P):
        raise ReducibleError("transition matrix is not irreducible")
    if initial is None:
        init = stationary_vector(P)
    else:
        init = np.asarray(initial, dtype=float)
        if init.shape != (n,):
            raise DimensionError(f"initial has shape {init.shape}, expected ({n},)")
        init = _check_rows(init[None, :], "initial")[0]
    return MarkovSource(alphabet, _frozen(P), _frozen(init))


def ber_half_source() -> MarkovSource:
    return make_markov_source((0, 1), [[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5])


def make_duration(support: Sequence[int], pmf, family: str = "custom", **params) -> DurationDistribution:
    support = tuple(int(k) for k in support)
    w = np.asarray(pmf, dtype=float)
    if w.shape != (len(support),):
        raise DimensionError("pmf and support lengths differ")
    if not support or support[0] < 1 or any(b <= a for a, b in zip(support, support[1:])):
        raise RangeError("support must be strictly increasing positive integers")
    w = _check_rows(w[None, :], "duration pmf")[0]
    mean = float(np.dot(support, w))
    return DurationDistribution(support, _frozen(w), mean, family, dict(params))


def make_bernoulli_duration(p_d: float) -> DurationDistribution:
    """One copy with probability ``1 - p_d``, two copies with probability ``p_d``."""
    if not 0.0 <= p_d <= 1.0:
        raise RangeError(f"p_d={p_d} outside [0, 1]")
    return make_duration((1, 2), [1.0 - p_d, p_d], "bernoulli", pd=p_d)


def make_geometric_duration(p_d: float, k_max: int = 15) -> DurationDistribution:
    """Geometric number of copies truncated to ``1..k_max`` and renormalized.

    ``pmf(k)`` is proportional to ``p_d**(k-1) * (1 - p_d)``.
    """
    if not 0.0 <= p_d < 1.0:
        raise RangeError(f"p_d={p_d} outside [0, 1)")
    if k_max < 1:
        raise RangeError(f"k_max={k_max} must be >= 1")
    k = np.arange(1, k_max + 1)
    w = p_d ** (k - 1) * (1.0 - p_d)
    return make_duration(tuple(k), w / w.sum(), "geometric", pd=p_d, kmax=k_max)


def make_noise(emission, input_alphabet: Sequence, output_alphabet: Sequence) -> NoiseModel:
    W = np.asarray(emission, dtype=float)
    if W.shape != (len(input_alphabet), len(output_alphabet)):
        raise DimensionError(f"emission shape {W.shape} does not match alphabets")
    W = _check_rows(W, "emission")
    return NoiseModel(tuple(input_alphabet), tuple(output_alphabet), _frozen(W))


def make_bsc_noise(p: float) -> NoiseModel:
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"crossover p={p} outside [0, 1]")
    return make_noise([[1.0 - p, p], [p, 1.0 - p]], (0, 1), (0, 1))


def check_compatible(source: MarkovSource, noise: NoiseModel) -> None:
    if tuple(source.alphabet) != tuple(noise.input_alphabet):
        raise DimensionError("source alphabet and noise input alphabet differ")


def analytic_entropy_rate(source: MarkovSource) -> float:
    """Entropy rate ``sum_s pi(s) H(P(.|s))`` of the source, in bits per symbol."""
    pi = source.stationary()
    return float(sum(pi[i] * entropy_bits(row) for i, row in enumerate(source.transition)))


def bsc_capacity(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"crossover p={p} outside [0, 1]")
    return 1.0 - binary_entropy(p)


def bsc_two_look_capacity(p: float) -> float:
    """Capacity of a BSC observed twice, independently, for each input bit.

    The channel is symmetric, so the uniform input is optimal and the
    capacity is ``H(Y1, Y2) - 2 H_b(p)``.
    """
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"crossover p={p} outside [0, 1]")
    q = 1.0 - p
    same = 0.5 * (q * q + p * p)
    return entropy_bits([same, p * q, p * q, same]) - 2.0 * binary_entropy(p)
