"""Exhaustive-enumeration oracles for small channel instances.

Everything here follows the generative description directly (draw states,
draw durations, repeat, add noise) and never touches the embedded chain or
the forward recursions, so it can be used to validate both.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator

import numpy as np

from .errors import TooLargeError, ZeroProbabilityError
from .model import DurationDistribution, MarkovSource, NoiseModel, check_compatible, entropy_bits

MAX_TERMS = 1_000_000


def _guard(n_terms: int, what: str) -> None:
    if n_terms > MAX_TERMS:
        raise TooLargeError(f"{what} needs {n_terms} terms (limit {MAX_TERMS})")


def _durations(duration: DurationDistribution) -> list[tuple[int, float]]:
    return [(k, float(w)) for k, w in zip(duration.support, duration.pmf) if w > 0]


def _source_paths(source: MarkovSource, m: int) -> Iterator[tuple[tuple[int, ...], float]]:
    for s in itertools.product(range(source.size), repeat=m):
        p = source.initial[s[0]]
        for a, b in zip(s, s[1:]):
            p *= source.transition[a, b]
        if p > 0:
            yield s, float(p)


def _duration_paths(duration: DurationDistribution, m: int) -> Iterator[tuple[tuple[int, ...], float]]:
    opts = _durations(duration)
    for combo in itertools.product(opts, repeat=m):
        yield tuple(k for k, _ in combo), math.prod(w for _, w in combo)


def _apply_noise(q: np.ndarray, W: np.ndarray, t: int) -> np.ndarray:
    """Push a distribution over duplicated sequences through the noise, one axis at a time."""
    out = q
    for _ in range(t):
        out = np.tensordot(out, W, axes=(0, 0))
    return out


def _z_index(s: tuple[int, ...], ks: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sym for sym, k in zip(s, ks) for _ in range(k))


def _constrained_z(source, duration, m) -> dict[int, np.ndarray]:
    """Law of the duplicated sequence, split by its length ``T_m``."""
    n_dur = len(_durations(duration))
    _guard(source.size ** m * n_dur ** m, "state/duration enumeration")
    by_t: dict[int, np.ndarray] = {}
    dpaths = list(_duration_paths(duration, m))
    for s, ps in _source_paths(source, m):
        for ks, pk in dpaths:
            z = _z_index(s, ks)
            q = by_t.setdefault(len(z), np.zeros((source.size,) * len(z)))
            q[z] += ps * pk
    return by_t


def _embedded_z(source, duration, t) -> np.ndarray:
    """Law of the first ``t`` duplicated states, segments generated until ``t`` is covered."""
    opts = _durations(duration)
    q = np.zeros((source.size,) * t)
    count = 0

    def walk(z: tuple, prev: int, prob: float) -> None:
        nonlocal count
        if len(z) >= t:
            count += 1
            if count > MAX_TERMS:
                raise TooLargeError(f"embedded-law enumeration exceeds {MAX_TERMS} paths")
            q[z[:t]] += prob
            return
        for s in range(source.size):
            ps = source.initial[s] if prev < 0 else source.transition[prev, s]
            if ps <= 0:
                continue
            for k, pk in opts:
                walk(z + (s,) * k, s, prob * ps * pk)

    walk((), -1, 1.0)
    return q


def brute_force_output_marginal(
    source: MarkovSource,
    duration: DurationDistribution,
    noise: NoiseModel,
    m: int,
    t: int,
    constrained: bool = True,
) -> dict[tuple[int, ...], float]:
    """Probability of every output sequence of length ``t``.

    With ``constrained=True`` the table holds ``P(Y_1^{T_m} = y, T_m = t)``
    and sums to ``P(T_m = t)``. Otherwise ``m`` is ignored and the table is the
    law of the first ``t`` output samples, which sums to 1.
    """
    check_compatible(source, noise)
    _guard(noise.n_outputs ** t, "output table")
    if constrained:
        q = _constrained_z(source, duration, m).get(t)
        if q is None:
            return {y: 0.0 for y in itertools.product(range(noise.n_outputs), repeat=t)}
    else:
        q = _embedded_z(source, duration, t)
    table = _apply_noise(q, noise.emission, t)
    return {y: float(table[y]) for y in itertools.product(range(noise.n_outputs), repeat=t)}


def brute_force_conditional(s_seq, duration: DurationDistribution, noise: NoiseModel, y_seq) -> float:
    """``log2 P(y | s)`` by summing over every duration vector with the right total."""
    s = tuple(int(x) for x in s_seq)
    y = tuple(int(x) for x in y_seq)
    _guard(len(_durations(duration)) ** len(s), "duration enumeration")
    total = 0.0
    for ks, pk in _duration_paths(duration, len(s)):
        if sum(ks) != len(y):
            continue
        z = _z_index(s, ks)
        total += pk * math.prod(noise.emission[a, b] for a, b in zip(z, y))
    if total <= 0:
        raise ZeroProbabilityError("output has probability zero given the input")
    return math.log2(total)


def _plogp(table: np.ndarray) -> float:
    p = table[table > 0]
    return float(-(p * np.log2(p)).sum())


def exact_block_entropies(
    source: MarkovSource, duration: DurationDistribution, noise: NoiseModel, m: int
) -> tuple[float, float, float]:
    """``(H(S_1^m), H(Y_1^{T_m}), H(S_1^m, Y_1^{T_m}))`` in bits, by enumeration."""
    check_compatible(source, noise)
    n_dur = len(_durations(duration))
    _guard(source.size ** m * n_dur ** m, "state/duration enumeration")
    dpaths = list(_duration_paths(duration, m))
    _guard(noise.n_outputs ** max(sum(ks) for ks, _ in dpaths), "output table")
    h_s = entropy_bits([p for _, p in _source_paths(source, m)])
    y_law: dict[int, np.ndarray] = {}
    h_sy = 0.0
    for s, ps in _source_paths(source, m):
        by_t: dict[int, np.ndarray] = {}
        for ks, pk in dpaths:
            z = _z_index(s, ks)
            q = by_t.setdefault(len(z), np.zeros((source.size,) * len(z)))
            q[z] += ps * pk
        for t, q in by_t.items():
            table = _apply_noise(q, noise.emission, t)
            h_sy += _plogp(table)
            if t in y_law:
                y_law[t] += table
            else:
                y_law[t] = table
    h_y = sum(_plogp(v) for v in y_law.values())
    return h_s, h_y, h_sy


def format_table(table: dict[tuple[int, ...], float]) -> str:
    """CSV with columns ``y,prob``; ``y`` is the concatenated symbol string."""
    lines = ["y,prob"]
    for y, p in table.items():
        lines.append(f"{''.join(str(v) for v in y)},{p:.17g}")
    return "\n".join(lines) + "\n"
