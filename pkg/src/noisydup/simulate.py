"""Seeded sampling of channel trajectories.

Every trajectory is drawn from ``numpy.random.Generator(PCG64(seed))`` in a
fixed order (source uniforms, durations, noise uniforms), so a given
``(model, m, seed)`` always reproduces the same arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import DimensionError, RangeError
from .model import DurationDistribution, MarkovSource, NoiseModel, check_compatible

RNG_NAME = "PCG64"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One realization of the channel; symbols are stored as alphabet indices."""

    inputs: np.ndarray
    durations: np.ndarray
    jump_times: np.ndarray
    duplicated: np.ndarray
    outputs: np.ndarray
    seed: int
    m: int

    @property
    def t_m(self) -> int:
        return int(self.jump_times[-1])

    def segments_started(self, t: int) -> int:
        """Number of segments that begin within the first ``t`` samples."""
        starts = np.concatenate(([0], self.jump_times[:-1]))
        return int(np.count_nonzero(starts < t))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.m == other.m
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("inputs", "durations", "jump_times", "duplicated", "outputs")
            )
        )


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def replicate_seeds(master_seed: int, n: int) -> list[int]:
    """Child seeds for ``n`` replicates.

    Child ``i`` is the first 64-bit word of ``SeedSequence((master_seed, i))``,
    so it depends only on the pair and not on ``n``.
    """
    if n < 1:
        raise RangeError("need at least one replicate")
    return [
        int(np.random.SeedSequence((int(master_seed), i)).generate_state(1, np.uint64)[0])
        for i in range(n)
    ]


@numba.njit(cache=True)
def _markov_path(cum_init, cum_trans, u):
    n = u.shape[0]
    out = np.empty(n, dtype=np.int64)
    s = np.searchsorted(cum_init, u[0], side="right")
    out[0] = s
    for i in range(1, n):
        s = np.searchsorted(cum_trans[s], u[i], side="right")
        out[i] = s
    return out


def _cumulative(rows: np.ndarray) -> np.ndarray:
    c = np.cumsum(rows, axis=-1)
    c[..., -1] = np.inf  # guards against u landing above a rounded total
    return c


def sample_trajectory(
    source: MarkovSource,
    duration: DurationDistribution,
    noise: NoiseModel,
    m: int,
    seed: int,
) -> Trajectory:
    """Draw ``m`` channel uses: states, durations, duplicated states and outputs."""
    check_compatible(source, noise)
    if m < 1:
        raise DimensionError(f"block length m={m} must be >= 1")
    rng = make_rng(seed)
    u = rng.random(m)
    inputs = _markov_path(_cumulative(source.initial), _cumulative(source.transition), u)
    support = np.asarray(duration.support, dtype=np.int64)
    durations = support[np.searchsorted(_cumulative(duration.pmf), rng.random(m), side="right")]
    jump_times = np.cumsum(durations)
    duplicated = np.repeat(inputs, durations)
    cum_w = _cumulative(noise.emission)
    v = rng.random(duplicated.shape[0])
    outputs = (v[:, None] >= cum_w[duplicated]).sum(axis=1)
    small = np.int8 if max(source.size, noise.n_outputs) < 127 else np.int64
    return Trajectory(
        inputs=inputs.astype(small),
        durations=durations,
        jump_times=jump_times,
        duplicated=duplicated.astype(small),
        outputs=outputs.astype(small),
        seed=int(seed),
        m=int(m),
    )


def sample_outputs(source, duration, noise, t: int, seed: int) -> Trajectory:
    """Sample enough channel uses to cover at least ``t`` output samples."""
    m = max(1, int(np.ceil(t / duration.mean + 10 * np.sqrt(t) + 10)))
    while True:
        traj = sample_trajectory(source, duration, noise, m, seed)
        if traj.t_m >= t:
            return traj
        m *= 2


def format_trajectory(traj: Trajectory) -> str:
    """Four-line text record: ``S:``, ``K:``, ``Z:``, ``Y:`` then symbols."""
    lines = []
    for tag, arr in (("S", traj.inputs), ("K", traj.durations), ("Z", traj.duplicated), ("Y", traj.outputs)):
        lines.append(f"{tag}: " + " ".join(str(int(x)) for x in arr))
    return "\n".join(lines) + "\n"


def parse_trajectory(text: str) -> dict[str, np.ndarray]:
    out = {}
    for line in text.strip().splitlines():
        tag, _, body = line.partition(":")
        out[tag.strip()] = np.array(body.split(), dtype=np.int64)
    if set(out) != {"S", "K", "Z", "Y"}:
        raise DimensionError(f"trajectory record has tags {sorted(out)}")
    return out
