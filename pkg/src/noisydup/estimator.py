"""Monte Carlo entropy-rate and information-rate estimation.

For one sampled trajectory ``(S_1^m, Y_1^{T_m})`` the information density is

    i_m = h_S + h_Y - h_SY,    h_X = -(1/m) log2 P(X)

and its expectation is ``I(S_1^m; Y_1^{T_m}) / m``. All three terms are
computed from the same trajectory. Replicates use independent child seeds and
are combined by their mean; the 95% interval comes from the replicate
standard error.
"""

from __future__ import annotations

import dataclasses
import math
import os
import statistics
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .config import ModelSpec
from .embedding import build_embedded_chain
from .errors import ConfigError, DimensionError, NoisyDupError, RangeError, TooLargeError
from .model import (
    DurationDistribution,
    MarkovSource,
    NoiseModel,
    analytic_entropy_rate,
    check_compatible,
    entropy_bits,
)
from .simulate import replicate_seeds, sample_outputs, sample_trajectory
from .trellis import (
    exact_log_prob_output_constrained,
    forward_log_prob_conditional,
    forward_log_prob_embedded,
    log_prob_source,
)

DEFAULT_PRUNE = 1e-20
OUTPUT_MARGINALS = ("embedded", "constrained")
Z95 = statistics.NormalDist().inv_cdf(0.975)
WORKERS_ENV = "NOISYDUP_WORKERS"


class SmallBlockWarning(UserWarning):
    pass


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _pmap(fn: Callable, items: Sequence, workers: Optional[int]) -> list:
    """Ordered map, in a process pool when ``workers > 1``."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class EstimateResult:
    h_source: float
    h_output: float
    h_joint: float
    info_rate: float
    m: int
    t_m: int
    replicates: int
    ci95_halfwidth: Optional[float]
    seed: int
    wall_time_s: float = field(default=0.0, compare=False)
    replicate_rates: tuple[float, ...] = ()
    model: Optional[ModelSpec] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class AepDiagnostic:
    m_grid: tuple[int, ...]
    mean_g: tuple[float, ...]
    std_g: tuple[float, ...]
    mean_joint: tuple[float, ...]
    std_joint: tuple[float, ...]
    replicates: int


@dataclass(frozen=True)
class RelationCheckReport:
    """Both sides of ``H(Y^T) = E[K] H(Y)``, estimated from independent runs.

    ``segments_completed`` counts the segments that begin within the first
    ``t`` samples of the generating trajectory.
    """

    t: int
    h_y_per_output: float
    segments_completed: int
    mean_duration: float
    lhs: float
    rhs: float
    abs_gap: float


@dataclass(frozen=True)
class ConditioningBoundReport:
    trials: int
    violations: int
    max_excess: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class _Job:
    source: MarkovSource
    duration: DurationDistribution
    noise: NoiseModel
    m: int
    seed: int
    output_marginal: str = "embedded"
    prune: float = DEFAULT_PRUNE


def _sample_rates(job: _Job) -> tuple[float, float, float, int]:
    """(h_source, h_output, h_joint, T_m) for one trajectory."""
    traj = sample_trajectory(job.source, job.duration, job.noise, job.m, job.seed)
    m = job.m
    lp_s = log_prob_source(job.source, traj.inputs).log_prob
    if job.output_marginal == "embedded":
        chain = build_embedded_chain(job.source, job.duration, job.noise)
        lp_y = forward_log_prob_embedded(chain, traj.outputs).log_prob
    else:
        lp_y = exact_log_prob_output_constrained(
            job.source, job.duration, job.noise, m, traj.outputs, prune=job.prune
        ).log_prob
    lp_cond = forward_log_prob_conditional(
        traj.inputs, job.duration, job.noise, traj.outputs, prune=job.prune
    ).log_prob
    return -lp_s / m, -lp_y / m, -(lp_s + lp_cond) / m, traj.t_m


def _ci95(values: Sequence[float]) -> Optional[float]:
    if len(values) < 2:
        return None
    return Z95 * statistics.stdev(values) / math.sqrt(len(values))


def estimate_information_rate(
    source: MarkovSource,
    duration: DurationDistribution,
    noise: NoiseModel,
    m: int,
    master_seed: int,
    replicates: int = 1,
    *,
    analytic_source: bool = False,
    output_marginal: str = "embedded",
    prune: float = DEFAULT_PRUNE,
    workers: Optional[int] = 1,
) -> EstimateResult:
    """Average information density over independent trajectories.

    ``output_marginal="embedded"`` evaluates ``P(Y)`` with the forward pass on
    the embedded chain, which ignores how many segments produced the output;
    ``"constrained"`` fixes the segment count at ``m`` and is exact but slower
    when the count is poorly determined by the output.
    """
    try:
        check_compatible(source, noise)
    except DimensionError as exc:
        raise ConfigError(str(exc)) from exc
    if replicates < 1:
        raise RangeError("replicates must be >= 1")
    if output_marginal not in OUTPUT_MARGINALS:
        raise ConfigError(f"output_marginal must be one of {OUTPUT_MARGINALS}")
    if m < 1000:
        warnings.warn(f"block length m={m} is short; estimates carry O(log m / m) bias", SmallBlockWarning)
    start = time.perf_counter()
    seeds = replicate_seeds(master_seed, replicates)
    jobs = [_Job(source, duration, noise, m, s, output_marginal, prune) for s in seeds]
    rows = _pmap(_sample_rates, jobs, workers)
    h_s = np.array([r[0] for r in rows])
    h_y = np.array([r[1] for r in rows])
    h_sy = np.array([r[2] for r in rows])
    if analytic_source:
        h_s = np.full_like(h_s, analytic_entropy_rate(source))
    rates = h_s + h_y - h_sy
    return EstimateResult(
        h_source=float(h_s.mean()),
        h_output=float(h_y.mean()),
        h_joint=float(h_sy.mean()),
        info_rate=float(rates.mean()),
        m=int(m),
        t_m=int(round(float(np.mean([r[3] for r in rows])))),
        replicates=int(replicates),
        ci95_halfwidth=_ci95(rates.tolist()),
        seed=int(master_seed),
        wall_time_s=time.perf_counter() - start,
        replicate_rates=tuple(float(r) for r in rates),
    )


def _failed(spec: ModelSpec, m: int, seed: int, replicates: int, exc: Exception) -> EstimateResult:
    nan = float("nan")
    return EstimateResult(nan, nan, nan, nan, m, 0, replicates, None, seed, model=spec, error=str(exc))


def _sweep_point(args) -> EstimateResult:
    spec, m, seed, replicates, kwargs = args
    try:
        ch = spec.build()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SmallBlockWarning)
            res = estimate_information_rate(
                ch.source, ch.duration, ch.noise, m, seed, replicates, workers=1, **kwargs
            )
    except NoisyDupError as exc:
        return _failed(spec, m, seed, replicates, exc)
    return dataclasses.replace(res, model=spec)


def sweep_information_rate(
    template: ModelSpec,
    pd_grid: Iterable[float],
    m: int,
    master_seed: int,
    replicates: int = 1,
    *,
    workers: Optional[int] = None,
    **kwargs,
) -> list[EstimateResult]:
    """One estimate per duplication probability, in grid order.

    Each point gets its own child seed; failures are recorded in the row's
    ``error`` field instead of aborting the sweep.
    """
    grid = [float(x) for x in pd_grid]
    seeds = replicate_seeds(master_seed, len(grid))
    jobs = [(template.with_pd(pd), m, s, replicates, kwargs) for pd, s in zip(grid, seeds)]
    return _pmap(_sweep_point, jobs, workers)


def aep_convergence_diagnostic(
    source: MarkovSource,
    duration: DurationDistribution,
    noise: NoiseModel,
    m_grid: Sequence[int],
    replicates: int,
    master_seed: int,
    *,
    workers: Optional[int] = 1,
) -> AepDiagnostic:
    """Spread of the output and joint sample entropy rates across block lengths."""
    grid = tuple(int(m) for m in m_grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise RangeError("m_grid must be strictly increasing positive integers")
    if replicates < 2:
        raise RangeError("need at least two replicates for a spread estimate")
    check_compatible(source, noise)
    jobs = []
    for m, m_seed in zip(grid, replicate_seeds(master_seed, len(grid))):
        jobs += [_Job(source, duration, noise, m, s) for s in replicate_seeds(m_seed, replicates)]
    rows = _pmap(_sample_rates, jobs, workers)
    mean_g, std_g, mean_j, std_j = [], [], [], []
    for i in range(len(grid)):
        block = rows[i * replicates : (i + 1) * replicates]
        g = [r[1] for r in block]
        j = [r[2] for r in block]
        mean_g.append(statistics.fmean(g))
        std_g.append(statistics.stdev(g))
        mean_j.append(statistics.fmean(j))
        std_j.append(statistics.stdev(j))
    return AepDiagnostic(grid, tuple(mean_g), tuple(std_g), tuple(mean_j), tuple(std_j), replicates)


def check_randomly_indexed_relation(
    source: MarkovSource,
    duration: DurationDistribution,
    noise: NoiseModel,
    t: int,
    m: int,
    master_seed: int,
) -> RelationCheckReport:
    """Compare the per-channel-use output entropy with ``E[K]`` times the per-sample one.

    The per-sample side runs the embedded forward pass on the first ``t``
    outputs of one trajectory; the per-channel-use side is the fixed-``m``
    estimate from an independent trajectory.
    """
    check_compatible(source, noise)
    if t < 1 or m < 1:
        raise RangeError("t and m must be positive")
    seed_t, seed_m = replicate_seeds(master_seed, 2)
    chain = build_embedded_chain(source, duration, noise)
    traj = sample_outputs(source, duration, noise, t, seed_t)
    h_y = -forward_log_prob_embedded(chain, traj.outputs[:t]).log_prob / t
    _, lhs, _, _ = _sample_rates(_Job(source, duration, noise, m, seed_m))
    rhs = duration.mean * h_y
    return RelationCheckReport(
        t=t,
        h_y_per_output=h_y,
        segments_completed=traj.segments_started(t),
        mean_duration=duration.mean,
        lhs=lhs,
        rhs=rhs,
        abs_gap=abs(lhs - rhs),
    )


def jump_time_pmf(duration: DurationDistribution, d: int) -> np.ndarray:
    """pmf of ``T_d = K_1 + ... + K_d`` indexed by value, by repeated convolution."""
    if d < 1:
        raise RangeError("d must be >= 1")
    if d * duration.k_max > 1_000_000:
        raise TooLargeError(f"T_{d} support exceeds 1e6 points")
    base = np.concatenate(([0.0], duration.dense_pmf()))
    out = np.array([1.0])
    for _ in range(d):
        out = np.convolve(out, base)
    return out


def jump_time_entropy(duration: DurationDistribution, d: int) -> tuple[float, float]:
    """``(H(T_d), H(T_d)/d)`` in bits."""
    h = entropy_bits(jump_time_pmf(duration, d))
    return h, h / d


def _random_joint(rng: np.random.Generator) -> np.ndarray:
    ny, na = rng.integers(1, 9, size=2)
    kind = rng.integers(0, 4)
    if kind == 0:
        alpha = rng.choice([0.05, 0.3, 1.0, 5.0])
        joint = rng.dirichlet(np.full(ny * na, alpha)).reshape(ny, na)
    elif kind == 1:
        joint = np.outer(rng.dirichlet(np.ones(ny)), rng.dirichlet(np.ones(na)))
    elif kind == 2:
        f = rng.integers(0, na, size=ny)
        joint = np.zeros((ny, na))
        joint[np.arange(ny), f] = rng.dirichlet(np.ones(ny))
    else:
        joint = rng.random((ny, na)) * (rng.random((ny, na)) < 0.4)
        if joint.sum() == 0:
            joint[0, 0] = 1.0
        joint /= joint.sum()
    return joint


def conditioning_bound_property_test(rng_seed: int, trials: int) -> ConditioningBoundReport:
    """Check ``H(Y, A) - H(Y) <= 2 H(A)`` on random small joint pmfs.

    ``max_excess`` is the largest ``H(Y,A) - H(Y) - 2H(A)`` seen; a violation
    is an excess above 1e-12.
    """
    if trials < 1:
        raise RangeError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    violations = 0
    worst = -math.inf
    for _ in range(trials):
        joint = _random_joint(rng)
        excess = entropy_bits(joint) - entropy_bits(joint.sum(axis=1)) - 2 * entropy_bits(joint.sum(axis=0))
        worst = max(worst, excess)
        if excess > 1e-12:
            violations += 1
    return ConditioningBoundReport(trials, violations, worst)


__all__ = [
    "EstimateResult",
    "AepDiagnostic",
    "RelationCheckReport",
    "ConditioningBoundReport",
    "SmallBlockWarning",
    "estimate_information_rate",
    "sweep_information_rate",
    "aep_convergence_diagnostic",
    "check_randomly_indexed_relation",
    "jump_time_pmf",
    "jump_time_entropy",
    "conditioning_bound_property_test",
    "default_workers",
]
