"""Self-checks behind ``noisydup verify``.

Each suite returns a :class:`SuiteResult`; the CLI prints one line per suite
and exits non-zero if any fails.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .embedding import build_embedded_chain, chain_is_irreducible, stationary_distribution
from .errors import ZeroProbabilityError
from .estimator import check_randomly_indexed_relation, jump_time_entropy, conditioning_bound_property_test
from .model import (
    DurationDistribution,
    MarkovSource,
    NoiseModel,
    ber_half_source,
    make_bernoulli_duration,
    make_bsc_noise,
    make_geometric_duration,
    make_markov_source,
)
from .trellis import (
    brute_force_conditional,
    brute_force_output_marginal,
    exact_block_entropies,
    exact_log_prob_output_constrained,
    feasible_band,
    forward_log_prob_conditional,
    forward_log_prob_embedded,
    log_prob_source,
)

ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<22} {self.detail}  ({self.seconds:.1f}s)"


def small_durations() -> list[DurationDistribution]:
    """Bernoulli with p_d in {0, 0.3, 1} and k_max=3 geometric with p_d in {0, 0.3}."""
    durs = [make_bernoulli_duration(pd) for pd in (0.0, 0.3, 1.0)]
    durs += [make_geometric_duration(pd, 3) for pd in (0.0, 0.3)]
    return durs


def small_sources() -> list[MarkovSource]:
    return [ber_half_source(), make_markov_source((0, 1), [[0.8, 0.2], [0.4, 0.6]])]


def small_grid(sources: Optional[list] = None) -> Iterator[tuple[MarkovSource, DurationDistribution, NoiseModel]]:
    for source in sources or [ber_half_source()]:
        for dur in small_durations():
            for p in (0.0, 0.1, 0.5):
                yield source, dur, make_bsc_noise(p)


def describe(dur: DurationDistribution, noise: NoiseModel) -> str:
    return f"{dur.family}(pd={dur.params.get('pd')}) p={noise.emission[0, 1]:g}"


def _outputs(n_out: int, t: int, limit: Optional[int], rng) -> list[tuple[int, ...]]:
    if limit is None or n_out ** t <= limit:
        return list(itertools.product(range(n_out), repeat=t))
    return [tuple(int(v) for v in rng.integers(0, n_out, t)) for _ in range(limit)]


def oracle_equivalence(
    max_m: int = 4,
    max_t_embedded: int = 6,
    limit: Optional[int] = 256,
    seed: int = 0,
    conditional_draws: int = 8,
) -> dict:
    """Compare the three recursions with enumeration over the small model grid.

    Returns the worst absolute log2 error per recursion, the number of
    comparisons and the number of zero-probability mismatches.
    """
    rng = np.random.default_rng(seed)
    worst = {"embedded": 0.0, "constrained": 0.0, "conditional": 0.0}
    count = 0
    mismatched_zeros = 0

    def compare(key, fn, prob):
        nonlocal count, mismatched_zeros
        count += 1
        try:
            lp = fn()
        except ZeroProbabilityError:
            if prob > 0:
                mismatched_zeros += 1
            return
        if prob <= 0:
            mismatched_zeros += 1
            return
        worst[key] = max(worst[key], abs(lp - math.log2(prob)))

    for source, dur, noise in small_grid(small_sources()):
        chain = build_embedded_chain(source, dur, noise)
        for t in range(1, max_t_embedded + 1):
            table = brute_force_output_marginal(source, dur, noise, 0, t, constrained=False)
            for y in _outputs(noise.n_outputs, t, limit, rng):
                compare("embedded", lambda: forward_log_prob_embedded(chain, y).log_prob, table[y])
        for m in range(1, max_m + 1):
            lo, hi = feasible_band(dur, m)
            for t in range(lo, hi + 1):
                table = brute_force_output_marginal(source, dur, noise, m, t)
                for y in _outputs(noise.n_outputs, t, limit, rng):
                    compare(
                        "constrained",
                        lambda: exact_log_prob_output_constrained(source, dur, noise, m, y).log_prob,
                        table[y],
                    )
            for _ in range(conditional_draws):
                s = tuple(int(v) for v in rng.integers(0, source.size, m))
                t = int(rng.integers(lo, hi + 1))
                y = tuple(int(v) for v in rng.integers(0, noise.n_outputs, t))
                try:
                    ref = 2.0 ** brute_force_conditional(s, dur, noise, y)
                except ZeroProbabilityError:
                    ref = 0.0
                compare("conditional", lambda: forward_log_prob_conditional(s, dur, noise, y).log_prob, ref)
    return {"worst": worst, "count": count, "mismatched_zeros": mismatched_zeros}


def subadditivity_violations(max_m: int = 5, tol: float = 1e-10) -> tuple[int, int]:
    """Count violations of ``H_m <= H_l + H_{m-l}`` for output and joint block entropies."""
    checks = 0
    bad = 0
    for source, dur, noise in small_grid():
        blocks = {m: exact_block_entropies(source, dur, noise, m) for m in range(1, max_m + 1)}
        for m in range(2, max_m + 1):
            for l in range(1, m):
                for idx in (1, 2):
                    checks += 1
                    if blocks[m][idx] > blocks[l][idx] + blocks[m - l][idx] + tol:
                        bad += 1
    return bad, checks


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> SuiteResult:
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing suite is a failing suite
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return SuiteResult(name, passed, detail, time.perf_counter() - start)


def suite_embedding_rows(literal_first_case: bool = False) -> SuiteResult:
    def run():
        worst = 0.0
        for source, dur, noise in small_grid(small_sources()):
            chain = build_embedded_chain(source, dur, noise, literal_first_case=literal_first_case)
            worst = max(worst, chain.row_sum_error())
        return worst <= 1e-12, f"max |row sum - 1| = {worst:.2e}"

    return _timed("embedding-row-sums", run)


def suite_stationary() -> SuiteResult:
    def run():
        worst_renewal = 0.0
        worst_gap = 0.0
        reducible = 0
        for source, dur, noise in small_grid(small_sources()):
            chain = build_embedded_chain(source, dur, noise)
            st = stationary_distribution(chain)
            worst_renewal = max(worst_renewal, abs(st.segment_start_mass * dur.mean - 1.0))
            worst_gap = max(worst_gap, st.renewal_gap, float(np.max(np.abs(st.pi @ chain.transition - st.pi))))
            reducible += not chain_is_irreducible(chain)
        ok = worst_renewal <= 1e-10 and worst_gap <= 1e-10 and reducible == 0
        return ok, f"|mass*E[K]-1| <= {worst_renewal:.1e}, pi gap <= {worst_gap:.1e}, reducible={reducible}"

    return _timed("stationary", run)


def suite_oracle(limit: Optional[int] = 64) -> SuiteResult:
    def run():
        res = oracle_equivalence(limit=limit)
        w = res["worst"]
        ok = max(w.values()) <= ORACLE_TOL and res["mismatched_zeros"] == 0
        detail = ", ".join(f"{k} {v:.1e}" for k, v in w.items())
        return ok, f"{res['count']} comparisons, max log2 error: {detail}"

    return _timed("oracle-equivalence", run)


def suite_subadditivity() -> SuiteResult:
    def run():
        bad, checks = subadditivity_violations()
        return bad == 0, f"{checks} inequalities, {bad} violated"

    return _timed("subadditivity", run)


def suite_conditioning_bound() -> SuiteResult:
    def run():
        rep = conditioning_bound_property_test(2024, 10_000)
        return rep.passed, f"{rep.trials} joints, {rep.violations} violations, max excess {rep.max_excess:.1e}"

    return _timed("conditioning-bound", run)


def suite_jump_time_entropy() -> SuiteResult:
    def run():
        dur = make_bernoulli_duration(0.5)
        ratios = [jump_time_entropy(dur, d)[1] for d in (1, 4, 16, 64, 256)]
        ok = all(b < a for a, b in zip(ratios, ratios[1:])) and ratios[-1] < 0.05
        return ok, "H(T_d)/d = " + ", ".join(f"{r:.4f}" for r in ratios)

    return _timed("jump-time-entropy", run)


def suite_relation(t: int = 100_000) -> SuiteResult:
    def run():
        src = ber_half_source()
        noise = make_bsc_noise(0.1)
        gaps = []
        for dur in (make_bernoulli_duration(0.5), make_geometric_duration(0.4)):
            gaps.append(check_randomly_indexed_relation(src, dur, noise, t, t, 11).abs_gap)
        return max(gaps) <= 0.01, "gaps " + ", ".join(f"{g:.4f}" for g in gaps) + " bits/use"

    return _timed("randomly-indexed", run)


def source_sanity() -> SuiteResult:
    def run():
        src = ber_half_source()
        s = np.random.default_rng(0).integers(0, 2, 1000)
        return log_prob_source(src, s).log_prob == -1000.0, "Ber(1/2) source log-prob is exact"

    return _timed("source-log-prob", run)


def run_all(literal_first_case: bool = False) -> list[SuiteResult]:
    return [
        suite_embedding_rows(literal_first_case),
        suite_stationary(),
        source_sanity(),
        suite_oracle(),
        suite_subadditivity(),
        suite_conditioning_bound(),
        suite_jump_time_entropy(),
        suite_relation(),
    ]
