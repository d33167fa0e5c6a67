"""Command-line interface: ``noisydup {run,sweep,figure,verify,aep}``.

Exit codes: 0 success, 1 verification failure, 2 bad configuration,
3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import ModelSpec, load_config
from .embedding import build_embedded_chain, format_matrix
from .errors import ConfigError, NoisyDupError
from .estimator import (
    DEFAULT_PRUNE,
    EstimateResult,
    SmallBlockWarning,
    aep_convergence_diagnostic,
    estimate_information_rate,
    sweep_information_rate,
)
from .model import bsc_capacity, bsc_two_look_capacity
from .simulate import RNG_NAME

QUICK_M = 100_000
FULL_M = 1_000_000

COLUMNS = (
    "family", "p", "pd", "kmax", "m", "seed", "replicates",
    "h_source", "h_output", "h_joint", "info_rate", "ci95", "t_m", "wall_time_s",
)
AEP_COLUMNS = ("m", "replicates", "mean_g", "std_g", "mean_joint", "std_joint")

FIGURES = {
    "fig1": dict(dup="bernoulli", pd_end=1.0, title="BSC with Bernoulli duplications"),
    "fig2": dict(dup="geometric", pd_end=0.6, title="BSC with geometric duplications"),
}
FIGURE_SERIES = (0.0, 0.01, 0.1)


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _header(extra: str = "") -> list[str]:
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    first = f"# noisydup {__version__} rng={RNG_NAME}"
    return [first + (f" {extra}" if extra else ""), f"# generated_at: {stamp}"]


def result_row(spec: ModelSpec, res: EstimateResult, timing: bool = False) -> list[str]:
    return [
        spec.dup, _fmt(spec.p), _fmt(spec.pd), _fmt(spec.effective_kmax), _fmt(res.m),
        _fmt(res.seed), _fmt(res.replicates), _fmt(res.h_source), _fmt(res.h_output),
        _fmt(res.h_joint), _fmt(res.info_rate), _fmt(res.ci95_halfwidth), _fmt(res.t_m),
        _fmt(round(res.wall_time_s, 3)) if timing else "",
    ]


def write_table(path: Optional[Path], header: list[str], columns, rows, trailer=()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    for line in trailer:
        buf.write(line + "\n")
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


def read_table(path) -> list[dict[str, str]]:
    """Rows of a CSV written by this tool, comment lines skipped."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _add_model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--config", type=Path, help="key = value model file")
    g.add_argument("--source", help="ber-half | matrix-file:<path>")
    g.add_argument("--dup", help="bernoulli | geometric")
    g.add_argument("--pd", type=float, help="duplication probability")
    g.add_argument("--kmax", type=int, help="truncation of geometric durations (default 15)")
    g.add_argument("--noise", help="bsc")
    g.add_argument("--p", type=float, help="BSC crossover probability")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimation")
    g.add_argument("--m", type=int, help=f"block length (default {QUICK_M}, {FULL_M} with --full)")
    g.add_argument("--full", action="store_true", help=f"use m={FULL_M}")
    g.add_argument("--seed", type=int, default=1, help="master seed")
    g.add_argument("--replicates", type=int, default=1)
    g.add_argument("--analytic-source", action="store_true", help="use the analytic source entropy rate")
    g.add_argument("--output-marginal", choices=("embedded", "constrained"), default="embedded")
    g.add_argument("--workers", type=int, default=None, help="worker processes (default: $NOISYDUP_WORKERS or CPU count)")
    g.add_argument("--timing", action="store_true", help="fill wall_time_s (makes rows run-dependent)")
    g.add_argument("--out", type=Path, help="CSV path (default stdout)")


def model_spec(args) -> ModelSpec:
    spec = load_config(args.config) if args.config else ModelSpec()
    overrides = {k: getattr(args, k) for k in ("source", "dup", "pd", "kmax", "noise", "p")}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        spec = dataclasses.replace(spec, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return spec.validate()


def _block_length(args) -> int:
    m = args.m if args.m is not None else (FULL_M if args.full else QUICK_M)
    if m < 1:
        raise ConfigError("--m must be >= 1")
    if args.replicates < 1:
        raise ConfigError("--replicates must be >= 1")
    return m


def _estimate_kwargs(args) -> dict:
    return dict(analytic_source=args.analytic_source, output_marginal=args.output_marginal)


def _meta(args) -> str:
    return f"prune={DEFAULT_PRUNE:g} output_marginal={args.output_marginal}"


def pd_grid(start: float, end: float, step: float) -> list[float]:
    if not step > 0 or not math.isfinite(step):
        raise ConfigError("--pd-step must be positive")
    if end < start:
        raise ConfigError("--pd-end must be >= --pd-start")
    n = int(math.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(n)]


def cmd_run(args) -> int:
    spec = model_spec(args)
    m = _block_length(args)
    ch = spec.build()
    res = estimate_information_rate(
        ch.source, ch.duration, ch.noise, m, args.seed, args.replicates,
        workers=args.workers, **_estimate_kwargs(args),
    )
    write_table(args.out, _header(_meta(args)), COLUMNS, [result_row(spec, res, args.timing)])
    return 0


def _sweep_rows(spec, grid, m, seed, args):
    results = sweep_information_rate(
        spec, grid, m, seed, args.replicates, workers=args.workers, **_estimate_kwargs(args)
    )
    rows, trailer = [], []
    for res in results:
        rows.append(result_row(res.model, res, args.timing))
        if res.error:
            trailer.append(f"# error pd={res.model.pd}: {res.error}")
            print(f"noisydup: pd={res.model.pd}: {res.error}", file=sys.stderr)
    return results, rows, trailer


def cmd_sweep(args) -> int:
    spec = model_spec(args)
    m = _block_length(args)
    grid = pd_grid(args.pd_start, args.pd_end, args.pd_step)
    results, rows, trailer = _sweep_rows(spec, grid, m, args.seed, args)
    write_table(args.out, _header(_meta(args)), COLUMNS, rows, trailer)
    if args.svg:
        from .plotting import plot_rate_curves

        xs = [r.model.pd for r in results if r.ok]
        ys = [r.info_rate for r in results if r.ok]
        plot_rate_curves(
            {f"p={spec.p:g}": (xs, ys)}, args.svg,
            title=f"BSC with {spec.dup} duplications",
            xlim=(min(grid), max(grid) if max(grid) > min(grid) else min(grid) + 1),
        )
    return 3 if any(not r.ok for r in results) else 0


def cmd_figure(args) -> int:
    preset = FIGURES[args.which]
    m = _block_length(args)
    grid = pd_grid(0.0, preset["pd_end"], args.pd_step)
    outdir: Path = args.outdir
    outdir.mkdir(parents=True, exist_ok=True)
    series, files, failed = {}, [], False
    seeds = dict(zip(FIGURE_SERIES, _series_seeds(args.seed)))
    for p in FIGURE_SERIES:
        spec = ModelSpec(dup=preset["dup"], p=p, kmax=args.kmax or 15).validate()
        results, rows, trailer = _sweep_rows(spec, grid, m, seeds[p], args)
        path = outdir / f"{args.which}_p{p:g}.csv"
        write_table(path, _header(_meta(args)), COLUMNS, rows, trailer)
        files.append(path.name)
        failed |= any(not r.ok for r in results)
        series[f"$p={p:g}$"] = ([r.model.pd for r in results if r.ok], [r.info_rate for r in results if r.ok])
    from .plotting import plot_rate_curves

    refs = {}
    if args.which == "fig1":
        for p in FIGURE_SERIES[1:]:
            refs[f"C_BSC({p:g})"] = (0.0, bsc_capacity(p))
            refs[f"C_BSC2({p:g})"] = (1.0, bsc_two_look_capacity(p))
    fig_path = outdir / f"{args.which}.svg"
    colors = {f"$p={p:g}$": c for p, c in zip(FIGURE_SERIES, ("black", "tab:blue", "tab:red"))}
    plot_rate_curves(
        series, fig_path, title=preset["title"], colors=colors, references=refs,
        xlim=(0.0, preset["pd_end"]),
    )
    files.append(fig_path.name)
    manifest = {
        "tool": "noisydup",
        "version": __version__,
        "rng": RNG_NAME,
        "figure": args.which,
        "duration_family": preset["dup"],
        "kmax": 2 if preset["dup"] == "bernoulli" else (args.kmax or 15),
        "m": m,
        "replicates": args.replicates,
        "master_seed": args.seed,
        "series_seeds": {f"{p:g}": s for p, s in seeds.items()},
        "pd_grid": grid,
        "output_marginal": args.output_marginal,
        "prune": DEFAULT_PRUNE,
        "files": files,
    }
    (outdir / f"{args.which}_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {', '.join(files)} to {outdir}")
    return 3 if failed else 0


def _series_seeds(master: int) -> list[int]:
    from .simulate import replicate_seeds

    return replicate_seeds(master, len(FIGURE_SERIES))


def cmd_verify(args) -> int:
    from .verify import run_all

    if args.show_chain:
        spec = model_spec(args)
        ch = spec.build()
        chain = build_embedded_chain(ch.source, ch.duration, ch.noise, literal_first_case=args.literal_embedding)
        sys.stdout.write(format_matrix(chain))
    results = run_all(literal_first_case=args.literal_embedding)
    for r in results:
        print(r.line())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} suites passed")
    return 1 if n_fail else 0


def parse_grid(text: str) -> list[int]:
    try:
        grid = [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"malformed --m-grid {text!r}") from exc
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ConfigError(f"--m-grid must be strictly increasing positive integers, got {text!r}")
    return grid


def cmd_aep(args) -> int:
    spec = model_spec(args)
    grid = parse_grid(args.m_grid)
    if args.replicates < 2:
        raise ConfigError("--replicates must be >= 2")
    ch = spec.build()
    diag = aep_convergence_diagnostic(
        ch.source, ch.duration, ch.noise, grid, args.replicates, args.seed, workers=args.workers
    )
    rows = [
        [_fmt(m), _fmt(diag.replicates), _fmt(a), _fmt(b), _fmt(c), _fmt(d)]
        for m, a, b, c, d in zip(diag.m_grid, diag.mean_g, diag.std_g, diag.mean_joint, diag.std_joint)
    ]
    extra = f"family={spec.dup} p={spec.p} pd={spec.pd} kmax={spec.effective_kmax} seed={args.seed}"
    write_table(args.out, _header(extra), AEP_COLUMNS, rows)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisydup", description="Information rates of noisy duplication channels")
    parser.add_argument("--version", action="version", version=f"noisydup {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="estimate the information rate at one model point")
    _add_model_args(p)
    _add_run_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="estimate over a grid of duplication probabilities")
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--pd-start", type=float, default=0.0)
    p.add_argument("--pd-end", type=float, default=1.0)
    p.add_argument("--pd-step", type=float, default=0.05)
    p.add_argument("--svg", type=Path, help="also write a line plot (format from extension)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="reproduce the Bernoulli (fig1) or geometric (fig2) rate curves")
    p.add_argument("which", choices=sorted(FIGURES))
    _add_run_args(p)
    p.add_argument("--kmax", type=int, default=None, help="geometric truncation (default 15)")
    p.add_argument("--pd-step", type=float, default=0.05)
    p.add_argument("--outdir", type=Path, default=Path("figures"))
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", help="run the oracle and identity self-checks")
    _add_model_args(p)
    p.add_argument("--show-chain", action="store_true", help="print the embedded transition matrix of the model")
    p.add_argument("--literal-embedding", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("aep", help="spread of sample entropy rates over block lengths")
    _add_model_args(p)
    p.add_argument("--m-grid", default="100,1000,10000")
    p.add_argument("--replicates", type=int, default=30)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_aep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    import warnings

    warnings.simplefilter("ignore", SmallBlockWarning)
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"noisydup: error: {exc}", file=sys.stderr)
        return 2
    except NoisyDupError as exc:
        print(f"noisydup: numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
