"""Plain-text model description.

One ``key = value`` per line, ``#`` starts a comment::

    source = ber-half          # or matrix-file:<path>
    dup = geometric            # bernoulli | geometric
    pd = 0.3
    kmax = 15
    noise = bsc
    p = 0.01

A matrix file holds one whitespace-separated row of the transition matrix
per line; the alphabet is ``0..n-1`` and the chain starts stationary.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
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

DUP_FAMILIES = ("bernoulli", "geometric")
KEYS = ("source", "dup", "pd", "kmax", "noise", "p")


class Channel(NamedTuple):
    source: MarkovSource
    duration: DurationDistribution
    noise: NoiseModel


@dataclass(frozen=True)
class ModelSpec:
    source: str = "ber-half"
    dup: str = "bernoulli"
    pd: float = 0.0
    kmax: int = 15
    noise: str = "bsc"
    p: float = 0.0

    def validate(self) -> "ModelSpec":
        if self.dup not in DUP_FAMILIES:
            raise ConfigError(f"dup must be one of {DUP_FAMILIES}, got {self.dup!r}")
        if self.noise != "bsc":
            raise ConfigError(f"noise must be 'bsc', got {self.noise!r}")
        if not (self.source == "ber-half" or self.source.startswith("matrix-file:")):
            raise ConfigError(f"unknown source {self.source!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p={self.p} outside [0, 1]")
        hi_ok = self.pd <= 1.0 if self.dup == "bernoulli" else self.pd < 1.0
        if not (0.0 <= self.pd and hi_ok):
            raise ConfigError(f"pd={self.pd} invalid for {self.dup} durations")
        if self.kmax < 1:
            raise ConfigError(f"kmax={self.kmax} must be >= 1")
        return self

    def with_pd(self, pd: float) -> "ModelSpec":
        return dataclasses.replace(self, pd=float(pd))

    def build(self) -> Channel:
        self.validate()
        try:
            if self.source == "ber-half":
                source = ber_half_source()
            else:
                path = Path(self.source.split(":", 1)[1])
                P = np.loadtxt(path, ndmin=2)
                source = make_markov_source(range(P.shape[0]), P)
            if self.dup == "bernoulli":
                duration = make_bernoulli_duration(self.pd)
            else:
                duration = make_geometric_duration(self.pd, self.kmax)
            noise = make_bsc_noise(self.p)
        except (OSError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
        if source.size != 2:
            raise ConfigError("bsc noise needs a binary source alphabet")
        return Channel(source, duration, noise)

    @property
    def effective_kmax(self) -> int:
        return 2 if self.dup == "bernoulli" else self.kmax


def parse_config(text: str) -> ModelSpec:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in ("pd", "p"):
                values[key] = float(value)
            elif key == "kmax":
                values[key] = int(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return ModelSpec(**values).validate()


def load_config(path) -> ModelSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_config(spec: ModelSpec) -> str:
    return "".join(f"{k} = {getattr(spec, k)}\n" for k in KEYS)

