"""Information rates of noisy duplication channels.

A Markov source is repeated a random number of times per symbol and sent
through a memoryless noise channel. The package samples such channels,
computes exact output probabilities with forward recursions, and estimates
the information rate from single long trajectories.
"""

__version__ = "0.1.0"

from .config import ModelSpec, load_config, parse_config
from .embedding import EmbeddedChain, build_embedded_chain, stationary_distribution
from .errors import NoisyDupError
from .estimator import EstimateResult, estimate_information_rate, sweep_information_rate
from .model import (
    make_bernoulli_duration,
    make_bsc_noise,
    make_geometric_duration,
    make_markov_source,
)
from .simulate import sample_trajectory

__all__ = [
    "EmbeddedChain",
    "EstimateResult",
    "ModelSpec",
    "NoisyDupError",
    "build_embedded_chain",
    "estimate_information_rate",
    "load_config",
    "make_bernoulli_duration",
    "make_bsc_noise",
    "make_geometric_duration",
    "make_markov_source",
    "parse_config",
    "sample_trajectory",
    "stationary_distribution",
    "sweep_information_rate",
]
