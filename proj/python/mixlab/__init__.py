"""Mixing-time constructions and diagnostics for reversible Markov chains."""

import json

from . import _mixlab
from ._mixlab import Rejection, experiment_names, fact41_bias, fact41_limit, theorem3_window

__all__ = [
    "Rejection",
    "build",
    "experiment",
    "experiment_names",
    "fact41_bias",
    "fact41_limit",
    "hitting_pmf",
    "kernel",
    "profile",
    "psi",
    "spectrum",
    "theorem3_window",
]


def _text(network):
    return network if isinstance(network, str) else json.dumps(network)


def build(family, **params):
    """Build a network family; returns (network dict, metadata dict)."""
    net, meta = _mixlab.build(family, json.dumps(params))
    return json.loads(net), json.loads(meta)


def kernel(network, delta=0.5):
    """Dense transition matrix and stationary law as numpy arrays."""
    return _mixlab.kernel(_text(network), delta)


def profile(network, kind="tv", t_max=100, delta=0.5, starts=None):
    """Worst-case distance to stationarity for t = 0..t_max."""
    return _mixlab.profile(_text(network), delta, kind, t_max, starts)


def spectrum(network, delta=0.5):
    return json.loads(_mixlab.spectrum(_text(network), delta))


def hitting_pmf(network, start, targets, horizon, delta=0.5):
    """(mass by time, unabsorbed remainder) for the first visit to targets."""
    return _mixlab.hitting_pmf(_text(network), delta, start, list(targets), horizon)


def experiment(name, **overrides):
    return json.loads(_mixlab.run_experiment(name, json.dumps(overrides)))


def psi(alpha, r, printed=False):
    """(value, maximizing lambda, lambda_alpha) of the rate function."""
    return _mixlab.psi(alpha, r, printed)
