"""Python bindings for the regret-dispersion (CAA) toolkit."""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    SymbolSequence,
    average_log_loss,
    binary_entropy,
    caa_max,
    caa_variance,
    cmi_atom,
    codelength_bits,
    conditional_entropy,
    csv_schemas,
    eca_evolve,
    excess_entropy_truncated,
    gen_hmm,
    gen_iid,
    gen_markov_chain,
    gen_periodic_noise,
    gen_xor_crypto,
    load_text,
    profile_csv,
    roundtrip,
    two_alg_closed_form,
)
from . import _core


def default_config(experiment):
    return _json.loads(_core.default_config(experiment))


def depth_indicators(losses, budgets=(), alpha=2.0 / 3.0):
    return _json.loads(_core.depth_indicators(list(losses), list(budgets), alpha))


def run_experiment(experiment, overrides=(), seed=None):
    """Run an experiment in memory.

    Returns (files, manifest): `files` maps output file names to their text,
    `manifest` is the parsed run manifest.
    """
    files, manifest = _core.run_experiment(experiment, list(overrides), seed)
    return files, _json.loads(manifest)
