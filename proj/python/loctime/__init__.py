"""Local-time invariance toolkit for finite-state Markov shifts."""

import json as _json

from ._loctime import *  # noqa: F401,F403
from ._loctime import LoctimeError, __version__, models
from ._loctime import run_experiment as _run_experiment


def run_experiment(config_path, output_dir=None, threads=1):
    """Run a campaign; returns the verification report as a dict."""
    return _json.loads(_run_experiment(str(config_path), None if output_dir is None else str(output_dir), threads))


__all__ = ["LoctimeError", "models", "run_experiment", "__version__"]
