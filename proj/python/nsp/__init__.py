"""Symbolic world-model learning and planning with online predicate invention."""

import json

from ._nsp import NspError, domains, model_text, parse_model
from . import _nsp

__all__ = ["NspError", "domains", "run", "evaluate", "model_text", "parse_model", "export_pddl"]


def run(domain, seed=0, **opts):
    """Learn a model online and evaluate it.

    Returns (metrics, model_text). Options mirror the CLI flags with
    underscores, e.g. max_iters=5, budget=8, noise=0.1.
    """
    metrics, model = _nsp.run(domain, seed, opts)
    return json.loads(metrics), model


def evaluate(domain, model="oracle", seed=0, **opts):
    """Evaluate "oracle", "initial" or "learned:<path>" on the test tasks."""
    return json.loads(_nsp.evaluate(domain, model, seed, opts))


def export_pddl(domain, which="oracle", seed=0):
    """(domain_text, problem_text) for the first test task of `seed`."""
    return _nsp.export_pddl(domain, which, seed)
