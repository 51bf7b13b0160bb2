"""Grounded graph decoding for conjunctive-query semantic parsing."""

import json as _json

from . import _core
from ._core import CapacityError, DataError, NumericError, ParseError, canonical_form, iso_equal

__all__ = [
    "CapacityError",
    "DataError",
    "NumericError",
    "ParseError",
    "canonical_form",
    "iso_equal",
    "generate",
    "split",
    "train",
    "evaluate",
    "predict",
    "gradcheck",
]


def generate(n, seed=0, grammar=None):
    """Synthetic examples as dicts with question, query and derivation."""
    return _json.loads(_core.generate(n, seed, _json.dumps(grammar) if grammar else ""))


def split(examples, method="mcd", seed=0):
    return _json.loads(_core.split(_json.dumps(examples), method, seed))


def train(examples, split_spec, config, out):
    """Trains on the split's train side and writes the best checkpoint to `out`."""
    return _json.loads(_core.train(_json.dumps(examples), _json.dumps(split_spec), _json.dumps(config), str(out)))


def evaluate(ckpt, examples, indices=None, threshold=0.5):
    return _json.loads(_core.evaluate(str(ckpt), _json.dumps(examples), list(indices or []), threshold))


def predict(ckpt, question, threshold=0.5):
    return _json.loads(_core.predict(str(ckpt), question, threshold))


def gradcheck(mode, d=8, seed=0, tol=1e-4):
    return _json.loads(_core.gradcheck(mode, d, seed, tol))
