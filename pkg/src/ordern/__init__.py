"""Arbitrary-order iterative root finders: generation, evaluation, verification."""

from .algebra import MultiPoly, RationalFunction, VarId, parse_poly
from .class1 import canonical_poly, halley_denominator, named_method, step_class1
from .class2 import kfn_step, orbit_deltas, symbolic_QR
from .expr import parse
from .harness import (CorpusCase, efficiency, estimate_order, iterate, load_corpus, predicted_constant,
                      run_benchmark)
from .numeric import PrecisionContext

__version__ = "0.1.0"

__all__ = [
    "CorpusCase",
    "MultiPoly",
    "PrecisionContext",
    "RationalFunction",
    "VarId",
    "canonical_poly",
    "efficiency",
    "estimate_order",
    "halley_denominator",
    "iterate",
    "kfn_step",
    "load_corpus",
    "named_method",
    "orbit_deltas",
    "parse",
    "parse_poly",
    "predicted_constant",
    "run_benchmark",
    "step_class1",
    "symbolic_QR",
]
