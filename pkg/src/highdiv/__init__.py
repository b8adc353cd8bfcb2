"""Diverse model sampling for quantifier-free linear integer arithmetic."""

from .ccss import SearchParams, ccss_search
from .cdclt import CdclLimits, UnderApproximation
from .clausify import to_cnf
from .core import Assignment, Clause, CnfFormula, LinearAtom, Literal, evaluate_formula
from .coverage import CoverageAccumulator, coverage_of
from .errors import HighDivError, UnsatFormulaError
from .preprocess import equation_solving, model_convert
from .sampler import Problem, RunConfig, SampleSet, highdiv_sample, load_problem, verify_sample
from .smtlib import parse_file, parse_script

__all__ = [
    "Assignment", "CdclLimits", "Clause", "CnfFormula", "CoverageAccumulator", "HighDivError",
    "LinearAtom", "Literal", "Problem", "RunConfig", "SampleSet", "SearchParams", "UnderApproximation",
    "UnsatFormulaError", "ccss_search", "coverage_of", "equation_solving", "evaluate_formula",
    "highdiv_sample", "load_problem", "model_convert", "parse_file", "parse_script", "to_cnf",
    "verify_sample",
]
