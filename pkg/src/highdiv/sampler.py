"""The sampling loop: stochastic CDCL(T) and local search feeding each other."""

from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Optional

from .ccss import SearchParams, ccss_search, partition_variables
from .cdclt import CdclLimits, UnderApproximation, Unsat, fix_partial_assignment, solve
from .clausify import to_cnf
from .core import Assignment, CnfFormula, in_int64
from .errors import InconsistentEqualityError, UnsatFormulaError, VerificationError
from .preprocess import equation_solving, model_convert
from .smtlib import Ast, evaluate_ast, parse_file, parse_script

log = logging.getLogger(__name__)

Sample = dict[str, Any]


@dataclass
class Problem:
    ast: Ast
    cnf: CnfFormula

    @classmethod
    def from_ast(cls, ast: Ast) -> "Problem":
        return cls(ast, to_cnf(ast))


def load_problem(source: str | Path, is_text: bool = False) -> Problem:
    ast = parse_script(str(source)) if is_text else parse_file(source)
    return Problem.from_ast(ast)


@dataclass
class RunConfig:
    k: int = 100
    time_limit: float = 900.0
    seed: int = 0
    fix_probability: float = 0.5
    search: SearchParams = field(default_factory=SearchParams)
    cdcl: CdclLimits = field(default_factory=CdclLimits)
    iteration_budget: Optional[int] = None  # replaces the wall clock when set

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if not 0.0 <= self.fix_probability <= 1.0:
            raise ValueError("fix_probability must lie in [0, 1]")


def _key(sample: Sample) -> tuple:
    return tuple(sorted(sample.items()))


class SampleSet:
    """Distinct verified samples in insertion order."""

    def __init__(self, ast: Ast):
        self.ast = ast
        self.samples: list[Sample] = []
        self.seen: set[tuple] = set()
        self.rejected = 0

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def __contains__(self, sample: Sample) -> bool:
        return _key(sample) in self.seen

    def add(self, sample: Sample) -> bool:
        key = _key(sample)
        if key in self.seen:
            return False
        if not verify_sample(sample, self.ast):
            raise VerificationError("sample does not satisfy the input formula")
        self.seen.add(key)
        self.samples.append(sample)
        return True


def verify_sample(m: Sample | Assignment, ast: Ast, f: CnfFormula | None = None) -> bool:
    """Evaluate the parsed formula (not its clausal form) under ``m``."""
    env = m if isinstance(m, dict) else project(m, f)
    try:
        return evaluate_ast(ast, env)
    except KeyError:
        return False


def project(m: Assignment, f: CnfFormula) -> Sample:
    """Values of the declared variables only, keyed by name."""
    out: Sample = {}
    for i in f.declared_ints():
        out[f.int_names[i]] = m.int_values.get(i, 0)
    for b in f.declared_bools():
        out[f.bool_names[b]] = m.bool_values.get(b, False)
    return out


class _Clock:
    def __init__(self, cfg: RunConfig):
        self.budget = cfg.iteration_budget
        self.deadline = None if self.budget is not None else time.monotonic() + cfg.time_limit
        self.iterations = 0

    def expired(self) -> bool:
        if self.budget is not None:
            return self.iterations >= self.budget
        return time.monotonic() >= self.deadline


def highdiv_sample(problem: Problem, cfg: RunConfig) -> SampleSet:
    """Collect up to ``cfg.k`` distinct samples of ``problem``.

    Raises :class:`UnsatFormulaError` when the formula has no model.
    """
    rng = random.Random(cfg.seed)
    f = problem.cnf
    samples = SampleSet(problem.ast)
    try:
        f_hat, subst = equation_solving(f)
    except InconsistentEqualityError as exc:
        raise UnsatFormulaError(str(exc), samples) from exc
    partition = partition_variables(f_hat, cfg.search.lam)
    under = UnderApproximation(f_hat)
    clock = _Clock(cfg)

    def offer(m_hat: Assignment, origin: str) -> None:
        m = model_convert(m_hat, subst, f)
        sample = project(m, f)
        if not all(in_int64(v) for v in sample.values() if not isinstance(v, bool)):
            log.debug("dropping %s model outside the 64-bit range", origin)
            return
        if samples.add(sample):
            log.debug("%s sample #%d", origin, len(samples))

    while len(samples) < cfg.k and not clock.expired():
        clock.iterations += 1
        m_cdcl = solve(under, rng, cfg.cdcl)
        if isinstance(m_cdcl, Assignment):
            offer(m_cdcl, "cdcl")
        else:
            if isinstance(m_cdcl, Unsat):
                if not under.fixed_values:
                    raise UnsatFormulaError("unsat", samples)
                under = UnderApproximation(f_hat)
            m_cdcl = None
        if len(samples) >= cfg.k:
            break
        m_ls = ccss_search(f_hat, m_cdcl, cfg.search, rng, partition, clock.deadline)
        if m_ls is not None:
            offer(m_ls, "ccss")
            under = fix_partial_assignment(f_hat, m_ls, cfg.fix_probability, rng)
    return samples


def _run_instance(args: tuple[Ast, RunConfig]) -> list[Sample]:
    ast, cfg = args
    try:
        return highdiv_sample(Problem.from_ast(ast), cfg).samples
    except UnsatFormulaError:
        return []


def highdiv_sample_parallel(problem: Problem, cfg: RunConfig, workers: int) -> SampleSet:
    """Independent seeded runs merged in (instance, local index) order."""
    seeds = random.Random(cfg.seed)
    cfgs = [replace(cfg, seed=seeds.getrandbits(64)) for _ in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_run_instance, [(problem.ast, c) for c in cfgs]))
    merged = SampleSet(problem.ast)
    for batch in results:
        for sample in batch:
            if len(merged) >= cfg.k:
                break
            merged.add(sample)
    if not len(merged) and not any(results):
        # every instance hit unsat; confirm on the original formula
        highdiv_sample(problem, replace(cfg, k=1))
    return merged


def baseline_samples(problem: Problem, k: int, cdcl: CdclLimits | None = None) -> SampleSet:
    """The fixed-heuristic CDCL(T) model repeated ``k`` times, after deduplication."""
    f = problem.cnf
    out = SampleSet(problem.ast)
    for _ in range(k):
        m = solve(UnderApproximation(f), random.Random(0), cdcl, randomized=False)
        if not isinstance(m, Assignment):
            break
        out.add(project(m, f))
    return out
