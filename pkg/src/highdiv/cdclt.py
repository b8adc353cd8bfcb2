"""Stochastic CDCL(T) over the Boolean skeleton of a :class:`CnfFormula`.

Skeleton variables are the formula's Boolean variables followed by one
encoder per atom.  Literals are encoded as ``2*var + (1 if negated)``.
Decisions pick an unassigned variable uniformly at random and give it a
random phase; the theory solver is consulted once the skeleton assignment
is complete, and its unsat cores come back as learnt blocking clauses.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import EQ, LE, Assignment, Clause, CnfFormula, Literal, evaluate_formula, make_atom
from .errors import BudgetExhaustedError, VerificationError
from .theory import DEFAULT_BUDGET, Constraint, TheoryAssertion, TheorySat, check_conjunction

UNASSIGNED = -1


@dataclass
class UnderApproximation:
    """``base`` with some integer variables pinned to fixed values."""

    base: CnfFormula
    fixed_values: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for v in self.fixed_values:
            if not 0 <= v < self.base.num_ints:
                raise ValueError(f"fixed variable {v} is not in the base formula")


@dataclass
class CdclLimits:
    max_conflicts: int = 20_000
    theory_budget: int = DEFAULT_BUDGET
    restart_unit: int = 64


class Unsat:
    def __repr__(self) -> str:
        return "Unsat"


class Unknown:
    def __init__(self, reason: str = ""):
        self.reason = reason

    def __repr__(self) -> str:
        return f"Unknown({self.reason!r})"


UNSAT = Unsat()
SolveResult = Union[Assignment, Unsat, Unknown]


def luby(i: int) -> int:
    """The i-th element (1-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


def _neg(lit: int) -> int:
    return lit ^ 1


def split_disequalities(f: CnfFormula) -> CnfFormula:
    """Add ``eq | t <= k-1 | -t <= -k-1`` for every equality atom that occurs negated.

    The theory solver only receives true equalities, so a false one needs
    one of its two strict sides to be asserted.  Clausified formulas never
    negate equalities and come back unchanged.
    """
    negated = sorted({l.ident for c in f.clauses for l in c.literals
                      if l.arith and not l.positive and f.atoms[l.ident].rel == EQ})
    if not negated:
        return f
    atoms = list(f.atoms)
    index = {a: i for i, a in enumerate(atoms)}
    clauses = list(f.clauses)
    for a in negated:
        atom = atoms[a]
        lits = [Literal.atom(a)]
        for side in (make_atom(atom.coeffs, atom.const - 1, LE),
                     make_atom([(v, -c) for v, c in atom.coeffs], -atom.const - 1, LE)):
            if side not in index:
                index[side] = len(atoms)
                atoms.append(side)
            lits.append(Literal.atom(index[side]))
        clauses.append(Clause(tuple(lits)))
    return CnfFormula(clauses, atoms, f.int_names, f.bool_names, f.int_aux, f.bool_aux)


class CdclEngine:
    """Search state for one solve: trail, watches, learnt clauses."""

    def __init__(
        self,
        f: CnfFormula,
        rng: random.Random | None = None,
        fixed_values: dict[int, int] | None = None,
        limits: CdclLimits | None = None,
        randomized: bool = True,
    ):
        self.f = f
        self.skeleton = split_disequalities(f)
        self.rng = rng or random.Random(0)
        self.fixed = dict(fixed_values or {})
        self.limits = limits or CdclLimits()
        self.randomized = randomized
        nb = f.num_bools
        self.num_bools = nb
        self.num_vars = nb + len(self.skeleton.atoms)
        self.assign = [UNASSIGNED] * self.num_vars
        self.level = [0] * self.num_vars
        self.reason: list[Optional[int]] = [None] * self.num_vars
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.num_original = 0
        self.watches: list[list[int]] = [[] for _ in range(2 * self.num_vars)]
        self.units: list[int] = []
        self.units_done = False
        self.empty_clause = False
        self.last_learnt: list[int] | None = None
        self.conflicts = 0
        for clause in self.skeleton.clauses:
            lits = []
            for lit in clause.literals:
                var = nb + lit.ident if lit.arith else lit.ident
                lits.append(2 * var + (0 if lit.positive else 1))
            self.add_clause(lits)
        self.num_original = len(self.clauses)

    # -- clause database ----------------------------------------------------
    def add_clause(self, lits: list[int]) -> int:
        lits = list(dict.fromkeys(lits))
        idx = len(self.clauses)
        self.clauses.append(lits)
        if not lits:
            self.empty_clause = True
        elif len(lits) == 1:
            self.units.append(idx)
        else:
            self.watches[lits[0]].append(idx)
            self.watches[lits[1]].append(idx)
        return idx

    def lit_value(self, lit: int) -> Optional[bool]:
        a = self.assign[lit >> 1]
        if a == UNASSIGNED:
            return None
        return (a ^ (lit & 1)) == 1

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    def enqueue(self, lit: int, reason: Optional[int]) -> None:
        var = lit >> 1
        assert self.assign[var] == UNASSIGNED, "variable assigned twice"
        self.assign[var] = 1 - (lit & 1)
        self.level[var] = self.decision_level
        self.reason[var] = reason
        self.trail.append(lit)

    # -- the three CDCL primitives -----------------------------------------
    def propagate(self) -> Optional[int]:
        """Unit propagation to fixpoint; returns the index of a conflicting clause."""
        if not self.units_done:
            self.units_done = True
            for idx in self.units:
                lit = self.clauses[idx][0]
                val = self.lit_value(lit)
                if val is False:
                    return idx
                if val is None:
                    self.enqueue(lit, idx)
        while self.qhead < len(self.trail):
            false_lit = _neg(self.trail[self.qhead])
            self.qhead += 1
            ws = self.watches[false_lit]
            keep: list[int] = []
            i = 0
            conflict = None
            while i < len(ws):
                ci = ws[i]
                i += 1
                c = self.clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if self.lit_value(first) is True:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(c)):
                    if self.lit_value(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        self.watches[c[1]].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if self.lit_value(first) is False:
                    conflict = ci
                    keep.extend(ws[i:])
                    break
                self.enqueue(first, ci)
            self.watches[false_lit] = keep
            if conflict is not None:
                return conflict
        return None

    def decide(self) -> Optional[tuple[int, bool]]:
        """Assign a random phase to a uniformly chosen unassigned variable."""
        free = [v for v in range(self.num_vars) if self.assign[v] == UNASSIGNED]
        if not free:
            return None
        if self.randomized:
            var = free[self.rng.randrange(len(free))]
            phase = self.rng.random() < 0.5
        else:
            var, phase = free[0], False
        self.trail_lim.append(len(self.trail))
        self.enqueue(2 * var + (0 if phase else 1), None)
        return var, phase

    def resolve_conflict(self, conflict: int) -> int:
        """First-UIP analysis of ``conflict``; adds the learnt clause and returns the backjump level.

        Returns -1 when the conflict does not depend on any decision.
        """
        clause = self.clauses[conflict]
        conf_level = max((self.level[l >> 1] for l in clause), default=0)
        if conf_level == 0:
            return -1
        if conf_level < self.decision_level:
            self.backtrack(conf_level)
        seen = [False] * self.num_vars
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        lits = clause
        while True:
            for q in lits:
                if p is not None and q == p:
                    continue
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    if self.level[v] >= conf_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            lits = self.clauses[self.reason[p >> 1]]
        learnt[0] = _neg(p)
        if len(learnt) == 1:
            back = 0
        else:
            best = max(range(1, len(learnt)), key=lambda i: self.level[learnt[i] >> 1])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            back = self.level[learnt[1] >> 1]
        self.last_learnt = learnt
        return back

    def backtrack(self, level: int) -> None:
        if self.decision_level <= level:
            return
        start = self.trail_lim[level]
        for lit in self.trail[start:]:
            v = lit >> 1
            self.assign[v] = UNASSIGNED
            self.reason[v] = None
        del self.trail[start:]
        del self.trail_lim[level:]
        self.qhead = min(self.qhead, len(self.trail))

    def _learn(self) -> None:
        learnt = self.last_learnt
        self.last_learnt = None
        idx = len(self.clauses)
        self.clauses.append(learnt)
        if len(learnt) > 1:
            self.watches[learnt[0]].append(idx)
            self.watches[learnt[1]].append(idx)
        self.enqueue(learnt[0], idx)

    # -- theory interface ---------------------------------------------------
    def theory_check(self):
        """Check the asserted atoms; returns a model, a lemma clause index, or ``Unknown``."""
        f = self.skeleton
        assertions = []
        for a, atom in enumerate(f.atoms):
            val = self.assign[self.num_bools + a]
            if val == 1:
                assertions.append(TheoryAssertion(a, True))
            elif val == 0 and atom.rel == LE:
                assertions.append(TheoryAssertion(a, False))
        involved = {v for t in assertions for v, _ in f.atoms[t.atom_id].coeffs}
        extra = [Constraint(((v, 1),), val, EQ, ("fixed", v)) for v, val in self.fixed.items() if v in involved]
        try:
            verdict = check_conjunction(assertions, f, self.limits.theory_budget, extra)
        except BudgetExhaustedError:
            return Unknown("theory budget exhausted")
        if isinstance(verdict, TheorySat):
            ints = {v: 0 for v in range(f.num_ints)}
            ints.update(self.fixed)
            ints.update(verdict.witness)
            bools = {b: self.assign[b] == 1 for b in range(self.num_bools)}
            return Assignment(ints, bools)
        lemma = []
        for t in verdict.core:
            if isinstance(t, TheoryAssertion):
                var = self.num_bools + t.atom_id
                lemma.append(2 * var + (1 if t.positive else 0))
        lemma = list(dict.fromkeys(lemma))
        # watch the two literals assigned last so the watch invariant holds after backjumping
        lemma.sort(key=lambda l: self.level[l >> 1], reverse=True)
        idx = len(self.clauses)
        self.clauses.append(lemma)
        if len(lemma) > 1:
            self.watches[lemma[0]].append(idx)
            self.watches[lemma[1]].append(idx)
        return idx

    # -- main loop ----------------------------------------------------------
    def solve(self) -> SolveResult:
        if self.empty_clause:
            return UNSAT
        restart_count = 1
        next_restart = luby(restart_count) * self.limits.restart_unit
        since_restart = 0
        while True:
            conflict = self.propagate()
            if conflict is not None:
                self.conflicts += 1
                since_restart += 1
                if self.conflicts > self.limits.max_conflicts:
                    return Unknown("conflict limit")
                if not self.clauses[conflict]:
                    return UNSAT
                level = self.resolve_conflict(conflict)
                if level < 0:
                    return UNSAT
                self.backtrack(level)
                self._learn()
                continue
            if since_restart >= next_restart and self.decision_level > 0:
                restart_count += 1
                next_restart = luby(restart_count) * self.limits.restart_unit
                since_restart = 0
                self.backtrack(0)
                continue
            if self.decide() is not None:
                continue
            result = self.theory_check()
            if isinstance(result, (Assignment, Unknown)):
                if isinstance(result, Assignment):
                    if not evaluate_formula(self.f, result):
                        raise VerificationError("CDCL(T) produced a model that fails the formula")
                return result
            # theory conflict: the lemma is falsified by the current trail
            if not self.clauses[result]:
                return UNSAT
            self.conflicts += 1
            since_restart += 1
            if self.conflicts > self.limits.max_conflicts:
                return Unknown("conflict limit")
            level = self.resolve_conflict(result)
            if level < 0:
                return UNSAT
            self.backtrack(level)
            self._learn()


def solve(
    f_under: UnderApproximation,
    rng: random.Random,
    limits: CdclLimits | None = None,
    randomized: bool = True,
) -> SolveResult:
    """Model of ``f_under.base`` respecting the fixed values, ``UNSAT``, or ``Unknown``."""
    engine = CdclEngine(f_under.base, rng, f_under.fixed_values, limits, randomized)
    return engine.solve()


def fix_partial_assignment(
    f_hat: CnfFormula, m_ls: Assignment, p: float, rng: random.Random
) -> UnderApproximation:
    """Pin each integer variable to its value in ``m_ls`` independently with probability ``p``."""
    fixed = {}
    for v in range(f_hat.num_ints):
        if rng.random() < p:
            fixed[v] = m_ls.int_values[v]
    return UnderApproximation(f_hat, fixed)
