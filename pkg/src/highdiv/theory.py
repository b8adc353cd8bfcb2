"""Conjunction solver for linear integer constraints.

A bounded-variable general simplex over exact rationals decides rational
feasibility and explains infeasibility with the conflicting tableau row;
branch-and-bound on fractional basic variables closes the integer gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Hashable, Iterable, Union

from .core import EQ, LE, CnfFormula, LinearAtom
from .errors import BudgetExhaustedError

DEFAULT_BUDGET = 10_000


@dataclass(frozen=True)
class TheoryAssertion:
    """Atom ``atom_id`` asserted true (``positive``) or false.

    A false ``<=`` atom means ``-t <= -k - 1``.  False equalities are never
    handed to the theory solver.
    """

    atom_id: int
    positive: bool = True


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[int, int], ...]
    const: int
    rel: str
    tag: Hashable


@dataclass
class TheorySat:
    witness: dict[int, int]


@dataclass
class TheoryUnsat:
    core: frozenset


TheoryVerdict = Union[TheorySat, TheoryUnsat]


def assertion_constraint(a: TheoryAssertion, atom: LinearAtom) -> Constraint:
    if a.positive:
        return Constraint(atom.coeffs, atom.const, atom.rel, a)
    if atom.rel != LE:
        raise ValueError("negated equalities cannot be asserted to the theory solver")
    return Constraint(tuple((v, -c) for v, c in atom.coeffs), -atom.const - 1, LE, a)


def _tighten(c: Constraint) -> Constraint | None:
    """Divide by the coefficient gcd; ``None`` for an equality with no integer solution."""
    g = 0
    for _, a in c.coeffs:
        g = gcd(g, a)
    if g <= 1:
        return c
    if c.rel == EQ:
        if c.const % g:
            return None
        return Constraint(tuple((v, a // g) for v, a in c.coeffs), c.const // g, EQ, c.tag)
    return Constraint(tuple((v, a // g) for v, a in c.coeffs), c.const // g, LE, c.tag)


class Simplex:
    """Tableau ``basic = sum(a * nonbasic)`` with per-variable bounds and bound tags.

    Variables ``0..n-1`` are the problem variables, one slack per row follows.
    """

    def __init__(self, num_vars: int):
        self.n = num_vars
        self.rows: dict[int, dict[int, Fraction]] = {}
        self.value: list[Fraction] = [Fraction(0)] * num_vars
        self.lower: list[Fraction | None] = [None] * num_vars
        self.upper: list[Fraction | None] = [None] * num_vars
        self.lower_tag: list = [None] * num_vars
        self.upper_tag: list = [None] * num_vars
        self.conflict_row: int | None = None
        self.conflict: frozenset | None = None
        self.asserted: set = set()

    def add_row(self, coeffs: Iterable[tuple[int, int]]) -> int:
        s = len(self.value)
        row: dict[int, Fraction] = {}
        val = Fraction(0)
        for v, a in coeffs:
            if v in self.rows:  # substitute the basic variable's definition
                for w, b in self.rows[v].items():
                    row[w] = row.get(w, Fraction(0)) + a * b
            else:
                row[v] = row.get(v, Fraction(0)) + a
            val += a * self.value[v]
        self.rows[s] = {w: b for w, b in row.items() if b != 0}
        self.value.append(val)
        self.lower.append(None)
        self.upper.append(None)
        self.lower_tag.append(None)
        self.upper_tag.append(None)
        return s

    def _update_nonbasic(self, j: int, v: Fraction) -> None:
        delta = v - self.value[j]
        if delta == 0:
            return
        self.value[j] = v
        for b, row in self.rows.items():
            a = row.get(j)
            if a:
                self.value[b] += a * delta

    def set_lower(self, x: int, v: Fraction, tag) -> bool:
        """Tighten the lower bound; returns False on an immediate bound clash."""
        self.asserted.add(tag)
        if self.lower[x] is not None and v <= self.lower[x]:
            return True
        self.lower[x], self.lower_tag[x] = v, tag
        if self.upper[x] is not None and v > self.upper[x]:
            self.conflict = frozenset({tag, self.upper_tag[x]})
            return False
        if x not in self.rows and self.value[x] < v:
            self._update_nonbasic(x, v)
        return True

    def set_upper(self, x: int, v: Fraction, tag) -> bool:
        self.asserted.add(tag)
        if self.upper[x] is not None and v >= self.upper[x]:
            return True
        self.upper[x], self.upper_tag[x] = v, tag
        if self.lower[x] is not None and v < self.lower[x]:
            self.conflict = frozenset({tag, self.lower_tag[x]})
            return False
        if x not in self.rows and self.value[x] > v:
            self._update_nonbasic(x, v)
        return True

    def _pivot(self, b: int, j: int) -> None:
        row = self.rows.pop(b)
        a = row.pop(j)
        # j = (b - sum(row)) / a
        new_row = {w: -c / a for w, c in row.items()}
        new_row[b] = 1 / a
        for k, other in self.rows.items():
            c = other.pop(j, None)
            if c is None:
                continue
            for w, d in new_row.items():
                nv = other.get(w, 0) + c * d
                if nv:
                    other[w] = nv
                else:
                    other.pop(w, None)
        self.rows[j] = new_row

    def _pivot_and_update(self, b: int, j: int, v: Fraction) -> None:
        theta = (v - self.value[b]) / self.rows[b][j]
        self.value[b] = v
        self.value[j] += theta
        for k, row in self.rows.items():
            if k != b:
                c = row.get(j)
                if c:
                    self.value[k] += c * theta
        self._pivot(b, j)

    def check(self) -> bool:
        """Restore bound consistency with Bland's rule; False means rationally infeasible."""
        if self.conflict is not None:
            return False
        while True:
            bad = None
            for b in sorted(self.rows):
                lo, hi, val = self.lower[b], self.upper[b], self.value[b]
                if (lo is not None and val < lo) or (hi is not None and val > hi):
                    bad = b
                    break
            if bad is None:
                return True
            b = bad
            row = self.rows[b]
            increase = self.lower[b] is not None and self.value[b] < self.lower[b]
            pick = None
            for j in sorted(row):
                a = row[j]
                can_up = self.upper[j] is None or self.value[j] < self.upper[j]
                can_down = self.lower[j] is None or self.value[j] > self.lower[j]
                if increase and ((a > 0 and can_up) or (a < 0 and can_down)):
                    pick = j
                    break
                if not increase and ((a < 0 and can_up) or (a > 0 and can_down)):
                    pick = j
                    break
            if pick is None:
                self.conflict_row = b
                self.conflict = explain_conflict(self)
                return False
            self._pivot_and_update(b, pick, self.lower[b] if increase else self.upper[b])


def explain_conflict(state: Simplex) -> frozenset:
    """Bound tags of the infeasible row (its Farkas certificate).

    Without a recorded conflict row, every asserted tag is returned.
    """
    b = state.conflict_row
    if b is None:
        if state.conflict is not None:
            return state.conflict
        return frozenset(state.asserted)
    increase = state.lower[b] is not None and state.value[b] < state.lower[b]
    tags = {state.lower_tag[b] if increase else state.upper_tag[b]}
    for j, a in state.rows[b].items():
        if (a > 0) == increase:
            tags.add(state.upper_tag[j])
        else:
            tags.add(state.lower_tag[j])
    return frozenset(tags)


@dataclass
class _Branch:
    var: int
    bound: int
    upper: bool


@dataclass
class _Search:
    constraints: list[Constraint]
    variables: list[int]
    budget: int
    nodes: int = 0
    branch_tags: list = field(default_factory=list)

    def build(self, bounds: list[tuple[_Branch, object]]) -> tuple[Simplex, bool]:
        index = {v: i for i, v in enumerate(self.variables)}
        sx = Simplex(len(self.variables))
        ok = True
        for c in self.constraints:
            if len(c.coeffs) == 1:
                v, a = c.coeffs[0]
                x = index[v]
                bound = Fraction(c.const, a)
                if c.rel == EQ:
                    ok = ok and sx.set_lower(x, bound, c.tag) and sx.set_upper(x, bound, c.tag)
                elif a > 0:
                    ok = ok and sx.set_upper(x, Fraction(floor(bound)), c.tag)
                else:
                    ok = ok and sx.set_lower(x, Fraction(ceil(bound)), c.tag)
            else:
                s = sx.add_row((index[v], a) for v, a in c.coeffs)
                ok = ok and sx.set_upper(s, Fraction(c.const), c.tag)
                if c.rel == EQ:
                    ok = ok and sx.set_lower(s, Fraction(c.const), c.tag)
            if not ok:
                return sx, False
        for br, tag in bounds:
            x = index[br.var]
            if br.upper:
                ok = sx.set_upper(x, Fraction(br.bound), tag)
            else:
                ok = sx.set_lower(x, Fraction(br.bound), tag)
            if not ok:
                return sx, False
        return sx, True

    def solve(self, bounds: list[tuple[_Branch, object]]) -> TheoryVerdict:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExhaustedError(f"branch-and-bound exceeded {self.budget} nodes")
        sx, ok = self.build(bounds)
        if not ok or not sx.check():
            return TheoryUnsat(explain_conflict(sx))
        fractional = None
        for i in range(sx.n):
            if i in sx.rows and sx.value[i].denominator != 1:
                fractional = i
                break
        if fractional is None:
            return TheorySat({self.variables[i]: int(sx.value[i]) for i in range(sx.n)})
        val = sx.value[fractional]
        var = self.variables[fractional]
        core: set = set()
        for br in (_Branch(var, floor(val), True), _Branch(var, floor(val) + 1, False)):
            tag = ("branch", len(self.branch_tags))
            self.branch_tags.append(tag)
            res = self.solve(bounds + [(br, tag)])
            if isinstance(res, TheorySat):
                return res
            core |= res.core - {tag}
        return TheoryUnsat(frozenset(core))


def solve_constraints(constraints: Iterable[Constraint], budget: int = DEFAULT_BUDGET) -> TheoryVerdict:
    """Integer feasibility of a conjunction of tagged linear constraints."""
    tightened: list[Constraint] = []
    for c in constraints:
        if not c.coeffs:
            holds = 0 <= c.const if c.rel == LE else c.const == 0
            if not holds:
                return TheoryUnsat(frozenset({c.tag}))
            continue
        t = _tighten(c)
        if t is None:
            return TheoryUnsat(frozenset({c.tag}))
        tightened.append(t)
    variables = sorted({v for c in tightened for v, _ in c.coeffs})
    return _Search(tightened, variables, budget).solve([])


def check_conjunction(
    assertions: Iterable[TheoryAssertion],
    f: CnfFormula,
    budget: int = DEFAULT_BUDGET,
    extra: Iterable[Constraint] = (),
) -> TheoryVerdict:
    """Decide the conjunction of asserted atoms of ``f`` plus any ``extra`` constraints.

    Raises :class:`BudgetExhaustedError` when branch-and-bound runs out of nodes.
    """
    constraints = [assertion_constraint(a, f.atoms[a.atom_id]) for a in assertions]
    return solve_constraints(constraints + list(extra), budget)
