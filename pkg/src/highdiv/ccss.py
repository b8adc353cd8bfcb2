"""Context-constrained stochastic local search over a clausified SMT(LIA) formula.

The search starts from an isolation-based initial assignment (equality
system at zero, high-frequency system inside the feasible range of the
guiding model, everything else outside it) and then alternates an integer
mode driven by boundary-aware moves with a Boolean mode driven by flips.
Clause weights follow a PAWS-style increase/smooth scheme.
"""

from __future__ import annotations

import logging
import random
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import EQ, LE, Assignment, CnfFormula, Literal, evaluate_formula
from .errors import NoMoveError, VerificationError
from .intervals import NEG_INF, POS_INF, IntervalSet

log = logging.getLogger(__name__)


@dataclass
class SearchParams:
    lam: int = 50
    mode_switch_base: int = 20
    max_steps: int = 100_000
    window: int = 1000
    smooth_probability: float = 0.05
    move: str = "bam"  # "bam" or "cm" (critical move, for ablation)
    context_probability: bool = True
    debug_check_every: int = 0

    def __post_init__(self):
        if self.move not in ("bam", "cm"):
            raise ValueError(f"unknown move operator {self.move!r}")
        for name in ("lam", "mode_switch_base", "max_steps", "window"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SubsystemPartition:
    eq_vars: frozenset
    hf_vars: frozenset
    general_vars: frozenset
    lam: int


@dataclass
class MoveOperation:
    kind: str  # "bam" or "flip"
    var: int
    value: int | bool
    literal: Optional[Literal] = None
    interval: Optional[tuple[int, int]] = None
    score: int = 0


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# ---------------------------------------------------------------------------
# literal statistics


class LiteralStats:
    """How many iterations each literal has been satisfied, tracked per atom/Boolean.

    ``step_sat`` is computed lazily: the truth of an atom only changes when a
    move touches it, so we accumulate the length of each true stretch.
    """

    def __init__(self) -> None:
        self.step_total = 0
        self._acc: dict[tuple[bool, int], int] = defaultdict(int)
        self._since: dict[tuple[bool, int], int] = {}

    @classmethod
    def from_counts(cls, counts: dict[Literal, int], step_total: int) -> "LiteralStats":
        stats = cls()
        stats.step_total = step_total
        for lit, n in counts.items():
            key = (lit.arith, lit.ident)
            stats._acc[key] = n if lit.positive else step_total - n
        return stats

    def start(self, key: tuple[bool, int], true_now: bool) -> None:
        if true_now:
            self._since[key] = self.step_total

    def changed(self, key: tuple[bool, int], true_now: bool) -> None:
        if true_now:
            self._since[key] = self.step_total
        else:
            since = self._since.pop(key, None)
            if since is not None:
                self._acc[key] += self.step_total - since

    def step_sat(self, lit: Literal) -> int:
        key = (lit.arith, lit.ident)
        pos_count = self._acc.get(key, 0)
        since = self._since.get(key)
        if since is not None:
            pos_count += self.step_total - since
        return pos_count if lit.positive else self.step_total - pos_count


def context_probability(lit: Literal, stats: LiteralStats) -> float:
    """Probability of keeping ``lit``'s bound: ``1 - step_sat / step_total`` (1 with no history)."""
    if stats.step_total <= 0:
        return 1.0
    return 1.0 - stats.step_sat(lit) / stats.step_total


# ---------------------------------------------------------------------------
# subsystems


def _constraint_vars(f: CnfFormula) -> tuple[list[frozenset], list[frozenset]]:
    used = sorted({lit.ident for c in f.clauses for lit in c.literals if lit.arith})
    eqs, others = [], []
    for a in used:
        atom = f.atoms[a]
        (eqs if atom.rel == EQ else others).append(frozenset(atom.variables))
    return eqs, others


def _close(seed: set[int], constraints: list[frozenset]) -> set[int]:
    """Absorb every constraint reachable from ``seed`` through shared variables (worklist form)."""
    by_var: dict[int, list[int]] = defaultdict(list)
    for i, vs in enumerate(constraints):
        for v in vs:
            by_var[v].append(i)
    closed = set(seed)
    work = list(seed)
    used = [False] * len(constraints)
    while work:
        v = work.pop()
        for i in by_var.get(v, ()):
            if used[i]:
                continue
            used[i] = True
            for w in constraints[i]:
                if w not in closed:
                    closed.add(w)
                    work.append(w)
    return closed


def build_equality_system(f_hat: CnfFormula) -> set[int]:
    eqs, others = _constraint_vars(f_hat)
    seed = set().union(*eqs) if eqs else set()
    return _close(seed, others)


def variable_frequency(f: CnfFormula) -> dict[int, int]:
    """Number of literal occurrences containing each integer variable."""
    freq: dict[int, int] = defaultdict(int)
    for clause in f.clauses:
        for lit in clause.literals:
            if lit.arith:
                for v in f.atoms[lit.ident].variables:
                    freq[v] += 1
    return freq


def build_high_frequency_system(f_hat: CnfFormula, lam: int, eq_vars: Iterable[int]) -> set[int]:
    _, others = _constraint_vars(f_hat)
    freq = variable_frequency(f_hat)
    seed = {v for v, n in freq.items() if n > lam}
    return _close(seed, others) - set(eq_vars)


def partition_variables(f_hat: CnfFormula, lam: int) -> SubsystemPartition:
    eq = build_equality_system(f_hat)
    hf = build_high_frequency_system(f_hat, lam, eq)
    general = set(range(f_hat.num_ints)) - eq - hf
    return SubsystemPartition(frozenset(eq), frozenset(hf), frozenset(general), lam)


# ---------------------------------------------------------------------------
# intervals and moves


def literal_solution_set(coef: int, rest: int, const: int, rel: str, positive: bool) -> IntervalSet:
    """Values of ``x`` making ``coef*x + rest (rel) const`` have truth ``positive``."""
    if rel == EQ:
        num = const - rest
        if num % coef:
            point = IntervalSet.empty()
        else:
            point = IntervalSet.point(num // coef)
        return point if positive else point.complement()
    if positive:
        bound = const - rest
        if coef > 0:
            return IntervalSet.at_most(_floor_div(bound, coef))
        return IntervalSet.at_least(_ceil_div(bound, coef))
    # coef*x + rest >= const + 1
    bound = const + 1 - rest
    if coef > 0:
        return IntervalSet.at_least(_ceil_div(bound, coef))
    return IntervalSet.at_most(_floor_div(bound, coef))


def _lhs(f: CnfFormula, atom_id: int, values: dict[int, int]) -> int:
    return sum(c * values[v] for v, c in f.atoms[atom_id].coeffs)


def feasible_interval(x: int, f_hat: CnfFormula, m: Assignment) -> IntervalSet:
    """Range of ``x`` keeping ``m``'s true literals on ``x`` true, clause by clause.

    Within a clause the literal ranges are united; across clauses intersected.
    Clauses without a true literal on ``x`` do not constrain the result.
    """
    result = IntervalSet.full()
    ints = m.int_values
    for clause in f_hat.clauses:
        acc = None
        for lit in clause.literals:
            if not lit.arith:
                continue
            atom = f_hat.atoms[lit.ident]
            coef = atom.coeff(x)
            if coef == 0:
                continue
            lhs = _lhs(f_hat, lit.ident, ints)
            truth = (lhs <= atom.const) if atom.rel == LE else (lhs == atom.const)
            if truth != lit.positive:
                continue
            piece = literal_solution_set(coef, lhs - coef * ints[x], atom.const, atom.rel, lit.positive)
            acc = piece if acc is None else acc.union(piece)
        if acc is not None:
            result = result.intersect(acc)
    return result


def literal_delta(x: int, ell: Literal, alpha: Assignment, f: CnfFormula) -> int:
    """Smallest-magnitude nonzero change to ``x`` that makes the falsified ``ell`` true."""
    atom = f.atoms[ell.ident]
    coef = atom.coeff(x)
    if coef == 0:
        raise NoMoveError(f"variable {x} does not occur in the literal")
    cur = alpha.int_values[x]
    rest = _lhs(f, ell.ident, alpha.int_values) - coef * cur
    return _delta(coef, rest, atom.const, atom.rel, ell.positive, cur)


def _delta(coef: int, rest: int, const: int, rel: str, positive: bool, cur: int) -> int:
    if rel == EQ:
        if positive:
            num = const - rest
            if num % coef:
                raise NoMoveError("equality has no integer solution in this variable")
            d = num // coef - cur
        else:
            d = 1
        if d == 0:
            raise NoMoveError("literal is already satisfied")
        return d
    target = literal_solution_set(coef, rest, const, rel, positive)
    lo, hi = target.intervals[0]
    if lo == NEG_INF:
        d = hi - cur
    else:
        d = lo - cur
    if d == 0:
        raise NoMoveError("literal is already satisfied")
    return d


def _opposite_bound(coef: int, rest: int, const: int, rel: str, positive: bool, upper: bool) -> Optional[int]:
    """Bound on ``x`` from a contextual literal, on the requested side only."""
    if rel == EQ:
        if not positive:
            return None
        num = const - rest
        if num % coef:
            return None
        return num // coef
    piece = literal_solution_set(coef, rest, const, rel, positive)
    lo, hi = piece.intervals[0]
    if upper:
        return hi if lo == NEG_INF else None
    return lo if hi == POS_INF else None


def _bam_interval(
    cur: int,
    target: tuple[int, int, int, str, bool],
    ctx: Iterable[tuple[Literal, int, int, int, str, bool]],
    stats: LiteralStats,
    rng: random.Random,
    params: SearchParams,
) -> tuple[int, int]:
    coef, rest, const, rel, positive = target
    d = _delta(coef, rest, const, rel, positive, cur)
    if rel == EQ and positive:
        v = cur + d
        return v, v
    if params.move == "cm":
        v = cur + d
        return v, v
    upper_side = d > 0  # lower bound fixed by the target, context bounds the top
    fixed = cur + d
    best: Optional[int] = None
    for lit, c_coef, c_rest, c_const, c_rel, c_pos in ctx:
        if params.context_probability:
            p = context_probability(lit, stats)
            if p < 1.0 and rng.random() >= p:
                continue
        b = _opposite_bound(c_coef, c_rest, c_const, c_rel, c_pos, upper_side)
        if b is None:
            continue
        if upper_side:
            if b < fixed:
                continue
            if best is None or b < best:
                best = b
        else:
            if b > fixed:
                continue
            if best is None or b > best:
                best = b
    w = params.window
    if upper_side:
        hi = best if best is not None else fixed + w
        return fixed, min(hi, POS_INF)
    lo = best if best is not None else fixed - w
    return max(lo, NEG_INF), fixed


def contextual_literals(x: int, f: CnfFormula, alpha: Assignment) -> list[Literal]:
    """Literals of ``f`` containing ``x`` that are true under ``alpha``."""
    out = []
    seen = set()
    for clause in f.clauses:
        for lit in clause.literals:
            if lit.arith and lit not in seen and f.atoms[lit.ident].coeff(x) != 0:
                seen.add(lit)
                atom = f.atoms[lit.ident]
                lhs = _lhs(f, lit.ident, alpha.int_values)
                truth = (lhs <= atom.const) if atom.rel == LE else (lhs == atom.const)
                if truth == lit.positive:
                    out.append(lit)
    return out


def bam(
    x: int,
    ell: Literal,
    ctx: Iterable[Literal],
    alpha: Assignment,
    f: CnfFormula,
    stats: LiteralStats,
    rng: random.Random,
    params: SearchParams | None = None,
) -> MoveOperation:
    """Boundary-aware move: a uniform value for ``x`` that satisfies ``ell``.

    The target literal fixes one end of the sampling interval at its
    threshold; contextual literals, each kept with probability ``P(l)``,
    may tighten the other end.  With no surviving bound the open end is
    capped at ``params.window`` past the threshold.
    """
    params = params or SearchParams()
    ints = alpha.int_values
    cur = ints[x]
    atom = f.atoms[ell.ident]
    coef = atom.coeff(x)
    if coef == 0:
        raise NoMoveError(f"variable {x} does not occur in the literal")
    rest = _lhs(f, ell.ident, ints) - coef * cur
    ctx_rows = []
    for lit in ctx:
        a = f.atoms[lit.ident]
        c = a.coeff(x)
        if c == 0:
            continue
        ctx_rows.append((lit, c, _lhs(f, lit.ident, ints) - c * cur, a.const, a.rel, lit.positive))
    lo, hi = _bam_interval(cur, (coef, rest, atom.const, atom.rel, ell.positive), ctx_rows, stats, rng, params)
    value = IntervalSet([(lo, hi)]).sample(rng)
    return MoveOperation("bam", x, value, ell, (lo, hi))


def update_clause_weights(weights: list[int], falsified: Iterable[int], rng: random.Random,
                          smooth_probability: float = 0.05) -> None:
    """PAWS-style update: bump falsified clauses, or occasionally smooth all weights down."""
    if rng.random() < smooth_probability:
        for i, w in enumerate(weights):
            if w > 1:
                weights[i] = w - 1
    else:
        for i in falsified:
            weights[i] += 1


# ---------------------------------------------------------------------------
# isolation-based initialization


def isolation_based_initialize(
    f_hat: CnfFormula,
    m_cdclt: Optional[Assignment],
    partition: SubsystemPartition,
    rng: random.Random,
    window: int = 1000,
) -> Assignment:
    ints: dict[int, int] = {}
    for x in range(f_hat.num_ints):
        if x in partition.eq_vars:
            ints[x] = 0
            continue
        if m_cdclt is None:
            ints[x] = rng.randint(-window, window)
            continue
        feasible = feasible_interval(x, f_hat, m_cdclt)
        if x in partition.hf_vars:
            ints[x] = feasible.cap(window).sample(rng)
        else:
            outside = feasible.complement()
            if outside:
                ints[x] = outside.cap(window).sample(rng)
            else:
                ints[x] = rng.randint(-window, window)
    bools = {b: rng.random() < 0.5 for b in range(f_hat.num_bools)}
    return Assignment(ints, bools)


# ---------------------------------------------------------------------------
# the search


class CcssSearch:
    """Mutable local-search state over one formula."""

    def __init__(self, f: CnfFormula, params: SearchParams, rng: random.Random):
        self.f = f
        self.params = params
        self.rng = rng
        self.stats = LiteralStats()
        n_cl = len(f.clauses)
        self.weights = [1] * n_cl
        self.atom_coeffs = [a.coeffs for a in f.atoms]
        self.atom_const = [a.const for a in f.atoms]
        self.atom_is_le = [a.rel == LE for a in f.atoms]
        self.var_atoms: list[list[tuple[int, int]]] = [[] for _ in range(f.num_ints)]
        self.atom_occ: list[list[tuple[int, bool]]] = [[] for _ in f.atoms]
        self.bool_occ: list[list[tuple[int, bool]]] = [[] for _ in range(f.num_bools)]
        self.atom_polarities: list[set[bool]] = [set() for _ in f.atoms]
        used_atoms = set()
        for ci, clause in enumerate(f.clauses):
            for lit in clause.literals:
                if lit.arith:
                    self.atom_occ[lit.ident].append((ci, lit.positive))
                    self.atom_polarities[lit.ident].add(lit.positive)
                    used_atoms.add(lit.ident)
                else:
                    self.bool_occ[lit.ident].append((ci, lit.positive))
        for a in sorted(used_atoms):
            for v, c in self.atom_coeffs[a]:
                self.var_atoms[v].append((a, c))
        self.clause_has_int = [any(l.arith for l in c.literals) for c in f.clauses]
        self.clause_has_bool = [any(not l.arith for l in c.literals) for c in f.clauses]

    # -- state --------------------------------------------------------------
    def reset(self, alpha: Assignment) -> None:
        f = self.f
        self.ints = [alpha.int_values[i] for i in range(f.num_ints)]
        self.bools = [alpha.bool_values[b] for b in range(f.num_bools)]
        self.sums = [sum(c * self.ints[v] for v, c in coeffs) for coeffs in self.atom_coeffs]
        self.atom_true = [self._truth(a, s) for a, s in enumerate(self.sums)]
        self.sat_count = [0] * len(f.clauses)
        for ci, clause in enumerate(f.clauses):
            self.sat_count[ci] = sum(1 for lit in clause.literals if self._lit_true(lit))
        self.falsified: dict[int, None] = {ci: None for ci, n in enumerate(self.sat_count) if n == 0}
        self.stats = LiteralStats()
        for a, t in enumerate(self.atom_true):
            self.stats.start((True, a), t)
        for b, t in enumerate(self.bools):
            self.stats.start((False, b), t)

    def _truth(self, a: int, s: int) -> bool:
        return s <= self.atom_const[a] if self.atom_is_le[a] else s == self.atom_const[a]

    def _lit_true(self, lit: Literal) -> bool:
        if lit.arith:
            return self.atom_true[lit.ident] == lit.positive
        return self.bools[lit.ident] == lit.positive

    def assignment(self) -> Assignment:
        return Assignment(dict(enumerate(self.ints)), dict(enumerate(self.bools)))

    def falsified_weight(self) -> int:
        return sum(self.weights[ci] for ci in self.falsified)

    # -- scoring and moves ---------------------------------------------------
    def _int_effects(self, x: int, value: int) -> dict[int, int]:
        d = value - self.ints[x]
        changes: dict[int, int] = {}
        if d == 0:
            return changes
        for a, c in self.var_atoms[x]:
            new_true = self._truth(a, self.sums[a] + c * d)
            if new_true != self.atom_true[a]:
                for ci, pos in self.atom_occ[a]:
                    changes[ci] = changes.get(ci, 0) + (1 if new_true == pos else -1)
        return changes

    def _bool_effects(self, b: int) -> dict[int, int]:
        changes: dict[int, int] = {}
        cur = self.bools[b]
        for ci, pos in self.bool_occ[b]:
            changes[ci] = changes.get(ci, 0) + (-1 if cur == pos else 1)
        return changes

    def _score_changes(self, changes: dict[int, int]) -> int:
        score = 0
        for ci, dc in changes.items():
            before = self.sat_count[ci]
            after = before + dc
            if before == 0 and after > 0:
                score += self.weights[ci]
            elif before > 0 and after == 0:
                score -= self.weights[ci]
        return score

    def score(self, op: MoveOperation) -> int:
        if op.kind == "flip":
            return self._score_changes(self._bool_effects(op.var))
        return self._score_changes(self._int_effects(op.var, op.value))

    def apply(self, op: MoveOperation) -> None:
        stats = self.stats
        if op.kind == "flip":
            b = op.var
            changes = self._bool_effects(b)
            self.bools[b] = not self.bools[b]
            stats.changed((False, b), self.bools[b])
        else:
            x, value = op.var, op.value
            d = value - self.ints[x]
            if d == 0:
                return
            changes = {}
            for a, c in self.var_atoms[x]:
                s = self.sums[a] + c * d
                self.sums[a] = s
                new_true = self._truth(a, s)
                if new_true != self.atom_true[a]:
                    self.atom_true[a] = new_true
                    stats.changed((True, a), new_true)
                    for ci, pos in self.atom_occ[a]:
                        changes[ci] = changes.get(ci, 0) + (1 if new_true == pos else -1)
            self.ints[x] = value
        for ci, dc in changes.items():
            n = self.sat_count[ci] + dc
            self.sat_count[ci] = n
            if n == 0:
                self.falsified[ci] = None
            else:
                self.falsified.pop(ci, None)

    def _context_rows(self, x: int) -> list:
        cur = self.ints[x]
        rows = []
        for a, c in self.var_atoms[x]:
            truth = self.atom_true[a]
            if truth not in self.atom_polarities[a]:
                continue
            rest = self.sums[a] - c * cur
            rows.append((Literal.atom(a, truth), c, rest, self.atom_const[a],
                         LE if self.atom_is_le[a] else EQ, truth))
        return rows

    def make_bam(self, x: int, lit: Literal) -> Optional[MoveOperation]:
        a = lit.ident
        coef = next(c for atom, c in self.var_atoms[x] if atom == a)
        cur = self.ints[x]
        rest = self.sums[a] - coef * cur
        target = (coef, rest, self.atom_const[a], LE if self.atom_is_le[a] else EQ, lit.positive)
        try:
            lo, hi = _bam_interval(cur, target, self._context_rows(x), self.stats, self.rng, self.params)
        except NoMoveError:
            return None
        value = lo if lo == hi else IntervalSet([(lo, hi)]).sample(self.rng)
        return MoveOperation("bam", x, value, lit, (lo, hi))

    def _pick_best(self, ops: list[MoveOperation]) -> Optional[MoveOperation]:
        if not ops:
            return None
        top = max(op.score for op in ops)
        best = [op for op in ops if op.score == top]
        return best[self.rng.randrange(len(best))]

    def _int_candidates(self, clauses: Iterable[int]) -> list[MoveOperation]:
        ops: dict[tuple[int, Literal], MoveOperation] = {}
        for ci in clauses:
            for lit in self.f.clauses[ci].literals:
                if not lit.arith:
                    continue
                for v, _ in self.atom_coeffs[lit.ident]:
                    key = (v, lit)
                    if key in ops:
                        continue
                    op = self.make_bam(v, lit)
                    if op is not None:
                        op.score = self.score(op)
                        ops[key] = op
        return list(ops.values())

    def _bool_candidates(self, clauses: Iterable[int]) -> list[MoveOperation]:
        seen: dict[int, MoveOperation] = {}
        for ci in clauses:
            for lit in self.f.clauses[ci].literals:
                if lit.arith or lit.ident in seen:
                    continue
                op = MoveOperation("flip", lit.ident, not self.bools[lit.ident])
                op.score = self.score(op)
                seen[lit.ident] = op
        return list(seen.values())

    def int_step(self) -> Optional[MoveOperation]:
        falsified = list(self.falsified)
        cands = self._int_candidates(falsified)
        best = self._pick_best([op for op in cands if op.score > 0])
        if best is not None:
            return best
        update_clause_weights(self.weights, falsified, self.rng, self.params.smooth_probability)
        with_int = [ci for ci in falsified if self.clause_has_int[ci]]
        if not with_int:
            return None
        ci = with_int[self.rng.randrange(len(with_int))]
        lits = {lit for lit in self.f.clauses[ci].literals if lit.arith}
        pool = [op for op in cands if op.literal in lits]
        for op in pool:
            op.score = self.score(op)
        return self._pick_best(pool)

    def bool_step(self) -> Optional[MoveOperation]:
        falsified = list(self.falsified)
        cands = self._bool_candidates(falsified)
        best = self._pick_best([op for op in cands if op.score > 0])
        if best is not None:
            return best
        update_clause_weights(self.weights, falsified, self.rng, self.params.smooth_probability)
        with_bool = [ci for ci in falsified if self.clause_has_bool[ci]]
        if not with_bool:
            return None
        ci = with_bool[self.rng.randrange(len(with_bool))]
        return self._pick_best(self._bool_candidates([ci]))

    def _proportions(self) -> tuple[float, float]:
        n_int = n_bool = 0
        for ci in self.falsified:
            for lit in self.f.clauses[ci].literals:
                if lit.arith:
                    n_int += 1
                else:
                    n_bool += 1
        total = n_int + n_bool
        if total == 0:
            return 0.0, 0.0
        return n_bool / total, n_int / total

    def run(self, alpha: Assignment, deadline: float | None = None) -> Optional[Assignment]:
        self.reset(alpha)
        params = self.params
        p_bool, p_int = self._proportions()
        mode = "int" if p_int > 0 or p_bool == 0 else "bool"
        best_falsified = len(self.falsified)
        non_improving = 0
        while self.stats.step_total <= params.max_steps:
            if not self.falsified:
                model = self.assignment()
                if not evaluate_formula(self.f, model):
                    raise VerificationError("local search state disagrees with the formula")
                return model
            if deadline is not None and self.stats.step_total % 64 == 0 and time.monotonic() >= deadline:
                return None
            op = self.int_step() if mode == "int" else self.bool_step()
            if op is None:
                mode = "bool" if mode == "int" else "int"
                non_improving = 0
            else:
                self.apply(op)
            self.stats.step_total += 1
            if params.debug_check_every and self.stats.step_total % params.debug_check_every == 0:
                self._debug_check()
            n = len(self.falsified)
            if n < best_falsified:
                best_falsified = n
                non_improving = 0
            else:
                non_improving += 1
            p_bool, p_int = self._proportions()
            if mode == "int" and non_improving > params.mode_switch_base * p_int and p_bool > 0:
                mode, non_improving, best_falsified = "bool", 0, n
            elif mode == "bool" and non_improving > params.mode_switch_base * p_bool and p_int > 0:
                mode, non_improving, best_falsified = "int", 0, n
        return None

    def _debug_check(self) -> None:
        alpha = self.assignment()
        for a, coeffs in enumerate(self.atom_coeffs):
            assert self.sums[a] == sum(c * alpha.int_values[v] for v, c in coeffs)
        fresh = {ci for ci, clause in enumerate(self.f.clauses)
                 if not any(self._lit_true(l) for l in clause.literals)}
        assert fresh == set(self.falsified), "incremental falsified set drifted"


def ccss_search(
    f_hat: CnfFormula,
    m_cdclt: Optional[Assignment],
    params: SearchParams | None = None,
    rng: random.Random | None = None,
    partition: SubsystemPartition | None = None,
    deadline: float | None = None,
) -> Optional[Assignment]:
    """Run one local search guided by ``m_cdclt``; a verified model of ``f_hat`` or ``None``."""
    params = params or SearchParams()
    rng = rng or random.Random(0)
    partition = partition or partition_variables(f_hat, params.lam)
    alpha = isolation_based_initialize(f_hat, m_cdclt, partition, rng, params.window)
    return CcssSearch(f_hat, params, rng).run(alpha, deadline)
