"""Gaussian elimination of top-level equalities and the inverse model mapping."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import EQ, Assignment, Clause, CnfFormula, LinearAtom, Literal, evaluate_formula, make_atom
from .errors import DivisibilityError, InconsistentEqualityError, VerificationError


@dataclass(frozen=True)
class Elimination:
    """``var = (sum(c*x) + offset) / divisor`` over surviving variables."""

    var: int
    coeffs: tuple[tuple[int, int], ...]
    offset: int
    divisor: int = 1

    def value(self, ints: dict[int, int]) -> int:
        num = self.offset + sum(c * ints[v] for v, c in self.coeffs)
        q, r = divmod(num, self.divisor)
        if r:
            raise DivisibilityError(f"{num} is not divisible by {self.divisor} for variable {self.var}")
        return q


@dataclass
class Substitution:
    steps: list[Elimination] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __bool__(self) -> bool:
        return bool(self.steps)

    @property
    def eliminated(self) -> list[int]:
        return [s.var for s in self.steps]


def _pick_pivot(atom: LinearAtom) -> tuple[int, int] | None:
    unit = [(v, c) for v, c in atom.coeffs if abs(c) == 1]
    if unit:
        return unit[0]
    for v, c in atom.coeffs:
        if all(o % c == 0 for _, o in atom.coeffs) and atom.const % c == 0:
            return v, c
    return None


def _substitute(atom: LinearAtom, step: Elimination) -> LinearAtom | bool:
    b = atom.coeff(step.var)
    if b == 0:
        return atom
    coeffs = {v: c for v, c in atom.coeffs if v != step.var}
    # b*var = b*(sum(e*x) + offset)/q ; divisor divides every numerator coefficient
    for v, e in step.coeffs:
        coeffs[v] = coeffs.get(v, 0) + b * e // step.divisor
    const = atom.const - b * step.offset // step.divisor
    return make_atom(coeffs, const, atom.rel)


def equation_solving(f: CnfFormula) -> tuple[CnfFormula, Substitution]:
    """Eliminate unit-clause equalities, returning the reduced formula and the substitution.

    Pivot: the lowest-id variable with coefficient +-1, otherwise a variable
    whose coefficient divides every other coefficient and the constant.
    Equalities with no such pivot stay in the formula.
    """
    clauses: list[list[tuple[LinearAtom | bool, bool] | Literal]] = []
    for clause in f.clauses:
        row = []
        for lit in clause.literals:
            row.append((f.atoms[lit.ident], lit.positive) if lit.arith else lit)
        clauses.append(row)

    subst = Substitution()
    stuck: set[LinearAtom] = set()
    while True:
        pick = None
        for i, row in enumerate(clauses):
            if len(row) == 1 and not isinstance(row[0], Literal):
                atom, positive = row[0]
                if positive and not isinstance(atom, bool) and atom.rel == EQ and atom not in stuck:
                    pivot = _pick_pivot(atom)
                    if pivot is None:
                        stuck.add(atom)
                        continue
                    pick = (i, atom, pivot)
                    break
        if pick is None:
            break
        i, atom, (var, a) = pick
        # a*var + sum(rest) = k  =>  var = (k - sum(rest)) / a
        sign = 1 if a > 0 else -1
        step = Elimination(
            var,
            tuple((v, -c * sign) for v, c in atom.coeffs if v != var),
            atom.const * sign,
            abs(a),
        )
        subst.steps.append(step)
        del clauses[i]
        new_clauses = []
        for row in clauses:
            new_row = []
            satisfied = False
            for item in row:
                if not isinstance(item, Literal):
                    sub = item[0] if isinstance(item[0], bool) else _substitute(item[0], step)
                    if isinstance(sub, bool):
                        if sub == item[1]:
                            satisfied = True
                            break
                        continue
                    item = (sub, item[1])
                new_row.append(item)
            if satisfied:
                continue
            if not new_row:
                raise InconsistentEqualityError(
                    f"eliminating {f.int_names[var]} leaves an unsatisfiable clause")
            new_clauses.append(new_row)
        clauses = new_clauses

    atoms: list[LinearAtom] = []
    atom_ids: dict[LinearAtom, int] = {}
    out: list[Clause] = []
    for row in clauses:
        lits: list[Literal] = []
        for item in row:
            if not isinstance(item, Literal):
                atom, positive = item
                if atom not in atom_ids:
                    atom_ids[atom] = len(atoms)
                    atoms.append(atom)
                lit = Literal.atom(atom_ids[atom], positive)
            else:
                lit = item
            if lit.negate() in lits:
                lits = []
                break
            if lit not in lits:
                lits.append(lit)
        if lits:
            out.append(Clause(tuple(lits)))
    f_hat = CnfFormula(out, atoms, list(f.int_names), list(f.bool_names), list(f.int_aux), list(f.bool_aux))
    return f_hat, subst


def model_convert(m_hat: Assignment, subst: Substitution, f: CnfFormula) -> Assignment:
    """Rebuild eliminated variables (last elimination first) and check the result against ``f``."""
    m = m_hat.copy()
    for step in reversed(subst.steps):
        m.int_values[step.var] = step.value(m.int_values)
    for i in range(f.num_ints):
        m.int_values.setdefault(i, 0)
    for b in range(f.num_bools):
        m.bool_values.setdefault(b, False)
    if not evaluate_formula(f, m):
        raise VerificationError("converted model does not satisfy the original formula")
    return m
