import random

import numpy as np
import pytest

from helpers import _axes, random_formula
from highdiv.core import EQ, LE, Assignment, Clause, CnfFormula, Literal, evaluate_formula, make_atom
from highdiv.errors import DivisibilityError, InconsistentEqualityError, VerificationError
from highdiv.preprocess import Elimination, Substitution, equation_solving, model_convert


def formula(clauses, names=("x", "y")):
    atoms, index, out = [], {}, []
    for clause in clauses:
        lits = []
        for atom, pos in clause:
            if atom not in index:
                index[atom] = len(atoms)
                atoms.append(atom)
            lits.append(Literal.atom(index[atom], pos))
        out.append(Clause(tuple(lits)))
    return CnfFormula(out, atoms, list(names), [])


def test_constant_equality_eliminated():
    f = formula([[(make_atom({0: 1}, 5, EQ), True)], [(make_atom({0: 1, 1: 1}, 7, LE), True)]])
    f_hat, s = equation_solving(f)
    assert [f_hat.atoms[l.ident] for c in f_hat.clauses for l in c.literals] == [make_atom({1: 1}, 2, LE)]
    assert s.steps == [Elimination(0, (), 5, 1)]
    assert model_convert(Assignment({1: 0}), s, f).int_values == {0: 5, 1: 0}


def test_difference_equality_eliminated():
    f = formula([[(make_atom({0: 1, 1: -1}, 0, EQ), True)], [(make_atom({0: 1, 1: 1}, 4, LE), True)]])
    f_hat, s = equation_solving(f)
    (clause,) = f_hat.clauses
    assert f_hat.atoms[clause.literals[0].ident] == make_atom({1: 2}, 4, LE)
    m = model_convert(Assignment({1: 2}), s, f)
    assert m.int_values == {0: 2, 1: 2}
    # equisatisfiable over the box
    for y in range(-10, 11):
        hat_ok = evaluate_formula(f_hat, Assignment({0: 0, 1: y}))
        orig_ok = any(evaluate_formula(f, Assignment({0: x, 1: y})) for x in range(-10, 11))
        assert hat_ok == orig_ok


def test_no_unit_equalities_is_identity():
    f = formula([[(make_atom({0: 1}, 3, EQ), True), (make_atom({1: 1}, 1, LE), True)]])
    f_hat, s = equation_solving(f)
    assert not s and len(f_hat.clauses) == 1
    m = Assignment({0: 3, 1: 9})
    assert model_convert(m, s, f) == m


def test_non_pivotable_equality_kept():
    f = formula([[(make_atom({0: 2, 1: 3}, 7, EQ), True)]])
    f_hat, s = equation_solving(f)
    assert not s and f_hat.atoms[0].rel == EQ


def test_divisor_pivot():
    # 2x + 4y = 6: pivot x with divisor 2
    f = formula([[(make_atom({0: 2, 1: 4}, 6, EQ), True)], [(make_atom({1: 1}, 10, LE), True)]])
    f_hat, s = equation_solving(f)
    assert s.steps[0].var == 0 and s.steps[0].divisor == 2
    assert model_convert(Assignment({1: 4}), s, f).int_values[0] == -5


def test_inconsistent_equalities():
    f = formula([[(make_atom({0: 1}, 1, EQ), True)], [(make_atom({0: 1}, 2, EQ), True)]])
    with pytest.raises(InconsistentEqualityError):
        equation_solving(f)


def test_divisibility_error():
    step = Elimination(0, ((1, 1),), 0, 2)
    with pytest.raises(DivisibilityError):
        model_convert(Assignment({1: 3}), Substitution([step]), formula([]))


def test_verification_error():
    f = formula([[(make_atom({0: 1}, 0, LE), True)]])
    with pytest.raises(VerificationError):
        model_convert(Assignment({0: 5, 1: 0}), Substitution(), f)


def test_deterministic():
    rng = random.Random(4)
    f = planted(rng)
    a, sa = equation_solving(f)
    b, sb = equation_solving(f)
    assert sa.steps == sb.steps and str(a) == str(b)


def planted(rng: random.Random) -> CnfFormula:
    """Random formula plus unit equalities that hold at a random planted point."""
    base = random_formula(rng, n_ints=4, n_bools=1, boxed=False)
    point = [rng.randint(-3, 3) for _ in range(4)]
    extra = []
    for _ in range(rng.randint(1, 2)):
        vs = rng.sample(range(4), rng.randint(1, 3))
        coeffs = {v: rng.choice([-2, -1, 1, 1, 2]) for v in vs}
        eq = make_atom(coeffs, sum(c * point[v] for v, c in coeffs.items()), EQ)
        if not isinstance(eq, bool):
            extra.append(eq)
    atoms = list(base.atoms)
    clauses = list(base.clauses)
    for eq in extra:
        atoms.append(eq)
        clauses.append(Clause((Literal.atom(len(atoms) - 1),)))
    for v in range(4):
        for sign in (1, -1):
            atoms.append(make_atom({v: sign}, 6, LE))
            clauses.append(Clause((Literal.atom(len(atoms) - 1),)))
    return CnfFormula(clauses, atoms, base.int_names, base.bool_names)


def models_on_grid(f: CnfFormula, bound: int = 6, limit: int = 20):
    n = f.num_ints
    shape = (2 * bound + 1,) * n
    axes = _axes(n, bound)
    out = []
    for bits in range(2 ** f.num_bools):
        bools = {b: bool(bits >> b & 1) for b in range(f.num_bools)}
        ok = np.ones(shape, dtype=bool)
        for clause in f.clauses:
            cl = np.zeros(shape, dtype=bool)
            for lit in clause.literals:
                if lit.arith:
                    atom = f.atoms[lit.ident]
                    lhs = np.zeros(shape, dtype=np.int16)
                    for v, c in atom.coeffs:
                        lhs = lhs + np.int16(c) * axes[v]
                    t = lhs <= atom.const if atom.rel == LE else lhs == atom.const
                    cl |= t if lit.positive else ~t
                elif bools[lit.ident] == lit.positive:
                    cl[...] = True
            ok &= cl
        for idx in np.argwhere(ok)[:limit]:
            out.append(Assignment({v: int(idx[v]) - bound for v in range(n)}, dict(bools)))
    return out


def test_round_trip_planted_equalities():
    rng = random.Random(99)
    converted = 0
    for _ in range(500):
        f = planted(rng)
        try:
            f_hat, s = equation_solving(f)
        except InconsistentEqualityError:
            continue
        assert len(f_hat.clauses) <= len(f.clauses)
        assert f_hat.num_ints == f.num_ints
        eliminated = set(s.eliminated)
        for step in s.steps:
            assert step.divisor >= 1
        # triangular: a step never mentions a variable eliminated earlier
        for i, step in enumerate(s.steps):
            assert not {v for v, _ in step.coeffs} & set(s.eliminated[: i + 1])
        for m_hat in models_on_grid(f_hat, limit=5):
            for v in eliminated:
                m_hat.int_values[v] = 0
            m = model_convert(m_hat, s, f)
            assert evaluate_formula(f, m)
            converted += 1
    assert converted > 500
