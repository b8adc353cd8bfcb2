"""Random instance generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from types import SimpleNamespace

import numpy as np

from highdiv.core import EQ, LE, Clause, CnfFormula, LinearAtom, Literal, make_atom

BOX = 20


def random_atom(rng: random.Random, n_ints: int, max_vars: int = 3, lo: int = -8, hi: int = 8,
                eq_prob: float = 0.2) -> LinearAtom:
    while True:
        vs = rng.sample(range(n_ints), rng.randint(1, min(max_vars, n_ints)))
        coeffs = {v: rng.choice([c for c in range(lo, hi + 1) if c]) for v in vs}
        rel = EQ if rng.random() < eq_prob else LE
        atom = make_atom(coeffs, rng.randint(lo, hi), rel)
        if isinstance(atom, LinearAtom):
            return atom


def box_atoms(n_ints: int, bound: int = BOX) -> list[LinearAtom]:
    out = []
    for v in range(n_ints):
        out.append(make_atom({v: 1}, bound, LE))
        out.append(make_atom({v: -1}, bound, LE))
    return out


def random_formula(rng: random.Random, n_ints: int = 4, n_bools: int = 2, n_clauses: int = 8,
                   max_len: int = 3, boxed: bool = True, eq_prob: float = 0.2) -> CnfFormula:
    """Random CNF; with ``boxed`` every int var also gets unit bounds ``[-BOX, BOX]``."""
    atoms: list[LinearAtom] = []
    index: dict[LinearAtom, int] = {}

    def atom_id(a: LinearAtom) -> int:
        if a not in index:
            index[a] = len(atoms)
            atoms.append(a)
        return index[a]

    clauses = []
    for _ in range(rng.randint(1, n_clauses)):
        lits: list[Literal] = []
        for _ in range(rng.randint(1, max_len)):
            if n_bools and rng.random() < 0.3:
                lit = Literal.boolean(rng.randrange(n_bools), rng.random() < 0.5)
            else:
                lit = Literal.atom(atom_id(random_atom(rng, n_ints, eq_prob=eq_prob)), rng.random() < 0.7)
            if lit not in lits and lit.negate() not in lits:
                lits.append(lit)
        clauses.append(Clause(tuple(lits)))
    if boxed:
        for a in box_atoms(n_ints):
            clauses.append(Clause((Literal.atom(atom_id(a)),)))
    return CnfFormula(clauses, atoms, [f"x{i}" for i in range(n_ints)], [f"b{i}" for i in range(n_bools)])


def int_grid(n: int, bound: int = BOX) -> np.ndarray:
    """All points of ``[-bound, bound]^n`` as rows."""
    axis = np.arange(-bound, bound + 1, dtype=np.int64)
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _axes(n: int, bound: int) -> list[np.ndarray]:
    axis = np.arange(-bound, bound + 1, dtype=np.int16)
    return [axis.reshape([-1 if i == v else 1 for i in range(n)]) for v in range(n)]


def _lhs(coeffs, axes, shape) -> np.ndarray:
    lhs = np.zeros(shape, dtype=np.int16)
    for v, c in coeffs:
        lhs = lhs + np.int16(c) * axes[v]
    return np.broadcast_to(lhs, shape)


def atom_truth(atom: LinearAtom, grid: np.ndarray) -> np.ndarray:
    lhs = np.zeros(grid.shape[0], dtype=np.int64)
    for v, c in atom.coeffs:
        lhs += c * grid[:, v]
    return lhs <= atom.const if atom.rel == LE else lhs == atom.const


def brute_force_sat(f: CnfFormula, bound: int = BOX, fixed: dict[int, int] | None = None) -> bool:
    """Exhaustive satisfiability over ``[-bound, bound]`` for every int var and all Boolean vectors."""
    n = f.num_ints
    shape = (2 * bound + 1,) * n
    axes = _axes(n, bound)
    base = np.ones(shape, dtype=bool)
    for v, val in (fixed or {}).items():
        base &= np.broadcast_to(axes[v] == val, shape)
    cache: dict[int, np.ndarray] = {}

    def truth(a: int) -> np.ndarray:
        if a not in cache:
            atom = f.atoms[a]
            lhs = _lhs(atom.coeffs, axes, shape)
            cache[a] = lhs <= atom.const if atom.rel == LE else lhs == atom.const
        return cache[a]

    arith_part = []
    for clause in f.clauses:
        part = np.zeros(shape, dtype=bool)
        for lit in clause.literals:
            if lit.arith:
                t = truth(lit.ident)
                part |= t if lit.positive else ~t
        arith_part.append(part)
    for bits in itertools.product([False, True], repeat=f.num_bools):
        ok = base.copy()
        for clause, part in zip(f.clauses, arith_part):
            if any(not lit.arith and bits[lit.ident] == lit.positive for lit in clause.literals):
                continue
            ok &= part
            if not ok.any():
                break
        if ok.any():
            return True
    return False


def conjunction_sat(constraints: list[tuple[tuple[tuple[int, int], ...], int, str]], n: int,
                    bound: int = BOX) -> bool:
    shape = (2 * bound + 1,) * n
    axes = _axes(n, bound)
    ok = np.ones(shape, dtype=bool)
    for coeffs, const, rel in constraints:
        lhs = _lhs(coeffs, axes, shape)
        ok &= (lhs <= const) if rel == LE else (lhs == const)
    return bool(ok.any())


# ---------------------------------------------------------------------------
# SMT-LIB instance suites


def _decls(ints, bools=()) -> str:
    out = "(set-logic QF_LIA)\n"
    out += "".join(f"(declare-fun {v} () Int)\n" for v in ints)
    out += "".join(f"(declare-fun {b} () Bool)\n" for b in bools)
    return out


def _num(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _range(v: str, lo: int, hi: int) -> str:
    return f"(assert (and (<= {_num(lo)} {v}) (<= {v} {_num(hi)})))\n"


def diversity_instances() -> list[str]:
    """Ten instances with far more than 10^4 models each."""
    xyz = ["x", "y", "z"]
    boxes = "".join(_range(v, 0, 1000) for v in xyz)
    out = [
        _decls(xyz) + boxes
        + "(assert (or (<= (+ x y) 800) (>= z 500)))\n"
        + "(assert (or (< x y) (> z 100)))\n"
        + "(assert (or (>= (- x z) 10) (<= y 900)))\n",
        _decls(xyz) + boxes
        + "(assert (or (<= (- x y) 5) (>= (+ y z) 1200)))\n"
        + "(assert (or (not (= x 17)) (< z 40)))\n"
        + "(assert (or (>= (* 3 x) (+ y 20)) (<= z 700)))\n",
        _decls(xyz, ["p", "q"]) + boxes
        + "(assert (or p (<= (+ x y z) 1500)))\n"
        + "(assert (or (not p) q (>= x 300)))\n"
        + "(assert (=> q (distinct x y)))\n",
        _decls(["a", "b", "c", "d"]) + "".join(_range(v, -500, 500) for v in "abcd")
        + "(assert (or (<= (- a b) 10) (<= (- b a) 10)))\n"
        + "(assert (or (>= (+ c d) 0) (>= a 100)))\n"
        + "(assert (or (< d 250) (> b (- 200))))\n",
        _decls(xyz) + boxes
        + "(assert (= (+ x y) (+ z 500)))\n"
        + "(assert (or (< x 400) (> y 200)))\n"
        + "(assert (or (<= z 300) (>= (- x y) (- 100))))\n",
        _decls(xyz, ["f"]) + boxes
        + "(assert (ite f (< x y) (> x z)))\n"
        + "(assert (or (<= (+ x z) 1200) (>= y 600)))\n"
        + "(assert (or (not f) (<= (* 2 z) 1500)))\n",
        _decls(["u", "v", "w"]) + "".join(_range(v, -1000, 1000) for v in "uvw")
        + "(assert (or (<= (+ u v) 0) (>= (- u w) 50)))\n"
        + "(assert (or (> (+ v w) (- 300)) (< u (- 500))))\n"
        + "(assert (or (<= u 800) (<= v 800) (<= w 800)))\n",
        _decls(xyz) + boxes
        + "(assert (let ((s (+ x y))) (or (<= s 900) (>= s 1100))))\n"
        + "(assert (or (>= (- z x) 0) (<= z 250)))\n"
        + "(assert (or (< y 950) (> x 50)))\n",
        _decls(["x", "y", "z", "t"]) + "".join(_range(v, 0, 1000) for v in ["x", "y", "z", "t"])
        + "(assert (= t (ite (<= x y) (- y x) (- x y))))\n"
        + "(assert (or (<= t 600) (>= z 400)))\n"
        + "(assert (or (>= (+ x y) 100) (<= z 900)))\n",
        _decls(xyz, ["g", "h"]) + boxes
        + "(assert (or g h (<= x 500)))\n"
        + "(assert (or (not g) (>= (+ y z) 600)))\n"
        + "(assert (or (not h) (< (- y z) 300)))\n",
    ]
    return out


def validity_instances() -> list[str]:
    """Twenty formulas: boxes, octagons, disjunctive regions, planted equalities."""
    out = list(diversity_instances())
    out.append(_decls(["x", "y"]) + _range("x", -50, 50) + _range("y", -3, 7))
    out.append(_decls(["x", "y"])
               + "(assert (and (<= (+ x y) 40) (<= (- x y) 40) (<= (- y x) 40) (>= (+ x y) (- 40))))\n")
    out.append(_decls(["x", "y", "z"])
               + "(assert (and (<= (- x y) 3) (<= (- y z) 3) (<= (- z x) 3) (<= (+ x y) 100) (>= (+ y z) (- 100))))\n")
    out.append(_decls(["x", "y"])
               + "(assert (or (and (>= x 10) (<= x 20) (>= y 10) (<= y 20)) "
               + "(and (>= x (- 20)) (<= x (- 10)) (>= y (- 20)) (<= y (- 10)))))\n")
    out.append(_decls(["x", "y", "z"])
               + "(assert (= (+ x (* 2 y)) 7))\n(assert (= (- z x) 3))\n"
               + _range("y", -100, 100))
    out.append(_decls(["a", "b", "c", "d"])
               + "(assert (= a (+ b c)))\n(assert (= (* 2 d) (+ (* 2 b) 4)))\n"
               + "(assert (or (<= a 10) (>= c 20)))\n" + _range("b", -30, 30) + _range("c", -30, 30))
    out.append(_decls(["x", "y"], ["p", "q", "r"])
               + "(assert (xor p q))\n(assert (=> r (> x y)))\n(assert (or r (<= (+ x y) 5)))\n"
               + _range("x", -40, 40) + _range("y", -40, 40))
    out.append(_decls(["x", "y", "z"])
               + "(assert (distinct x y z))\n" + "".join(_range(v, 0, 4) for v in "xyz"))
    out.append(_decls(["x", "y"])
               + "(assert (= (* 3 x) (+ (* 3 y) 6)))\n" + _range("y", -200, 200))
    out.append(_decls(["x", "y", "z"], ["p"])
               + "(assert (ite p (= z (+ x 1)) (= z (- y 1))))\n"
               + "(assert (not (= x y)))\n" + "".join(_range(v, -9, 9) for v in "xyz"))
    return out


def parse_instances(texts):
    from highdiv.sampler import Problem
    from highdiv.smtlib import parse_script

    return [Problem.from_ast(parse_script(t)) for t in texts]


# -- local search oracles ---------------------------------------------------


def closure_by_rescan(seed: set[int], constraints: list[frozenset]) -> set[int]:
    """Least fixpoint by repeated full passes over every constraint."""
    out = set(seed)
    while True:
        grown = False
        for vs in constraints:
            if vs & out and not vs <= out:
                out |= vs
                grown = True
        if not grown:
            return out


def random_constraint_formula(rng: random.Random, n_ints: int = 10) -> CnfFormula:
    """Random clauses of sparse atoms; some atoms are reused so frequencies vary."""
    pool = [random_atom(rng, n_ints, max_vars=2, eq_prob=0.15) for _ in range(rng.randint(1, 12))]
    atoms = list(dict.fromkeys(pool))
    clauses = []
    for _ in range(rng.randint(1, 15)):
        ids = rng.sample(range(len(atoms)), rng.randint(1, min(3, len(atoms))))
        clauses.append(Clause(tuple(Literal.atom(a, rng.random() < 0.6) for a in ids)))
    return CnfFormula(clauses, atoms, [f"x{i}" for i in range(n_ints)], [])


def literal_holds(f: CnfFormula, lit: Literal, ints: dict[int, int], bools=None) -> bool:
    if not lit.arith:
        return bools[lit.ident] == lit.positive
    atom = f.atoms[lit.ident]
    lhs = sum(c * ints[v] for v, c in atom.coeffs)
    truth = lhs <= atom.const if atom.rel == LE else lhs == atom.const
    return truth == lit.positive


def feasible_members(x: int, f: CnfFormula, ints: dict[int, int], lo: int = -100, hi: int = 100) -> set[int]:
    """Values of ``x`` in ``[lo, hi]`` keeping, per clause, some literal on ``x`` that is true now."""
    out = set()
    for v in range(lo, hi + 1):
        moved = dict(ints)
        moved[x] = v
        ok = True
        for clause in f.clauses:
            anchors = [l for l in clause.literals if l.arith and f.atoms[l.ident].coeff(x)
                       and literal_holds(f, l, ints)]
            if anchors and not any(literal_holds(f, l, moved) for l in anchors):
                ok = False
                break
        if ok:
            out.add(v)
    return out


def planted_model_formula(rng: random.Random, n_ints: int = 3) -> tuple[CnfFormula, dict[int, int]]:
    """Random clauses each repaired to hold at a random planted point."""
    point = {v: rng.randint(-30, 30) for v in range(n_ints)}
    atoms: list[LinearAtom] = []
    index: dict[LinearAtom, int] = {}
    clauses = []
    for _ in range(rng.randint(1, 6)):
        lits = []
        for _ in range(rng.randint(1, 3)):
            a = random_atom(rng, n_ints, eq_prob=0.15)
            if a not in index:
                index[a] = len(atoms)
                atoms.append(a)
            lit = Literal.atom(index[a], rng.random() < 0.6)
            if lit not in lits and lit.negate() not in lits:
                lits.append(lit)
        view = SimpleNamespace(atoms=atoms)
        if not any(literal_holds(view, l, point) for l in lits):
            lits[0] = lits[0].negate()
        clauses.append(Clause(tuple(lits)))
    return CnfFormula(clauses, atoms, [f"x{i}" for i in range(n_ints)], []), point


def random_bam_case(rng: random.Random):
    """A random (formula, assignment, var, falsified literal) draw, or None when nothing is falsified."""
    from highdiv.core import Assignment

    n = rng.randint(1, 4)
    f = random_formula(rng, n_ints=n, n_bools=0, boxed=False, eq_prob=0.15)
    alpha = Assignment({v: rng.randint(-30, 30) for v in range(n)})
    falsified = [l for c in f.clauses for l in c.literals if not literal_holds(f, l, alpha.int_values)]
    if not falsified:
        return None
    lit = rng.choice(falsified)
    x = rng.choice(f.atoms[lit.ident].variables)
    return f, alpha, x, lit


# -- coverage oracle -----------------------------------------------------------

ORACLE_OPS = {
    "and": lambda v: all(v), "or": lambda v: any(v), "not": lambda v: not v[0],
    "implies": lambda v: (not v[0]) or v[1], "ite": lambda v: v[1] if v[0] else v[2],
    "eq": lambda v: v[0] == v[1], "le": lambda v: v[0] <= v[1], "ge": lambda v: v[0] >= v[1],
    "lt": lambda v: v[0] < v[1], "gt": lambda v: v[0] > v[1], "plus": sum,
    "minus": lambda v: -v[0] if len(v) == 1 else v[0] - sum(v[1:]), "times": lambda v: v[0] * v[1],
}


def oracle_value(ast, nid: int, env):
    node = ast.nodes[nid]
    if node.kind in ("int_var", "bool_var"):
        return env[node.value]
    if node.kind in ("int_const", "bool_const"):
        return node.value
    return ORACLE_OPS[node.kind]([oracle_value(ast, c, env) for c in node.children])


def oracle_coverage(ast, samples) -> tuple[int, int]:
    """Covered and total bits by re-evaluating every node and comparing bit strings."""
    nodes = set()

    def walk(n):
        if n in nodes:
            return
        node = ast.nodes[n]
        if node.children or node.kind.endswith("_var"):
            nodes.add(n)
        for c in node.children:
            walk(c)

    for r in ast.roots:
        walk(r)
    covered = total = 0
    for n in nodes:
        if ast.nodes[n].sort == "Bool":
            total += 1
            covered += len({bool(oracle_value(ast, n, s)) for s in samples}) == 2
        else:
            total += 64
            strings = [format(oracle_value(ast, n, s) % 2**64, "064b") for s in samples]
            covered += sum(len({b[i] for b in strings}) == 2 for i in range(64))
    return covered, total
