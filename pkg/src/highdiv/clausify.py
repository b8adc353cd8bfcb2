"""AST to CNF conversion.

Comparisons become canonical :class:`LinearAtom` s (``<=`` or ``=``);
Boolean structure is clausified with polarity-aware Tseitin encoding so a
subformula only gets the implications its occurrence needs.  Integer
``ite`` terms are replaced by a fresh integer variable ``v`` plus the
guarded equalities ``c -> v = then`` and ``!c -> v = else``.
"""

from __future__ import annotations

from typing import Callable, Union

from .core import EQ, LE, Clause, CnfFormula, LinearAtom, Literal, make_atom
from .smtlib import INT, Ast, NonlinearError

Lit = Union[Literal, bool]

POS, NEG, BOTH = 1, -1, 0


def linearize(ast: Ast, nid: int, var_of: Callable[[int], int]) -> tuple[dict[int, int], int]:
    """Return ``(coeffs, const)`` with the term equal to ``sum(c*x) + const``.

    ``var_of`` maps an ``int_var`` or Int ``ite`` node id to an integer var-id.
    """
    node = ast[nid]
    k = node.kind
    if k == "int_const":
        return {}, node.value
    if k in ("int_var", "ite"):
        return {var_of(nid): 1}, 0
    if k in ("plus", "minus"):
        parts = [linearize(ast, c, var_of) for c in node.children]
        if k == "minus":
            if len(parts) == 1:
                parts = [_scale(parts[0], -1)]
            else:
                parts = [parts[0]] + [_scale(p, -1) for p in parts[1:]]
        coeffs: dict[int, int] = {}
        const = 0
        for cs, d in parts:
            for v, c in cs.items():
                coeffs[v] = coeffs.get(v, 0) + c
            const += d
        return coeffs, const
    if k == "times":
        a, b = (linearize(ast, c, var_of) for c in node.children)
        if a[0] and b[0]:
            raise NonlinearError("nonlinear multiplication")
        if a[0]:
            a, b = b, a
        return _scale(b, a[1])
    raise NonlinearError(f"not a linear integer term: {k}")


def _scale(term: tuple[dict[int, int], int], factor: int) -> tuple[dict[int, int], int]:
    coeffs, const = term
    return {v: c * factor for v, c in coeffs.items()}, const * factor


def normalize_atom(ast: Ast, nid: int, var_of: Callable[[int], int] | None = None) -> tuple[LinearAtom | bool, bool]:
    """Canonical ``(atom, polarity)`` equivalent to a comparison node over the integers.

    Strict and ``>=`` comparisons are closed with integrality and always
    rewritten to a positive ``<=``: ``x > k`` becomes ``-x <= -k - 1``.
    """
    if var_of is None:
        index = {name: i for i, name in enumerate(ast.int_vars)}

        def var_of(n: int) -> int:
            node = ast[n]
            if node.kind != "int_var":
                raise NonlinearError("integer ite needs a clausification context")
            return index[node.value]

    node = ast[nid]
    lhs, rhs = node.children
    lc, ld = linearize(ast, lhs, var_of)
    rc, rd = linearize(ast, rhs, var_of)
    diff = dict(lc)
    for v, c in rc.items():
        diff[v] = diff.get(v, 0) - c
    d = ld - rd  # node is: sum(diff) + d  <op>  0
    neg = {v: -c for v, c in diff.items()}
    k = node.kind
    if k == "le":
        return make_atom(diff, -d, LE), True
    if k == "lt":
        return make_atom(diff, -d - 1, LE), True
    if k == "ge":
        return make_atom(neg, d, LE), True
    if k == "gt":
        return make_atom(neg, d - 1, LE), True
    if k == "eq":
        return make_atom(diff, -d, EQ), True
    raise ValueError(f"node {nid} ({k}) is not a comparison")


def _neg(lit: Lit) -> Lit:
    return (not lit) if isinstance(lit, bool) else lit.negate()


class _Clausifier:
    def __init__(self, ast: Ast):
        self.ast = ast
        self.int_names = list(ast.int_vars)
        self.int_aux = [False] * len(self.int_names)
        self.bool_names = list(ast.bool_vars)
        self.bool_aux = [False] * len(self.bool_names)
        self.int_index = {n: i for i, n in enumerate(self.int_names)}
        self.bool_index = {n: i for i, n in enumerate(self.bool_names)}
        self.atoms: list[LinearAtom] = []
        self.atom_ids: dict[LinearAtom, int] = {}
        self.clauses: list[tuple[Literal, ...]] = []
        self.clause_set: set[frozenset] = set()
        self.aux_of: dict[int, Lit] = {}
        self.done: dict[int, set[int]] = {}
        self.ite_vars: dict[int, int] = {}
        self.contradiction = False

    # -- tables -------------------------------------------------------------
    def atom_literal(self, atom: LinearAtom | bool, positive: bool = True) -> Lit:
        if isinstance(atom, bool):
            return atom == positive
        aid = self.atom_ids.get(atom)
        if aid is None:
            aid = len(self.atoms)
            self.atoms.append(atom)
            self.atom_ids[atom] = aid
        return Literal.atom(aid, positive)

    def fresh_bool(self) -> int:
        self.bool_names.append(f"_t{len(self.bool_names)}")
        self.bool_aux.append(True)
        return len(self.bool_names) - 1

    def var_of(self, nid: int) -> int:
        node = self.ast[nid]
        if node.kind == "int_var":
            return self.int_index[node.value]
        v = self.ite_vars.get(nid)
        if v is None:
            v = len(self.int_names)
            self.int_names.append(f"_ite{v}")
            self.int_aux.append(True)
            self.ite_vars[nid] = v
            cond, then, other = node.children
            c = self.lit(cond, BOTH)
            for guard, branch in ((_neg(c), then), (c, other)):
                coeffs, const = linearize(self.ast, branch, self.var_of)
                eq = {w: -x for w, x in coeffs.items()}
                eq[v] = eq.get(v, 0) + 1
                self.add_clause([guard, self.atom_literal(make_atom(eq, const, EQ))])
        return v

    def add_clause(self, lits: list[Lit]) -> None:
        out: list[Literal] = []
        for lit in lits:
            if lit is True:
                return
            if lit is False:
                continue
            if lit.arith and not lit.positive and self.atoms[lit.ident].rel == EQ:
                # not (t = k)  <=>  t <= k - 1  or  -t <= -k - 1
                atom = self.atoms[lit.ident]
                below = make_atom(atom.coeffs, atom.const - 1, LE)
                above = make_atom([(v, -c) for v, c in atom.coeffs], -atom.const - 1, LE)
                expanded = [self.atom_literal(below), self.atom_literal(above)]
            else:
                expanded = [lit]
            for e in expanded:
                if e is True:
                    return
                if e is False:
                    continue
                if e.negate() in out:
                    return
                if e not in out:
                    out.append(e)
        if not out:
            self.contradiction = True
            return
        key = frozenset(out)
        if key in self.clause_set:
            return
        self.clause_set.add(key)
        self.clauses.append(tuple(out))

    # -- encoding -----------------------------------------------------------
    def lit(self, nid: int, pol: int) -> Lit:
        """Literal L for node ``nid``: pol>0 needs L -> node, pol<0 needs node -> L."""
        node = self.ast[nid]
        k = node.kind
        if k == "bool_const":
            return node.value
        if k == "bool_var":
            return Literal.boolean(self.bool_index[node.value])
        if k in ("le", "lt", "ge", "gt") or (k == "eq" and self.ast.sort(node.children[0]) == INT):
            atom, positive = normalize_atom(self.ast, nid, self.var_of)
            return self.atom_literal(atom, positive)
        if k == "not":
            return _neg(self.lit(node.children[0], -pol))
        if k in ("and", "or", "implies"):
            return self._junction(nid, pol)
        if k == "ite":
            return self._gate(nid, pol, self._ite_clauses)
        if k == "eq":
            return self._gate(nid, pol, self._iff_clauses)
        raise ValueError(f"unexpected Boolean node kind {k}")

    def _children_signed(self, nid: int) -> list[tuple[int, bool]]:
        node = self.ast[nid]
        if node.kind == "implies":
            return [(node.children[0], False), (node.children[1], True)]
        return [(c, True) for c in node.children]

    def _child_lit(self, child: int, sign: bool, pol: int) -> Lit:
        return self.lit(child, pol) if sign else _neg(self.lit(child, -pol))

    def _junction(self, nid: int, pol: int) -> Lit:
        is_and = self.ast[nid].kind == "and"
        kids = self._children_signed(nid)
        # constant folding first; a single surviving child needs no auxiliary
        if nid not in self.aux_of:
            lits = [self._child_lit(c, s, pol) for c, s in kids]
            absorbing = not is_and
            if any(l is absorbing for l in lits):
                return absorbing
            rest = [l for l in lits if not isinstance(l, bool)]
            if not rest:
                return is_and
            if len(rest) == 1:
                return rest[0]
        return self._gate(nid, pol, self._junction_clauses)

    def _gate(self, nid: int, pol: int, emit) -> Lit:
        t = self.aux_of.get(nid)
        if t is None:
            t = Literal.boolean(self.fresh_bool())
            self.aux_of[nid] = t
            self.done[nid] = set()
        want = {POS, NEG} if pol == BOTH else {pol}
        for p in sorted(want - self.done[nid]):
            self.done[nid].add(p)
            emit(nid, p, t)
        return t

    def _junction_clauses(self, nid: int, p: int, t: Literal) -> None:
        is_and = self.ast[nid].kind == "and"
        kids = [self._child_lit(c, s, p) for c, s in self._children_signed(nid)]
        if is_and == (p == POS):
            # t -> every child (and, positive) / every child -> ... (or, negative)
            for kl in kids:
                self.add_clause([_neg(t), kl] if p == POS else [t, _neg(kl)])
        else:
            if p == POS:
                self.add_clause([_neg(t)] + kids)
            else:
                self.add_clause([t] + [_neg(kl) for kl in kids])

    def _ite_clauses(self, nid: int, p: int, t: Literal) -> None:
        cond, a, b = self.ast[nid].children
        c = self.lit(cond, BOTH)
        la, lb = self.lit(a, p), self.lit(b, p)
        if p == POS:
            self.add_clause([_neg(t), _neg(c), la])
            self.add_clause([_neg(t), c, lb])
        else:
            self.add_clause([t, _neg(c), _neg(la)])
            self.add_clause([t, c, _neg(lb)])

    def _iff_clauses(self, nid: int, p: int, t: Literal) -> None:
        a, b = self.ast[nid].children
        la, lb = self.lit(a, BOTH), self.lit(b, BOTH)
        if p == POS:
            self.add_clause([_neg(t), _neg(la), lb])
            self.add_clause([_neg(t), la, _neg(lb)])
        else:
            self.add_clause([t, la, lb])
            self.add_clause([t, _neg(la), _neg(lb)])

    def assert_node(self, nid: int, positive: bool = True) -> None:
        node = self.ast[nid]
        k = node.kind
        if k == "not":
            self.assert_node(node.children[0], not positive)
        elif (k == "and" and positive) or (k == "or" and not positive):
            for c in node.children:
                self.assert_node(c, positive)
        elif k == "implies" and not positive:
            self.assert_node(node.children[0], True)
            self.assert_node(node.children[1], False)
        elif (k == "or" and positive) or k == "implies":
            lits = [self._child_lit(c, s, POS) for c, s in self._children_signed(nid)]
            self.add_clause(lits)
        elif positive:
            self.add_clause([self.lit(nid, POS)])
        else:
            self.add_clause([_neg(self.lit(nid, NEG))])

    def result(self) -> CnfFormula:
        if self.contradiction:
            b = self.fresh_bool()
            self.clauses += [(Literal.boolean(b),), (Literal.boolean(b, False),)]
        clauses = [Clause(lits) for lits in self.clauses]
        return CnfFormula(clauses, self.atoms, self.int_names, self.bool_names, self.int_aux, self.bool_aux)


def to_cnf(ast: Ast) -> CnfFormula:
    """Equisatisfiable CNF for the conjunction of the AST's roots.

    Declared variables keep their declaration order as ids; auxiliary
    variables come after them.  A root that simplifies to ``false`` yields
    the contradictory pair ``(b) & (!b)`` on a fresh auxiliary ``b``.
    """
    cl = _Clausifier(ast)
    for root in ast.roots:
        cl.assert_node(root)
    return cl.result()
