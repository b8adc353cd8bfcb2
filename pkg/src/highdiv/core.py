"""Formula, assignment and evaluation types shared by every stage of the sampler."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Union

LE = "le"
EQ = "eq"

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1
_INT128_LIMIT = 2**127


@dataclass(frozen=True)
class LinearAtom:
    """``sum(a_i * x_i) <= k`` or ``sum(a_i * x_i) = k`` in canonical form.

    Build through :func:`make_atom`; it sorts the coefficients, drops zeros,
    fixes the sign of equalities and folds variable-free atoms to a bool.
    """

    coeffs: tuple[tuple[int, int], ...]
    const: int
    rel: str

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.coeffs)

    def coeff(self, var: int) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def negated_le(self) -> "LinearAtom | bool":
        """The integer closure of ``not (t <= k)``, i.e. ``-t <= -k - 1``."""
        assert self.rel == LE
        return make_atom({v: -c for v, c in self.coeffs}, -self.const - 1, LE)


def make_atom(coeffs: Mapping[int, int] | Iterable[tuple[int, int]], const: int, rel: str) -> LinearAtom | bool:
    if rel not in (LE, EQ):
        raise ValueError(f"unknown relation {rel!r}")
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    merged: dict[int, int] = {}
    for v, c in items:
        merged[v] = merged.get(v, 0) + c
    terms = tuple(sorted((v, c) for v, c in merged.items() if c != 0))
    if not terms:
        return 0 <= const if rel == LE else const == 0
    if rel == EQ and terms[0][1] < 0:
        terms = tuple((v, -c) for v, c in terms)
        const = -const
    return LinearAtom(terms, const, rel)


class Literal(NamedTuple):
    """A Boolean variable or an arithmetic atom, possibly negated.

    ``ident`` is a Boolean var-id when ``arith`` is false, an atom-id otherwise.
    """

    arith: bool
    ident: int
    positive: bool = True

    def negate(self) -> "Literal":
        return Literal(self.arith, self.ident, not self.positive)

    @classmethod
    def boolean(cls, var: int, positive: bool = True) -> "Literal":
        return cls(False, var, positive)

    @classmethod
    def atom(cls, atom_id: int, positive: bool = True) -> "Literal":
        return cls(True, atom_id, positive)


@dataclass
class Clause:
    literals: tuple[Literal, ...]
    penalty_weight: int = 1

    def __post_init__(self):
        self.literals = tuple(self.literals)
        if not self.literals:
            raise ValueError("clauses must be nonempty")
        if len(set(self.literals)) != len(self.literals):
            raise ValueError("duplicate literal in clause")
        if self.penalty_weight < 1:
            raise ValueError("penalty weight must be >= 1")

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)


@dataclass
class CnfFormula:
    """A clausified SMT(LIA) formula.

    Boolean and integer variables are numbered from zero; auxiliary variables
    introduced by clausification are flagged so that samples can drop them.
    Skeleton encoders give every atom its own Boolean id placed after the
    formula's Boolean variables.
    """

    clauses: list[Clause]
    atoms: list[LinearAtom]
    int_names: list[str]
    bool_names: list[str]
    int_aux: list[bool] = field(default_factory=list)
    bool_aux: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.int_aux:
            self.int_aux = [False] * len(self.int_names)
        if not self.bool_aux:
            self.bool_aux = [False] * len(self.bool_names)
        for clause in self.clauses:
            for lit in clause.literals:
                table = self.atoms if lit.arith else self.bool_names
                if not 0 <= lit.ident < len(table):
                    raise ValueError(f"unresolved literal {lit}")
        for atom in self.atoms:
            for v, _ in atom.coeffs:
                if not 0 <= v < len(self.int_names):
                    raise ValueError(f"unresolved integer variable {v}")

    @property
    def num_ints(self) -> int:
        return len(self.int_names)

    @property
    def num_bools(self) -> int:
        return len(self.bool_names)

    @property
    def skeleton_encoders(self) -> dict[int, int]:
        nb = len(self.bool_names)
        return {a: nb + a for a in range(len(self.atoms))}

    def declared_ints(self) -> list[int]:
        return [i for i, aux in enumerate(self.int_aux) if not aux]

    def declared_bools(self) -> list[int]:
        return [i for i, aux in enumerate(self.bool_aux) if not aux]

    def literal_str(self, lit: Literal) -> str:
        if not lit.arith:
            name = self.bool_names[lit.ident]
            return name if lit.positive else f"!{name}"
        atom = self.atoms[lit.ident]
        lhs = " + ".join(f"{c}*{self.int_names[v]}" for v, c in atom.coeffs)
        op = "<=" if atom.rel == LE else "="
        text = f"{lhs} {op} {atom.const}"
        return text if lit.positive else f"!({text})"

    def __str__(self) -> str:
        return " & ".join("(" + " | ".join(self.literal_str(l) for l in c) + ")" for c in self.clauses)


@dataclass
class Assignment:
    """Values for integer and Boolean variables, keyed by var-id."""

    int_values: dict[int, int] = field(default_factory=dict)
    bool_values: dict[int, bool] = field(default_factory=dict)

    def copy(self) -> "Assignment":
        return Assignment(dict(self.int_values), dict(self.bool_values))

    def is_total(self, f: CnfFormula) -> bool:
        return all(i in self.int_values for i in range(f.num_ints)) and all(
            b in self.bool_values for b in range(f.num_bools)
        )


Model = Assignment


def _check128(v: int) -> int:
    if not -_INT128_LIMIT <= v < _INT128_LIMIT:
        raise OverflowError("linear term exceeds the 128-bit range")
    return v


def atom_lhs(atom: LinearAtom, values: Mapping[int, int]) -> int:
    total = 0
    for v, c in atom.coeffs:
        total = _check128(total + _check128(c * values[v]))
    return total


def evaluate_atom(atom: LinearAtom | bool, a: Assignment | Mapping[int, int]) -> bool:
    if isinstance(atom, bool):
        return atom
    values = a.int_values if isinstance(a, Assignment) else a
    lhs = atom_lhs(atom, values)
    return lhs <= atom.const if atom.rel == LE else lhs == atom.const


def evaluate_literal(f: CnfFormula, lit: Literal, a: Assignment) -> bool:
    if lit.arith:
        val = evaluate_atom(f.atoms[lit.ident], a)
    else:
        val = a.bool_values[lit.ident]
    return val == lit.positive


def evaluate_clause(f: CnfFormula, clause: Clause, a: Assignment) -> bool:
    return any(evaluate_literal(f, lit, a) for lit in clause.literals)


def evaluate_formula(f: CnfFormula, a: Assignment) -> bool:
    return all(evaluate_clause(f, c, a) for c in f.clauses)


def falsified_clauses(f: CnfFormula, a: Assignment) -> list[int]:
    return [i for i, c in enumerate(f.clauses) if not evaluate_clause(f, c, a)]


def in_int64(v: int) -> bool:
    return INT64_MIN <= v <= INT64_MAX


AtomOrConst = Union[LinearAtom, bool]
