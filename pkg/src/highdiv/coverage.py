"""Bit coverage of AST nodes over a set of samples.

A Boolean node contributes one bit, an integer node the low 64 bits of its
two's-complement value.  A bit counts as covered once it has been observed
both as 0 and as 1.
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping

from .smtlib import BOOL, Ast, evaluate_nodes, format_term

WIDTH = 64
MASK = (1 << WIDTH) - 1


def tracked_nodes(ast: Ast) -> list[int]:
    """Non-leaf nodes plus variable leaves; constants are never tracked."""
    return [n for n in ast.reachable() if ast.nodes[n].children or ast.nodes[n].kind in ("int_var", "bool_var")]


class CoverageAccumulator:
    def __init__(self, ast: Ast, nodes: Iterable[int] | None = None):
        self.ast = ast
        self.nodes = list(tracked_nodes(ast) if nodes is None else nodes)
        self._order = ast.reachable()
        self.seen0 = {n: 0 for n in self.nodes}
        self.seen1 = {n: 0 for n in self.nodes}
        self.samples = 0

    def _width(self, nid: int) -> int:
        return 1 if self.ast.nodes[nid].sort == BOOL else WIDTH

    @property
    def total_bits(self) -> int:
        return sum(self._width(n) for n in self.nodes)

    def accumulate(self, sample: Mapping[str, Any]) -> None:
        values = evaluate_nodes(self.ast, sample, self._order)
        for n in self.nodes:
            v = values[n]
            if self.ast.nodes[n].sort == BOOL:
                bits, width_mask = int(bool(v)), 1
            else:
                bits, width_mask = v & MASK, MASK
            self.seen1[n] |= bits
            self.seen0[n] |= ~bits & width_mask
        self.samples += 1

    def covered_bits_of(self, nid: int) -> int:
        return (self.seen0[nid] & self.seen1[nid]).bit_count()

    @property
    def covered_bits(self) -> int:
        return sum(self.covered_bits_of(n) for n in self.nodes)

    def coverage(self) -> float:
        total = self.total_bits
        return self.covered_bits / total if total else 0.0

    def merge(self, other: "CoverageAccumulator") -> "CoverageAccumulator":
        if self.nodes != other.nodes:
            raise ValueError("accumulators track different node sets")
        out = CoverageAccumulator(self.ast, self.nodes)
        for n in self.nodes:
            out.seen0[n] = self.seen0[n] | other.seen0[n]
            out.seen1[n] = self.seen1[n] | other.seen1[n]
        out.samples = self.samples + other.samples
        return out

    def report(self, per_node: bool = False) -> dict:
        rep: dict[str, Any] = {
            "total_bits": self.total_bits,
            "covered_bits": self.covered_bits,
            "coverage": self.coverage(),
            "samples": self.samples,
            "tracked_nodes": len(self.nodes),
        }
        if per_node:
            rep["per_node"] = [
                {"term": format_term(self.ast, n), "sort": self.ast.nodes[n].sort,
                 "bits": self._width(n), "covered": self.covered_bits_of(n)}
                for n in self.nodes
            ]
        return rep


def accumulate(acc: CoverageAccumulator, sample: Mapping[str, Any]) -> None:
    acc.accumulate(sample)


def coverage(acc: CoverageAccumulator) -> float:
    return acc.coverage()


def coverage_of(ast: Ast, samples: Iterable[Mapping[str, Any]]) -> float:
    acc = CoverageAccumulator(ast)
    for s in samples:
        acc.accumulate(s)
    return acc.coverage()
