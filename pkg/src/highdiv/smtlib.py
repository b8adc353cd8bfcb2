"""SMT-LIB2 reader for the QF_LIA fragment.

Terms are hash-consed into an :class:`Ast` node table, so structurally equal
subterms share one node id.  ``let`` bindings and nullary ``define-fun``
macros are inlined; ``xor``, ``distinct`` and chained comparisons are
desugared while reading.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Mapping

BOOL = "Bool"
INT = "Int"

BOOL_KINDS = {"and", "or", "not", "implies", "le", "ge", "lt", "gt", "eq", "bool_var", "bool_const"}
INT_KINDS = {"plus", "minus", "times", "int_const", "int_var"}
COMPARISONS = {"le": "<=", "ge": ">=", "lt": "<", "gt": ">"}
LEAF_KINDS = {"int_const", "int_var", "bool_var", "bool_const"}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.diagnostic = Diagnostic(line, column, message)
        super().__init__(str(self.diagnostic))

    @property
    def line(self) -> int:
        return self.diagnostic.line

    @property
    def column(self) -> int:
        return self.diagnostic.column


class SmtSyntaxError(ParseError):
    pass


class UnsupportedFeatureError(ParseError):
    pass


class NonlinearError(UnsupportedFeatureError):
    pass


@dataclass(frozen=True)
class AstNode:
    kind: str
    children: tuple[int, ...] = ()
    sort: str = BOOL
    value: Any = None  # constant value or variable name


@dataclass
class Ast:
    nodes: list[AstNode] = field(default_factory=list)
    roots: list[int] = field(default_factory=list)
    int_vars: list[str] = field(default_factory=list)
    bool_vars: list[str] = field(default_factory=list)
    logic: str | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    _index: dict[AstNode, int] = field(default_factory=dict, repr=False)

    def add(self, node: AstNode) -> int:
        nid = self._index.get(node)
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(node)
            self._index[node] = nid
        return nid

    def __getitem__(self, nid: int) -> AstNode:
        return self.nodes[nid]

    def sort(self, nid: int) -> str:
        return self.nodes[nid].sort

    def reachable(self) -> list[int]:
        """Node ids reachable from the roots, children before parents."""
        seen: set[int] = set()
        order: list[int] = []
        for root in self.roots:
            stack = [(root, False)]
            while stack:
                nid, expanded = stack.pop()
                if expanded:
                    order.append(nid)
                    continue
                if nid in seen:
                    continue
                seen.add(nid)
                stack.append((nid, True))
                for c in reversed(self.nodes[nid].children):
                    if c not in seen:
                        stack.append((c, False))
        return order

    # convenience constructors, mostly for tests and programmatic use
    def int_var(self, name: str) -> int:
        if name not in self.int_vars:
            self.int_vars.append(name)
        return self.add(AstNode("int_var", (), INT, name))

    def bool_var(self, name: str) -> int:
        if name not in self.bool_vars:
            self.bool_vars.append(name)
        return self.add(AstNode("bool_var", (), BOOL, name))

    def const(self, value: int | bool) -> int:
        if isinstance(value, bool):
            return self.add(AstNode("bool_const", (), BOOL, value))
        return self.add(AstNode("int_const", (), INT, value))

    def op(self, kind: str, *children: int) -> int:
        if kind == "ite":
            sort = self.nodes[children[1]].sort
        else:
            sort = INT if kind in INT_KINDS else BOOL
        return self.add(AstNode(kind, tuple(children), sort))


# ---------------------------------------------------------------------------
# tokenizer / s-expression reader

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>;[^\n]*)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<string>"(?:[^"]|"")*")
  | (?P<quoted>\|[^|]*\|)
  | (?P<atom>[^\s()";|]+)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    text: str
    line: int
    column: int
    quoted: bool = False


@dataclass
class SList:
    items: list
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SmtSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        chunk = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("string", "quoted"):
            newlines = chunk.count("\n")
            if kind == "quoted":
                tokens.append(Token(chunk[1:-1], line, col, quoted=True))
            else:
                tokens.append(Token(chunk, line, col, quoted=True))
            if newlines:
                line += newlines
                line_start = pos + chunk.rfind("\n") + 1
        elif kind in ("lpar", "rpar", "atom"):
            tokens.append(Token(chunk, line, col))
        pos = m.end()
    if pos < len(text):  # pragma: no cover - regex covers every character
        raise SmtSyntaxError("unterminated input", line, pos - line_start + 1)
    return tokens


def read_sexprs(text: str) -> list:
    """Read all top-level s-expressions; leaves are :class:`Token`, lists are :class:`SList`."""
    tokens = _tokenize(text)
    stack: list[SList] = []
    top: list = []
    for tok in tokens:
        if tok.text == "(" and not tok.quoted:
            stack.append(SList([], tok.line, tok.column))
        elif tok.text == ")" and not tok.quoted:
            if not stack:
                raise SmtSyntaxError("unbalanced ')'", tok.line, tok.column)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            (stack[-1].items if stack else top).append(tok)
    if stack:
        s = stack[-1]
        raise SmtSyntaxError("unbalanced '(' (missing ')')", s.line, s.column)
    return top


def _pos(x) -> tuple[int, int]:
    return (x.line, x.column)


# ---------------------------------------------------------------------------
# term building

_NUMERAL = re.compile(r"^[0-9]+$")
_DECIMAL = re.compile(r"^[0-9]+\.[0-9]+$")
_SUPPORTED_LOGICS = {"QF_LIA", "LIA", "QF_IDL", "ALL"}
_IGNORED_COMMANDS = {"check-sat", "exit", "set-option", "set-info", "get-info", "get-model",
                     "get-value", "get-assignment", "get-unsat-core", "echo"}
_UNSUPPORTED_OPS = {"div", "mod", "abs", "to_real", "to_int", "is_int", "/", "select", "store"}


class _Builder:
    def __init__(self) -> None:
        self.ast = Ast()
        self.declared: dict[str, int] = {}  # name -> node id of the variable leaf
        self.macros: dict[str, int] = {}

    # -- helpers ------------------------------------------------------------
    def _err(self, cls, msg: str, where) -> ParseError:
        line, col = _pos(where)
        return cls(msg, line, col)

    def _expect_sort(self, nid: int, sort: str, where) -> None:
        if self.ast.sort(nid) != sort:
            raise self._err(SmtSyntaxError, f"expected a term of sort {sort}, got {self.ast.sort(nid)}", where)

    def _is_constant(self, nid: int) -> bool:
        node = self.ast[nid]
        if node.kind in ("int_var", "bool_var"):
            return False
        return all(self._is_constant(c) for c in node.children)

    def _const_value(self, nid: int) -> int:
        node = self.ast[nid]
        k = node.kind
        if k == "int_const":
            return node.value
        vals = [self._const_value(c) for c in node.children]
        if k == "plus":
            return sum(vals)
        if k == "minus":
            return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
        if k == "times":
            return vals[0] * vals[1]
        if k == "ite":
            cond = evaluate_ast_node(self.ast, node.children[0], {})
            return vals[1] if cond else vals[2]
        raise AssertionError(k)

    def declare(self, name: str, sort: str, where) -> None:
        if name in self.declared or name in self.macros:
            raise self._err(SmtSyntaxError, f"symbol {name!r} already declared", where)
        if sort == INT:
            self.declared[name] = self.ast.int_var(name)
        else:
            self.declared[name] = self.ast.bool_var(name)

    def parse_sort(self, s) -> str:
        if isinstance(s, Token) and s.text in (INT, BOOL):
            return s.text
        text = s.text if isinstance(s, Token) else "(...)"
        raise self._err(UnsupportedFeatureError, f"unsupported sort {text}", s)

    # -- terms --------------------------------------------------------------
    def term(self, sx, scope: Mapping[str, int]) -> int:
        if isinstance(sx, Token):
            return self._leaf(sx, scope)
        if not sx.items:
            raise self._err(SmtSyntaxError, "empty application", sx)
        head = sx.items[0]
        if isinstance(head, SList):
            if head.items and isinstance(head.items[0], Token) and head.items[0].text == "_":
                raise self._err(UnsupportedFeatureError, "indexed identifiers are not supported", head)
            raise self._err(SmtSyntaxError, "expected an operator", head)
        op = head.text
        args = sx.items[1:]
        if op == "let":
            return self._let(sx, args, scope)
        if op in ("forall", "exists"):
            raise self._err(UnsupportedFeatureError, "quantifiers are not supported", head)
        if op == "!":
            if not args:
                raise self._err(SmtSyntaxError, "annotation without a term", sx)
            return self.term(args[0], scope)
        if op in _UNSUPPORTED_OPS:
            raise self._err(UnsupportedFeatureError, f"operator {op!r} is outside linear integer arithmetic", head)
        if op in scope or op in self.declared or op in self.macros:
            raise self._err(UnsupportedFeatureError, f"uninterpreted function application {op!r}", head)
        kids = [self.term(a, scope) for a in args]
        return self._apply(op, kids, sx)

    def _leaf(self, tok: Token, scope: Mapping[str, int]) -> int:
        text = tok.text
        if not tok.quoted:
            if _NUMERAL.match(text):
                return self.ast.const(int(text))
            if _DECIMAL.match(text):
                raise self._err(UnsupportedFeatureError, f"real literal {text} is not supported", tok)
            if text.startswith("#"):
                raise self._err(UnsupportedFeatureError, f"bit-vector literal {text} is not supported", tok)
            if text == "true":
                return self.ast.const(True)
            if text == "false":
                return self.ast.const(False)
        if text in scope:
            return scope[text]
        if text in self.macros:
            return self.macros[text]
        if text in self.declared:
            return self.declared[text]
        raise self._err(SmtSyntaxError, f"undeclared symbol {text!r}", tok)

    def _let(self, sx: SList, args, scope) -> int:
        if len(args) != 2 or not isinstance(args[0], SList):
            raise self._err(SmtSyntaxError, "malformed let", sx)
        inner = dict(scope)
        for binding in args[0].items:
            if not (isinstance(binding, SList) and len(binding.items) == 2 and isinstance(binding.items[0], Token)):
                raise self._err(SmtSyntaxError, "malformed let binding", binding)
            inner[binding.items[0].text] = self.term(binding.items[1], scope)
        return self.term(args[1], inner)

    def _arity(self, op: str, kids: list[int], sx, lo: int, hi: int | None = None) -> None:
        if len(kids) < lo or (hi is not None and len(kids) > hi):
            raise self._err(SmtSyntaxError, f"wrong number of arguments to {op!r}", sx)

    def _apply(self, op: str, kids: list[int], sx) -> int:
        ast = self.ast
        if op in ("and", "or"):
            for k, a in zip(kids, sx.items[1:]):
                self._expect_sort(k, BOOL, a)
            if not kids:
                return ast.const(op == "and")
            if len(kids) == 1:
                return kids[0]
            return ast.op(op, *kids)
        if op == "not":
            self._arity(op, kids, sx, 1, 1)
            self._expect_sort(kids[0], BOOL, sx.items[1])
            return ast.op("not", kids[0])
        if op == "=>":
            self._arity(op, kids, sx, 2)
            for k, a in zip(kids, sx.items[1:]):
                self._expect_sort(k, BOOL, a)
            acc = kids[-1]
            for k in reversed(kids[:-1]):
                acc = ast.op("implies", k, acc)
            return acc
        if op == "xor":
            self._arity(op, kids, sx, 2)
            for k, a in zip(kids, sx.items[1:]):
                self._expect_sort(k, BOOL, a)
            acc = kids[0]
            for k in kids[1:]:
                acc = ast.op("not", ast.op("eq", acc, k))
            return acc
        if op == "=":
            self._arity(op, kids, sx, 2)
            sorts = {ast.sort(k) for k in kids}
            if len(sorts) != 1:
                raise self._err(SmtSyntaxError, "'=' applied to terms of different sorts", sx)
            pairs = [ast.op("eq", a, b) for a, b in zip(kids, kids[1:])]
            return pairs[0] if len(pairs) == 1 else ast.op("and", *pairs)
        if op == "distinct":
            self._arity(op, kids, sx, 2)
            if len({ast.sort(k) for k in kids}) != 1:
                raise self._err(SmtSyntaxError, "'distinct' applied to terms of different sorts", sx)
            pairs = [ast.op("not", ast.op("eq", kids[i], kids[j]))
                     for i in range(len(kids)) for j in range(i + 1, len(kids))]
            return pairs[0] if len(pairs) == 1 else ast.op("and", *pairs)
        if op == "ite":
            self._arity(op, kids, sx, 3, 3)
            self._expect_sort(kids[0], BOOL, sx.items[1])
            if ast.sort(kids[1]) != ast.sort(kids[2]):
                raise self._err(SmtSyntaxError, "'ite' branches have different sorts", sx)
            return ast.op("ite", *kids)
        if op in ("<=", ">=", "<", ">"):
            self._arity(op, kids, sx, 2)
            for k, a in zip(kids, sx.items[1:]):
                self._expect_sort(k, INT, a)
            kind = {"<=": "le", ">=": "ge", "<": "lt", ">": "gt"}[op]
            pairs = [ast.op(kind, a, b) for a, b in zip(kids, kids[1:])]
            return pairs[0] if len(pairs) == 1 else ast.op("and", *pairs)
        if op == "+":
            self._arity(op, kids, sx, 1)
            for k, a in zip(kids, sx.items[1:]):
                self._expect_sort(k, INT, a)
            return kids[0] if len(kids) == 1 else ast.op("plus", *kids)
        if op == "-":
            self._arity(op, kids, sx, 1)
            for k, a in zip(kids, sx.items[1:]):
                self._expect_sort(k, INT, a)
            if len(kids) == 1 and ast[kids[0]].kind == "int_const":
                return ast.const(-ast[kids[0]].value)
            return ast.op("minus", *kids)
        if op == "*":
            self._arity(op, kids, sx, 2)
            for k, a in zip(kids, sx.items[1:]):
                self._expect_sort(k, INT, a)
            consts = [k for k in kids if self._is_constant(k)]
            terms = [k for k in kids if not self._is_constant(k)]
            if len(terms) > 1:
                raise self._err(NonlinearError, "nonlinear multiplication is not supported", sx)
            factor = 1
            for k in consts:
                factor *= self._const_value(k)
            if not terms:
                return ast.const(factor)
            return ast.op("times", ast.const(factor), terms[0])
        raise self._err(UnsupportedFeatureError, f"unsupported operator {op!r}", sx.items[0])

    # -- commands -----------------------------------------------------------
    def command(self, sx) -> None:
        if not isinstance(sx, SList) or not sx.items or not isinstance(sx.items[0], Token):
            raise self._err(SmtSyntaxError, "expected a command", sx)
        name = sx.items[0].text
        args = sx.items[1:]
        if name == "set-logic":
            logic = args[0].text if args and isinstance(args[0], Token) else ""
            if logic not in _SUPPORTED_LOGICS:
                raise self._err(UnsupportedFeatureError, f"unsupported logic {logic!r}", sx)
            self.ast.logic = logic
        elif name == "declare-const":
            if len(args) != 2 or not isinstance(args[0], Token):
                raise self._err(SmtSyntaxError, "malformed declare-const", sx)
            self.declare(args[0].text, self.parse_sort(args[1]), args[0])
        elif name == "declare-fun":
            if len(args) != 3 or not isinstance(args[0], Token) or not isinstance(args[1], SList):
                raise self._err(SmtSyntaxError, "malformed declare-fun", sx)
            if args[1].items:
                raise self._err(UnsupportedFeatureError, "only nullary declare-fun is supported", args[1])
            self.declare(args[0].text, self.parse_sort(args[2]), args[0])
        elif name == "define-fun":
            if len(args) != 4 or not isinstance(args[0], Token) or not isinstance(args[1], SList):
                raise self._err(SmtSyntaxError, "malformed define-fun", sx)
            if args[1].items:
                raise self._err(UnsupportedFeatureError, "only nullary define-fun is supported", args[1])
            sort = self.parse_sort(args[2])
            body = self.term(args[3], {})
            self._expect_sort(body, sort, args[3])
            if args[0].text in self.declared or args[0].text in self.macros:
                raise self._err(SmtSyntaxError, f"symbol {args[0].text!r} already declared", args[0])
            self.macros[args[0].text] = body
        elif name == "assert":
            if len(args) != 1:
                raise self._err(SmtSyntaxError, "assert takes exactly one term", sx)
            nid = self.term(args[0], {})
            self._expect_sort(nid, BOOL, args[0])
            self.ast.roots.append(nid)
        elif name in ("push", "pop", "reset", "reset-assertions", "check-sat-assuming",
                      "declare-sort", "define-sort", "declare-datatypes", "define-fun-rec"):
            raise self._err(UnsupportedFeatureError, f"command {name!r} is not supported", sx)
        elif name in _IGNORED_COMMANDS:
            if name not in ("check-sat", "exit", "set-info", "set-option"):
                line, col = _pos(sx)
                self.ast.diagnostics.append(Diagnostic(line, col, f"ignored command {name!r}", "warning"))
        else:
            raise self._err(SmtSyntaxError, f"unknown command {name!r}", sx)


def parse_script(text: str) -> Ast:
    """Parse SMT-LIB2 source into an :class:`Ast` over all asserted terms."""
    builder = _Builder()
    for sx in read_sexprs(text):
        builder.command(sx)
    return builder.ast


def parse_file(path) -> Ast:
    with open(path, encoding="utf-8") as fh:
        return parse_script(fh.read())


# ---------------------------------------------------------------------------
# evaluation and printing


def _eval_kind(kind: str, node: AstNode, vals: list):
    if kind == "int_const" or kind == "bool_const":
        return node.value
    if kind == "and":
        return all(vals)
    if kind == "or":
        return any(vals)
    if kind == "not":
        return not vals[0]
    if kind == "implies":
        return (not vals[0]) or vals[1]
    if kind == "ite":
        return vals[1] if vals[0] else vals[2]
    if kind == "eq":
        return vals[0] == vals[1]
    if kind == "le":
        return vals[0] <= vals[1]
    if kind == "ge":
        return vals[0] >= vals[1]
    if kind == "lt":
        return vals[0] < vals[1]
    if kind == "gt":
        return vals[0] > vals[1]
    if kind == "plus":
        return sum(vals)
    if kind == "minus":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
    if kind == "times":
        return vals[0] * vals[1]
    raise AssertionError(f"unknown node kind {kind}")


def evaluate_nodes(ast: Ast, env: Mapping[str, Any], nodes: list[int] | None = None) -> dict[int, Any]:
    """Value of every node in ``nodes`` (default: all reachable) under ``env``."""
    order = ast.reachable() if nodes is None else nodes
    values: dict[int, Any] = {}
    for nid in order:
        node = ast.nodes[nid]
        if node.kind in ("int_var", "bool_var"):
            values[nid] = env[node.value]
        else:
            values[nid] = _eval_kind(node.kind, node, [values[c] for c in node.children])
    return values


def evaluate_ast_node(ast: Ast, nid: int, env: Mapping[str, Any]):
    node = ast.nodes[nid]
    if node.kind in ("int_var", "bool_var"):
        return env[node.value]
    return _eval_kind(node.kind, node, [evaluate_ast_node(ast, c, env) for c in node.children])


def evaluate_ast(ast: Ast, env: Mapping[str, Any]) -> bool:
    values = evaluate_nodes(ast, env)
    return all(values[r] for r in ast.roots)


_PRINT_OPS = {"and": "and", "or": "or", "not": "not", "implies": "=>", "ite": "ite", "eq": "=",
              "le": "<=", "ge": ">=", "lt": "<", "gt": ">", "plus": "+", "minus": "-", "times": "*"}


def _symbol(name: str) -> str:
    if re.fullmatch(r"[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*", name):
        return name
    return f"|{name}|"


def format_int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def format_term(ast: Ast, nid: int) -> str:
    node = ast.nodes[nid]
    if node.kind == "int_const":
        return format_int(node.value)
    if node.kind == "bool_const":
        return "true" if node.value else "false"
    if node.kind in ("int_var", "bool_var"):
        return _symbol(node.value)
    parts = " ".join(format_term(ast, c) for c in node.children)
    return f"({_PRINT_OPS[node.kind]} {parts})"


def format_script(ast: Ast) -> str:
    lines = [f"(set-logic {ast.logic or 'QF_LIA'})"]
    lines += [f"(declare-fun {_symbol(v)} () Int)" for v in ast.int_vars]
    lines += [f"(declare-fun {_symbol(v)} () Bool)" for v in ast.bool_vars]
    lines += [f"(assert {format_term(ast, r)})" for r in ast.roots]
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def structure(ast: Ast, nid: int):
    """Id-free nested tuple form of a term, for structural comparison."""
    node = ast.nodes[nid]
    return (node.kind, node.value, tuple(structure(ast, c) for c in node.children))
