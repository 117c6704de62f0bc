"""Problem-file ingestion: declarations, expressions, tasks.

The format is line oriented.  Parity is always explicit; expressions use
identifiers, rational literals (`3`, `5/2`), `+ - * ^` and parentheses.
Every error carries a line and column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import Chart, GradedPolynomial
from .algebroid import AlgebroidData, ChartCatalog, build_charts
from .errors import ProblemError
from .higher import HigherStructure

TASK_NAMES = (
    "verify-algebroid", "build-triple", "verify-triple", "higher-master",
    "linfty", "base-brackets", "forms-brackets", "cartan", "koszul",
    "classical-limit",
)


# -- expression lexer/parser ------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str      # ident | number | op | lparen | rparen | end
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int, col0: int) -> List[Token]:
    toks = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        col = col0 + i
        if c in " \t":
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "/":
                k = j + 1
                if k >= n or not text[k].isdigit():
                    raise ProblemError("malformed rational literal", line, col0 + j)
                while k < n and text[k].isdigit():
                    k += 1
                toks.append(Token("number", text[i:k], line, col))
                i = k
            else:
                toks.append(Token("number", text[i:j], line, col))
                i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            i = j
            continue
        if c in "+-*^":
            toks.append(Token("op", c, line, col))
            i += 1
            continue
        if c == "(":
            toks.append(Token("lparen", c, line, col))
            i += 1
            continue
        if c == ")":
            toks.append(Token("rparen", c, line, col))
            i += 1
            continue
        raise ProblemError(f"unexpected character {c!r}", line, col)
    toks.append(Token("end", "", line, col0 + n))
    return toks


class _ExprParser:
    """sum -> term (('+'|'-') term)* ; term -> factor ('*' factor)* ;
    factor -> ('-')* atom ('^' integer)? ; atom -> ident | number | (sum)."""

    def __init__(self, tokens: List[Token], chart: Chart):
        self.toks = tokens
        self.pos = 0
        self.chart = chart

    def peek(self) -> Token:
        return self.toks[self.pos]

    def take(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, msg: str, tok: Token):
        raise ProblemError(msg, tok.line, tok.col)

    def parse(self) -> GradedPolynomial:
        v = self.sum()
        t = self.peek()
        if t.kind != "end":
            self.fail(f"unexpected {t.text!r}", t)
        return v

    def sum(self) -> GradedPolynomial:
        v = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take()
            w = self.term()
            v = v + w if op.text == "+" else v - w
        return v

    def term(self) -> GradedPolynomial:
        v = self.factor()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.take()
            v = v * self.factor()
        return v

    def factor(self) -> GradedPolynomial:
        neg = False
        while self.peek().kind == "op" and self.peek().text == "-":
            self.take()
            neg = not neg
        v = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            t = self.peek()
            if t.kind != "number" or "/" in t.text:
                self.fail("exponent must be a nonnegative integer", t)
            self.take()
            v = v ** int(t.text)
        return -v if neg else v

    def atom(self) -> GradedPolynomial:
        t = self.take()
        if t.kind == "number":
            return self.chart.scalar(Fraction(t.text))
        if t.kind == "ident":
            if not self.chart.has(t.text):
                self.fail(f"unknown variable {t.text!r}", t)
            return self.chart.gen(t.text)
        if t.kind == "lparen":
            v = self.sum()
            c = self.take()
            if c.kind != "rparen":
                self.fail("expected ')'", c)
            return v
        self.fail(f"expected a value, got {t.text!r}" if t.text else "unexpected end of expression", t)


def parse_expression(text: str, chart: Chart, line: int = 1, col0: int = 1) -> GradedPolynomial:
    return _ExprParser(_tokenize(text, line, col0), chart).parse()


# -- problem files ------------------------------------------------------------


@dataclass
class TaskSpec:
    name: str
    params: Dict[str, object] = field(default_factory=dict)
    line: int = 0


@dataclass
class ProblemFile:
    base: List[Tuple[str, int]]
    fiber: List[Tuple[str, int]]
    anchor_exprs: Dict[Tuple[str, str], str]
    structure_exprs: Dict[Tuple[str, str, str], str]
    higher: List[Tuple[str, str]]
    tasks: List[TaskSpec]
    data: AlgebroidData
    catalog: ChartCatalog
    higher_structures: List[HigherStructure]


_PARITY = {"even": 0, "odd": 1}
_INT_PARAMS = ("seed", "samples", "degree-bound", "structure")
_STR_PARAMS = ("side",)


def _split_directive(line: str):
    return line.split(None)


def parse_problem(text: str) -> ProblemFile:
    base: List[Tuple[str, int]] = []
    fiber: List[Tuple[str, int]] = []
    anchor_lines: List[Tuple[str, str, str, int, int]] = []
    structure_lines: List[Tuple[str, str, str, str, int, int]] = []
    higher_lines: List[Tuple[str, str, int, int]] = []
    tasks: List[TaskSpec] = []
    declared_order_done = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        words = line.split()
        head = words[0]
        col_of = lambda w: raw.index(w) + 1

        if head == "schema":
            if words[1:] != ["1"]:
                raise ProblemError("unsupported schema (expected 1)", lineno, col_of(head))
        elif head in ("base", "fiber"):
            if len(words) != 3 or words[1] not in _PARITY:
                raise ProblemError(f"expected '{head} even|odd NAME'", lineno, col_of(head))
            name = words[2]
            target = base if head == "base" else fiber
            if any(n == name for n, _ in base + fiber):
                raise ProblemError(f"duplicate name {name!r}", lineno, col_of(name))
            target.append((name, _PARITY[words[1]]))
        elif head == "anchor":
            pieces = line.split("=", 1)
            parts = pieces[0].split()
            if len(pieces) != 2 or len(parts) != 3:
                raise ProblemError("expected 'anchor FIBER BASE = EXPR'", lineno, col_of(head))
            anchor_lines.append((parts[1], parts[2], pieces[1], lineno, len(pieces[0]) + 2))
        elif head == "structure":
            lhs = line.split("=", 1)
            if len(lhs) != 2:
                raise ProblemError("expected 'structure A B ^ C = EXPR'", lineno, col_of(head))
            parts = lhs[0].split()
            if len(parts) != 5 or parts[3] != "^":
                raise ProblemError("expected 'structure A B ^ C = EXPR'", lineno, col_of(head))
            structure_lines.append((parts[1], parts[2], parts[4], lhs[1],
                                    lineno, len(lhs[0]) + 2))
        elif head == "higher":
            lhs = line.split("=", 1)
            parts = lhs[0].split()
            if len(lhs) != 2 or len(parts) != 2 or parts[1] not in ("poisson", "schouten"):
                raise ProblemError("expected 'higher poisson|schouten = EXPR'",
                                   lineno, col_of(head))
            higher_lines.append((parts[1], lhs[1], lineno, len(lhs[0]) + 2))
        elif head == "task":
            if len(words) < 2:
                raise ProblemError("expected 'task NAME [key=value ...]'", lineno, col_of(head))
            name = words[1]
            if name not in TASK_NAMES:
                raise ProblemError(f"unknown task {name!r}", lineno, col_of(name))
            params: Dict[str, object] = {}
            for w in words[2:]:
                if "=" not in w:
                    raise ProblemError(f"malformed parameter {w!r}", lineno, col_of(w))
                k, v = w.split("=", 1)
                if k in _INT_PARAMS:
                    try:
                        params[k] = int(v)
                    except ValueError:
                        raise ProblemError(f"parameter {k} wants an integer", lineno,
                                           col_of(w)) from None
                elif k in _STR_PARAMS:
                    params[k] = v
                else:
                    raise ProblemError(f"unknown parameter {k!r}", lineno, col_of(w))
            tasks.append(TaskSpec(name=name, params=params, line=lineno))
        else:
            raise ProblemError(f"unknown directive {head!r}", lineno, col_of(head))

    base_chart = AlgebroidData.make_base_chart(base)
    fiber_names = {n for n, _ in fiber}

    def want_fiber(n, lineno, col):
        if n not in fiber_names:
            raise ProblemError(f"unknown fiber label {n!r}", lineno, col)

    anchor: Dict[Tuple[str, str], GradedPolynomial] = {}
    anchor_exprs: Dict[Tuple[str, str], str] = {}
    for a, A, rhs, lineno, col in anchor_lines:
        want_fiber(a, lineno, 1)
        if not base_chart.has(A):
            raise ProblemError(f"unknown base variable {A!r}", lineno, 1)
        anchor[(a, A)] = parse_expression(rhs, base_chart, lineno, col)
        anchor_exprs[(a, A)] = rhs.strip()

    structure: Dict[Tuple[str, str, str], GradedPolynomial] = {}
    structure_exprs: Dict[Tuple[str, str, str], str] = {}
    for a, b, c, rhs, lineno, col in structure_lines:
        for n in (a, b, c):
            want_fiber(n, lineno, 1)
        structure[(a, b, c)] = parse_expression(rhs, base_chart, lineno, col)
        structure_exprs[(a, b, c)] = rhs.strip()

    try:
        data = AlgebroidData(base=base, fiber=fiber, anchor=anchor,
                             structure=structure, base_chart=base_chart)
    except Exception as exc:  # parity-inconsistent declarations and kin
        raise ProblemError(str(exc), 1, 1) from exc
    catalog = build_charts(data)

    highers: List[HigherStructure] = []
    higher_decls: List[Tuple[str, str]] = []
    for kind, rhs, lineno, col in higher_lines:
        chart = catalog.schouten if kind == "poisson" else catalog.poisson
        body = parse_expression(rhs, chart, lineno, col)
        momenta = set(chart.momenta())
        if not body.free_of(momenta):
            raise ProblemError(f"{kind} structure must not use momentum variables",
                               lineno, col)
        want = 0 if kind == "poisson" else 1
        if body and body.parity() != want:
            raise ProblemError(f"{kind} structure must have parity {want}", lineno, col)
        highers.append(HigherStructure(kind, body))
        higher_decls.append((kind, rhs.strip()))

    for t in tasks:
        idx = t.params.get("structure")
        if idx is not None and not (1 <= int(idx) <= len(highers)):
            raise ProblemError(f"task {t.name}: no higher structure #{idx}", t.line, 1)
        side = t.params.get("side")
        if side is not None and side not in ("schouten", "poisson", "both"):
            raise ProblemError(f"task {t.name}: side must be schouten|poisson|both",
                               t.line, 1)

    return ProblemFile(base=base, fiber=fiber, anchor_exprs=anchor_exprs,
                       structure_exprs=structure_exprs, higher=higher_decls,
                       tasks=tasks, data=data, catalog=catalog,
                       higher_structures=highers)
