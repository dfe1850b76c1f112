"""CTL formulas: abstract syntax, concrete-syntax parser, normalizer, renderer.

Concrete syntax: atoms ``at(Name)`` / ``in(Name)``, constants ``true`` /
``false``, boolean operators ``! & | ->``, temporal unaries ``EX EF EG AX AF
AG``, and until forms ``E [ f U g ]`` / ``A [ f U g ]``. Precedence is
``!``/temporal > ``&`` > ``|`` > ``->`` with ``->`` right-associative.
"""

import re
from dataclasses import dataclass
from typing import Callable, Iterator

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class CtlSyntaxError(ValueError):
    """Formula text failed to parse; carries position and the expected tokens."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        at = f"{message} at line {line}, col {column}"
        if expected:
            at += "; expected one of: " + ", ".join(expected)
        super().__init__(at)


@dataclass(frozen=True)
class AtomicProposition:
    """A labeling atom: ``at(state)`` or ``in(approach)``."""

    kind: str
    subject: str

    def __post_init__(self):
        if self.kind not in ("at", "in"):
            raise ValueError(f"atom kind must be 'at' or 'in', not {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind}({self.subject})"


class CtlFormula:
    """Base class of formula nodes; concrete nodes are frozen dataclasses."""

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Const(CtlFormula):
    value: bool


@dataclass(frozen=True)
class Atom(CtlFormula):
    prop: AtomicProposition


@dataclass(frozen=True)
class Not(CtlFormula):
    operand: CtlFormula


@dataclass(frozen=True)
class And(CtlFormula):
    left: CtlFormula
    right: CtlFormula


@dataclass(frozen=True)
class Or(CtlFormula):
    left: CtlFormula
    right: CtlFormula


@dataclass(frozen=True)
class Implies(CtlFormula):
    left: CtlFormula
    right: CtlFormula


@dataclass(frozen=True)
class EX(CtlFormula):
    operand: CtlFormula


@dataclass(frozen=True)
class EG(CtlFormula):
    operand: CtlFormula


@dataclass(frozen=True)
class EU(CtlFormula):
    left: CtlFormula
    right: CtlFormula


@dataclass(frozen=True)
class EF(CtlFormula):
    operand: CtlFormula


@dataclass(frozen=True)
class AX(CtlFormula):
    operand: CtlFormula


@dataclass(frozen=True)
class AF(CtlFormula):
    operand: CtlFormula


@dataclass(frozen=True)
class AG(CtlFormula):
    operand: CtlFormula


@dataclass(frozen=True)
class AU(CtlFormula):
    left: CtlFormula
    right: CtlFormula


TRUE = Const(True)
FALSE = Const(False)


def atoms(formula: CtlFormula) -> Iterator[AtomicProposition]:
    """Yield every atomic proposition occurring in the formula."""
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            yield node.prop
        elif isinstance(node, (Not, EX, EG, EF, AX, AF, AG)):
            stack.append(node.operand)
        elif isinstance(node, (And, Or, Implies, EU, AU)):
            stack.append(node.left)
            stack.append(node.right)


def normalize(formula: CtlFormula) -> CtlFormula:
    """Rewrite derived temporal operators into the EX/EG/EU + boolean core.

    EF g = E[true U g]; AX f = !EX !f; AG f = !EF !f; AF f = !EG !f;
    A[f U g] = !(E[!g U (!f & !g)] | EG !g).
    """
    if isinstance(formula, (Const, Atom)):
        return formula
    if isinstance(formula, Not):
        return Not(normalize(formula.operand))
    if isinstance(formula, And):
        return And(normalize(formula.left), normalize(formula.right))
    if isinstance(formula, Or):
        return Or(normalize(formula.left), normalize(formula.right))
    if isinstance(formula, Implies):
        return Implies(normalize(formula.left), normalize(formula.right))
    if isinstance(formula, EX):
        return EX(normalize(formula.operand))
    if isinstance(formula, EG):
        return EG(normalize(formula.operand))
    if isinstance(formula, EU):
        return EU(normalize(formula.left), normalize(formula.right))
    if isinstance(formula, EF):
        return EU(TRUE, normalize(formula.operand))
    if isinstance(formula, AX):
        return Not(EX(Not(normalize(formula.operand))))
    if isinstance(formula, AG):
        return Not(EU(TRUE, Not(normalize(formula.operand))))
    if isinstance(formula, AF):
        return Not(EG(Not(normalize(formula.operand))))
    if isinstance(formula, AU):
        nf = normalize(formula.left)
        ng = normalize(formula.right)
        return Not(Or(EU(Not(ng), And(Not(nf), Not(ng))), EG(Not(ng))))
    raise TypeError(f"not a CTL formula node: {formula!r}")


_UNARY_TEXT = {EX: "EX", EG: "EG", EF: "EF", AX: "AX", AF: "AF", AG: "AG"}


def _prec(node: CtlFormula) -> int:
    if isinstance(node, Implies):
        return 1
    if isinstance(node, Or):
        return 2
    if isinstance(node, And):
        return 3
    return 4


def render(
    formula: CtlFormula,
    atom_text: Callable[[AtomicProposition], str] | None = None,
    true_text: str = "true",
    false_text: str = "false",
) -> str:
    """Concrete-syntax text with minimal parentheses; re-parsing restores the AST."""

    def go(node: CtlFormula, min_prec: int) -> str:
        if isinstance(node, Const):
            text = true_text if node.value else false_text
        elif isinstance(node, Atom):
            text = atom_text(node.prop) if atom_text else str(node.prop)
        elif isinstance(node, Not):
            text = "!" + go(node.operand, 4)
        elif isinstance(node, (EX, EG, EF, AX, AF, AG)):
            text = f"{_UNARY_TEXT[type(node)]} {go(node.operand, 4)}"
        elif isinstance(node, EU):
            text = f"E [ {go(node.left, 0)} U {go(node.right, 0)} ]"
        elif isinstance(node, AU):
            text = f"A [ {go(node.left, 0)} U {go(node.right, 0)} ]"
        elif isinstance(node, And):
            text = f"{go(node.left, 3)} & {go(node.right, 4)}"
        elif isinstance(node, Or):
            text = f"{go(node.left, 2)} | {go(node.right, 3)}"
        elif isinstance(node, Implies):
            text = f"{go(node.left, 2)} -> {go(node.right, 1)}"
        else:
            raise TypeError(f"not a CTL formula node: {node!r}")
        if _prec(node) < min_prec:
            return f"({text})"
        return text

    return go(formula, 0)


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "punct" | "eof"
    value: str
    line: int
    column: int


def _tokenize(text: str, start_line: int, start_column: int) -> list[_Token]:
    def place(line: int, col: int) -> tuple[int, int]:
        if line == 1:
            return start_line, start_column + col - 1
        return start_line + line - 1, col

    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if text.startswith("->", i):
            l, c = place(line, col)
            tokens.append(_Token("punct", "->", l, c))
            i += 2
            col += 2
            continue
        if ch in "()[]!&|":
            l, c = place(line, col)
            tokens.append(_Token("punct", ch, l, c))
            i += 1
            col += 1
            continue
        m = _NAME_RE.match(text, i)
        if m:
            l, c = place(line, col)
            tokens.append(_Token("ident", m.group(), l, c))
            col += m.end() - i
            i = m.end()
            continue
        l, c = place(line, col)
        raise CtlSyntaxError(f"unexpected character {ch!r}", l, c)
    l, c = place(line, col)
    tokens.append(_Token("eof", "", l, c))
    return tokens


_UNARY_KEYWORDS = {"EX": EX, "EF": EF, "EG": EG, "AX": AX, "AF": AF, "AG": AG}
_FORMULA_START = (
    "(", "!", "true", "false", "at", "in", "EX", "EF", "EG", "AX", "AF", "AG", "E", "A",
)


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect_punct(self, value: str) -> _Token:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == value:
            return self.take()
        raise CtlSyntaxError(f"expected '{value}'", tok.line, tok.column, expected=(value,))

    def expect_ident(self, description: str) -> _Token:
        tok = self.peek()
        if tok.kind == "ident":
            return self.take()
        raise CtlSyntaxError(f"expected {description}", tok.line, tok.column,
                             expected=("identifier",))

    def parse_implies(self) -> CtlFormula:
        left = self.parse_or()
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "->":
            self.take()
            return Implies(left, self.parse_implies())
        return left

    def parse_or(self) -> CtlFormula:
        node = self.parse_and()
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "|":
                self.take()
                node = Or(node, self.parse_and())
            else:
                return node

    def parse_and(self) -> CtlFormula:
        node = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "&":
                self.take()
                node = And(node, self.parse_unary())
            else:
                return node

    def parse_unary(self) -> CtlFormula:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "!":
            self.take()
            return Not(self.parse_unary())
        if tok.kind == "ident" and tok.value in _UNARY_KEYWORDS:
            self.take()
            return _UNARY_KEYWORDS[tok.value](self.parse_unary())
        if tok.kind == "ident" and tok.value in ("E", "A"):
            self.take()
            self.expect_punct("[")
            left = self.parse_implies()
            until = self.peek()
            if not (until.kind == "ident" and until.value == "U"):
                raise CtlSyntaxError("expected 'U'", until.line, until.column, expected=("U",))
            self.take()
            right = self.parse_implies()
            self.expect_punct("]")
            return EU(left, right) if tok.value == "E" else AU(left, right)
        return self.parse_primary()

    def parse_primary(self) -> CtlFormula:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "(":
            self.take()
            node = self.parse_implies()
            self.expect_punct(")")
            return node
        if tok.kind == "ident":
            if tok.value == "true":
                self.take()
                return TRUE
            if tok.value == "false":
                self.take()
                return FALSE
            if tok.value in ("at", "in"):
                self.take()
                self.expect_punct("(")
                name = self.expect_ident("a state or approach name")
                self.expect_punct(")")
                return Atom(AtomicProposition(tok.value, name.value))
        raise CtlSyntaxError("expected a formula", tok.line, tok.column,
                             expected=_FORMULA_START)


def parse_ctl(text: str, *, start_line: int = 1, start_column: int = 1) -> CtlFormula:
    """Parse concrete CTL syntax; positions in errors are offset by the start point."""
    parser = _Parser(_tokenize(text, start_line, start_column))
    formula = parser.parse_implies()
    tok = parser.peek()
    if tok.kind != "eof":
        raise CtlSyntaxError("unexpected trailing input", tok.line, tok.column,
                             expected=("end of input", "&", "|", "->"))
    return formula
