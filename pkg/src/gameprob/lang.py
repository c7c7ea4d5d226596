"""Surface language: parsing and typechecking of open-program judgments.

A judgment file has the form ``<decls> |- <term> : <type>`` with an optional
comma-separated declaration list.  Concrete grammar (ASCII):

    judgment  := decls? "|-" term ":" type
    decl      := IDENT ":" type
    type      := base ("->" base)*          -- 2+ bases make a function type
    base      := "com" | "expbool" | "expint<K>" | "varint" | "varint<K>"
    term      := seq
    seq       := prefix (";" seq)?
    prefix    := "if" or "then" prefix "else" prefix
               | "while" or "do" prefix
               | "new_int" IDENT ":=" or "in" seq
               | IDENT ":=" or
               | or
    or        := and ("||" and)*
    and       := not ("&&" not)*
    not       := "not" not | cmp
    cmp       := add (("<"|"<="|">"|">="|"="|"!=") add)?
    add       := mul (("+"|"-") mul)*
    mul       := atom ("*" atom)*
    atom      := INT | "true" | "false" | "skip" | "!" IDENT
               | IDENT ("(" term ("," term)* ")")?  | "(" term ")"

``//`` comments run to end of line.  ``abort`` is an ordinary declared
identifier of type com, not a keyword.  Loop and conditional bodies bind
tighter than ``;`` while ``new_int ... in`` scopes over the whole sequence
to its right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import ParseError, TypecheckError

DEFAULT_INT_DOMAIN = 10

KEYWORDS = {"if", "then", "else", "while", "do", "in", "skip",
            "true", "false", "not", "new_int"}

_SYMBOLS = ["|-", "->", ":=", "<=", ">=", "!=", "&&", "||",
            ";", ",", ":", "(", ")", "+", "-", "*", "<", ">", "=", "!"]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseType:
    """com, expbool, or expint with a finite value domain [0, k)."""

    kind: str  # "com" | "expbool" | "expint"
    k: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "expint" and (self.k is None or self.k < 1):
            raise ValueError("expint requires k >= 1")

    def __str__(self) -> str:
        return f"expint{self.k}" if self.kind == "expint" else self.kind


COM = BaseType("com")
EXPBOOL = BaseType("expbool")


def expint(k: int) -> BaseType:
    return BaseType("expint", k)


@dataclass(frozen=True)
class VarIntType:
    """Readable/writable integer cell over [0, k)."""

    k: int

    def __str__(self) -> str:
        return f"varint{self.k}"


@dataclass(frozen=True)
class FunType:
    """First-order function: base-typed arguments to a base-typed result."""

    args: tuple[BaseType, ...]
    result: BaseType

    def __post_init__(self) -> None:
        if not self.args:
            raise ValueError("function types need at least one argument")

    def __str__(self) -> str:
        return " -> ".join(str(t) for t in (*self.args, self.result))


IdentType = Union[BaseType, VarIntType, FunType]


@dataclass(frozen=True)
class ContextEntry:
    name: str
    type: IdentType
    tag: str  # label used on moves; defaults to the identifier itself


@dataclass(frozen=True)
class Context:
    entries: tuple[ContextEntry, ...] = ()

    @staticmethod
    def of(*pairs: tuple[str, IdentType]) -> "Context":
        return Context(tuple(ContextEntry(n, t, n) for n, t in pairs))

    def lookup(self, name: str) -> IdentType | None:
        for e in self.entries:
            if e.name == name:
                return e.type
        return None

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def __str__(self) -> str:
        return ", ".join(f"{e.name} : {e.type}" for e in self.entries)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

def _pos_field() -> tuple[int, int]:
    return (0, 0)


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Skip(Term):
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit(Term):
    value: int
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit(Term):
    value: bool
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Var(Term):
    """Use of a free identifier of base type (includes ``abort``)."""

    name: str
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Apply(Term):
    name: str
    args: tuple[Term, ...]
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Deref(Term):
    name: str
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Assign(Term):
    name: str
    expr: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class NewInt(Term):
    name: str
    init: Term
    body: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Seq(Term):
    first: Term
    second: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Arith(Term):
    op: str  # + - *
    left: Term
    right: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Cmp(Term):
    op: str  # < <= > >= = !=
    left: Term
    right: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class BoolOp(Term):
    op: str  # && ||
    left: Term
    right: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Not(Term):
    expr: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class If(Term):
    cond: Term
    then: Term
    els: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class While(Term):
    cond: Term
    body: Term
    pos: tuple[int, int] = field(default_factory=_pos_field, compare=False, repr=False)


@dataclass(frozen=True)
class Judgment:
    context: Context
    term: Term
    declared: IdentType


@dataclass(frozen=True)
class TypedTerm:
    term: Term
    context: Context
    type: BaseType


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "int", "eof", or the symbol itself
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        matched = None
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                matched = sym
                break
        if matched:
            tokens.append(Token(matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(Token("ident", source[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text!r}",
                             tok.line, tok.col)
        return self.next()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == word

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if not self.at_keyword(word):
            raise ParseError(f"expected {word!r}, found {tok.text!r}",
                             tok.line, tok.col)
        return self.next()

    def ident(self) -> Token:
        tok = self.expect("ident")
        if tok.text in KEYWORDS:
            raise ParseError(f"{tok.text!r} is a reserved word", tok.line, tok.col)
        return tok

    # -- judgments ----------------------------------------------------------

    def judgment(self) -> Judgment:
        entries: list[ContextEntry] = []
        if self.peek().kind != "|-":
            while True:
                name = self.ident()
                if any(e.name == name.text for e in entries):
                    raise ParseError(f"duplicate declaration of {name.text!r}",
                                     name.line, name.col)
                self.expect(":")
                ty = self.type_()
                entries.append(ContextEntry(name.text, ty, name.text))
                if self.peek().kind != ",":
                    break
                self.next()
        self.expect("|-")
        term = self.term()
        self.expect(":")
        declared = self.type_()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"trailing input starting at {tok.text!r}",
                             tok.line, tok.col)
        return Judgment(Context(tuple(entries)), term, declared)

    def type_(self) -> IdentType:
        parts = [self.base_type()]
        while self.peek().kind == "->":
            self.next()
            parts.append(self.base_type())
        if len(parts) == 1:
            return parts[0]
        for p in parts[:-1]:
            if isinstance(p, VarIntType):
                tok = self.peek()
                raise ParseError("varint cannot be a function argument type",
                                 tok.line, tok.col)
        result = parts[-1]
        if isinstance(result, VarIntType):
            tok = self.peek()
            raise ParseError("varint cannot be a function result type",
                             tok.line, tok.col)
        return FunType(tuple(parts[:-1]), result)  # type: ignore[arg-type]

    def base_type(self) -> IdentType:
        tok = self.expect("ident")
        text = tok.text
        if text == "com":
            return COM
        if text == "expbool":
            return EXPBOOL
        if text.startswith("expint") and text[6:].isdigit():
            k = int(text[6:])
            if k < 1:
                raise ParseError("expint domain must be at least 1",
                                 tok.line, tok.col)
            return expint(k)
        if text == "varint":
            return VarIntType(DEFAULT_INT_DOMAIN)
        if text.startswith("varint") and text[6:].isdigit():
            k = int(text[6:])
            if k < 1:
                raise ParseError("varint domain must be at least 1",
                                 tok.line, tok.col)
            return VarIntType(k)
        raise ParseError(f"unknown type {text!r}", tok.line, tok.col)

    # -- terms --------------------------------------------------------------

    def term(self) -> Term:
        return self.seq()

    def seq(self) -> Term:
        first = self.prefix()
        if self.peek().kind == ";":
            tok = self.next()
            second = self.seq()
            return Seq(first, second, pos=(tok.line, tok.col))
        return first

    def prefix(self) -> Term:
        tok = self.peek()
        if self.at_keyword("if"):
            self.next()
            cond = self.or_()
            self.expect_keyword("then")
            then = self.prefix()
            self.expect_keyword("else")
            els = self.prefix()
            return If(cond, then, els, pos=(tok.line, tok.col))
        if self.at_keyword("while"):
            self.next()
            cond = self.or_()
            self.expect_keyword("do")
            body = self.prefix()
            return While(cond, body, pos=(tok.line, tok.col))
        if self.at_keyword("new_int"):
            self.next()
            name = self.ident()
            self.expect(":=")
            init = self.or_()
            self.expect_keyword("in")
            body = self.seq()
            return NewInt(name.text, init, body, pos=(tok.line, tok.col))
        if tok.kind == "ident" and tok.text not in KEYWORDS \
                and self.peek(1).kind == ":=":
            name = self.next()
            self.next()
            expr = self.or_()
            return Assign(name.text, expr, pos=(name.line, name.col))
        return self.or_()

    def or_(self) -> Term:
        left = self.and_()
        while self.peek().kind == "||":
            tok = self.next()
            right = self.and_()
            left = BoolOp("||", left, right, pos=(tok.line, tok.col))
        return left

    def and_(self) -> Term:
        left = self.not_()
        while self.peek().kind == "&&":
            tok = self.next()
            right = self.not_()
            left = BoolOp("&&", left, right, pos=(tok.line, tok.col))
        return left

    def not_(self) -> Term:
        if self.at_keyword("not"):
            tok = self.next()
            return Not(self.not_(), pos=(tok.line, tok.col))
        return self.cmp()

    def cmp(self) -> Term:
        left = self.add()
        if self.peek().kind in ("<", "<=", ">", ">=", "=", "!="):
            tok = self.next()
            right = self.add()
            return Cmp(tok.kind, left, right, pos=(tok.line, tok.col))
        return left

    def add(self) -> Term:
        left = self.mul()
        while self.peek().kind in ("+", "-"):
            tok = self.next()
            right = self.mul()
            left = Arith(tok.kind, left, right, pos=(tok.line, tok.col))
        return left

    def mul(self) -> Term:
        left = self.atom()
        while self.peek().kind == "*":
            tok = self.next()
            right = self.atom()
            left = Arith("*", left, right, pos=(tok.line, tok.col))
        return left

    def atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return IntLit(int(tok.text), pos=(tok.line, tok.col))
        if self.at_keyword("true"):
            self.next()
            return BoolLit(True, pos=(tok.line, tok.col))
        if self.at_keyword("false"):
            self.next()
            return BoolLit(False, pos=(tok.line, tok.col))
        if self.at_keyword("skip"):
            self.next()
            return Skip(pos=(tok.line, tok.col))
        if tok.kind == "!":
            self.next()
            name = self.ident()
            return Deref(name.text, pos=(tok.line, tok.col))
        if tok.kind == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            name = self.next()
            if self.peek().kind == "(":
                self.next()
                args = [self.term()]
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.term())
                self.expect(")")
                return Apply(name.text, tuple(args), pos=(name.line, name.col))
            return Var(name.text, pos=(name.line, name.col))
        raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)


def parse_judgment(source: str) -> Judgment:
    return _Parser(tokenize(source)).judgment()


def parse(source: str) -> tuple[Term, Context]:
    j = parse_judgment(source)
    return j.term, j.context


def parse_term(source: str) -> Term:
    """Parse a bare term (no judgment wrapper); used by tests and tools."""
    parser = _Parser(tokenize(source))
    term = parser.term()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input starting at {tok.text!r}",
                         tok.line, tok.col)
    return term


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_LEVEL_SEQ = 0
_LEVEL_PREFIX = 1
_LEVEL_OR = 2
_LEVEL_AND = 3
_LEVEL_NOT = 4
_LEVEL_CMP = 5
_LEVEL_ADD = 6
_LEVEL_MUL = 7
_LEVEL_ATOM = 8


def _term_level(term: Term) -> int:
    if isinstance(term, Seq):
        return _LEVEL_SEQ
    if isinstance(term, (If, While, NewInt, Assign)):
        return _LEVEL_PREFIX
    if isinstance(term, BoolOp):
        return _LEVEL_OR if term.op == "||" else _LEVEL_AND
    if isinstance(term, Not):
        return _LEVEL_NOT
    if isinstance(term, Cmp):
        return _LEVEL_CMP
    if isinstance(term, Arith):
        return _LEVEL_ADD if term.op in "+-" else _LEVEL_MUL
    return _LEVEL_ATOM


def render_term(term: Term, min_level: int = 0) -> str:
    text = _render(term)
    if _term_level(term) < min_level:
        return f"({text})"
    return text


def _render(term: Term) -> str:
    if isinstance(term, Skip):
        return "skip"
    if isinstance(term, IntLit):
        return str(term.value)
    if isinstance(term, BoolLit):
        return "true" if term.value else "false"
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Deref):
        return f"!{term.name}"
    if isinstance(term, Apply):
        args = ", ".join(render_term(a, _LEVEL_SEQ) for a in term.args)
        return f"{term.name}({args})"
    if isinstance(term, Assign):
        return f"{term.name} := {render_term(term.expr, _LEVEL_OR)}"
    if isinstance(term, NewInt):
        return (f"new_int {term.name} := {render_term(term.init, _LEVEL_OR)} "
                f"in {render_term(term.body, _LEVEL_SEQ)}")
    if isinstance(term, Seq):
        return (f"{render_term(term.first, _LEVEL_PREFIX)}; "
                f"{render_term(term.second, _LEVEL_SEQ)}")
    if isinstance(term, Arith):
        if term.op in "+-":
            return (f"{render_term(term.left, _LEVEL_ADD)} {term.op} "
                    f"{render_term(term.right, _LEVEL_MUL)}")
        return (f"{render_term(term.left, _LEVEL_MUL)} * "
                f"{render_term(term.right, _LEVEL_ATOM)}")
    if isinstance(term, Cmp):
        return (f"{render_term(term.left, _LEVEL_ADD)} {term.op} "
                f"{render_term(term.right, _LEVEL_ADD)}")
    if isinstance(term, BoolOp):
        if term.op == "||":
            return (f"{render_term(term.left, _LEVEL_OR)} || "
                    f"{render_term(term.right, _LEVEL_AND)}")
        return (f"{render_term(term.left, _LEVEL_AND)} && "
                f"{render_term(term.right, _LEVEL_NOT)}")
    if isinstance(term, Not):
        return f"not {render_term(term.expr, _LEVEL_NOT)}"
    if isinstance(term, If):
        return (f"if {render_term(term.cond, _LEVEL_OR)} "
                f"then {render_term(term.then, _LEVEL_PREFIX)} "
                f"else {render_term(term.els, _LEVEL_PREFIX)}")
    if isinstance(term, While):
        return (f"while {render_term(term.cond, _LEVEL_OR)} "
                f"do {render_term(term.body, _LEVEL_PREFIX)}")
    raise AssertionError(f"unhandled term {term!r}")


def render_judgment(judgment: Judgment) -> str:
    decls = str(judgment.context)
    sep = " " if decls else ""
    return f"{decls}{sep}|- {render_term(judgment.term)} : {judgment.declared}"


# ---------------------------------------------------------------------------
# Typechecker
# ---------------------------------------------------------------------------

def _literal_bound(ctx: Context, local_domain: int) -> int:
    bound = local_domain
    for e in ctx.entries:
        if isinstance(e.type, BaseType) and e.type.kind == "expint":
            bound = max(bound, e.type.k or 0)
        elif isinstance(e.type, VarIntType):
            bound = max(bound, e.type.k)
        elif isinstance(e.type, FunType):
            for t in (*e.type.args, e.type.result):
                if t.kind == "expint":
                    bound = max(bound, t.k or 0)
    return bound


class _Checker:
    def __init__(self, ctx: Context, literal_bound: int,
                 local_domain: int = DEFAULT_INT_DOMAIN):
        self.ctx = ctx
        self.literal_bound = literal_bound
        self.local_domain = local_domain

    def fail(self, msg: str, term: Term) -> TypecheckError:
        line, col = getattr(term, "pos", (0, 0))
        return TypecheckError(msg, line, col)

    def check(self, term: Term, locals_: dict[str, int]) -> BaseType:
        if isinstance(term, Skip):
            return COM
        if isinstance(term, IntLit):
            if term.value < 0 or term.value >= self.literal_bound:
                raise self.fail(
                    f"integer literal {term.value} outside [0, {self.literal_bound})",
                    term)
            return expint(self.literal_bound)
        if isinstance(term, BoolLit):
            return EXPBOOL
        if isinstance(term, Var):
            ty = self.ctx.lookup(term.name)
            if ty is None and term.name in locals_:
                raise self.fail(
                    f"local variable {term.name!r} must be used via !{term.name} "
                    f"or {term.name} := ...", term)
            if ty is None:
                raise self.fail(f"undeclared identifier {term.name!r}", term)
            if isinstance(ty, FunType):
                raise self.fail(
                    f"function {term.name!r} must be applied to arguments", term)
            if isinstance(ty, VarIntType):
                raise self.fail(
                    f"variable {term.name!r} must be used via !{term.name} "
                    f"or {term.name} := ...", term)
            return ty
        if isinstance(term, Apply):
            ty = self.ctx.lookup(term.name)
            if ty is None:
                raise self.fail(f"undeclared identifier {term.name!r}", term)
            if not isinstance(ty, FunType):
                raise self.fail(f"{term.name!r} is not a function", term)
            if len(term.args) != len(ty.args):
                raise self.fail(
                    f"{term.name!r} expects {len(ty.args)} argument(s), "
                    f"got {len(term.args)}", term)
            for arg, expected in zip(term.args, ty.args):
                got = self.check(arg, locals_)
                if got.kind != expected.kind:
                    raise self.fail(
                        f"argument of {term.name!r} has kind {got.kind}, "
                        f"expected {expected.kind}", arg)
            return ty.result
        if isinstance(term, Deref):
            k = self._cell_domain(term, locals_)
            return expint(k)
        if isinstance(term, Assign):
            self._cell_domain(term, locals_)
            got = self.check(term.expr, locals_)
            if got.kind != "expint":
                raise self.fail("assigned value must be an integer expression",
                                term.expr)
            return COM
        if isinstance(term, NewInt):
            if term.name in locals_ or self.ctx.lookup(term.name) is not None:
                raise self.fail(
                    f"variable {term.name!r} shadows an existing name", term)
            got = self.check(term.init, locals_)
            if got.kind != "expint":
                raise self.fail("initializer must be an integer expression",
                                term.init)
            inner = dict(locals_)
            inner[term.name] = self.local_domain
            return self.check(term.body, inner)
        if isinstance(term, Seq):
            first = self.check(term.first, locals_)
            if first.kind != "com":
                raise self.fail("left of ';' must be a command", term.first)
            return self.check(term.second, locals_)
        if isinstance(term, Arith):
            for side in (term.left, term.right):
                got = self.check(side, locals_)
                if got.kind != "expint":
                    raise self.fail(
                        f"arithmetic needs integer operands, got {got.kind}", side)
            return expint(self.literal_bound)
        if isinstance(term, Cmp):
            for side in (term.left, term.right):
                got = self.check(side, locals_)
                if got.kind != "expint":
                    raise self.fail(
                        f"comparison needs integer operands, got {got.kind}", side)
            return EXPBOOL
        if isinstance(term, BoolOp):
            for side in (term.left, term.right):
                got = self.check(side, locals_)
                if got.kind != "expbool":
                    raise self.fail(
                        f"{term.op} needs boolean operands, got {got.kind}", side)
            return EXPBOOL
        if isinstance(term, Not):
            got = self.check(term.expr, locals_)
            if got.kind != "expbool":
                raise self.fail(f"not needs a boolean operand, got {got.kind}",
                                term.expr)
            return EXPBOOL
        if isinstance(term, If):
            got = self.check(term.cond, locals_)
            if got.kind != "expbool":
                raise self.fail(f"guard must be boolean, got {got.kind}",
                                term.cond)
            then = self.check(term.then, locals_)
            els = self.check(term.els, locals_)
            if then.kind != els.kind:
                raise self.fail(
                    f"branches disagree: {then.kind} vs {els.kind}", term)
            return then
        if isinstance(term, While):
            got = self.check(term.cond, locals_)
            if got.kind != "expbool":
                raise self.fail(f"guard must be boolean, got {got.kind}",
                                term.cond)
            body = self.check(term.body, locals_)
            if body.kind != "com":
                raise self.fail("loop body must be a command", term.body)
            return COM
        raise self.fail(f"unsupported term {type(term).__name__}", term)

    def _cell_domain(self, term: Term, locals_: dict[str, int]) -> int:
        name = term.name  # type: ignore[attr-defined]
        if name in locals_:
            return locals_[name]
        ty = self.ctx.lookup(name)
        if isinstance(ty, VarIntType):
            return ty.k
        if ty is None:
            raise self.fail(f"undeclared variable {name!r}", term)
        raise self.fail(f"{name!r} is not an assignable variable", term)


def typecheck(term: Term, ctx: Context,
              expected: IdentType | None = None,
              local_domain: int = DEFAULT_INT_DOMAIN) -> TypedTerm:
    """Check a term against its context; returns the term with its base type.

    Only base-typed judgments (com / expbool / expint) are analyzable; a
    declared varint or function type for the term itself is rejected.
    """
    seen: set[str] = set()
    for e in ctx.entries:
        if e.name in seen:
            raise TypecheckError(f"duplicate identifier {e.name!r} in context", 0, 0)
        seen.add(e.name)
        if e.name == "abort" and e.type != COM:
            raise TypecheckError("'abort' must have type com", 0, 0)

    checker = _Checker(ctx, _literal_bound(ctx, local_domain), local_domain)
    got = checker.check(term, {})
    if expected is not None:
        if not isinstance(expected, BaseType):
            raise TypecheckError(
                f"only base-typed judgments are analyzable, got {expected}", 0, 0)
        if got.kind != expected.kind:
            raise TypecheckError(
                f"term has kind {got.kind}, declared {expected.kind}", 0, 0)
        if expected.kind == "expint":
            got = expected
    return TypedTerm(term, ctx, got)
