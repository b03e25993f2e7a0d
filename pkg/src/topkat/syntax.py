"""Alphabets, term syntax, parsing, printing, validation, and program desugaring.

Terms are plain immutable trees; they carry no alphabet.  Validation against a
declared :class:`Alphabet` is a separate pass so the same term can be checked
against several alphabets (the top-elimination reduction extends the action
alphabet, for instance).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property


class TopkatError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TopkatError):
    """Raised on malformed term or triple text; carries a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ValidationError(TopkatError):
    """Raised when a term violates a structural rule or uses undeclared symbols."""


RESERVED_WORDS = frozenset({"top", "fail", "ok", "er"})
IDENT_RE = re.compile(r"[a-z][a-zA-Z0-9_]*")

#: Reserved action symbol used when the top element is treated as a primitive
#: action by the language model and the reduction.  Not expressible as a user
#: identifier, so it can never collide with a declared alphabet.
TOP_ACTION = "τ"

DEFAULT_TEST_CAP = 16


def default_test_cap() -> int:
    """Test-alphabet cap; overridable through the TOPKAT_ATOM_CAP env var."""
    return int(os.environ.get("TOPKAT_ATOM_CAP", DEFAULT_TEST_CAP))


def _split_symbols(spec: str) -> tuple[str, ...]:
    return tuple(s for s in re.split(r"[,\s]+", spec.strip()) if s)


def _check_symbols(kind: str, symbols: tuple[str, ...], seen: set[str]) -> None:
    for sym in symbols:
        if not IDENT_RE.fullmatch(sym):
            raise ValidationError(f"invalid {kind} symbol {sym!r}")
        if sym in RESERVED_WORDS:
            raise ValidationError(f"{kind} symbol {sym!r} is a reserved word")
        if sym in seen:
            raise ValidationError(f"symbol {sym!r} declared twice")
        seen.add(sym)


@dataclass(frozen=True)
class Alphabet:
    """Ordered, disjoint action and test symbol declarations."""

    actions: tuple[str, ...]
    tests: tuple[str, ...]
    test_cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "tests", tuple(self.tests))
        seen: set[str] = set()
        _check_symbols("action", self.actions, seen)
        _check_symbols("test", self.tests, seen)
        cap = self.test_cap if self.test_cap is not None else default_test_cap()
        object.__setattr__(self, "test_cap", cap)
        if len(self.tests) > cap:
            raise ValidationError(
                f"{len(self.tests)} test symbols exceed the atom cap {cap} "
                f"(set TOPKAT_ATOM_CAP to raise it)"
            )

    @classmethod
    def from_spec(cls, actions: str, tests: str, test_cap: int | None = None) -> "Alphabet":
        """Build from comma- or whitespace-separated symbol lists."""
        return cls(_split_symbols(actions), _split_symbols(tests), test_cap)

    @cached_property
    def test_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.tests)}

    @cached_property
    def action_set(self) -> frozenset[str]:
        return frozenset(self.actions)

    @cached_property
    def test_set(self) -> frozenset[str]:
        return frozenset(self.tests)


class TermKind(IntEnum):
    """Largest feature set a term uses.  KAT < TOPKAT < FAILTOPKAT."""

    KAT = 0
    TOPKAT = 1
    FAILTOPKAT = 2


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class One(Term):
    pass


@dataclass(frozen=True)
class Top(Term):
    pass


@dataclass(frozen=True)
class Fail(Term):
    pass


@dataclass(frozen=True)
class Act(Term):
    symbol: str


@dataclass(frozen=True)
class Test(Term):
    symbol: str

    __test__ = False  # not a pytest class, despite the name


@dataclass(frozen=True)
class Plus(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Seq(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Star(Term):
    inner: Term


@dataclass(frozen=True)
class Not(Term):
    inner: Term


@dataclass(frozen=True)
class _SymRef(Term):
    """Unresolved identifier; only appears in pre-resolution parse trees."""

    name: str
    pos: int = field(default=0, compare=False)


ZERO = Zero()
ONE = One()
TOP = Top()
FAIL = Fail()


def seq_all(*terms: Term) -> Term:
    """Left-associated product of one or more terms."""
    acc = terms[0]
    for t in terms[1:]:
        acc = Seq(acc, t)
    return acc


def plus_all(*terms: Term) -> Term:
    acc = terms[0]
    for t in terms[1:]:
        acc = Plus(acc, t)
    return acc


def term_kind(t: Term) -> TermKind:
    """Compute the feature lattice level a term actually uses."""
    kind = TermKind.KAT
    stack = [t]
    while stack:
        node = stack.pop()
        match node:
            case Fail():
                return TermKind.FAILTOPKAT
            case Top():
                kind = TermKind.TOPKAT
            case Plus(l, r) | Seq(l, r):
                stack.append(l)
                stack.append(r)
            case Star(inner) | Not(inner):
                stack.append(inner)
    return kind


def is_test_only(t: Term) -> bool:
    """True when the term lies in the boolean fragment (no actions, top, fail, star)."""
    match t:
        case Zero() | One() | Test(_):
            return True
        case Not(inner):
            return is_test_only(inner)
        case Plus(l, r) | Seq(l, r):
            return is_test_only(l) and is_test_only(r)
        case _:
            return False


def occurring_primitives(t: Term) -> tuple[frozenset[str], frozenset[str]]:
    """Exact sets of action and test symbols occurring in the term."""
    acts: set[str] = set()
    tests: set[str] = set()
    stack = [t]
    while stack:
        node = stack.pop()
        match node:
            case Act(s):
                acts.add(s)
            case Test(s):
                tests.add(s)
            case Plus(l, r) | Seq(l, r):
                stack.append(l)
                stack.append(r)
            case Star(inner) | Not(inner):
                stack.append(inner)
    return frozenset(acts), frozenset(tests)


STAR_OVER_TESTS_HINT = (
    "star over a pure-test term always equals 1 (b* = 1); write 1 instead"
)


def validate(t: Term, alphabet: Alphabet, allow: TermKind = TermKind.FAILTOPKAT) -> None:
    """Check declaredness and structural rules of a term against an alphabet.

    Raises :class:`ValidationError` on: undeclared symbols, negation over a
    non-test subterm, star over a pure-test subterm, or top/fail used beyond
    the allowed feature level.
    """
    match t:
        case Zero() | One():
            return
        case Top():
            if allow < TermKind.TOPKAT:
                raise ValidationError("top is not allowed in a plain KAT term")
        case Fail():
            if allow < TermKind.FAILTOPKAT:
                raise ValidationError("fail is only allowed in fail-mode terms")
        case Act(s):
            if s not in alphabet.action_set:
                raise ValidationError(f"undeclared action symbol {s!r}")
        case Test(s):
            if s not in alphabet.test_set:
                raise ValidationError(f"undeclared test symbol {s!r}")
        case Not(inner):
            if not is_test_only(inner):
                raise ValidationError(
                    f"negation applies only to test-only terms, got ~{print_term(inner)}"
                )
            validate(inner, alphabet, allow)
        case Star(inner):
            if is_test_only(inner):
                raise ValidationError(STAR_OVER_TESTS_HINT)
            validate(inner, alphabet, allow)
        case Plus(l, r) | Seq(l, r):
            validate(l, alphabet, allow)
            validate(r, alphabet, allow)
        case _SymRef(name, pos):
            raise ValidationError(f"unresolved symbol {name!r} at offset {pos}")
        case _:
            raise ValidationError(f"unknown term node {t!r}")


def print_term(t: Term) -> str:
    """Canonical fully-parenthesized rendering; inverse of :func:`parse_term`."""
    match t:
        case Zero():
            return "0"
        case One():
            return "1"
        case Top():
            return "top"
        case Fail():
            return "fail"
        case Act(s) | Test(s) | _SymRef(s):
            return s
        case Plus(l, r):
            return f"({print_term(l)} + {print_term(r)})"
        case Seq(l, r):
            return f"({print_term(l)};{print_term(r)})"
        case Star(inner):
            return f"({print_term(inner)})*"
        case Not(inner):
            return f"~{print_term(inner)}"
    raise ValidationError(f"unknown term node {t!r}")


_TOKEN_RE = re.compile(r"(?P<ws>\s+)|(?P<ident>[a-z][a-zA-Z0-9_]*)|(?P<op>[+;~*()01])")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "ident":
            tokens.append(("ident", m.group(), pos))
        elif m.lastgroup == "op":
            tokens.append((m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over: sum := seq ('+' seq)*; seq := unary (';' unary)*;
    unary := '~' unary | atomexpr '*'*; atomexpr := 0|1|top|fail|ident|'(' term ')'."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Term:
        t = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return t

    def sum(self) -> Term:
        t = self.seq()
        while self.peek()[0] == "+":
            self.take("+")
            t = Plus(t, self.seq())
        return t

    def seq(self) -> Term:
        t = self.unary()
        while self.peek()[0] == ";":
            self.take(";")
            t = Seq(t, self.unary())
        return t

    def unary(self) -> Term:
        if self.peek()[0] == "~":
            self.take("~")
            return Not(self.unary())
        t = self.atomexpr()
        while self.peek()[0] == "*":
            self.take("*")
            t = Star(t)
        return t

    def atomexpr(self) -> Term:
        kind, value, pos = self.peek()
        if kind == "0":
            self.take("0")
            return ZERO
        if kind == "1":
            self.take("1")
            return ONE
        if kind == "ident":
            self.take("ident")
            if value == "top":
                return TOP
            if value == "fail":
                return FAIL
            if value in RESERVED_WORDS:
                raise ParseError(f"reserved word {value!r} cannot be a symbol", pos)
            return _SymRef(value, pos)
        if kind == "(":
            self.take("(")
            t = self.sum()
            self.take(")")
            return t
        raise ParseError(f"expected a term, found {value or 'end of input'!r}", pos)


def parse_raw(text: str) -> Term:
    """Parse without resolving identifiers; leaves are :class:`_SymRef` nodes."""
    return _Parser(text).parse()


def resolve(t: Term, alphabet: Alphabet) -> Term:
    """Replace symbol references by Act/Test per the alphabet."""
    match t:
        case _SymRef(name, pos):
            if name in alphabet.action_set:
                return Act(name)
            if name in alphabet.test_set:
                return Test(name)
            raise ParseError(f"undeclared symbol {name!r}", pos)
        case Plus(l, r):
            return Plus(resolve(l, alphabet), resolve(r, alphabet))
        case Seq(l, r):
            return Seq(resolve(l, alphabet), resolve(r, alphabet))
        case Star(inner):
            return Star(resolve(inner, alphabet))
        case Not(inner):
            return Not(resolve(inner, alphabet))
        case _:
            return t


def parse_term(text: str, alphabet: Alphabet, allow: TermKind = TermKind.FAILTOPKAT) -> Term:
    """Parse, resolve and validate a term against a declared alphabet."""
    t = resolve(parse_raw(text), alphabet)
    validate(t, alphabet, allow)
    return t


@dataclass(frozen=True)
class Claim:
    """An equation or inequality between two terms."""

    lhs: Term
    op: str  # "=", "<=" or ">="
    rhs: Term

    def __post_init__(self):
        if self.op not in ("=", "<=", ">="):
            raise ValidationError(f"unknown claim operator {self.op!r}")

    def normalized(self) -> "Claim":
        """Orient inequalities as '<='."""
        if self.op == ">=":
            return Claim(self.rhs, "<=", self.lhs)
        return self

    def render(self) -> str:
        return f"{print_term(self.lhs)} {self.op} {print_term(self.rhs)}"


_CLAIM_OP_RE = re.compile(r"(<=|>=|=)")


def parse_claim(text: str, alphabet: Alphabet, allow: TermKind = TermKind.TOPKAT) -> Claim:
    m = _CLAIM_OP_RE.search(text)
    if m is None:
        raise ParseError("claim must contain '=', '<=' or '>='", 0)
    lhs = parse_term(text[: m.start()], alphabet, allow)
    rhs = parse_term(text[m.end():], alphabet, allow)
    return Claim(lhs, m.group(), rhs)


# --- while-program sugar -----------------------------------------------------


@dataclass(frozen=True)
class Stmt:
    pass


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class ErrorStmt(Stmt):
    pass


@dataclass(frozen=True)
class Prim(Stmt):
    symbol: str


@dataclass(frozen=True)
class Assume(Stmt):
    test: Term


@dataclass(frozen=True)
class SeqStmt(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class Choice(Stmt):
    left: Stmt
    right: Stmt


@dataclass(frozen=True)
class If(Stmt):
    cond: Term
    then: Stmt
    orelse: Stmt


@dataclass(frozen=True)
class While(Stmt):
    cond: Term
    body: Stmt


def desugar(stmt: Stmt, allow: TermKind = TermKind.FAILTOPKAT) -> Term:
    """Lower program sugar to a core term.

    skip becomes 1, assume b becomes the test b, error becomes fail,
    if b then p else q becomes b;p + ~b;q, and while b do p becomes (b;p)*;~b.
    """
    match stmt:
        case Skip():
            return ONE
        case ErrorStmt():
            if allow < TermKind.FAILTOPKAT:
                raise ValidationError("error statement requires fail-mode terms")
            return FAIL
        case Prim(symbol):
            return Act(symbol)
        case Assume(test):
            if not is_test_only(test):
                raise ValidationError("assume requires a test-only condition")
            return test
        case SeqStmt(first, second):
            return Seq(desugar(first, allow), desugar(second, allow))
        case Choice(left, right):
            return Plus(desugar(left, allow), desugar(right, allow))
        case If(cond, then, orelse):
            if not is_test_only(cond):
                raise ValidationError("if condition must be test-only")
            return Plus(
                Seq(cond, desugar(then, allow)),
                Seq(Not(cond), desugar(orelse, allow)),
            )
        case While(cond, body):
            if not is_test_only(cond):
                raise ValidationError("while condition must be test-only")
            return Seq(Star(Seq(cond, desugar(body, allow))), Not(cond))
    raise ValidationError(f"unknown statement {stmt!r}")
