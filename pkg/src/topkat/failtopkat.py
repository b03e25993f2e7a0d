"""Fail-splitting of FailTopKAT terms into ok/er component pairs.

A term over a signature with an explicit failure element splits into two
fail-free components: executions that terminate normally and executions that
end in failure.  The pair operations are

    (p, p') (q, q') = (pq, p' + pq')      (p, p')* = (p*, p* p')
    fail = (0, 1)    top = (top, 0)       primitives = (prim, 0)

Splitting makes term equality decidable: two fail terms are equated exactly
when both component pairs are TopKAT-theory equal, i.e. the equality holds in
every pair model built this way over any TopKAT.  The same pair operations
evaluated over a finite relational model (with the complete relation as top)
give the concrete semantics of programs with abnormal termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .engine import Verdict, decide_equal, decide_leq
from .relmodels import (
    Rel,
    RelationalModel,
    ModelError,
    eval_term,
    rel_compose,
    rel_empty,
    rel_identity,
    rel_star,
    rel_union,
)
from .syntax import (
    Act,
    Alphabet,
    Fail,
    Not,
    ONE,
    One,
    Plus,
    Seq,
    Star,
    Term,
    TermKind,
    Test,
    Top,
    ValidationError,
    ZERO,
    Zero,
    validate,
)


class ErrorCode(str, Enum):
    OK = "ok"
    ER = "er"


@dataclass(frozen=True)
class SplitPair:
    """Fail-free ok/er components of a fail term."""

    ok: Term
    er: Term


def _plus(a: Term, b: Term) -> Term:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return Plus(a, b)


def _seq(a: Term, b: Term) -> Term:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return Seq(a, b)


def _star(a: Term) -> Term:
    if a == ZERO or a == ONE:
        return ONE
    return Star(a)


def split(term: Term) -> SplitPair:
    """Structural fail-splitting; components carry only unit/annihilator
    simplifications so they stay auditable against hand derivations."""
    match term:
        case Fail():
            return SplitPair(ZERO, ONE)
        case Zero():
            return SplitPair(ZERO, ZERO)
        case One() | Top() | Act(_) | Test(_):
            return SplitPair(term, ZERO)
        case Not(_):
            return SplitPair(term, ZERO)
        case Plus(l, r):
            a, b = split(l), split(r)
            return SplitPair(_plus(a.ok, b.ok), _plus(a.er, b.er))
        case Seq(l, r):
            a, b = split(l), split(r)
            return SplitPair(_seq(a.ok, b.ok), _plus(a.er, _seq(a.ok, b.er)))
        case Star(inner):
            a = split(inner)
            ok = _star(a.ok)
            return SplitPair(ok, _seq(ok, a.er))
    raise ValidationError(f"unknown term node {term!r}")


def eval_fail(model: RelationalModel, term: Term) -> tuple[Rel, Rel]:
    """Direct evaluation in the pair algebra over a full-top relational model.

    Intentionally independent of :func:`split`; their agreement is a tested
    property, not an assumption.
    """
    if not model.is_full_top:
        raise ModelError("fail semantics requires a full-top model")
    n = model.n
    empty = rel_empty(n)

    def go(t: Term) -> tuple[Rel, Rel]:
        match t:
            case Fail():
                return empty, rel_identity(n)
            case Zero():
                return empty, empty
            case One() | Top() | Act(_) | Test(_) | Not(_):
                return eval_term(model, t), empty
            case Plus(l, r):
                a_ok, a_er = go(l)
                b_ok, b_er = go(r)
                return rel_union(a_ok, b_ok), rel_union(a_er, b_er)
            case Seq(l, r):
                a_ok, a_er = go(l)
                b_ok, b_er = go(r)
                return rel_compose(a_ok, b_ok), rel_union(a_er, rel_compose(a_ok, b_er))
            case Star(inner):
                a_ok, a_er = go(inner)
                ok = rel_star(a_ok)
                return ok, rel_compose(ok, a_er)
        raise ValidationError(f"unknown term node {t!r}")

    return go(term)


@dataclass(frozen=True)
class FailVerdict:
    """Componentwise decision outcome for fail terms."""

    equal: bool
    ok: Verdict
    er: Verdict

    @property
    def failing_component(self) -> str | None:
        if not self.ok.equal:
            return "ok"
        if not self.er.equal:
            return "er"
        return None

    @property
    def witness(self):
        if not self.ok.equal:
            return "ok", self.ok.witness, self.ok.witness_side
        if not self.er.equal:
            return "er", self.er.witness, self.er.witness_side
        return None


def decide_fail_equal(t1: Term, t2: Term, alphabet: Alphabet) -> FailVerdict:
    """Equality of fail terms: both split components must be TopKAT-theory
    equal.  This decides validity in every pair model over every TopKAT; the
    witness, when present, is tagged with the separating component."""
    for t in (t1, t2):
        validate(t, alphabet, TermKind.FAILTOPKAT)
    a, b = split(t1), split(t2)
    ok = decide_equal(a.ok, b.ok, alphabet)
    er = decide_equal(a.er, b.er, alphabet)
    return FailVerdict(ok.equal and er.equal, ok, er)


def decide_fail_leq(t1: Term, t2: Term, alphabet: Alphabet) -> FailVerdict:
    """Componentwise order: t1 <= t2 exactly when both components are below,
    since + acts componentwise in the pair algebra."""
    for t in (t1, t2):
        validate(t, alphabet, TermKind.FAILTOPKAT)
    a, b = split(t1), split(t2)
    ok = decide_leq(a.ok, b.ok, alphabet)
    er = decide_leq(a.er, b.er, alphabet)
    return FailVerdict(ok.equal and er.equal, ok, er)
