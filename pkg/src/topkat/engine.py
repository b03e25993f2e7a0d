"""Equivalence decision procedure for KAT and TopKAT terms.

Top elimination first rewrites every occurrence of the top element into a
star over the joint occurring actions plus a reserved primitive action; the
result is a plain KAT term whose guarded-string language characterizes
validity.  Equality is then decided by exploring the determinized partial
derivative automata of both terms in lockstep; any observation mismatch is
replayed into a guarded-string witness accepted by exactly one side.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .atoms import Atom, GuardedString, enumerate_atoms, eval_test, render_guarded_string
from .syntax import (
    Act,
    Alphabet,
    Claim,
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
    TOP_ACTION,
    Top,
    ValidationError,
    Zero,
    occurring_primitives,
    plus_all,
    term_kind,
    validate,
)


@dataclass(frozen=True)
class ReducedTerm:
    """A term with every top occurrence eliminated; tracks whether any existed."""

    term: Term
    original_had_top: bool


def reduce_top(term: Term, joint_actions) -> ReducedTerm:
    """Replace each top with (sum of joint actions + reserved action)*.

    ``joint_actions`` must be the union of action symbols occurring in the
    terms under comparison; top-free terms pass through unchanged.
    """
    if term_kind(term) is TermKind.FAILTOPKAT:
        raise ValidationError("fail terms are not supported by the reduction")
    ordered = sorted(set(joint_actions) - {TOP_ACTION})
    replacement = Star(plus_all(*[Act(a) for a in ordered], Act(TOP_ACTION)))
    had_top = False

    def go(t: Term) -> Term:
        nonlocal had_top
        match t:
            case Top():
                had_top = True
                return replacement
            case Plus(l, r):
                return Plus(go(l), go(r))
            case Seq(l, r):
                return Seq(go(l), go(r))
            case Star(inner):
                return Star(go(inner))
            case Not(inner):
                return Not(go(inner))
            case _:
                return t

    return ReducedTerm(go(term), had_top)


@dataclass(frozen=True)
class Verdict:
    """Outcome of an equivalence or ordering decision.

    A NotEqual verdict carries a guarded string accepted by exactly one of
    the two languages, and which side accepts it.
    """

    equal: bool
    witness: GuardedString | None = None
    witness_side: str | None = None  # "left" or "right"

    def render_witness(self, alphabet: Alphabet) -> str | None:
        if self.witness is None:
            return None
        return render_guarded_string(self.witness, alphabet)


EQUAL = Verdict(True)

StateSet = frozenset


class _Decider:
    """Per-call derivative and observation caches over one alphabet."""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.atoms = enumerate_atoms(alphabet)
        self._obs: dict[tuple[Term, Atom], bool] = {}
        self._deriv: dict[tuple[Term, Atom, str], StateSet] = {}
        self._set_deriv: dict[tuple[StateSet, Atom, str], StateSet] = {}

    def obs_term(self, t: Term, atom: Atom) -> bool:
        """Whether the length-zero guarded string at this atom is accepted."""
        key = (t, atom)
        hit = self._obs.get(key)
        if hit is not None:
            return hit
        match t:
            case Zero() | Act(_):
                out = False
            case One() | Star(_):
                out = True
            case Test(_) | Not(_):
                out = eval_test(t, atom, self.alphabet)
            case Plus(l, r):
                out = self.obs_term(l, atom) or self.obs_term(r, atom)
            case Seq(l, r):
                out = self.obs_term(l, atom) and self.obs_term(r, atom)
            case _:
                raise ValidationError(f"term not reduced: {t!r}")
        self._obs[key] = out
        return out

    def deriv_term(self, t: Term, atom: Atom, action: str) -> StateSet:
        """Antimirov partial derivative: residuals after consuming atom·action."""
        key = (t, atom, action)
        hit = self._deriv.get(key)
        if hit is not None:
            return hit
        match t:
            case Act(s):
                out = frozenset((ONE,)) if s == action else frozenset()
            case Zero() | One() | Test(_) | Not(_):
                out = frozenset()
            case Plus(l, r):
                out = self.deriv_term(l, atom, action) | self.deriv_term(r, atom, action)
            case Seq(l, r):
                out = frozenset(_seq(d, r) for d in self.deriv_term(l, atom, action))
                if self.obs_term(l, atom):
                    out |= self.deriv_term(r, atom, action)
            case Star(inner):
                out = frozenset(_seq(d, t) for d in self.deriv_term(inner, atom, action))
            case _:
                raise ValidationError(f"term not reduced: {t!r}")
        self._deriv[key] = out
        return out

    def obs_set(self, states: StateSet, atom: Atom) -> bool:
        return any(self.obs_term(t, atom) for t in states)

    def deriv_set(self, states: StateSet, atom: Atom, action: str) -> StateSet:
        key = (states, atom, action)
        hit = self._set_deriv.get(key)
        if hit is not None:
            return hit
        out: frozenset = frozenset()
        for t in states:
            out |= self.deriv_term(t, atom, action)
        self._set_deriv[key] = out
        return out


def _seq(left: Term, right: Term) -> Term:
    return right if left == ONE else Seq(left, right)


def obs(t: Term, atom: Atom, alphabet: Alphabet) -> bool:
    """Acceptance of the length-zero guarded string at the given atom."""
    return _Decider(alphabet).obs_term(t, atom)


def derive(t: Term, atom: Atom, action: str, alphabet: Alphabet) -> StateSet:
    """Partial-derivative state set of a reduced term for one atom/action letter."""
    return _Decider(alphabet).deriv_term(t, atom, action)


def _letters(r1: Term, r2: Term) -> list[str]:
    acts = set()
    for t in (r1, r2):
        occ, _ = occurring_primitives(t)
        acts |= occ
    return sorted(acts - {TOP_ACTION}) + ([TOP_ACTION] if TOP_ACTION in acts else [])


def decide_equal(t1: Term, t2: Term, alphabet: Alphabet) -> Verdict:
    """Decide whether t1 = t2 holds in every TopKAT (equivalently: under the
    guarded-string interpretation, or in every general relational TopKAT).

    The terms are validated against the alphabet, top-eliminated over their
    joint occurring actions, and compared by a breadth-first bisimulation of
    determinized derivative state sets.  Witnesses are therefore shortest.
    """
    for t in (t1, t2):
        validate(t, alphabet, TermKind.TOPKAT)
    acts1, _ = occurring_primitives(t1)
    acts2, _ = occurring_primitives(t2)
    joint = acts1 | acts2
    r1 = reduce_top(t1, joint).term
    r2 = reduce_top(t2, joint).term
    return _bisimulate(r1, r2, alphabet)


def _bisimulate(r1: Term, r2: Term, alphabet: Alphabet) -> Verdict:
    dec = _Decider(alphabet)
    actions = _letters(r1, r2)
    start = (frozenset((r1,)), frozenset((r2,)))
    if start[0] == start[1]:
        return EQUAL
    parent: dict[tuple[StateSet, StateSet], tuple | None] = {start: None}
    queue: deque[tuple[StateSet, StateSet]] = deque((start,))
    atoms = dec.atoms
    while queue:
        pair = queue.popleft()
        s1, s2 = pair
        for atom in atoms:
            if dec.obs_set(s1, atom) != dec.obs_set(s2, atom):
                return _rebuild_witness(dec, parent, pair, atom)
        for atom in atoms:
            for action in actions:
                n1 = dec.deriv_set(s1, atom, action)
                n2 = dec.deriv_set(s2, atom, action)
                if n1 == n2:
                    continue
                nxt = (n1, n2)
                if nxt not in parent:
                    parent[nxt] = (pair, atom, action)
                    queue.append(nxt)
    return EQUAL


def _rebuild_witness(dec: _Decider, parent: dict, pair, final_atom: Atom) -> Verdict:
    side = "left" if dec.obs_set(pair[0], final_atom) else "right"
    letters = []
    node = pair
    while parent[node] is not None:
        node, atom, action = parent[node]
        letters.append((atom, action))
    letters.reverse()
    flat: list = []
    for atom, action in letters:
        flat.append(atom)
        flat.append(action)
    flat.append(final_atom)
    return Verdict(False, GuardedString(flat), side)


def decide_leq(t1: Term, t2: Term, alphabet: Alphabet) -> Verdict:
    """Decide t1 <= t2 via t1 + t2 = t2; a witness lies in the language of t1
    but not of t2."""
    verdict = decide_equal(Plus(t1, t2), t2, alphabet)
    if verdict.equal:
        return verdict
    # The left language contains the right one, so any witness is left-sided.
    return Verdict(False, verdict.witness, "left")


def decide_claim(claim: Claim, alphabet: Alphabet) -> Verdict:
    """Decide an equation or inequality between KAT/TopKAT terms."""
    c = claim.normalized()
    if c.op == "=":
        return decide_equal(c.lhs, c.rhs, alphabet)
    return decide_leq(c.lhs, c.rhs, alphabet)
