"""Minimal tests (atoms), guarded strings, and bounded language enumeration.

This module is the independent semantic oracle: languages of guarded strings
computed by brute-force structural recursion, with star unrolled until the
bounded fragment stabilizes.  Atoms are bitmasks over the ordered test
alphabet (bit i is the polarity of the i-th test symbol).

Internally a bounded language is stored with each string packed into a single
integer and bucketed by (action count, head atom, last atom), which keeps the
coalesced products cheap at oracle scale.  The public API exposes languages as
sets of :class:`GuardedString`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

from .syntax import (
    Act,
    Alphabet,
    Not,
    One,
    Plus,
    Seq,
    Star,
    Term,
    Test,
    Top,
    TOP_ACTION,
    TopkatError,
    ValidationError,
    Zero,
    is_test_only,
    occurring_primitives,
    print_term,
)

Atom = int


class AtomCapError(TopkatError):
    """Raised when the test alphabet would require more atoms than the cap allows."""


class LangBudgetExceeded(TopkatError):
    """Raised by bounded-language construction when the string budget is hit."""


ABSOLUTE_TEST_CAP = 24


def enumerate_atoms(alphabet: Alphabet) -> list[Atom]:
    """All 2^|B| atoms in bitmask order; the single empty atom when B is empty."""
    n = len(alphabet.tests)
    if n > min(alphabet.test_cap, ABSOLUTE_TEST_CAP):
        raise AtomCapError(f"{n} tests exceed the atom enumeration cap")
    return list(range(1 << n))


def eval_test(term: Term, atom: Atom, alphabet: Alphabet) -> bool:
    """Boolean-algebra evaluation of a test-only term under an atom."""
    idx = alphabet.test_index

    def go(t: Term) -> bool:
        match t:
            case Test(s):
                return bool((atom >> idx[s]) & 1)
            case Not(inner):
                return not go(inner)
            case Plus(l, r):
                return go(l) or go(r)
            case Seq(l, r):
                return go(l) and go(r)
            case One():
                return True
            case Zero():
                return False
        raise ValidationError(f"not a test-only term: {print_term(term)}")

    return go(term)


class GuardedString(tuple):
    """Alternating atom/action word a0 p1 a1 ... pn an, stored flat.

    Even positions hold atoms (ints), odd positions hold action symbols.
    Being a tuple, instances hash and compare structurally, which makes
    oracle set comparisons exact.
    """

    __slots__ = ()

    @classmethod
    def single(cls, atom: Atom) -> "GuardedString":
        return cls((atom,))

    @classmethod
    def of(cls, head: Atom, *tail: tuple[str, Atom]) -> "GuardedString":
        flat: list = [head]
        for action, atom in tail:
            flat.append(action)
            flat.append(atom)
        return cls(flat)

    @property
    def head(self) -> Atom:
        return self[0]

    @property
    def last(self) -> Atom:
        return self[-1]

    @property
    def num_actions(self) -> int:
        return len(self) // 2

    @property
    def tail(self) -> tuple[tuple[str, Atom], ...]:
        return tuple((self[i], self[i + 1]) for i in range(1, len(self), 2))


def coalesce(x: GuardedString, y: GuardedString) -> GuardedString | None:
    """Fuse two guarded strings on a shared boundary atom; None on mismatch."""
    if x[-1] != y[0]:
        return None
    return GuardedString(x + y[1:])


def render_atom(atom: Atom, alphabet: Alphabet) -> str:
    """Comma-joined signed literals, e.g. ``b,~c``; the empty product prints as 1."""
    if not alphabet.tests:
        return "1"
    parts = []
    for i, name in enumerate(alphabet.tests):
        parts.append(name if (atom >> i) & 1 else f"~{name}")
    return ",".join(parts)


def render_guarded_string(gs: GuardedString, alphabet: Alphabet) -> str:
    """Witness text form: ``<atom> [act <atom>]*``; the reserved action prints as top."""
    parts = [render_atom(gs[0], alphabet)]
    for i in range(1, len(gs), 2):
        action = gs[i]
        parts.append("top" if action == TOP_ACTION else action)
        parts.append(render_atom(gs[i + 1], alphabet))
    return " ".join(parts)


# --- packed bounded languages -------------------------------------------------
#
# A packed string with k actions occupies atom_bits + k*(act_bits + atom_bits)
# bits: atom0 in the low bits, then alternating action/atom fields.  The i-th
# atom therefore sits at shift i*step, which makes fusion a shift-or.


@dataclass(frozen=True)
class LangContext:
    """Packing layout for one alphabet plus the action symbols in play."""

    alphabet: Alphabet
    actions: tuple[str, ...]

    @cached_property
    def atom_bits(self) -> int:
        return max(1, len(self.alphabet.tests))

    @cached_property
    def act_bits(self) -> int:
        return max(1, (max(len(self.actions), 1) - 1).bit_length())

    @cached_property
    def step(self) -> int:
        return self.atom_bits + self.act_bits

    @cached_property
    def atom_mask(self) -> int:
        return (1 << self.atom_bits) - 1

    @cached_property
    def act_mask(self) -> int:
        return (1 << self.act_bits) - 1

    @cached_property
    def action_code(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.actions)}

    @cached_property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(enumerate_atoms(self.alphabet))


def lang_context(term_or_terms, alphabet: Alphabet, include_top_action: bool = False) -> LangContext:
    """Context whose action table covers all actions occurring in the given terms."""
    terms = term_or_terms if isinstance(term_or_terms, (list, tuple)) else [term_or_terms]
    acts: set[str] = set()
    for t in terms:
        occ, _ = occurring_primitives(t)
        acts |= occ
    if include_top_action:
        acts.add(TOP_ACTION)
    ordered = sorted(acts - {TOP_ACTION}) + ([TOP_ACTION] if TOP_ACTION in acts or include_top_action else [])
    return LangContext(alphabet, tuple(ordered))


# Bucket key: (num_actions, head_atom, last_atom) -> set of packed ints.
BLang = dict


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit: int | None):
        self.left = limit

    def spend(self, amount: int) -> None:
        if self.left is None:
            return
        self.left -= amount
        if self.left < 0:
            raise LangBudgetExceeded("bounded-language budget exhausted")


def _bl_empty() -> BLang:
    return {}


def _bl_add(lang: BLang, key, packed: int, budget: _Budget) -> None:
    bucket = lang.get(key)
    if bucket is None:
        lang[key] = bucket = set()
    if packed not in bucket:
        budget.spend(1)
        bucket.add(packed)


def _bl_atoms(ctx: LangContext, pred=None) -> BLang:
    lang: BLang = {}
    for a in ctx.atoms:
        if pred is None or pred(a):
            lang[(0, a, a)] = {a}
    return lang


def _bl_union(a: BLang, b: BLang, budget: _Budget) -> BLang:
    out: BLang = {k: set(v) for k, v in a.items()}
    for key, bucket in b.items():
        dst = out.get(key)
        if dst is None:
            out[key] = set(bucket)
        else:
            added = len(bucket - dst)
            budget.spend(added)
            dst |= bucket
    return out


def _bl_cat(a: BLang, b: BLang, nmax: int, ctx: LangContext, budget: _Budget) -> BLang:
    out: BLang = {}
    step = ctx.step
    ab = ctx.atom_bits
    for (ka, ha, la), sa in a.items():
        for (kb, hb, lb), sb in b.items():
            if la != hb or ka + kb > nmax:
                continue
            key = (ka + kb, ha, lb)
            bucket = out.get(key)
            if bucket is None:
                out[key] = bucket = set()
            shift = ab + ka * step
            before = len(bucket)
            if kb == 0:
                bucket |= sa
            elif ka == 0:
                bucket |= sb
            else:
                for y in sb:
                    ytail = (y >> ab) << shift
                    for x in sa:
                        bucket.add(x | ytail)
            budget.spend(len(bucket) - before)
    return out


def _bl_size(lang: BLang) -> int:
    return sum(len(v) for v in lang.values())


def _bl_star(a: BLang, nmax: int, ctx: LangContext, budget: _Budget) -> BLang:
    # Fixed point of S^0 = atoms, S^{k+1} = a <> S^k; only the newest strings
    # can produce unseen ones, so iterate on the frontier.
    acc = _bl_atoms(ctx)
    frontier: BLang = {k: set(v) for k, v in acc.items()}
    while frontier:
        step = _bl_cat(a, frontier, nmax, ctx, budget)
        frontier = {}
        for key, bucket in step.items():
            dst = acc.get(key)
            fresh = bucket if dst is None else bucket - dst
            if not fresh:
                continue
            if dst is None:
                acc[key] = set(fresh)
            else:
                dst |= fresh
            frontier[key] = fresh
    return acc


def _bl_universal(nmax: int, ctx: LangContext, budget: _Budget) -> BLang:
    """All guarded strings with at most nmax actions over the context's actions."""
    lang: BLang = {}
    atoms = ctx.atoms
    codes = range(len(ctx.actions))
    step = ctx.step
    ab = ctx.atom_bits
    for k in range(nmax + 1):
        if k > 0 and not ctx.actions:
            break
        budget.spend(len(atoms) ** (k + 1) * max(len(codes), 1) ** k if k else len(atoms))
        for path in product(*([codes, atoms] * k)):
            for head in atoms:
                val = head
                shift = ab
                last = head
                for j in range(0, len(path), 2):
                    val |= path[j] << shift
                    shift += ctx.act_bits
                    last = path[j + 1]
                    val |= last << shift
                    shift += ab
                key = (k, head, last)
                bucket = lang.get(key)
                if bucket is None:
                    lang[key] = bucket = set()
                bucket.add(val)
    return lang


def _blang_up_to(term: Term, nmax: int, ctx: LangContext, budget: _Budget,
                 top_as_universal: bool = False) -> BLang:
    """Structural bounded-language recursion.  Fail is rejected; Top is rejected
    unless top_as_universal, in which case it denotes every bounded string."""
    memo: dict[Term, BLang] = {}

    def go(t: Term) -> BLang:
        hit = memo.get(t)
        if hit is not None:
            return hit
        if is_test_only(t):
            out = _bl_atoms(ctx, lambda a: eval_test(t, a, ctx.alphabet))
        else:
            match t:
                case Act(s):
                    out = {}
                    if nmax >= 1:
                        code = ctx.action_code[s]
                        ab = ctx.atom_bits
                        for ha in ctx.atoms:
                            for la in ctx.atoms:
                                packed = ha | (code << ab) | (la << (ab + ctx.act_bits))
                                _bl_add(out, (1, ha, la), packed, budget)
                case Plus(l, r):
                    out = _bl_union(go(l), go(r), budget)
                case Seq(l, r):
                    out = _bl_cat(go(l), go(r), nmax, ctx, budget)
                case Star(inner):
                    out = _bl_star(go(inner), nmax, ctx, budget)
                case Zero():
                    out = {}
                case Top():
                    if not top_as_universal:
                        raise ValidationError(
                            "language enumeration expects top to be pre-reduced"
                        )
                    out = _bl_universal(nmax, ctx, budget)
                case _:
                    raise ValidationError(
                        f"term not supported by language enumeration: {print_term(t)}"
                    )
        memo[t] = out
        return out

    return go(term)


def _decode(packed: int, k: int, ctx: LangContext) -> GuardedString:
    flat: list = [packed & ctx.atom_mask]
    val = packed >> ctx.atom_bits
    for _ in range(k):
        flat.append(ctx.actions[val & ctx.act_mask])
        val >>= ctx.act_bits
        flat.append(val & ctx.atom_mask)
        val >>= ctx.atom_bits
    return GuardedString(flat)


def _bl_decode(lang: BLang, ctx: LangContext) -> frozenset[GuardedString]:
    out = set()
    for (k, _, _), bucket in lang.items():
        for packed in bucket:
            out.add(_decode(packed, k, ctx))
    return frozenset(out)


def language_up_to(term: Term, max_actions: int, alphabet: Alphabet, *,
                   budget: int | None = None) -> frozenset[GuardedString]:
    """Exactly the guarded strings of the term's language with at most
    max_actions actions.  The term must be fail-free with top pre-reduced
    (the reserved top action is accepted as an ordinary action symbol)."""
    if max_actions < 0:
        raise ValidationError("max_actions must be nonnegative")
    ctx = lang_context(term, alphabet)
    return _bl_decode(_blang_up_to(term, max_actions, ctx, _Budget(budget)), ctx)


def top_language_up_to(term: Term, max_actions: int, alphabet: Alphabet, *,
                       actions: tuple[str, ...] | None = None,
                       budget: int | None = None) -> frozenset[GuardedString]:
    """Bounded language with top interpreted as the largest language: every
    guarded string over the given action symbols plus the reserved top action."""
    if max_actions < 0:
        raise ValidationError("max_actions must be nonnegative")
    base = actions if actions is not None else alphabet.actions
    occ, _ = occurring_primitives(term)
    ordered = sorted(set(base) | (occ - {TOP_ACTION})) + [TOP_ACTION]
    ctx = LangContext(alphabet, tuple(ordered))
    lang = _blang_up_to(term, max_actions, ctx, _Budget(budget), top_as_universal=True)
    return _bl_decode(lang, ctx)


def languages_equal_up_to(t1: Term, t2: Term, max_actions: int, alphabet: Alphabet, *,
                          budget: int | None = None, interpret_top: bool = False,
                          actions: tuple[str, ...] | None = None) -> bool:
    """Exact equality of the two bounded languages, compared in packed form
    over a shared action table.

    With interpret_top, a top constructor denotes the universal bounded
    language over the declared (or given) actions plus the reserved action;
    otherwise top must already be reduced away.
    """
    occ: set[str] = set()
    for t in (t1, t2):
        a, _ = occurring_primitives(t)
        occ |= a
    base = set(actions if actions is not None else ())
    if interpret_top:
        base |= set(alphabet.actions) | {TOP_ACTION}
    ordered = sorted((occ | base) - {TOP_ACTION})
    if TOP_ACTION in occ | base:
        ordered.append(TOP_ACTION)
    ctx = LangContext(alphabet, tuple(ordered))
    bud = _Budget(budget)
    l1 = _blang_up_to(t1, max_actions, ctx, bud, top_as_universal=interpret_top)
    l2 = _blang_up_to(t2, max_actions, ctx, bud, top_as_universal=interpret_top)
    return l1 == l2


def gs_member(term: Term, gs: GuardedString, alphabet: Alphabet) -> bool:
    """Dynamic-programming membership test of a guarded string in a term's
    language; independent of both the enumeration and the derivative engine."""
    n_atoms = len(gs) // 2 + 1

    def atom_at(i: int) -> Atom:
        return gs[2 * i]

    def action_at(i: int) -> str:
        return gs[2 * i + 1]

    memo: dict[tuple[Term, int, int], bool] = {}

    def span(t: Term, i: int, j: int) -> bool:
        key = (t, i, j)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if is_test_only(t):
            out = i == j and eval_test(t, atom_at(i), alphabet)
        else:
            match t:
                case Act(s):
                    out = j == i + 1 and action_at(i) == s
                case Plus(l, r):
                    out = span(l, i, j) or span(r, i, j)
                case Seq(l, r):
                    out = any(span(l, i, k) and span(r, k, j) for k in range(i, j + 1))
                case Star(inner):
                    if i == j:
                        out = True
                    else:
                        out = any(
                            span(inner, i, k) and span(t, k, j) for k in range(i + 1, j + 1)
                        )
                case Zero():
                    out = False
                case _:
                    raise ValidationError(
                        f"term not supported by membership test: {print_term(t)}"
                    )
        memo[key] = out
        return out

    return span(term, 0, n_atoms - 1)
