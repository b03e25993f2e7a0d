"""Seeded random term generation and equality-preserving rewrites for tests."""

from __future__ import annotations

import random

from topkat.syntax import (
    Act,
    Alphabet,
    Not,
    ONE,
    Plus,
    Seq,
    Star,
    Term,
    Test,
    TOP,
    ZERO,
    is_test_only,
)


def random_test_term(rng: random.Random, tests: tuple[str, ...], size: int) -> Term:
    if size <= 1 or not tests:
        leaves = [ZERO, ONE] + [Test(t) for t in tests]
        return rng.choice(leaves)
    shape = rng.randrange(3)
    if shape == 0:
        k = rng.randint(1, size - 1)
        return Plus(random_test_term(rng, tests, k), random_test_term(rng, tests, size - k))
    if shape == 1:
        k = rng.randint(1, size - 1)
        return Seq(random_test_term(rng, tests, k), random_test_term(rng, tests, size - k))
    return Not(random_test_term(rng, tests, size - 1))


def random_term(rng: random.Random, alphabet: Alphabet, size: int, *,
                allow_top: bool = False, top_weight: int = 1) -> Term:
    """Random valid term of roughly the given node count."""
    actions, tests = alphabet.actions, alphabet.tests

    def leaf() -> Term:
        leaves = [ZERO, ONE]
        leaves += [Act(a) for a in actions] * 2
        leaves += [Test(t) for t in tests]
        if allow_top:
            leaves += [TOP] * top_weight
        return rng.choice(leaves)

    def gen(budget: int) -> Term:
        if budget <= 1:
            return leaf()
        shape = rng.randrange(10)
        if shape < 3:
            k = rng.randint(1, budget - 1)
            return Plus(gen(k), gen(budget - k))
        if shape < 7:
            k = rng.randint(1, budget - 1)
            return Seq(gen(k), gen(budget - k))
        if shape < 9 and actions:
            inner = gen(budget - 1)
            if is_test_only(inner):
                inner = Seq(inner, Act(rng.choice(actions)))
            return Star(inner)
        if tests:
            return Not(random_test_term(rng, tests, min(budget - 1, 3)))
        return leaf()

    return gen(size)


def _subterm_count(t: Term) -> int:
    match t:
        case Plus(l, r) | Seq(l, r):
            return 1 + _subterm_count(l) + _subterm_count(r)
        case Star(inner) | Not(inner):
            return 1 + _subterm_count(inner)
        case _:
            return 1


def _rewrite_at(t: Term, index: int, rng: random.Random) -> tuple[Term, int]:
    """Apply one equality-preserving rewrite at the index-th preorder node."""
    if index == 0:
        return _local_rewrite(t, rng), -1
    index -= 1
    match t:
        case Plus(l, r):
            l2, index = _rewrite_at(l, index, rng)
            if index < 0:
                return Plus(l2, r), -1
            r2, index = _rewrite_at(r, index, rng)
            return Plus(l, r2), index
        case Seq(l, r):
            l2, index = _rewrite_at(l, index, rng)
            if index < 0:
                return Seq(l2, r), -1
            r2, index = _rewrite_at(r, index, rng)
            return Seq(l, r2), index
        case Star(inner):
            i2, index = _rewrite_at(inner, index, rng)
            return (Star(i2), -1) if index < 0 else (t, index)
        case Not(inner):
            i2, index = _rewrite_at(inner, index, rng)
            return (Not(i2), -1) if index < 0 else (t, index)
        case _:
            return t, index


def _local_rewrite(t: Term, rng: random.Random) -> Term:
    """One random sound rewrite of the node itself."""
    options = [
        lambda: Plus(t, t),
        lambda: Seq(ONE, t),
        lambda: Seq(t, ONE),
        lambda: Plus(t, ZERO),
    ]
    match t:
        case Plus(l, r):
            options.append(lambda: Plus(r, l))
        case Seq(l, r):
            match r:
                case Plus(a, b):
                    options.append(lambda: Plus(Seq(l, a), Seq(l, b)))
            match l:
                case Plus(a, b):
                    options.append(lambda: Plus(Seq(a, r), Seq(b, r)))
                case Seq(a, b):
                    options.append(lambda: Seq(a, Seq(b, r)))
        case Star(inner):
            options.append(lambda: Plus(ONE, Seq(inner, t)))
            options.append(lambda: Star(t))
    if is_test_only(t):
        options.append(lambda: Not(Not(t)))
    return rng.choice(options)()


def equal_variant(rng: random.Random, term: Term, steps: int | None = None) -> Term:
    """A term provably equal to the input, produced by random sound rewrites."""
    out = term
    for _ in range(steps if steps is not None else rng.randint(1, 3)):
        out, _ = _rewrite_at(out, rng.randrange(_subterm_count(out)), rng)
    return out
