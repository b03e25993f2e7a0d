"""Finite relational models: evaluation, codomain, triple validity, model
generation and enumeration, and countermodel search.

Relations over a carrier of n states are tuples of n row bitmasks, so union
is word-or, composition is a row gather, and reflexive-transitive closure is
repeated squaring.  Tests are state subsets stored as single bitmasks.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .syntax import (
    Act,
    Alphabet,
    Claim,
    Not,
    One,
    Plus,
    Seq,
    Star,
    Term,
    TermKind,
    Test,
    Top,
    TopkatError,
    ValidationError,
    Zero,
    is_test_only,
    print_term,
    term_kind,
)

Rel = tuple[int, ...]

DEFAULT_STATE_CAP = 64


class ModelError(TopkatError):
    pass


def rel_empty(n: int) -> Rel:
    return (0,) * n


def rel_identity(n: int) -> Rel:
    return tuple(1 << i for i in range(n))


def rel_full(n: int) -> Rel:
    mask = (1 << n) - 1
    return (mask,) * n


def rel_union(a: Rel, b: Rel) -> Rel:
    return tuple(x | y for x, y in zip(a, b))


def rel_compose(a: Rel, b: Rel) -> Rel:
    out = []
    for row in a:
        acc = 0
        r = row
        while r:
            j = (r & -r).bit_length() - 1
            acc |= b[j]
            r &= r - 1
        out.append(acc)
    return tuple(out)


def rel_star(a: Rel) -> Rel:
    n = len(a)
    m = rel_union(a, rel_identity(n))
    while True:
        sq = rel_compose(m, m)
        if sq == m:
            return m
        m = sq


def rel_diag(mask: int, n: int) -> Rel:
    return tuple((1 << i) if (mask >> i) & 1 else 0 for i in range(n))


def rel_subset(a: Rel, b: Rel) -> bool:
    return all(x & ~y == 0 for x, y in zip(a, b))


def rel_pairs(a: Rel) -> list[tuple[int, int]]:
    out = []
    for i, row in enumerate(a):
        r = row
        while r:
            j = (r & -r).bit_length() - 1
            out.append((i, j))
            r &= r - 1
    return out


def rel_from_pairs(n: int, pairs) -> Rel:
    rows = [0] * n
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise ModelError(f"pair ({i}, {j}) out of range for {n} states")
        rows[i] |= 1 << j
    return tuple(rows)


def codomain(a: Rel) -> int:
    """Column support of a relation, as a state bitmask."""
    acc = 0
    for row in a:
        acc |= row
    return acc


@dataclass
class RelationalModel:
    """A finite carrier with one relation per action, one state subset per
    test, and a top relation.

    ``top=None`` means the complete relation (a relational TopKAT).  An
    explicit top makes this a general relational TopKAT and must be
    reflexive, transitive, and contain every action relation, so it is a
    genuine largest element of the generated algebra.
    """

    n: int
    action_val: dict[str, Rel]
    test_val: dict[str, int]
    top: Rel | None = None
    state_cap: int = field(default=DEFAULT_STATE_CAP, repr=False)

    def __post_init__(self):
        if not 1 <= self.n <= self.state_cap:
            raise ModelError(f"carrier size {self.n} outside 1..{self.state_cap}")
        full_mask = (1 << self.n) - 1
        for sym, rel in self.action_val.items():
            if len(rel) != self.n or any(row & ~full_mask for row in rel):
                raise ModelError(f"action {sym!r} relation does not fit {self.n} states")
        for sym, mask in self.test_val.items():
            if mask & ~full_mask:
                raise ModelError(f"test {sym!r} subset does not fit {self.n} states")
        if self.top is not None:
            top = self.top
            if len(top) != self.n or any(row & ~full_mask for row in top):
                raise ModelError("explicit top does not fit the carrier")
            if not rel_subset(rel_identity(self.n), top):
                raise ModelError("explicit top must be reflexive")
            if not rel_subset(rel_compose(top, top), top):
                raise ModelError("explicit top must be transitive")
            for sym, rel in self.action_val.items():
                if not rel_subset(rel, top):
                    raise ModelError(f"explicit top must contain action {sym!r}")

    @property
    def is_full_top(self) -> bool:
        return self.top is None

    @property
    def top_rel(self) -> Rel:
        return rel_full(self.n) if self.top is None else self.top


def eval_test_mask(model: RelationalModel, term: Term) -> int:
    """Evaluate a test-only term to a state subset."""
    full_mask = (1 << model.n) - 1

    def go(t: Term) -> int:
        match t:
            case Test(s):
                try:
                    return model.test_val[s]
                except KeyError:
                    raise ModelError(f"undeclared test symbol {s!r}") from None
            case Not(inner):
                return full_mask & ~go(inner)
            case Plus(l, r):
                return go(l) | go(r)
            case Seq(l, r):
                return go(l) & go(r)
            case One():
                return full_mask
            case Zero():
                return 0
        raise ValidationError(f"not a test-only term: {print_term(term)}")

    return go(term)


def eval_term(model: RelationalModel, term: Term) -> Rel:
    """Relational interpretation: + is union, ; is composition, * is
    reflexive-transitive closure, tests embed as sub-identity relations."""
    if term_kind(term) is TermKind.FAILTOPKAT:
        raise ValidationError("fail terms have no plain relational value; use eval_fail")
    n = model.n

    def go(t: Term) -> Rel:
        match t:
            case Zero():
                return rel_empty(n)
            case One():
                return rel_identity(n)
            case Top():
                return model.top_rel
            case Act(s):
                try:
                    return model.action_val[s]
                except KeyError:
                    raise ModelError(f"undeclared action symbol {s!r}") from None
            case Test(_) | Not(_):
                return rel_diag(eval_test_mask(model, t), n)
            case Plus(l, r):
                return rel_union(go(l), go(r))
            case Seq(l, r):
                return rel_compose(go(l), go(r))
            case Star(inner):
                return rel_star(go(inner))
        raise ValidationError(f"unknown term node {t!r}")

    return go(term)


def check_triple_semantic(model: RelationalModel, pre: Term, prog: Term, post: Term,
                          mode: str) -> bool:
    """Codomain containment between pre;prog and post.

    mode "hoare" checks codomain(pre;prog) included in codomain(post);
    mode "incorrectness" checks the reverse containment.
    """
    if not is_test_only(pre) or not is_test_only(post):
        raise ValidationError("pre- and post-conditions must be test-only terms")
    pre_mask = eval_test_mask(model, pre)
    post_mask = eval_test_mask(model, post)
    reach = codomain(rel_compose(rel_diag(pre_mask, model.n), eval_term(model, prog)))
    if mode == "hoare":
        return reach & ~post_mask == 0
    if mode == "incorrectness":
        return post_mask & ~reach == 0
    raise ValidationError(f"unknown triple mode {mode!r}")


def claim_holds(model: RelationalModel, claim: Claim) -> bool:
    c = claim.normalized()
    lhs = eval_term(model, c.lhs)
    rhs = eval_term(model, c.rhs)
    return lhs == rhs if c.op == "=" else rel_subset(lhs, rhs)


def random_rel(rng: random.Random, n: int, density: float) -> Rel:
    rows = []
    for _ in range(n):
        row = 0
        for j in range(n):
            if rng.random() < density:
                row |= 1 << j
        rows.append(row)
    return tuple(rows)


def generated_top(action_rels, n: int) -> Rel:
    """Reflexive-transitive closure of the union of all action relations:
    the canonical explicit top of the algebra they generate."""
    acc = rel_empty(n)
    for rel in action_rels:
        acc = rel_union(acc, rel)
    return rel_star(acc)


def random_model(n: int, alphabet: Alphabet, top_spec: str = "full",
                 density: float = 0.5, seed: int | random.Random = 0) -> RelationalModel:
    """Seed-deterministic random model.  top_spec "full" gives a relational
    TopKAT; "generated" installs the closure of all action relations as an
    explicit top (a general relational TopKAT)."""
    if n < 1:
        raise ModelError("carrier size must be at least 1")
    if not 0.0 <= density <= 1.0:
        raise ModelError("density must lie in [0, 1]")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    actions = {a: random_rel(rng, n, density) for a in alphabet.actions}
    tests = {}
    for t in alphabet.tests:
        mask = 0
        for i in range(n):
            if rng.random() < 0.5:
                mask |= 1 << i
        tests[t] = mask
    if top_spec == "full":
        top = None
    elif top_spec == "generated":
        top = generated_top(actions.values(), n)
    else:
        raise ModelError(f"unknown top spec {top_spec!r}")
    return RelationalModel(n, actions, tests, top)


def _masks_by_popcount(bits: int) -> list[int]:
    return sorted(range(1 << bits), key=lambda m: (bin(m).count("1"), m))


def enumerate_models(n: int, alphabet: Alphabet, *, max_models: int = 1 << 20,
                     by_popcount: bool = False):
    """Exhaustive, duplicate-free iteration of all full-top models.

    The search space is (2^(n*n))^|actions| * (2^n)^|tests| and must stay
    within max_models.  With by_popcount, action relations are tried sparsest
    first so minimal countermodels surface early.
    """
    total = (1 << (n * n)) ** len(alphabet.actions) * (1 << n) ** len(alphabet.tests)
    if total > max_models:
        raise ModelError(f"{total} models exceed the enumeration cap {max_models}")
    rel_bits = n * n
    rel_space = _masks_by_popcount(rel_bits) if by_popcount else range(1 << rel_bits)
    test_space = range(1 << n)

    def bits_to_rel(bits: int) -> Rel:
        row_mask = (1 << n) - 1
        return tuple((bits >> (i * n)) & row_mask for i in range(n))

    for combo in itertools.product(rel_space, repeat=len(alphabet.actions)):
        actions = {a: bits_to_rel(bits) for a, bits in zip(alphabet.actions, combo)}
        for tcombo in itertools.product(test_space, repeat=len(alphabet.tests)):
            tests = dict(zip(alphabet.tests, tcombo))
            yield RelationalModel(n, actions, tests, None)


@dataclass
class Countermodel:
    model: RelationalModel
    lhs: Rel
    rhs: Rel


def find_countermodel(claim: Claim, alphabet: Alphabet, *, search: str = "exhaustive",
                      n: int = 2, count: int = 1000, density: float = 0.5,
                      seed: int = 0, top_spec: str = "full",
                      max_models: int = 1 << 20) -> Countermodel | None:
    """First model falsifying the claim, or None if the search exhausts.

    Exhaustive search sweeps full-top models sparsest-relations-first; random
    search draws seed-deterministic models with the requested top spec.
    """
    c = claim.normalized()
    if search == "exhaustive":
        models = enumerate_models(n, alphabet, max_models=max_models, by_popcount=True)
    elif search == "random":
        rng = random.Random(seed)
        models = (random_model(n, alphabet, top_spec, density, rng) for _ in range(count))
    else:
        raise ModelError(f"unknown search mode {search!r}")
    for model in models:
        if not claim_holds(model, c):
            return Countermodel(model, eval_term(model, c.lhs), eval_term(model, c.rhs))
    return None


def model_to_json(model: RelationalModel) -> dict:
    return {
        "states": model.n,
        "top": "full" if model.top is None else rel_pairs(model.top),
        "actions": {a: rel_pairs(r) for a, r in sorted(model.action_val.items())},
        "tests": {
            t: [i for i in range(model.n) if (mask >> i) & 1]
            for t, mask in sorted(model.test_val.items())
        },
    }


def model_from_json(data: dict) -> RelationalModel:
    try:
        n = int(data["states"])
        top_data = data.get("top", "full")
        actions = {
            str(a): rel_from_pairs(n, pairs) for a, pairs in data.get("actions", {}).items()
        }
        tests = {}
        for t, states in data.get("tests", {}).items():
            mask = 0
            for i in states:
                if not 0 <= int(i) < n:
                    raise ModelError(f"test state {i} out of range")
                mask |= 1 << int(i)
            tests[str(t)] = mask
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model JSON: {exc}") from exc
    top = None if top_data == "full" else rel_from_pairs(n, top_data)
    return RelationalModel(n, actions, tests, top)
