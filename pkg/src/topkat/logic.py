"""Triple encodings, the deduction-rule catalog, and rule soundness checking.

Hoare triples {b} p {c} and incorrectness triples [b] p [code: c] are turned
into term equations or inequalities; the equational strategy hands those to
the decision engine, while the model strategy sweeps finite relational
models, instantiating schema variables and counting premise-satisfying
instances.

A Valid equational answer means the encoded claim holds in every TopKAT (for
er-coded triples: in every pair model over every TopKAT).  Unproven is
deliberately not called invalid: the encoded claim is not a theory-level
validity, which does not refute the triple in any particular intended model.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .atoms import GuardedString
from .engine import Verdict, decide_claim
from .failtopkat import ErrorCode, FailVerdict, decide_fail_leq, eval_fail, split
from .relmodels import (
    RelationalModel,
    check_triple_semantic,
    claim_holds,
    codomain,
    eval_term,
    random_rel,
    rel_compose,
    rel_diag,
    rel_empty,
    rel_full,
    rel_identity,
    rel_pairs,
    rel_star,
    rel_subset,
    rel_union,
)
from .syntax import (
    Act,
    Alphabet,
    Claim,
    FAIL,
    Fail,
    Not,
    ONE,
    One,
    ParseError,
    Plus,
    Seq,
    Star,
    Term,
    TermKind,
    Test,
    TOP,
    Top,
    ValidationError,
    ZERO,
    Zero,
    is_test_only,
    parse_claim,
    parse_term,
    plus_all,
    print_term,
    seq_all,
    term_kind,
    validate,
)

INCORRECTNESS_FORMS = ("F1", "F2", "F3")
HOARE_FORMS = ("kozen", "topleq", "toptop")


@dataclass(frozen=True)
class Triple:
    """A Hoare or incorrectness triple with test-only pre/post conditions."""

    pre: Term
    prog: Term
    code: ErrorCode
    post: Term
    style: str  # "hoare" | "incorrectness"

    def __post_init__(self):
        if self.style not in ("hoare", "incorrectness"):
            raise ValidationError(f"unknown triple style {self.style!r}")
        if not is_test_only(self.pre) or not is_test_only(self.post):
            raise ValidationError("pre- and post-conditions must be test-only terms")
        if self.style == "hoare" and self.code is not ErrorCode.OK:
            raise ValidationError("hoare triples carry no error code")

    def render(self) -> str:
        pre, prog, post = print_term(self.pre), print_term(self.prog), print_term(self.post)
        if self.style == "hoare":
            return f"{{{pre}}} {prog} {{{post}}}"
        return f"[{pre}] {prog} [{self.code.value}: {post}]"


_POST_LABEL_RE = re.compile(r"^\s*(ok|er)\s*:")


def parse_triple(text: str, alphabet: Alphabet) -> Triple:
    """Parse ``[pre] prog [ok: post]``, ``[pre] prog [er: post]`` (the code
    label defaults to ok) or ``{pre} prog {post}``."""
    s = text.strip()
    if not s:
        raise ParseError("empty triple", 0)
    if s[0] == "{":
        open_c, close_c, style = "{", "}", "hoare"
    elif s[0] == "[":
        open_c, close_c, style = "[", "]", "incorrectness"
    else:
        raise ParseError("a triple starts with '[' or '{'", 0)
    pre_end = s.find(close_c)
    if pre_end < 0:
        raise ParseError(f"missing {close_c!r} after precondition", len(s))
    post_start = s.rfind(open_c)
    if post_start <= pre_end or not s.rstrip().endswith(close_c):
        raise ParseError("missing bracketed postcondition", len(s))
    pre_text = s[1:pre_end]
    prog_text = s[pre_end + 1:post_start]
    post_text = s.rstrip()[post_start + 1:-1]
    code = ErrorCode.OK
    if style == "incorrectness":
        m = _POST_LABEL_RE.match(post_text)
        if m:
            code = ErrorCode(m.group(1))
            post_text = post_text[m.end():]
    allow = TermKind.FAILTOPKAT if style == "incorrectness" else TermKind.TOPKAT
    pre = parse_term(pre_text, alphabet, TermKind.FAILTOPKAT)
    post = parse_term(post_text, alphabet, TermKind.FAILTOPKAT)
    prog = parse_term(prog_text, alphabet, allow)
    return Triple(pre, prog, code, post, style)


def encode_incorrectness(triple: Triple, form: str = "F2") -> Claim:
    """Incorrectness triple as a TopKAT claim.

    F1: top;pre;prog >= top;post.  F2: top;pre;prog >= post.
    F3: top;pre;prog;post = top;post.  For er-coded triples the claim is the
    er component of the split of top;pre;prog >= post;fail (the ok component
    holds trivially); only the inequality forms make sense there.
    """
    if triple.style != "incorrectness":
        raise ValidationError("not an incorrectness triple")
    if form not in INCORRECTNESS_FORMS:
        raise ValidationError(f"unknown incorrectness form {form!r}")
    lhs = seq_all(TOP, triple.pre, triple.prog)
    if triple.code is ErrorCode.ER:
        if form == "F3":
            raise ValidationError("form F3 is not defined for er-coded triples")
        rhs = seq_all(triple.post, FAIL)
        if form == "F1":
            rhs = seq_all(TOP, rhs)
        return Claim(split(lhs).er, ">=", split(rhs).er)
    if term_kind(triple.prog) is TermKind.FAILTOPKAT:
        # ok component of a fail-carrying program.
        lhs = split(lhs).ok
    if form == "F1":
        return Claim(lhs, ">=", Seq(TOP, triple.post))
    if form == "F2":
        return Claim(lhs, ">=", triple.post)
    return Claim(Seq(lhs, triple.post), "=", Seq(TOP, triple.post))


def encode_hoare(triple: Triple, form: str = "kozen") -> Claim:
    """Hoare triple as a claim: kozen: pre;prog;~post = 0;
    topleq: pre;prog <= top;post; toptop: top;pre;prog <= top;post."""
    if triple.style != "hoare":
        raise ValidationError("not a hoare triple")
    if form not in HOARE_FORMS:
        raise ValidationError(f"unknown hoare form {form!r}")
    if form == "kozen":
        return Claim(seq_all(triple.pre, triple.prog, Not(triple.post)), "=", ZERO)
    if form == "topleq":
        return Claim(Seq(triple.pre, triple.prog), "<=", Seq(TOP, triple.post))
    return Claim(seq_all(TOP, triple.pre, triple.prog), "<=", Seq(TOP, triple.post))


def encode_triple(triple: Triple, form: str | None = None) -> Claim:
    if triple.style == "hoare":
        return encode_hoare(triple, form or "kozen")
    return encode_incorrectness(triple, form or "F2")


@dataclass(frozen=True)
class EquationalResult:
    """Decision-engine outcome for an encoded triple.

    valid means the claim holds in every TopKAT.  Not valid means Unproven:
    the witness separates the encoded languages; it is not a claim that the
    triple fails in any specific intended model.
    """

    valid: bool
    claim: Claim
    witness: GuardedString | None = None
    witness_side: str | None = None

    @property
    def status(self) -> str:
        return "Valid" if self.valid else "Unproven"


def check_triple_equational(triple: Triple, alphabet: Alphabet,
                            form: str | None = None) -> EquationalResult:
    """Run the decision engine on the encoded claim."""
    claim = encode_triple(triple, form)
    verdict = decide_claim(claim, alphabet)
    return EquationalResult(verdict.equal, claim, verdict.witness, verdict.witness_side)


def check_triple_in_model(model: RelationalModel, triple: Triple) -> bool:
    """Semantic truth of a triple in one finite model.

    Hoare and fail-free ok-coded incorrectness triples reduce to codomain
    containment; er codes and fail-carrying programs go through the pair
    semantics."""
    if triple.style == "hoare":
        return check_triple_semantic(model, triple.pre, triple.prog, triple.post, "hoare")
    fail_prog = term_kind(triple.prog) is TermKind.FAILTOPKAT
    if triple.code is ErrorCode.OK and not fail_prog:
        return check_triple_semantic(
            model, triple.pre, triple.prog, triple.post, "incorrectness"
        )
    ok_rel, er_rel = eval_fail(model, Seq(triple.pre, triple.prog))
    reach = codomain(ok_rel if triple.code is ErrorCode.OK else er_rel)
    post_mask = codomain(eval_term(model, triple.post))
    return post_mask & ~reach == 0


# --- rule catalog -------------------------------------------------------------


@dataclass(frozen=True)
class RuleTriple:
    """Schematic triple inside a rule; code "eps" ranges over ok and er."""

    pre: Term
    prog: Term
    code: str  # "ok" | "er" | "eps"
    post: Term
    style: str = "incorrectness"


@dataclass(frozen=True)
class TestOrder:
    """Side condition: lo <= hi as tests."""

    lo: Term
    hi: Term


@dataclass(frozen=True)
class Rule:
    rule_id: str
    figure: int
    action_vars: tuple[str, ...]
    test_vars: tuple[str, ...]
    premises: tuple
    conclusion: RuleTriple
    var_order: tuple[str, ...]
    fail_mode: bool = False
    note: str = ""

    @property
    def premise_free(self) -> bool:
        return not self.premises

    @property
    def generic_code(self) -> bool:
        parts = [p for p in self.premises if isinstance(p, RuleTriple)]
        parts.append(self.conclusion)
        return any(p.code == "eps" for p in parts)


def _t(name: str) -> Term:
    return Test(name)


def _a(name: str) -> Term:
    return Act(name)


def _hoare(pre, prog, post) -> RuleTriple:
    return RuleTriple(pre, prog, "ok", post, "hoare")


def _inc(pre, prog, post, code="ok") -> RuleTriple:
    return RuleTriple(pre, prog, code, post, "incorrectness")


ITER_CHAIN_LENGTH = 4


def _iter_dependent(rule_id: str, figure: int, fail_mode: bool,
                    k: int = ITER_CHAIN_LENGTH) -> Rule:
    """Backwards-variant rule realized with an eventually-constant chain
    c0, ..., ck, ck, ...; the supremum is then the finite union."""
    chain = tuple(f"c{i}" for i in range(k + 1))
    premises = tuple(
        _inc(_t(chain[i]), _a("p"), _t(chain[min(i + 1, k)])) for i in range(k + 1)
    )
    conclusion = _inc(_t(chain[0]), Star(_a("p")), plus_all(*[_t(c) for c in chain]))
    return Rule(
        rule_id, figure, ("p",), chain, premises, conclusion,
        var_order=("p",) + chain, fail_mode=fail_mode,
        note=f"sup realized as an eventually-constant chain of length {k}",
    )


def _fig1() -> tuple[Rule, ...]:
    a, b, c, d = _t("a"), _t("b"), _t("c"), _t("d")
    p, q = _a("p"), _a("q")
    return (
        Rule("hl-composition", 1, ("p", "q"), ("a", "b", "c"),
             (_hoare(a, p, b), _hoare(b, q, c)),
             _hoare(a, Seq(p, q), c),
             var_order=("a", "p", "b", "q", "c")),
        Rule("hl-conditional", 1, ("p", "q"), ("b", "c", "d"),
             (_hoare(Seq(b, c), p, d), _hoare(Seq(Not(b), c), q, d)),
             _hoare(c, Plus(Seq(b, p), Seq(Not(b), q)), d),
             var_order=("b", "c", "p", "d", "q")),
        Rule("hl-while", 1, ("p",), ("b", "c"),
             (_hoare(Seq(b, c), p, c),),
             _hoare(c, Seq(Star(Seq(b, p)), Not(b)), Seq(Not(b), c)),
             var_order=("b", "c", "p")),
        Rule("hl-consequence", 1, ("p",), ("a", "b", "c", "d"),
             (TestOrder(a, b), _hoare(b, p, c), TestOrder(c, d)),
             _hoare(a, p, d),
             var_order=("a", "b", "p", "c", "d")),
    )


def _fig3() -> tuple[Rule, ...]:
    a, b, c, d = _t("a"), _t("b"), _t("c"), _t("d")
    b1, b2, c1, c2 = _t("b1"), _t("b2"), _t("c1"), _t("c2")
    p, q = _a("p"), _a("q")
    return (
        Rule("il-empty", 3, ("p",), ("b",), (),
             _inc(b, p, ZERO), var_order=("b", "p")),
        Rule("il-consequence", 3, ("p",), ("a", "b", "c", "d"),
             (TestOrder(a, b), _inc(a, p, c), TestOrder(d, c)),
             _inc(b, p, d),
             var_order=("a", "b", "p", "c", "d")),
        Rule("il-disjunction", 3, ("p",), ("b1", "b2", "c1", "c2"),
             (_inc(b1, p, c1), _inc(b2, p, c2)),
             _inc(Plus(b1, b2), p, Plus(c1, c2)),
             var_order=("b1", "p", "c1", "b2", "c2")),
        Rule("il-identity", 3, (), ("b",), (),
             _inc(b, ONE, b), var_order=("b",)),
        Rule("il-composition", 3, ("p", "q"), ("a", "b", "c"),
             (_inc(a, p, b), _inc(b, q, c)),
             _inc(a, Seq(p, q), c),
             var_order=("a", "p", "b", "q", "c")),
        Rule("il-choice-left", 3, ("p", "q"), ("a", "b"),
             (_inc(a, p, b),),
             _inc(a, Plus(p, q), b),
             var_order=("a", "p", "b", "q")),
        Rule("il-choice-right", 3, ("p", "q"), ("a", "b"),
             (_inc(a, q, b),),
             _inc(a, Plus(p, q), b),
             var_order=("a", "q", "b", "p")),
        Rule("il-assume", 3, (), ("b", "c"), (),
             _inc(b, c, Seq(b, c)), var_order=("b", "c")),
        Rule("il-iter-zero", 3, ("p",), ("b",), (),
             _inc(b, Star(p), b), var_order=("b", "p")),
        Rule("il-iter-nonzero", 3, ("p",), ("b", "c"),
             (_inc(b, Seq(Star(p), p), c),),
             _inc(b, Star(p), c),
             var_order=("b", "p", "c")),
        _iter_dependent("il-iter-dependent", 3, fail_mode=False),
    )


def _fig5() -> tuple[Rule, ...]:
    a, b, c, d = _t("a"), _t("b"), _t("c"), _t("d")
    b1, b2, c1, c2 = _t("b1"), _t("b2"), _t("c1"), _t("c2")
    p, q = _a("p"), _a("q")
    return (
        Rule("ilf-empty", 5, ("p",), ("b",), (),
             _inc(b, p, ZERO, "eps"), var_order=("b", "p"), fail_mode=True),
        Rule("ilf-consequence", 5, ("p",), ("a", "b", "c", "d"),
             (TestOrder(a, b), _inc(a, p, c, "eps"), TestOrder(d, c)),
             _inc(b, p, d, "eps"),
             var_order=("a", "b", "p", "c", "d"), fail_mode=True),
        Rule("ilf-disjunction", 5, ("p",), ("b1", "b2", "c1", "c2"),
             (_inc(b1, p, c1, "eps"), _inc(b2, p, c2, "eps")),
             _inc(Plus(b1, b2), p, Plus(c1, c2), "eps"),
             var_order=("b1", "p", "c1", "b2", "c2"), fail_mode=True),
        Rule("ilf-identity-ok", 5, (), ("b",), (),
             _inc(b, ONE, b, "ok"), var_order=("b",), fail_mode=True),
        Rule("ilf-identity-er", 5, (), ("b",), (),
             _inc(b, ONE, ZERO, "er"), var_order=("b",), fail_mode=True),
        Rule("ilf-composition-fail", 5, ("p", "q"), ("a", "b"),
             (_inc(a, p, b, "er"),),
             _inc(a, Seq(p, q), b, "er"),
             var_order=("a", "p", "b", "q"), fail_mode=True),
        Rule("ilf-composition-normal", 5, ("p", "q"), ("a", "b", "c"),
             (_inc(a, p, b, "ok"), _inc(b, q, c, "eps")),
             _inc(a, Seq(p, q), c, "eps"),
             var_order=("a", "p", "b", "q", "c"), fail_mode=True,
             note="second premise ranges over the continuation program"),
        Rule("ilf-choice-left", 5, ("p", "q"), ("b", "c"),
             (_inc(b, p, c, "eps"),),
             _inc(b, Plus(p, q), c, "eps"),
             var_order=("b", "p", "c", "q"), fail_mode=True),
        Rule("ilf-choice-right", 5, ("p", "q"), ("b", "c"),
             (_inc(b, q, c, "eps"),),
             _inc(b, Plus(p, q), c, "eps"),
             var_order=("b", "q", "c", "p"), fail_mode=True),
        Rule("ilf-assume-ok", 5, (), ("a", "b"), (),
             _inc(a, b, Seq(a, b), "ok"), var_order=("a", "b"), fail_mode=True),
        Rule("ilf-assume-er", 5, (), ("a", "b"), (),
             _inc(a, b, ZERO, "er"), var_order=("a", "b"), fail_mode=True),
        Rule("ilf-error", 5, (), ("b",), (),
             _inc(b, FAIL, b, "er"), var_order=("b",), fail_mode=True),
        Rule("ilf-iter-zero", 5, ("p",), ("b",), (),
             _inc(b, Star(p), b, "ok"), var_order=("b", "p"), fail_mode=True),
        Rule("ilf-iter-nonzero", 5, ("p",), ("b", "c"),
             (_inc(b, Seq(Star(p), p), c, "eps"),),
             _inc(b, Star(p), c, "eps"),
             var_order=("b", "p", "c"), fail_mode=True),
        _iter_dependent("ilf-iter-dependent", 5, fail_mode=True),
    )


_CATALOG: dict[int, tuple[Rule, ...]] = {}


def rules_for_figure(figure: int) -> tuple[Rule, ...]:
    if not _CATALOG:
        _CATALOG[1] = _fig1()
        _CATALOG[3] = _fig3()
        _CATALOG[5] = _fig5()
    try:
        return _CATALOG[figure]
    except KeyError:
        raise ValidationError(f"no rule figure {figure}; choose 1, 3 or 5") from None


def all_rules() -> tuple[Rule, ...]:
    return rules_for_figure(1) + rules_for_figure(3) + rules_for_figure(5)


def find_rule(rule_id: str) -> Rule:
    for rule in all_rules():
        if rule.rule_id == rule_id:
            return rule
    raise ValidationError(f"unknown rule {rule_id!r}")


# --- relation calculi for rule sweeps ----------------------------------------


class _GenericCalc:
    """Relation calculus over tuples of row bitmasks, any carrier size."""

    def __init__(self, n: int):
        self.n = n
        self.full_mask = (1 << n) - 1
        self.zero = rel_empty(n)
        self.one = rel_identity(n)
        self.top_rel = rel_full(n)
        self.compose = rel_compose
        self.union = rel_union
        self.star = rel_star
        self.cod = codomain

    def diag(self, mask: int):
        return rel_diag(mask, self.n)

    def leq(self, a, b) -> bool:
        return rel_subset(a, b)

    def to_pairs(self, rel):
        return rel_pairs(rel)


class _Tab2Calc:
    """Tabulated calculus for n = 2; relations are 4-bit integers."""

    _instance = None

    def __init__(self):
        self.n = 2
        self.full_mask = 3

        def unpack(bits):
            return (bits & 3, (bits >> 2) & 3)

        def pack(rel):
            return rel[0] | (rel[1] << 2)

        rels = [unpack(b) for b in range(16)]
        self._compose = [
            [pack(rel_compose(x, y)) for y in rels] for x in rels
        ]
        self._star = [pack(rel_star(x)) for x in rels]
        self._cod = [codomain(x) for x in rels]
        self._diag = [pack(rel_diag(m, 2)) for m in range(4)]
        self.zero = 0
        self.one = self._diag[3]
        self.top_rel = 15
        self._unpack = unpack

    @classmethod
    def get(cls) -> "_Tab2Calc":
        if cls._instance is None:
            cls._instance = cls()
        return cls._instance

    def compose(self, a, b):
        return self._compose[a][b]

    @staticmethod
    def union(a, b):
        return a | b

    def star(self, a):
        return self._star[a]

    def cod(self, a):
        return self._cod[a]

    def diag(self, mask):
        return self._diag[mask]

    @staticmethod
    def leq(a, b) -> bool:
        return a & ~b == 0

    def to_pairs(self, rel):
        return rel_pairs(self._unpack(rel))


class _PairCalc:
    """Pair construction over a base calculus: values are (ok, er) pairs."""

    def __init__(self, base):
        self.base = base
        self.n = base.n
        self.full_mask = base.full_mask
        self.zero = (base.zero, base.zero)
        self.one = (base.one, base.zero)
        self.top_rel = (base.top_rel, base.zero)
        self.fail = (base.zero, base.one)

    def compose(self, a, b):
        base = self.base
        return (
            base.compose(a[0], b[0]),
            base.union(a[1], base.compose(a[0], b[1])),
        )

    def union(self, a, b):
        base = self.base
        return base.union(a[0], b[0]), base.union(a[1], b[1])

    def star(self, a):
        base = self.base
        ok = base.star(a[0])
        return ok, base.compose(ok, a[1])

    def diag(self, mask):
        return self.base.diag(mask), self.base.zero

    def cod(self, a):
        return self.base.cod(a[0]), self.base.cod(a[1])

    def leq(self, a, b) -> bool:
        return self.base.leq(a[0], b[0]) and self.base.leq(a[1], b[1])


def _compile_test(term: Term, calc):
    """Test-only term to a mask function of the valuation."""
    full = calc.full_mask
    match term:
        case Test(s):
            return lambda env: env[s]
        case Not(inner):
            f = _compile_test(inner, calc)
            return lambda env: full & ~f(env)
        case Plus(l, r):
            f, g = _compile_test(l, calc), _compile_test(r, calc)
            return lambda env: f(env) | g(env)
        case Seq(l, r):
            f, g = _compile_test(l, calc), _compile_test(r, calc)
            return lambda env: f(env) & g(env)
        case One():
            return lambda env: full
        case Zero():
            return lambda env: 0
    raise ValidationError(f"not a test-only term: {print_term(term)}")


def _compile_prog(term: Term, ops, calc):
    """Program term to a value function of the valuation; ops may be a plain
    or a pair calculus (only the latter supports fail)."""
    if is_test_only(term):
        f = _compile_test(term, calc)
        diag = ops.diag
        return lambda env: diag(f(env))
    match term:
        case Act(s):
            return lambda env: env[s]
        case Top():
            top = ops.top_rel
            return lambda env: top
        case Fail():
            fail = getattr(ops, "fail", None)
            if fail is None:
                raise ValidationError("fail requires the pair semantics")
            return lambda env: fail
        case Plus(l, r):
            f, g = _compile_prog(l, ops, calc), _compile_prog(r, ops, calc)
            union = ops.union
            return lambda env: union(f(env), g(env))
        case Seq(l, r):
            f, g = _compile_prog(l, ops, calc), _compile_prog(r, ops, calc)
            compose = ops.compose
            return lambda env: compose(f(env), g(env))
        case Star(inner):
            f = _compile_prog(inner, ops, calc)
            star = ops.star
            return lambda env: star(f(env))
    raise ValidationError(f"unknown term node {term!r}")


def _compile_part(part, code: str, ops, calc, fail_mode: bool):
    """Premise or conclusion to a boolean function of the valuation."""
    if isinstance(part, TestOrder):
        lo, hi = _compile_test(part.lo, calc), _compile_test(part.hi, calc)
        return lambda env: lo(env) & ~hi(env) == 0
    assert isinstance(part, RuleTriple)
    resolved = part.code if part.code != "eps" else code
    pre = _compile_test(part.pre, calc)
    post = _compile_test(part.post, calc)
    prog = _compile_prog(part.prog, ops, calc)
    diag = ops.diag
    compose = ops.compose
    cod = ops.cod
    hoare = part.style == "hoare"
    if fail_mode:
        idx = 0 if resolved == "ok" else 1

        def check(env):
            reach = cod(compose(diag(pre(env)), prog(env)))[idx]
            post_mask = post(env)
            if hoare:
                return reach & ~post_mask == 0
            return post_mask & ~reach == 0

        return check
    if resolved == "er":
        raise ValidationError("er code requires the pair semantics")

    def check(env):
        reach = cod(compose(diag(pre(env)), prog(env)))
        post_mask = post(env)
        if hoare:
            return reach & ~post_mask == 0
        return post_mask & ~reach == 0

    return check


@dataclass
class RuleViolation:
    code: str
    n: int
    valuation: dict


@dataclass
class RuleReport:
    rule_id: str
    figure: int
    strategy: str
    passed: bool
    premises_held: int = 0
    instances_total: int = 0
    violations: list = field(default_factory=list)
    notes: str = ""
    claims: list = field(default_factory=list)  # equational: (code, claim text, valid)

    def summary(self) -> str:
        state = "pass" if self.passed else "FAIL"
        if self.strategy == "equational":
            claims = "; ".join(f"{code}: {text} [{'valid' if v else 'UNPROVEN'}]"
                               for code, text, v in self.claims)
            return f"{self.rule_id:24s} {state:4s} equational  {claims}"
        return (f"{self.rule_id:24s} {state:4s} models      "
                f"premises held {self.premises_held}/{self.instances_total}"
                f"{'; ' + self.notes if self.notes else ''}")


@dataclass(frozen=True)
class ModelStrategy:
    """Sweep parameters for the model-based rule check."""

    exhaustive_n: int | None = 2
    random_models: int = 1000
    random_sizes: tuple[int, ...] = (3, 4)
    density: float = 0.5
    seed: int = 0
    max_violations: int = 3


def _codes_for(rule: Rule) -> tuple[str, ...]:
    if not rule.fail_mode:
        return ("ok",)
    if rule.generic_code:
        return ("ok", "er")
    return (rule.conclusion.code,)


def _render_value(value, calc, is_test: bool):
    if is_test:
        return [i for i in range(calc.n) if (value >> i) & 1]
    if isinstance(value, tuple) and len(value) == 2 and not isinstance(value[0], int):
        pass
    if hasattr(calc, "to_pairs"):
        if isinstance(value, tuple) and len(value) == 2 and (
            isinstance(value[0], int) and isinstance(calc, _Tab2Calc)
            or isinstance(value[0], tuple)
        ):
            return {"ok": calc.to_pairs(value[0]), "er": calc.to_pairs(value[1])}
        return calc.to_pairs(value)
    return value


def check_rule_models(rule: Rule, strategy: ModelStrategy = ModelStrategy()) -> RuleReport:
    """Exhaustive small-carrier sweep plus seeded random models; reports any
    instance whose premises hold while the conclusion fails."""
    report = RuleReport(rule.rule_id, rule.figure, "models", True,
                        notes=rule.note)
    codes = _codes_for(rule)

    def run_sweep(calc, env_iter, code):
        ops = _PairCalc(calc) if rule.fail_mode else calc
        prem_checks = [
            _compile_part(p, code, ops, calc, rule.fail_mode) for p in rule.premises
        ]
        concl = _compile_part(rule.conclusion, code, ops, calc, rule.fail_mode)
        # Attach each premise at the loop depth where its variables are bound.
        var_pos = {v: i for i, v in enumerate(rule.var_order)}
        prem_vars = []
        for part in rule.premises:
            syms = set()
            for t in ((part.lo, part.hi) if isinstance(part, TestOrder)
                      else (part.pre, part.prog, part.post)):
                stack = [t]
                while stack:
                    node = stack.pop()
                    match node:
                        case Act(s) | Test(s):
                            syms.add(s)
                        case Plus(l, r) | Seq(l, r):
                            stack.extend((l, r))
                        case Star(inner) | Not(inner):
                            stack.append(inner)
            prem_vars.append(max(var_pos[s] for s in syms))
        prem_at = [[] for _ in rule.var_order]
        for check, depth in zip(prem_checks, prem_vars):
            prem_at[depth].append(check)

        held = 0
        for env in env_iter(prem_at):
            held += 1
            report.instances_total += 1
            if not concl(env):
                report.passed = False
                if len(report.violations) < strategy.max_violations:
                    valuation = {
                        v: _render_value(env[v], calc, v in rule.test_vars)
                        for v in rule.var_order
                    }
                    report.violations.append(RuleViolation(code, calc.n, valuation))
        report.premises_held += held

    # Exhaustive sweep.
    if strategy.exhaustive_n is not None:
        n = strategy.exhaustive_n
        calc = _Tab2Calc.get() if n == 2 else _GenericCalc(n)
        if n == 2:
            rel_domain = list(range(16))
        else:
            rel_domain = [
                tuple((bits >> (i * n)) & ((1 << n) - 1) for i in range(n))
                for bits in range(1 << (n * n))
            ]
        if rule.fail_mode:
            act_domain = [(ok, er) for ok in rel_domain for er in rel_domain]
        else:
            act_domain = rel_domain
        test_domain = list(range(1 << n))
        domains = [
            act_domain if v in rule.action_vars else test_domain
            for v in rule.var_order
        ]

        def exhaustive(prem_at):
            env: dict = {}
            order = rule.var_order

            def rec(depth):
                if depth == len(order):
                    yield env
                    return
                var = order[depth]
                checks = prem_at[depth]
                for value in domains[depth]:
                    env[var] = value
                    if all(c(env) for c in checks):
                        yield from rec(depth + 1)

            yield from rec(0)

        for code in codes:
            run_sweep(calc, exhaustive, code)

    # Seeded random sweep.
    if strategy.random_models:
        rng = random.Random(strategy.seed)
        calcs = {n: _GenericCalc(n) for n in strategy.random_sizes}
        for code in codes:
            samples = []
            for i in range(strategy.random_models):
                n = strategy.random_sizes[i % len(strategy.random_sizes)]
                calc = calcs[n]
                env = {}
                for v in rule.var_order:
                    if v in rule.test_vars:
                        env[v] = rng.getrandbits(n)
                    elif rule.fail_mode:
                        env[v] = (random_rel(rng, n, strategy.density),
                                  random_rel(rng, n, strategy.density))
                    else:
                        env[v] = random_rel(rng, n, strategy.density)
                samples.append((n, env))

            for n, env in samples:
                calc = calcs[n]
                ops = _PairCalc(calc) if rule.fail_mode else calc
                prem_checks = [
                    _compile_part(p, code, ops, calc, rule.fail_mode)
                    for p in rule.premises
                ]
                concl = _compile_part(rule.conclusion, code, ops, calc, rule.fail_mode)
                report.instances_total += 1
                if all(c(env) for c in prem_checks):
                    report.premises_held += 1
                    if not concl(env):
                        report.passed = False
                        if len(report.violations) < strategy.max_violations:
                            valuation = {
                                v: _render_value(env[v], calc, v in rule.test_vars)
                                for v in rule.var_order
                            }
                            report.violations.append(RuleViolation(code, n, valuation))
    return report


def check_rule_equational(rule: Rule, form: str = "F2") -> RuleReport:
    """Engine check of a premise-free rule: schema variables become fresh
    primitives, so validity extends to all instances by substitution."""
    if not rule.premise_free:
        raise ValidationError(
            f"rule {rule.rule_id} has premises; use the model strategy"
        )
    alphabet = Alphabet(rule.action_vars, rule.test_vars)
    report = RuleReport(rule.rule_id, rule.figure, "equational", True, notes=rule.note)
    for code in _codes_for(rule):
        concl = rule.conclusion
        triple = Triple(concl.pre, concl.prog, ErrorCode(code), concl.post, concl.style)
        if rule.fail_mode:
            lhs = seq_all(TOP, triple.pre, triple.prog)
            rhs = seq_all(triple.post, FAIL) if code == "er" else triple.post
            fv: FailVerdict = decide_fail_leq(rhs, lhs, alphabet)
            valid = fv.equal
            claim_text = f"{print_term(lhs)} >= {print_term(rhs)}"
        else:
            result = check_triple_equational(triple, alphabet, form)
            valid = result.valid
            claim_text = result.claim.render()
        report.claims.append((code, claim_text, valid))
        if not valid:
            report.passed = False
    return report


def check_rule(rule: Rule, strategy="models", **kwargs) -> RuleReport:
    if strategy == "equational":
        return check_rule_equational(rule, **kwargs)
    if strategy == "models":
        model_strategy = kwargs.pop("model_strategy", None) or ModelStrategy(**kwargs)
        return check_rule_models(rule, model_strategy)
    raise ValidationError(f"unknown strategy {strategy!r}")


def check_figure(figure: int, strategy: ModelStrategy = ModelStrategy()) -> list[RuleReport]:
    """Check every rule of a figure: engine for premise-free rules, model
    sweep for premised ones."""
    reports = []
    for rule in rules_for_figure(figure):
        if rule.premise_free:
            reports.append(check_rule_equational(rule))
        else:
            reports.append(check_rule_models(rule, strategy))
    return reports


# --- expressibility experiment ------------------------------------------------


def _experiment_models() -> tuple[RelationalModel, RelationalModel]:
    """Two-state valuations differing only in whether the action is empty;
    the incorrectness triple [b] p [ok: c] is true in the first, false in
    the second."""
    base = {"b": 0b01, "c": 0b10}
    with_step = RelationalModel(2, {"p": (0b10, 0)}, dict(base))  # p = {(0, 1)}
    empty_step = RelationalModel(2, {"p": (0, 0)}, dict(base))
    return with_step, empty_step


PINNED_KAT_CANDIDATES = (
    "b;p;~c = 0",
    "b;p = b;p;c",
    "b;p + c = b;p",
    "c;p;~b = 0",
    "b;p;c = c",
    "(b;p)*;c = c",
)


@dataclass
class ExpressibilityReport:
    triple_truth: tuple[bool, bool]
    candidates: list  # (claim text, holds in step model, holds in empty model)
    random_checked: int
    tracking_claim: str | None  # any claim matching the triple's truth pattern
    passed: bool


def kat_expressibility_experiment(random_pairs: int = 200, seed: int = 0,
                                  max_size: int = 8) -> ExpressibilityReport:
    """Exhibit that no sampled KAT equation tracks the incorrectness triple
    across the pinned pair of valuations: the triple flips from true to false
    when the action is emptied, while every candidate equation's truth either
    stays put or moves the wrong way."""
    alphabet = Alphabet(("p",), ("b", "c"))
    m_step, m_empty = _experiment_models()
    triple = Triple(_t("b"), _a("p"), ErrorCode.OK, _t("c"), "incorrectness")
    truth = (check_triple_in_model(m_step, triple), check_triple_in_model(m_empty, triple))

    candidates = []
    tracking = None

    def record(text: str, claim: Claim):
        nonlocal tracking
        pair = (claim_holds(m_step, claim), claim_holds(m_empty, claim))
        candidates.append((text, pair[0], pair[1]))
        if pair == truth and tracking is None:
            tracking = text

    for text in PINNED_KAT_CANDIDATES:
        record(text, parse_claim(text, alphabet, TermKind.KAT))

    rng = random.Random(seed)
    checked = 0
    for _ in range(random_pairs):
        t1 = _random_kat_term(rng, alphabet, rng.randint(1, max_size))
        t2 = _random_kat_term(rng, alphabet, rng.randint(1, max_size))
        claim = Claim(t1, "=", t2)
        pair = (claim_holds(m_step, claim), claim_holds(m_empty, claim))
        checked += 1
        if pair == truth and tracking is None:
            tracking = claim.render()
    return ExpressibilityReport(truth, candidates, checked, tracking, tracking is None)


def _random_kat_term(rng: random.Random, alphabet: Alphabet, size: int) -> Term:
    """Small random KAT term generator for the expressibility sweep."""
    if size <= 1:
        choices = [ZERO, ONE]
        choices += [Act(a) for a in alphabet.actions]
        choices += [Test(t) for t in alphabet.tests]
        return rng.choice(choices)
    shape = rng.randrange(4)
    if shape == 0:
        k = rng.randint(1, size - 1)
        return Plus(_random_kat_term(rng, alphabet, k),
                    _random_kat_term(rng, alphabet, size - k))
    if shape == 1:
        k = rng.randint(1, size - 1)
        return Seq(_random_kat_term(rng, alphabet, k),
                   _random_kat_term(rng, alphabet, size - k))
    if shape == 2:
        inner = _random_kat_term(rng, alphabet, size - 1)
        return inner if is_test_only(inner) else Star(inner)
    if alphabet.tests:
        return Not(_random_test_term(rng, alphabet, min(size - 1, 3)))
    return _random_kat_term(rng, alphabet, size - 1)


def _random_test_term(rng: random.Random, alphabet: Alphabet, size: int) -> Term:
    if size <= 1:
        return rng.choice([ZERO, ONE] + [Test(t) for t in alphabet.tests])
    shape = rng.randrange(3)
    if shape == 0:
        k = rng.randint(1, size - 1)
        return Plus(_random_test_term(rng, alphabet, k),
                    _random_test_term(rng, alphabet, size - k))
    if shape == 1:
        k = rng.randint(1, size - 1)
        return Seq(_random_test_term(rng, alphabet, k),
                   _random_test_term(rng, alphabet, size - k))
    return Not(_random_test_term(rng, alphabet, size - 1))
