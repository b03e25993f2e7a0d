"""Pinned regression demos: the incompleteness pair, the general-relational
codomain gap, and the worked program-reasoning examples.

Each demo re-derives a known verdict from scratch and fails loudly if any
pinned value drifts.  The CLI `examples` command runs the whole set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .engine import decide_equal, decide_leq
from .failtopkat import ErrorCode, eval_fail
from .logic import Triple, check_triple_equational, check_triple_in_model
from .relmodels import (
    RelationalModel,
    claim_holds,
    codomain,
    enumerate_models,
    eval_term,
    random_model,
    random_rel,
    rel_from_pairs,
    rel_pairs,
)
from .syntax import (
    Act,
    Alphabet,
    Claim,
    ErrorStmt,
    If,
    Not,
    ONE,
    Prim,
    Skip,
    Test,
    While,
    desugar,
    parse_term,
    plus_all,
)


@dataclass
class DemoResult:
    name: str
    passed: bool
    lines: list[str] = field(default_factory=list)


def _check(result: DemoResult, ok: bool, text: str) -> None:
    result.lines.append(("ok  " if ok else "FAIL") + " " + text)
    if not ok:
        result.passed = False


def demo_incompleteness_pair(seed: int = 0) -> DemoResult:
    """top;p = top;p;top;p and p <= p;top;p hold in every full-top relational
    model but are not theory-level validities; a lawful smaller top breaks
    them."""
    res = DemoResult("incompleteness-pair", True)
    alphabet = Alphabet(("p",), ())
    t_one = parse_term("top;p", alphabet)
    t_two = parse_term("top;p;top;p", alphabet)
    v = decide_equal(t_one, t_two, alphabet)
    _check(res, not v.equal, f"engine refutes top;p = top;p;top;p, witness {v.witness}")
    v2 = decide_leq(parse_term("p", alphabet), parse_term("p;top;p", alphabet), alphabet)
    _check(res, not v2.equal, "engine refutes p <= p;top;p")

    eq_claim = Claim(t_one, "=", t_two)
    leq_claim = Claim(parse_term("p", alphabet), "<=", parse_term("p;top;p", alphabet))
    for n in (1, 2, 3):
        bad = [
            m for m in enumerate_models(n, alphabet)
            if not (claim_holds(m, eq_claim) and claim_holds(m, leq_claim))
        ]
        _check(res, not bad, f"no full-top countermodel among all models at n={n}")

    # Smaller lawful top over two states: top = {(0,0),(1,1),(0,1)}, p = {(0,1)}.
    model = RelationalModel(
        2, {"p": rel_from_pairs(2, [(0, 1)])}, {},
        top=rel_from_pairs(2, [(0, 0), (1, 1), (0, 1)]),
    )
    top_p = eval_term(model, t_one)
    top_p_twice = eval_term(model, t_two)
    _check(res, rel_pairs(top_p) == [(0, 1)], f"explicit-top model: top;p = {rel_pairs(top_p)}")
    _check(res, rel_pairs(top_p_twice) == [], f"explicit-top model: top;p;top;p = {rel_pairs(top_p_twice)}")
    return res


def demo_commuting_top_pattern(seed: int = 0) -> DemoResult:
    """top;p;top;q;top = top;q;top;p;top separates relational validity from
    the theory: the engine refutes it while full-top searches find nothing."""
    res = DemoResult("commuting-top-pattern", True)
    alphabet = Alphabet(("p", "q"), ())
    lhs = parse_term("top;p;top;q;top", alphabet)
    rhs = parse_term("top;q;top;p;top", alphabet)
    v = decide_equal(lhs, rhs, alphabet)
    _check(res, not v.equal, "engine refutes the commuted pattern")
    claim = Claim(lhs, "=", rhs)
    for n in (1, 2):
        bad = [m for m in enumerate_models(n, alphabet) if not claim_holds(m, claim)]
        _check(res, not bad, f"holds in all full-top models at n={n}")
    rng = random.Random(seed)
    bad = 0
    for _ in range(500):
        m = random_model(3, alphabet, "full", 0.4, rng)
        if not claim_holds(m, claim):
            bad += 1
    _check(res, bad == 0, "holds in 500 seeded random full-top models at n=3")
    return res


def demo_grel_codomain_gap() -> DemoResult:
    """With a lawful non-complete top, equal codomains no longer force equal
    top-prefixed relations."""
    res = DemoResult("grel-codomain-gap", True)
    alphabet = Alphabet(("p", "q"), ())
    top = rel_from_pairs(2, [(0, 0), (1, 1), (0, 1)])
    model = RelationalModel(
        2,
        {"p": rel_from_pairs(2, [(0, 1)]), "q": rel_from_pairs(2, [(1, 1)])},
        {},
        top=top,
    )
    p, q = model.action_val["p"], model.action_val["q"]
    _check(res, codomain(p) == codomain(q), "codomain(p) = codomain(q) = {1}")
    top_p = eval_term(model, parse_term("top;p", alphabet))
    top_q = eval_term(model, parse_term("top;q", alphabet))
    _check(res, rel_pairs(top_p) == [(0, 1)], f"top;p = {rel_pairs(top_p)}")
    _check(res, rel_pairs(top_q) == [(0, 1), (1, 1)], f"top;q = {rel_pairs(top_q)}")
    _check(res, top_p != top_q, "top;p differs from top;q")
    return res


def demo_grel_triple_gap() -> DemoResult:
    """In the same lawful-top model the codomain containment of the triple
    holds while the encoded inequality fails."""
    res = DemoResult("grel-triple-gap", True)
    alphabet = Alphabet(("p",), ("b", "c"))
    model = RelationalModel(
        2,
        {"p": rel_from_pairs(2, [(0, 1)])},
        {"b": 0b11, "c": 0b10},
        top=rel_from_pairs(2, [(0, 0), (1, 1), (0, 1)]),
    )
    triple = Triple(Test("b"), Act("p"), ErrorCode.OK, Test("c"), "incorrectness")
    _check(res, check_triple_in_model(model, triple), "[b] p [ok: c] holds semantically")
    claim = Claim(parse_term("top;b;p", alphabet), ">=", parse_term("c", alphabet))
    _check(res, not claim_holds(model, claim), "top;b;p >= c fails under the smaller top")
    return res


def demo_abs_value() -> DemoResult:
    """A branch-flipped absolute-value procedure: every negative input can
    still be reached, provable purely equationally."""
    res = DemoResult("incorrect-abs-value", True)
    alphabet = Alphabet(("neg",), ("b",))
    prog = desugar(If(Test("b"), Skip(), Prim("neg")))
    _check(res, prog == parse_term("b;1 + ~b;neg", alphabet),
           "if b then skip else neg desugars to b;1 + ~b;neg")
    triple = Triple(Test("b"), prog, ErrorCode.OK, Test("b"), "incorrectness")
    for form in ("F1", "F2", "F3"):
        r = check_triple_equational(triple, alphabet, form)
        _check(res, r.valid, f"[b] b;1 + ~b;neg [ok: b] valid via {form}: {r.claim.render()}")
    return res


def demo_strongest_post() -> DemoResult:
    """The loop (b;inc)*;~b has ~b as its strongest postcondition under the
    trivial precondition: the incorrectness and the Hoare triple both hold."""
    res = DemoResult("strongest-postcondition", True)
    alphabet = Alphabet(("inc",), ("b",))
    prog = desugar(While(Test("b"), Prim("inc")))
    _check(res, prog == parse_term("(b;inc)*;~b", alphabet),
           "while b do inc desugars to (b;inc)*;~b")
    inc_triple = Triple(ONE, prog, ErrorCode.OK, Not(Test("b")), "incorrectness")
    r = check_triple_equational(inc_triple, alphabet)
    _check(res, r.valid, f"[1] (b;inc)*;~b [ok: ~b] valid: {r.claim.render()}")
    hoare_triple = Triple(ONE, prog, ErrorCode.OK, Not(Test("b")), "hoare")
    for form in ("kozen", "topleq", "toptop"):
        r = check_triple_equational(hoare_triple, alphabet, form)
        _check(res, r.valid, f"{{1}} (b;inc)*;~b {{~b}} valid via {form}")
    return res


def demo_while_theorem(seed: int = 0) -> DemoResult:
    """For any precondition c above ~b, the loop (b;p)*;~b has ~b as exact
    postcondition.  Writing c = ~b + d with d fresh covers every such c, so
    one engine run proves the whole family; a seeded model sweep agrees."""
    res = DemoResult("while-postcondition-theorem", True)
    alphabet = Alphabet(("p",), ("b", "d"))
    pre = plus_all(Not(Test("b")), Test("d"))
    prog = desugar(While(Test("b"), Prim("p")))
    inc = Triple(pre, prog, ErrorCode.OK, Not(Test("b")), "incorrectness")
    r = check_triple_equational(inc, alphabet)
    _check(res, r.valid, f"[~b + d] (b;p)*;~b [ok: ~b] valid: {r.claim.render()}")
    hoare = Triple(pre, prog, ErrorCode.OK, Not(Test("b")), "hoare")
    r2 = check_triple_equational(hoare, alphabet)
    _check(res, r2.valid, f"{{~b + d}} (b;p)*;~b {{~b}} valid: {r2.claim.render()}")

    rng = random.Random(seed)
    ok = True
    for _ in range(300):
        n = rng.choice((2, 3, 4))
        m0 = random_model(n, alphabet, "full", 0.4, rng)
        # Force c >= ~b by construction: c = ~b union extra states.
        full = (1 << n) - 1
        tests = dict(m0.test_val)
        tests["d"] = (full & ~tests["b"]) | rng.getrandbits(n)
        m = RelationalModel(n, m0.action_val, tests)
        pre_forced = Test("d")
        inc_m = Triple(pre_forced, prog, ErrorCode.OK, Not(Test("b")), "incorrectness")
        hoare_m = Triple(pre_forced, prog, ErrorCode.OK, Not(Test("b")), "hoare")
        if not (check_triple_in_model(m, inc_m) and check_triple_in_model(m, hoare_m)):
            ok = False
            break
    _check(res, ok, "both triples hold across 300 seeded models with c above ~b")
    return res


def _range_model(p_rel, n: int = 5) -> RelationalModel:
    """States 0..4 read as x = -2..2; b is x>=0, c is x<=0, d is x=0."""
    return RelationalModel(
        n,
        {"p": p_rel},
        {"b": 0b11100, "c": 0b00111, "d": 0b00100},
    )


def demo_error_in_loop(seed: int = 0) -> DemoResult:
    """A loop whose body faults when x<=0: under the flipped guard x>=0 the
    error state x=0 is reachable, whatever the loop body's action does."""
    res = DemoResult("error-in-loop", True)
    alphabet = Alphabet(("p",), ("b", "c", "d"))
    prog = desugar(While(Test("b"), If(Test("c"), ErrorStmt(), Prim("p"))))
    _check(res, prog == parse_term("(b;(c;fail + ~c;p))*;~b", alphabet),
           "loop desugars to (b;(c;fail + ~c;p))*;~b")
    triple = Triple(ONE, prog, ErrorCode.ER, Test("d"), "incorrectness")

    # x -> x+1, clipped at the top of the range.
    bump = rel_from_pairs(5, [(i, min(i + 1, 4)) for i in range(5)])
    model = _range_model(bump)
    _check(res, check_triple_in_model(model, triple),
           "[1] loop [er: x=0] holds on the -2..2 model with p = x+1")
    ok_rel, er_rel = eval_fail(model, prog)
    _check(res, codomain(er_rel) == 0b00100, "error outcomes land exactly on x=0")

    rng = random.Random(seed)
    ok = all(
        check_triple_in_model(_range_model(random_rel(rng, 5, rng.random())), triple)
        for _ in range(100)
    )
    _check(res, ok, "triple holds for 100 seeded arbitrary loop bodies")

    r = check_triple_equational(triple, alphabet)
    _check(res, not r.valid,
           "equationally Unproven, as expected: the proof needs b;c = d, "
           "a fact about the specific tests")
    return res


def demo_assignment_hypothesis() -> DemoResult:
    """The abs-value program under precondition x>0: with the assignment's
    effect supplied as a model, the triple holds and so does the hypothesis
    inequality it rests on."""
    res = DemoResult("assignment-hypothesis", True)
    alphabet = Alphabet(("neg",), ("gt", "lt"))
    # States 0..4 as x = -2..2; neg is x -> -x; gt is x>0, lt is x<0.
    model = RelationalModel(
        5,
        {"neg": rel_from_pairs(5, [(i, 4 - i) for i in range(5)])},
        {"gt": 0b11000, "lt": 0b00011},
    )
    hypothesis = Claim(parse_term("top;gt;neg", alphabet), ">=", parse_term("lt", alphabet))
    _check(res, claim_holds(model, hypothesis), "hypothesis top;gt;neg >= lt holds")
    prog = desugar(If(Test("lt"), Skip(), Prim("neg")))
    triple = Triple(Test("gt"), prog, ErrorCode.OK, Test("lt"), "incorrectness")
    _check(res, check_triple_in_model(model, triple),
           "[x>0] if x<0 then skip else neg [ok: x<0] holds on the model")
    return res


def run_all(seed: int = 0) -> list[DemoResult]:
    return [
        demo_incompleteness_pair(seed),
        demo_commuting_top_pattern(seed),
        demo_grel_codomain_gap(),
        demo_grel_triple_gap(),
        demo_abs_value(),
        demo_strongest_post(),
        demo_while_theorem(seed),
        demo_error_in_loop(seed),
        demo_assignment_hypothesis(),
    ]
