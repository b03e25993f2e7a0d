"""Command-line surface: equiv, leq, triple, rules, examples, oracle and
model-search subcommands.

Exit codes: 0 when the query holds (equal / valid / all pass / no difference),
1 when it does not, 2 on usage, parse or validation errors.  Randomized
commands require an explicit seed and print it, so identical invocations
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import demos
from .atoms import language_up_to, render_guarded_string
from .engine import decide_claim, decide_equal, decide_leq, reduce_top
from .failtopkat import decide_fail_equal
from .logic import (
    ModelStrategy,
    RuleReport,
    check_rule_equational,
    check_rule_models,
    check_triple_equational,
    check_triple_in_model,
    parse_triple,
    rules_for_figure,
)
from .relmodels import find_countermodel, model_from_json, model_to_json, rel_pairs
from .syntax import (
    Act,
    Alphabet,
    Claim,
    Not,
    Plus,
    Seq,
    Star,
    Term,
    TermKind,
    TOP_ACTION,
    TopkatError,
    _SymRef,
    occurring_primitives,
    parse_claim,
    parse_raw,
    parse_term,
    print_term,
    resolve,
    term_kind,
    validate,
)

SCHEMA_VERSION = 1


class _Output:
    """Accumulates text lines and a JSON document; emits one of them."""

    def __init__(self, command: str, as_json: bool):
        self.as_json = as_json
        self.doc: dict = {"schema_version": SCHEMA_VERSION, "command": command}
        self.lines: list[str] = []

    def line(self, text: str) -> None:
        self.lines.append(text)

    def emit(self) -> None:
        if self.as_json:
            print(json.dumps(self.doc, indent=2, sort_keys=True))
        else:
            for line in self.lines:
                print(line)


def _read_source(text: str) -> tuple[str, dict]:
    """Expand @file arguments; header lines `actions:`/`tests:` declare
    alphabet parts, the remaining lines are the term or triple text."""
    if not text.startswith("@"):
        return text, {}
    header: dict = {}
    body: list[str] = []
    with open(text[1:], encoding="utf-8") as fh:
        for raw_line in fh:
            line = raw_line.strip()
            if line.startswith("actions:"):
                header["actions"] = line[len("actions:"):].strip()
            elif line.startswith("tests:"):
                header["tests"] = line[len("tests:"):].strip()
            elif line:
                body.append(line)
    return " ".join(body), header


def _collect_syms(raw: Term, syms: set[str], under_not: set[str], negated: bool = False):
    match raw:
        case _SymRef(name):
            syms.add(name)
            if negated:
                under_not.add(name)
        case Plus(l, r) | Seq(l, r):
            _collect_syms(l, syms, under_not, negated)
            _collect_syms(r, syms, under_not, negated)
        case Star(inner):
            _collect_syms(inner, syms, under_not, negated)
        case Not(inner):
            _collect_syms(inner, syms, under_not, True)


def _infer_alphabet(term_texts: list[str], test_texts: list[str] = ()) -> Alphabet:
    """Classify undeclared identifiers: anything under a negation or inside a
    pre/post condition is a test, everything else is an action."""
    syms: set[str] = set()
    tests: set[str] = set()
    for text in term_texts:
        _collect_syms(parse_raw(text), syms, tests)
    for text in test_texts:
        forced: set[str] = set()
        _collect_syms(parse_raw(text), forced, set())
        tests |= forced
        syms |= forced
    return Alphabet(tuple(sorted(syms - tests)), tuple(sorted(tests)))


def _alphabet_from_args(args, term_texts: list[str], test_texts: list[str] = (),
                        headers: dict | None = None) -> Alphabet:
    actions = args.actions
    tests = args.tests
    if headers:
        actions = headers.get("actions", actions)
        tests = headers.get("tests", tests)
    if actions is None and tests is None:
        return _infer_alphabet(term_texts, test_texts)
    return Alphabet.from_spec(actions or "", tests or "")


def _witness_doc(verdict, alphabet: Alphabet) -> dict:
    return {
        "witness": verdict.render_witness(alphabet),
        "side": verdict.witness_side,
    }


def cmd_equiv(args) -> int:
    out = _Output("equiv", args.format == "json")
    text1, hdr1 = _read_source(args.term1)
    text2, hdr2 = _read_source(args.term2)
    alphabet = _alphabet_from_args(args, [text1, text2], headers={**hdr1, **hdr2})
    t1 = parse_term(text1, alphabet, TermKind.FAILTOPKAT)
    t2 = parse_term(text2, alphabet, TermKind.FAILTOPKAT)
    if TermKind.FAILTOPKAT in (term_kind(t1), term_kind(t2)):
        fv = decide_fail_equal(t1, t2, alphabet)
        out.doc["mode"] = "fail"
        out.doc["equal"] = fv.equal
        out.line("verdict: equal (in every fail-split pair model over every TopKAT)"
                 if fv.equal else "verdict: not equal")
        if not fv.equal:
            comp, witness, side = fv.witness
            rendered = render_guarded_string(witness, alphabet)
            out.doc["component"] = comp
            out.doc["witness"] = rendered
            out.doc["side"] = side
            out.line(f"witness {comp}: {rendered}  (accepted by the "
                     f"{'first' if side == 'left' else 'second'} term only)")
        out.emit()
        return 0 if fv.equal else 1
    verdict = decide_equal(t1, t2, alphabet)
    out.doc["mode"] = "topkat"
    out.doc["equal"] = verdict.equal
    if verdict.equal:
        out.line("verdict: equal (valid in every TopKAT)")
    else:
        out.doc.update(_witness_doc(verdict, alphabet))
        out.line("verdict: not equal")
        out.line(f"witness: {verdict.render_witness(alphabet)}  (accepted by the "
                 f"{'first' if verdict.witness_side == 'left' else 'second'} term only)")
    out.emit()
    return 0 if verdict.equal else 1


def cmd_leq(args) -> int:
    out = _Output("leq", args.format == "json")
    text1, hdr1 = _read_source(args.term1)
    text2, hdr2 = _read_source(args.term2)
    alphabet = _alphabet_from_args(args, [text1, text2], headers={**hdr1, **hdr2})
    t1 = parse_term(text1, alphabet, TermKind.TOPKAT)
    t2 = parse_term(text2, alphabet, TermKind.TOPKAT)
    verdict = decide_leq(t1, t2, alphabet)
    out.doc["holds"] = verdict.equal
    if verdict.equal:
        out.line("verdict: holds (valid in every TopKAT)")
    else:
        out.doc.update(_witness_doc(verdict, alphabet))
        out.line("verdict: does not hold")
        out.line(f"witness: {verdict.render_witness(alphabet)}  "
                 "(in the first language, not the second)")
    out.emit()
    return 0 if verdict.equal else 1


def _split_triple_texts(text: str) -> tuple[str, str]:
    """Pre/post texts of a triple, for alphabet inference only."""
    s = text.strip()
    close = "}" if s.startswith("{") else "]"
    open_c = "{" if s.startswith("{") else "["
    pre_end = s.find(close)
    post_start = s.rfind(open_c)
    if pre_end < 0 or post_start <= pre_end:
        return "", ""
    post = s.rstrip()[post_start + 1:-1]
    for label in ("ok:", "er:"):
        if post.lstrip().startswith(label):
            post = post.lstrip()[len(label):]
    return s[1:pre_end], post


def cmd_triple(args) -> int:
    out = _Output("triple", args.format == "json")
    text, header = _read_source(args.triple)
    pre_text, post_text = _split_triple_texts(text)
    prog_guess = text.strip()
    alphabet = _alphabet_from_args(
        args, [pre_text or "1", post_text or "1",
               _triple_prog_text(prog_guess)],
        test_texts=[pre_text or "1", post_text or "1"],
        headers=header,
    )
    triple = parse_triple(text, alphabet)
    out.doc["triple"] = triple.render()
    if args.strategy == "model":
        if not args.model:
            raise TopkatError("--strategy model requires --model FILE")
        with open(args.model, encoding="utf-8") as fh:
            model = model_from_json(json.load(fh))
        holds = check_triple_in_model(model, triple)
        out.doc["strategy"] = "model"
        out.doc["holds"] = holds
        out.line(f"triple {triple.render()}")
        out.line(f"model: {args.model} ({model.n} states)")
        out.line("verdict: holds in the model" if holds else "verdict: fails in the model")
        out.emit()
        return 0 if holds else 1
    result = check_triple_equational(triple, alphabet, args.form)
    out.doc["strategy"] = "equational"
    out.doc["form"] = args.form
    out.doc["claim"] = result.claim.render()
    out.doc["status"] = result.status
    out.line(f"triple {triple.render()}")
    out.line(f"encoded claim: {result.claim.render()}")
    if result.valid:
        out.line("verdict: Valid (the claim holds in every TopKAT)")
    else:
        out.line("verdict: Unproven (not a theory-level validity; this does not "
                 "refute the triple in any particular model)")
        if result.witness is not None:
            rendered = render_guarded_string(result.witness, alphabet)
            out.doc["witness"] = rendered
            out.line(f"language separation: {rendered}")
    out.emit()
    return 0 if result.valid else 1


def _triple_prog_text(text: str) -> str:
    s = text.strip()
    close = "}" if s.startswith("{") else "]"
    open_c = "{" if s.startswith("{") else "["
    pre_end = s.find(close)
    post_start = s.rfind(open_c)
    if pre_end < 0 or post_start <= pre_end:
        return "1"
    return s[pre_end + 1:post_start].strip() or "1"


def _rule_report_doc(report: RuleReport) -> dict:
    return {
        "rule": report.rule_id,
        "figure": report.figure,
        "strategy": report.strategy,
        "passed": report.passed,
        "premises_held": report.premises_held,
        "instances": report.instances_total,
        "claims": [
            {"code": code, "claim": text, "valid": valid}
            for code, text, valid in report.claims
        ],
        "violations": [
            {"code": v.code, "states": v.n, "valuation": v.valuation}
            for v in report.violations
        ],
    }


def _check_one_rule(packed):
    rule_id, figure, strategy_kwargs = packed
    for rule in rules_for_figure(figure):
        if rule.rule_id == rule_id:
            if rule.premise_free:
                return check_rule_equational(rule)
            return check_rule_models(rule, ModelStrategy(**strategy_kwargs))
    raise TopkatError(f"unknown rule {rule_id}")


def cmd_rules(args) -> int:
    out = _Output("rules", args.format == "json")
    sizes = tuple(int(s) for s in args.sizes.split(",") if s)
    if args.models > 0 and args.seed is None:
        raise TopkatError("--seed is required when random models are drawn")
    strategy_kwargs = dict(
        exhaustive_n=args.exhaustive_n,
        random_models=args.models,
        random_sizes=sizes,
        density=args.density,
        seed=args.seed or 0,
    )
    rules = rules_for_figure(args.figure)
    out.line(f"figure {args.figure}: {len(rules)} rules | seed={args.seed} "
             f"models={args.models} sizes={sizes} density={args.density} "
             f"exhaustive_n={args.exhaustive_n}")
    jobs = [(r.rule_id, args.figure, strategy_kwargs) for r in rules]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_check_one_rule, jobs))
    else:
        reports = [_check_one_rule(job) for job in jobs]
    all_pass = True
    out.doc["figure"] = args.figure
    out.doc["seed"] = args.seed
    out.doc["reports"] = []
    for report in reports:
        out.line(report.summary())
        out.doc["reports"].append(_rule_report_doc(report))
        if not report.passed:
            all_pass = False
            for v in report.violations:
                out.line(f"    violation ({v.code}, {v.n} states): {v.valuation}")
    out.doc["passed"] = all_pass
    out.line("all rules pass" if all_pass else "RULE CHECK FAILED")
    out.emit()
    return 0 if all_pass else 1


def cmd_examples(args) -> int:
    out = _Output("examples", args.format == "json")
    results = demos.run_all(args.seed)
    out.doc["seed"] = args.seed
    out.doc["results"] = []
    all_pass = True
    first_failure = None
    for res in results:
        out.line(f"[{'pass' if res.passed else 'FAIL'}] {res.name}")
        if args.verbose or not res.passed:
            for line in res.lines:
                out.line(f"    {line}")
        out.doc["results"].append(
            {"name": res.name, "passed": res.passed, "detail": res.lines}
        )
        if not res.passed:
            all_pass = False
            first_failure = first_failure or res.name
    out.doc["passed"] = all_pass
    out.line("all examples reproduce" if all_pass
             else f"first divergence: {first_failure}")
    out.emit()
    return 0 if all_pass else 1


ORACLE_BOUND_CAP = 10


def cmd_oracle(args) -> int:
    out = _Output("oracle", args.format == "json")
    if args.bound > ORACLE_BOUND_CAP:
        raise TopkatError(f"--bound larger than the cap {ORACLE_BOUND_CAP}")
    text1, hdr1 = _read_source(args.term1)
    text2, hdr2 = _read_source(args.term2)
    alphabet = _alphabet_from_args(args, [text1, text2], headers={**hdr1, **hdr2})
    t1 = parse_term(text1, alphabet, TermKind.TOPKAT)
    t2 = parse_term(text2, alphabet, TermKind.TOPKAT)
    acts1, _ = occurring_primitives(t1)
    acts2, _ = occurring_primitives(t2)
    joint = acts1 | acts2
    r1 = reduce_top(t1, joint).term
    r2 = reduce_top(t2, joint).term
    lang1 = language_up_to(r1, args.bound, alphabet)
    lang2 = language_up_to(r2, args.bound, alphabet)
    same = lang1 == lang2
    out.doc["bound"] = args.bound
    out.doc["bounded_equal"] = same
    out.doc["sizes"] = [len(lang1), len(lang2)]
    out.line(f"bounded languages at L={args.bound}: {len(lang1)} vs {len(lang2)} strings")
    if same:
        out.line("no difference up to the bound")
    else:
        diff = min(
            lang1 ^ lang2, key=lambda gs: (gs.num_actions, render_guarded_string(gs, alphabet))
        )
        where = "first" if diff in lang1 else "second"
        rendered = render_guarded_string(diff, alphabet)
        out.doc["difference"] = rendered
        out.doc["difference_side"] = where
        out.line(f"first difference: {rendered}  (only in the {where} language)")
    verdict = decide_equal(t1, t2, alphabet)
    agree = verdict.equal == same or (not verdict.equal and same
                                      and verdict.witness.num_actions > args.bound)
    out.doc["engine_equal"] = verdict.equal
    out.doc["engine_agrees"] = agree
    out.line(f"engine verdict: {'equal' if verdict.equal else 'not equal'}"
             + ("" if agree else "  [DISAGREES with the bounded oracle]"))
    if not verdict.equal and verdict.witness is not None:
        out.line(f"engine witness: {verdict.render_witness(alphabet)} "
                 f"({verdict.witness.num_actions} actions)")
    out.emit()
    return 0 if same else 1


def cmd_model_search(args) -> int:
    out = _Output("model-search", args.format == "json")
    text, header = _read_source(args.claim)
    alphabet = _alphabet_from_args(args, _claim_sides(text), headers=header)
    claim = parse_claim(text, alphabet, TermKind.TOPKAT)
    if args.search == "random" and args.seed is None:
        raise TopkatError("--seed is required for random search")
    found = find_countermodel(
        claim, alphabet, search=args.search, n=args.n, count=args.count,
        density=args.density, seed=args.seed or 0, top_spec=args.top,
    )
    out.doc["claim"] = claim.render()
    out.doc["search"] = args.search
    out.line(f"claim: {claim.render()}")
    out.line(f"search: {args.search} n={args.n}"
             + (f" count={args.count} density={args.density} seed={args.seed} top={args.top}"
                if args.search == "random" else ""))
    if found is None:
        out.doc["countermodel"] = None
        out.line("no countermodel found")
        out.emit()
        return 0
    out.doc["countermodel"] = model_to_json(found.model)
    out.doc["lhs"] = rel_pairs(found.lhs)
    out.doc["rhs"] = rel_pairs(found.rhs)
    out.line(f"countermodel: {json.dumps(model_to_json(found.model), sort_keys=True)}")
    out.line(f"lhs evaluates to {rel_pairs(found.lhs)}")
    out.line(f"rhs evaluates to {rel_pairs(found.rhs)}")
    out.emit()
    return 1


def _claim_sides(text: str) -> list[str]:
    for op in ("<=", ">=", "="):
        if op in text:
            lhs, rhs = text.split(op, 1)
            return [lhs, rhs]
    return [text]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topkat",
        description="Equational reasoning for KAT/TopKAT/FailTopKAT terms, "
                    "triples, deduction rules and finite relational models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--actions", help="comma/space separated action symbols")
        p.add_argument("--tests", help="comma/space separated test symbols")
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("equiv", help="decide term equality")
    common(p)
    p.add_argument("term1")
    p.add_argument("term2")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("leq", help="decide term ordering t1 <= t2")
    common(p)
    p.add_argument("term1")
    p.add_argument("term2")
    p.set_defaults(func=cmd_leq)

    p = sub.add_parser("triple", help="check a Hoare or incorrectness triple")
    common(p)
    p.add_argument("triple", help="[pre] prog [ok: post], [pre] prog [er: post] or {pre} prog {post}")
    p.add_argument("--form", default=None,
                   help="encoding form: F1/F2/F3 for incorrectness, kozen/topleq/toptop for hoare")
    p.add_argument("--strategy", choices=("equational", "model"), default="equational")
    p.add_argument("--model", help="model JSON file (with --strategy model)")
    p.set_defaults(func=cmd_triple)

    p = sub.add_parser("rules", help="check the deduction-rule catalog")
    p.add_argument("--figure", type=int, choices=(1, 3, 5), required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--models", type=int, default=1000, help="random models per rule")
    p.add_argument("--sizes", default="3,4", help="random model carrier sizes")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--exhaustive-n", type=int, default=2, dest="exhaustive_n")
    p.add_argument("--jobs", type=int, default=1, help="parallel rule sweeps")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("examples", help="run the pinned regression demos")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("oracle", help="compare bounded guarded-string languages")
    common(p)
    p.add_argument("term1")
    p.add_argument("term2")
    p.add_argument("--bound", type=int, default=4)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("model-search", help="search finite models falsifying a claim")
    common(p)
    p.add_argument("--claim", required=True, help='e.g. "top;p = top;p;top;p"')
    p.add_argument("--search", choices=("exhaustive", "random"), default="exhaustive")
    p.add_argument("--n", type=int, default=2, help="carrier size")
    p.add_argument("--count", type=int, default=1000, help="random models to draw")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--top", choices=("full", "generated"), default="full")
    p.set_defaults(func=cmd_model_search)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except TopkatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
