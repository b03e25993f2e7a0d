"""Parser, printer, validation and desugaring tests."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termgen import random_term
from topkat.syntax import (
    Act,
    Alphabet,
    Assume,
    Choice,
    ErrorStmt,
    FAIL,
    If,
    Not,
    ONE,
    ParseError,
    Plus,
    Prim,
    Seq,
    SeqStmt,
    Skip,
    Star,
    TOP,
    Term,
    TermKind,
    Test,
    ValidationError,
    While,
    ZERO,
    desugar,
    occurring_primitives,
    parse_claim,
    parse_term,
    print_term,
    term_kind,
    validate,
)

AB = Alphabet(("p", "q"), ("b", "c"))


class TestAlphabet:
    def test_disjointness(self):
        with pytest.raises(ValidationError):
            Alphabet(("p",), ("p",))

    def test_duplicates(self):
        with pytest.raises(ValidationError):
            Alphabet(("p", "p"), ())

    def test_reserved_words(self):
        with pytest.raises(ValidationError):
            Alphabet(("top",), ())

    def test_bad_identifier(self):
        with pytest.raises(ValidationError):
            Alphabet(("P",), ())

    def test_cap(self):
        with pytest.raises(ValidationError):
            Alphabet((), tuple(f"t{i}" for i in range(40)), test_cap=16)

    def test_from_spec(self):
        ab = Alphabet.from_spec("p, q", "b c")
        assert ab.actions == ("p", "q") and ab.tests == ("b", "c")

    def test_env_cap_override(self, monkeypatch):
        monkeypatch.setenv("TOPKAT_ATOM_CAP", "2")
        with pytest.raises(ValidationError):
            Alphabet((), ("a", "b", "c"))


class TestParse:
    def test_choice_of_guarded_branches(self):
        t = parse_term("b;p + ~b;q", AB)
        assert t == Plus(Seq(Test("b"), Act("p")), Seq(Not(Test("b")), Act("q")))

    def test_top_sequence(self):
        assert parse_term("top;b;p", AB) == Seq(Seq(TOP, Test("b")), Act("p"))

    def test_negation_over_action_rejected(self):
        with pytest.raises(ValidationError):
            parse_term("~p", AB)

    def test_star_over_test_rejected_with_hint(self):
        with pytest.raises(ValidationError, match="write 1"):
            parse_term("b*", AB)

    def test_precedence(self):
        assert parse_term("b;p + q", AB) == Plus(Seq(Test("b"), Act("p")), Act("q"))
        assert parse_term("~b;p", AB) == Seq(Not(Test("b")), Act("p"))
        assert parse_term("(p)**", AB) == Star(Star(Act("p")))

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_term("p + ;q", AB)
        assert err.value.position == 4

    def test_undeclared_symbol(self):
        with pytest.raises(ParseError):
            parse_term("r", AB)

    def test_fail_needs_fail_mode(self):
        with pytest.raises(ValidationError):
            parse_term("fail", AB, TermKind.TOPKAT)
        with pytest.raises(ValidationError):
            parse_term("top", AB, TermKind.KAT)

    def test_unexpected_character(self):
        with pytest.raises(ParseError):
            parse_term("p & q", AB)

    def test_claim(self):
        c = parse_claim("p <= top;p", AB)
        assert c.op == "<="
        assert c.normalized().op == "<="
        assert parse_claim("top;p >= p", AB).normalized().op == "<="


class TestPrint:
    def test_star_prints_parenthesized(self):
        assert print_term(Star(Seq(Test("b"), Act("p")))) == "((b;p))*"

    def test_constants(self):
        assert print_term(TOP) == "top"
        assert print_term(FAIL) == "fail"
        assert print_term(ZERO) == "0"
        assert print_term(ONE) == "1"

    def test_roundtrip_bulk_seeded(self):
        rng = random.Random(2024)
        for _ in range(10_000):
            t = random_term(rng, AB, rng.randint(1, 14), allow_top=True)
            assert parse_term(print_term(t), AB) == t


@st.composite
def terms(draw) -> Term:
    seed = draw(st.integers(0, 2**32 - 1))
    size = draw(st.integers(1, 12))
    return random_term(random.Random(seed), AB, size, allow_top=True)


class TestRoundtripProperty:
    @settings(max_examples=300, deadline=None)
    @given(terms())
    def test_parse_inverts_print(self, t):
        assert parse_term(print_term(t), AB) == t

    @settings(max_examples=300, deadline=None)
    @given(terms())
    def test_generated_terms_validate(self, t):
        validate(t, AB)


class TestFuzzParser:
    @settings(max_examples=400, deadline=None)
    @given(st.text(alphabet="pqbc01+;~*() \tfailtoper", max_size=30))
    def test_never_crashes(self, text):
        try:
            parse_term(text, AB)
        except (ParseError, ValidationError):
            pass


class TestTermKind:
    def test_lattice(self):
        assert term_kind(parse_term("p;b", AB)) is TermKind.KAT
        assert term_kind(parse_term("top;p", AB)) is TermKind.TOPKAT
        assert term_kind(parse_term("p;fail", AB)) is TermKind.FAILTOPKAT


class TestOccurringPrimitives:
    def test_examples(self):
        assert occurring_primitives(parse_term("top;b;p", AB)) == ({"p"}, {"b"})
        assert occurring_primitives(parse_term("0", AB)) == (set(), set())
        assert occurring_primitives(parse_term("b;p + ~b;q", AB)) == ({"p", "q"}, {"b"})


class TestDesugar:
    def test_while(self):
        t = desugar(While(Test("b"), Prim("p")))
        assert t == Seq(Star(Seq(Test("b"), Act("p"))), Not(Test("b")))

    def test_if_keeps_literal_shape(self):
        t = desugar(If(Test("b"), Skip(), Prim("q")))
        assert t == Plus(Seq(Test("b"), ONE), Seq(Not(Test("b")), Act("q")))

    def test_skip(self):
        assert desugar(Skip()) == ONE

    def test_assume_and_error(self):
        assert desugar(Assume(Test("b"))) == Test("b")
        assert desugar(ErrorStmt()) == FAIL
        with pytest.raises(ValidationError):
            desugar(ErrorStmt(), TermKind.TOPKAT)

    def test_choice_and_seq(self):
        t = desugar(Choice(SeqStmt(Skip(), Prim("p")), Prim("q")))
        assert t == Plus(Seq(ONE, Act("p")), Act("q"))
