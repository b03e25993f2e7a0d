"""Atom enumeration, guarded strings, coalesced products and the language oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termgen import random_term
from topkat.atoms import (
    AtomCapError,
    GuardedString,
    coalesce,
    enumerate_atoms,
    eval_test,
    gs_member,
    language_up_to,
    languages_equal_up_to,
    render_guarded_string,
    top_language_up_to,
)
from topkat.syntax import (
    Act,
    Alphabet,
    Not,
    ONE,
    Plus,
    Seq,
    Star,
    Test,
    ValidationError,
    parse_term,
)

AB = Alphabet(("p", "q"), ("b", "c"))
AB_B = Alphabet(("p",), ("b",))
AB_EMPTY = Alphabet(("p",), ())


class TestEnumerateAtoms:
    def test_single_test(self):
        assert enumerate_atoms(AB_B) == [0, 1]

    def test_empty_test_alphabet(self):
        assert enumerate_atoms(AB_EMPTY) == [0]

    def test_two_tests(self):
        assert len(enumerate_atoms(AB)) == 4

    def test_cap(self):
        ab = Alphabet((), tuple(f"t{i}" for i in range(25)), test_cap=30)
        with pytest.raises(AtomCapError):
            enumerate_atoms(ab)


class TestEvalTest:
    def test_positive(self):
        assert eval_test(Test("b"), 0b01, AB) is True

    def test_conjunction_with_negation(self):
        assert eval_test(parse_term("~b;c", AB), 0b01, AB) is False
        assert eval_test(parse_term("~b;c", AB), 0b10, AB) is True

    def test_one_is_true(self):
        for atom in enumerate_atoms(AB):
            assert eval_test(ONE, atom, AB) is True

    def test_rejects_actions(self):
        with pytest.raises(ValidationError):
            eval_test(Act("p"), 0, AB)


class TestCoalesce:
    def test_fusion_on_shared_atom(self):
        x = GuardedString((1, "p", 2))
        y = GuardedString((2, "q", 0))
        assert coalesce(x, y) == GuardedString((1, "p", 2, "q", 0))

    def test_two_empty_strings(self):
        a = GuardedString.single(3)
        assert coalesce(a, a) == a

    def test_mismatch_is_undefined(self):
        assert coalesce(GuardedString((1, "p", 2)), GuardedString((3, "q", 0))) is None

    def test_accessors(self):
        gs = GuardedString((1, "p", 2, "q", 0))
        assert gs.head == 1 and gs.last == 0 and gs.num_actions == 2
        assert gs.tail == (("p", 2), ("q", 0))


@st.composite
def guarded_strings(draw):
    length = draw(st.integers(0, 4))
    flat = [draw(st.integers(0, 3))]
    for _ in range(length):
        flat.append(draw(st.sampled_from(["p", "q"])))
        flat.append(draw(st.integers(0, 3)))
    return GuardedString(flat)


class TestCoalesceAssociativity:
    @settings(max_examples=300, deadline=None)
    @given(guarded_strings(), guarded_strings(), guarded_strings())
    def test_associative_including_undefinedness(self, x, y, z):
        xy = coalesce(x, y)
        yz = coalesce(y, z)
        left = coalesce(xy, z) if xy is not None else None
        right = coalesce(x, yz) if yz is not None else None
        assert left == right


class TestLanguageUpTo:
    def test_test_term(self):
        assert language_up_to(Test("b"), 2, AB_B) == {GuardedString.single(1)}

    def test_single_action_empty_tests(self):
        assert language_up_to(Act("p"), 2, AB_EMPTY) == {GuardedString((0, "p", 0))}

    def test_star_unrolls(self):
        lang = language_up_to(Star(Act("p")), 2, AB_EMPTY)
        assert lang == {
            GuardedString.single(0),
            GuardedString((0, "p", 0)),
            GuardedString((0, "p", 0, "p", 0)),
        }

    def test_monotone_in_bound(self):
        rng = random.Random(5)
        for _ in range(60):
            t = random_term(rng, AB, rng.randint(1, 10))
            n = rng.randint(0, 3)
            assert language_up_to(t, n, AB) <= language_up_to(t, n + 1, AB)

    def test_test_only_language_is_satisfying_atoms(self):
        rng = random.Random(6)
        from termgen import random_test_term

        for _ in range(80):
            t = random_test_term(rng, AB.tests, rng.randint(1, 6))
            expected = {
                GuardedString.single(a) for a in enumerate_atoms(AB) if eval_test(t, a, AB)
            }
            assert language_up_to(t, rng.randint(0, 3), AB) == expected

    def test_left_distributivity_at_language_level(self):
        rng = random.Random(7)
        for _ in range(40):
            t1 = random_term(rng, AB, rng.randint(1, 5))
            t2 = random_term(rng, AB, rng.randint(1, 5))
            t3 = random_term(rng, AB, rng.randint(1, 5))
            lhs = Seq(t1, Plus(t2, t3))
            rhs = Plus(Seq(t1, t2), Seq(t1, t3))
            assert language_up_to(lhs, 4, AB) == language_up_to(rhs, 4, AB)
            assert languages_equal_up_to(lhs, rhs, 4, AB)

    def test_negative_bound_rejected(self):
        with pytest.raises(ValidationError):
            language_up_to(Act("p"), -1, AB)


class TestTopLanguage:
    def test_top_is_universal(self):
        lang = top_language_up_to(parse_term("top", AB_B), 1, AB_B)
        # 2 atoms + 2*2*2 one-action strings over {p, top-action}.
        assert len(lang) == 2 + 8

    def test_membership_agrees_with_enumeration(self):
        rng = random.Random(8)
        for _ in range(50):
            t = random_term(rng, AB, rng.randint(1, 8))
            lang = language_up_to(t, 3, AB)
            for gs in list(lang)[:10]:
                assert gs_member(t, gs, AB)
            for gs in [GuardedString((0, "p", 0)), GuardedString((3, "q", 1))]:
                assert gs_member(t, gs, AB) == (gs in lang)


class TestRendering:
    def test_witness_format(self):
        gs = GuardedString((0b01, "p", 0b11))
        assert render_guarded_string(gs, AB) == "b,~c p b,c"

    def test_empty_atom_renders_as_one(self):
        gs = GuardedString((0, "p", 0))
        assert render_guarded_string(gs, AB_EMPTY) == "1 p 1"

    def test_top_action_renders_as_top(self):
        from topkat.syntax import TOP_ACTION

        gs = GuardedString((0, TOP_ACTION, 0))
        assert render_guarded_string(gs, AB_EMPTY) == "1 top 1"
