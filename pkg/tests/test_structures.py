import random

import pytest
from hypothesis import given, settings, strategies as st

from cacll import formulas as F
from cacll import structures as S
from cacll.syntax import parse_context, parse_structure

import genlib


def s(text):
    return parse_structure(text)


class TestNormalization:
    def test_pair_wipes_empty(self):
        p = S.leaf(F.atom("p"))
        assert S.pair(S.EMPTY, p) is p
        assert S.pair(p, S.EMPTY) is p
        assert S.pair(S.EMPTY, S.EMPTY) is S.EMPTY

    def test_recursive(self):
        q = S.pair(S.pair(S.leaf(F.atom("p")), S.EMPTY), S.leaf(F.atom("q")))
        assert q is s("(p, q)")

    def test_idempotent_replace(self):
        st = s("((a, b), c)")
        assert S.replace(st, (0, 1), S.EMPTY) is s("(a, c)")
        assert S.erase(st, (0,)) is s("c")


class TestEquivalence:
    def test_spec_examples(self):
        assert S.equivalent(s("((a,b),c)"), s("(a,(b,c))"))
        assert S.equivalent(s("(a,b)"), s("(b,a)"))
        assert not S.equivalent(s("((a,b),c)"), s("((b,a),c)"))

    def test_class_sizes(self):
        assert S.equivalence_class(s("p")) == frozenset({s("p")})
        assert S.equivalence_class(s("(a,b)")) == frozenset({s("(a,b)"), s("(b,a)")})
        assert len(S.equivalence_class(s("((a,b),c)"))) == 6

    @given(st.integers(0, 2 ** 32), st.integers(2, 6))
    @settings(max_examples=200, deadline=None)
    def test_class_closed_and_finite(self, seed, n):
        rng = random.Random(seed)
        base = genlib.gen_marked_structure(rng, n)
        cls = S.equivalence_class(base)
        assert len(cls) == 2 * (2 * n - 3) if n >= 2 else 1
        for member in cls:
            for gen in S.GENS:
                nxt = S.apply_gen(member, gen)
                if nxt is not None:
                    assert nxt in cls

    @given(st.integers(0, 2 ** 32), st.integers(2, 6))
    @settings(max_examples=100, deadline=None)
    def test_sim_path_sound(self, seed, n):
        rng = random.Random(seed)
        base = genlib.gen_marked_structure(rng, n)
        members = sorted(S.equivalence_class(base), key=S.struct_key)
        target = rng.choice(members)
        gens = S.sim_path(base, target)
        assert gens is not None
        assert S.apply_gens(base, gens) is target


class TestReverse:
    def test_examples(self):
        assert S.reverse(s("(a,(b,c))")) is s("((c,b),a)")
        assert S.reverse(s("p")) is s("p")

    @given(st.integers(0, 2 ** 32), st.integers(1, 8))
    @settings(max_examples=200, deadline=None)
    def test_involution(self, seed, n):
        rng = random.Random(seed)
        g = genlib.gen_marked_structure(rng, n)
        assert S.reverse(S.reverse(g)) is g


class TestDesignator:
    def test_clause_examples(self):
        ctx = parse_context("(a, _)")
        assert S.designate(ctx) is s("a")
        assert S.designate(parse_context("(_, a)")) is s("a")
        # clause 3 twice, then the base clause
        got = S.designate(parse_context("(a, ((_, c), d))"))
        assert got is s("(c, (d, a))")
        # the designated structure is equivalent to any other valid
        # rearrangement, e.g. ((d, a), c)
        marker = S.leaf(F.atom("zz"))
        assert S.equivalent(S.pair(got, marker),
                            s("(a, ((zz, c), d))"))
        assert S.designate(parse_context("_")) is S.EMPTY

    @given(st.integers(0, 2 ** 32), st.integers(1, 8), st.integers(0, 3))
    @settings(max_examples=400, deadline=None)
    def test_correctness(self, seed, n, fill_n):
        # (designate(T{*}), Xi) is structurally equivalent to T{Xi}
        rng = random.Random(seed)
        t = genlib.gen_marked_structure(rng, n)
        hole = rng.choice([p for p, _ in S.leaves(t)])
        xi = (S.EMPTY if fill_n == 0
              else genlib.gen_structure(rng, fill_n, lambda: ("fill", rng.random())))
        d = S.designate(S.hollow(t, hole))
        filled = S.replace(t, hole, xi)
        if filled is S.EMPTY:
            assert d is S.EMPTY
        else:
            assert S.equivalent(S.pair(d, xi), filled)

    @given(st.integers(0, 2 ** 32), st.integers(1, 8), st.integers(0, 6))
    @settings(max_examples=400, deadline=None)
    def test_uniqueness(self, seed, n, moves):
        # equivalent contexts designate to the same structure
        rng = random.Random(seed)
        t = genlib.gen_marked_structure(rng, n)
        hole = rng.choice([p for p, _ in S.leaves(t)])
        shape = S.hollow(t, hole).shape
        other = shape
        for _ in range(moves):
            cands = [m for g in S.GENS if (m := S.apply_gen(other, g)) is not None]
            if cands:
                other = rng.choice(cands)
        assert S.designate(S.Context(other)) is S.designate(S.Context(shape))

    @given(st.integers(0, 2 ** 32), st.integers(2, 8))
    @settings(max_examples=400, deadline=None)
    def test_substructure_preservation(self, seed, n):
        # an independent subtree survives designation and substitution
        # commutes with it
        rng = random.Random(seed)
        t = genlib.gen_marked_structure(rng, n)
        hole = rng.choice([p for p, _ in S.leaves(t)])
        spots = [p for p in S.positions(t)
                 if p[: len(hole)] != hole and hole[: len(p)] != p]
        if not spots:
            return
        delta_pos = rng.choice(spots)
        delta = S.subtree(t, delta_pos)
        d, (where,) = S.designate_track(t, hole, [delta_pos])
        assert S.subtree(d, where) is delta
        pi = genlib.gen_structure(rng, rng.randrange(1, 3),
                                  lambda: ("pi", rng.random()))
        replaced_first = S.replace(t, delta_pos, pi)
        d2 = S.designate(S.hollow(replaced_first, hole))
        assert d2 is S.replace(d, where, pi)


class TestUpset:
    SIG = F.Signature.make(
        ["i", "j", "k", "l"], [("i", "j")],
        {"i": set(), "j": set(), "k": {"W"}, "l": set()},
    )

    def test_example_kept_and_erased(self):
        g = s("(?i.a, (?j.b, ?k.c))")
        kept, erased = S.upset(g, "i", self.SIG, "quest")
        assert kept is s("(?i.a, ?j.b)")
        assert [v for _, v in erased] == [parse_structure("?k.c").value]

    def test_example_undefined(self):
        g = s("(?i.a, (?j.b, ?l.c))")
        assert S.upset(g, "i", self.SIG, "quest") is None

    def test_empty(self):
        assert S.upset(S.EMPTY, "i", self.SIG, "quest") == (S.EMPTY, ())

    def test_non_modal_leaf_undefined(self):
        assert S.upset(s("(?i.a, b)"), "i", self.SIG, "quest") is None

    def test_bang_mode(self):
        g = s("(!i.a, !k.b)")
        kept, erased = S.upset(g, "i", self.SIG, "bang")
        assert kept is s("!i.a")


class TestBridges:
    def test_counter_structure(self):
        assert S.counter_structure(s("(p, ~p)")) == 1
        assert S.counter_structure(s("1")) == 0
        assert S.counter_structure(s("(~p, (~q, (p|q)))")) == 1

    def test_neg_translate_reverses(self):
        got = S.neg_translate(s("((a, b), c)"))
        assert got is s("(~c, (~b, ~a))")

    def test_neg_translate_leaf(self):
        assert S.neg_translate(s("p")) is s("~p")
        got = S.neg_translate(s("(a, b)"))
        assert got is s("(~b, ~a)")

    @given(st.integers(0, 2 ** 32))
    @settings(max_examples=200, deadline=None)
    def test_un_neg_translate(self, seed):
        rng = random.Random(seed)
        n = rng.randrange(1, 5)
        g = genlib.gen_structure(
            rng, n, lambda: genlib.gen_int_formula(rng, rng.randrange(0, 3)))
        assert S.un_neg_translate(S.neg_translate(g)) is g


class TestContext:
    def test_holes_and_fill(self):
        ctx = parse_context("((_, a), _)")
        assert ctx.holes == ((0, 0), (1,))
        filled = ctx.fill(s("b"), s("(c, d)"))
        assert filled is s("((b, a), (c, d))")

    def test_fill_with_empty(self):
        ctx = parse_context("((_, a), _)")
        assert ctx.fill(S.EMPTY, s("c")) is s("(a, c)")

    def test_needs_hole(self):
        with pytest.raises(ValueError):
            S.Context(s("(a, b)"))
