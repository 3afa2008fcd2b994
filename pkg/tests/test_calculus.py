import random

import pytest
from hypothesis import given, settings, strategies as st

from cacll import calculus as C
from cacll import formulas as F
from cacll import proofio
from cacll import structures as S
from cacll.calculus import CalculusConfig, Proof, Step
from cacll.syntax import parse_formula, parse_sequent, parse_structure

import genlib

SIG = genlib.GEN_SIGNATURE
CFG = CalculusConfig("cacll", SIG)
CFG_CUT = CalculusConfig("cacll", SIG, allow_cut=True)
ACLL = CalculusConfig("acll", SIG)
ACLLP = CalculusConfig("acll+", SIG)


def seq(text):
    return parse_sequent(text)


def rules_of(instances):
    return {inst.rule for inst in instances}


class TestApplicableRules:
    def test_init_fig1(self):
        insts = C.applicable_rules(seq("(a, ~a)"), CFG)
        assert "init" in rules_of(insts)

    def test_one_closes(self):
        insts = C.applicable_rules(seq("1"), CFG)
        assert "one" in rules_of(insts)

    def test_top_any_context(self):
        insts = C.applicable_rules(seq("((a, top), b)"), CFG)
        assert "top" in rules_of(insts)

    def test_tensor_enumerates_class(self):
        insts = [i for i in C.applicable_rules(seq("((a, b), (c*d))"), CFG)
                 if i.rule == "tensor"]
        # splits at every class member with the tensor on the right
        assert len(insts) >= 3
        for inst in insts:
            got = C.expected_premises(inst.conclusion, "tensor", inst.data, CFG)
            assert got == inst.premises

    def test_promotion_requires_upset(self):
        good = C.applicable_rules(seq("(?c.a, !c.b)"), CFG)
        assert "prom" in rules_of(good)
        bad = C.applicable_rules(seq("(?e.a, !c.b)"), CFG)
        assert "prom" not in rules_of(bad)
        weak = C.applicable_rules(seq("(?w.a, !c.b)"), CFG)
        assert "prom" in rules_of(weak)

    def test_qa1_requires_feature(self):
        insts = C.applicable_rules(seq("((a, (b, c)), ?a1.d)"), CFG)
        assert "qa1" in rules_of(insts)
        assert "qa2" not in rules_of(insts)

    def test_qe_needs_pair_and_feature(self):
        insts = C.applicable_rules(seq("((a, b), ?e.d)"), CFG)
        assert "qe" in rules_of(insts)
        insts2 = C.applicable_rules(seq("((a, b), ?c.d)"), CFG)
        assert "qe" not in rules_of(insts2)

    def test_no_cut_enumerated(self):
        insts = C.applicable_rules(seq("((a,~a),(b,~b))"), CFG_CUT)
        assert "cut" not in rules_of(insts)
        assert "mix" not in rules_of(insts)

    @given(st.integers(0, 2 ** 32))
    @settings(max_examples=150, deadline=None)
    def test_instances_replay(self, seed):
        rng = random.Random(seed)
        n = rng.randrange(1, 5)
        stx = genlib.gen_structure(
            rng, n, lambda: genlib.gen_formula(rng, rng.randrange(0, 3)))
        for inst in C.applicable_rules(C.one_sided(stx), CFG):
            got = C.expected_premises(inst.conclusion, inst.rule, inst.data, CFG)
            assert tuple(got) == inst.premises

    @given(st.integers(0, 2 ** 32))
    @settings(max_examples=150, deadline=None)
    def test_two_sided_instances_replay(self, seed):
        rng = random.Random(seed)
        n = rng.randrange(0, 4)
        ant = (S.EMPTY if n == 0 else genlib.gen_structure(
            rng, n, lambda: genlib.gen_int_formula(rng, rng.randrange(0, 3))))
        sq = C.two_sided(ant, genlib.gen_int_formula(rng, rng.randrange(0, 3)))
        for cfg in (ACLL, ACLLP):
            for inst in C.applicable_rules(sq, cfg):
                got = C.expected_premises(inst.conclusion, inst.rule, inst.data, cfg)
                assert tuple(got) == inst.premises


class TestChecker:
    def test_golden_exchange_fixture(self):
        from importlib import resources

        text = resources.files("cacll").joinpath("fixtures", "exchange.proof").read_text()
        proof = proofio.proof_from_sexpr(text)
        assert C.check(proof, CalculusConfig("cacll", F.DEFAULT_SIGNATURE)).ok

    def test_deleting_exchange_breaks_at_tensor(self):
        from importlib import resources

        text = resources.files("cacll").joinpath("fixtures", "exchange.proof").read_text()
        proof = proofio.proof_from_sexpr(text)
        # splice out the structural node under the par
        par = proof
        sim = par.premises[0]
        assert sim.rule == "sim"
        broken = Proof(par.conclusion, par.rule, par.data, (sim.premises[0],))
        res = C.check(broken, CalculusConfig("cacll", F.DEFAULT_SIGNATURE))
        assert not res.ok
        assert res.path == (0,)
        assert C.node_at(broken, res.path).rule == "tensor"

    def test_deleting_assoc_breaks_at_tensor(self):
        from importlib import resources

        text = resources.files("cacll").joinpath(
            "fixtures", "associativity.proof").read_text()
        proof = proofio.proof_from_sexpr(text)
        sim = proof.premises[0]
        broken = Proof(proof.conclusion, proof.rule, proof.data, (sim.premises[0],))
        res = C.check(broken, CalculusConfig("cacll", F.DEFAULT_SIGNATURE))
        assert not res.ok and res.path == (0,)

    def test_cut_gate(self):
        p = C.expand_identity(parse_formula("a"))
        gen = genlib.OneSidedGen(random.Random(1), CFG_CUT)
        cut = gen.insert_cut(p)
        assert C.check(cut, CFG_CUT).ok
        res = C.check(cut, CFG)
        assert not res.ok and "cut" in res.reason

    def test_init_literals_only(self):
        bad = Proof(seq("((a*b), (~b|~a))"), "init")
        assert not C.check(bad, CFG).ok

    def test_system_gate(self):
        p = Proof(seq("a |- a"), "init")
        assert C.check(p, ACLL).ok
        assert not C.check(p, CFG).ok

    def test_zero_gate(self):
        p = Proof(C.two_sided(S.leaf(F.ZERO), F.atom("r")), "zero_l", Step(pos=()))
        assert not C.check(p, ACLL).ok
        assert C.check(p, CalculusConfig("acll", SIG, allow_zero=True)).ok

    def test_sim_replay(self):
        inner = Proof(seq("(a, ~a)"), "init")
        node = Proof(seq("(~a, a)"), "sim", Step(gens=("e",)), (inner,))
        assert C.check(node, CFG).ok
        bad = Proof(seq("(~a, a)"), "sim", Step(gens=("a1",)), (inner,))
        assert not C.check(bad, CFG).ok

    def test_unknown_label_rejected(self):
        p = Proof(seq("(?zz.a, !zz.~a)"), "init")
        res = C.check(p, CFG)
        assert not res.ok and "zz" in res.reason

    def test_mix_validation(self):
        gen = genlib.OneSidedGen(random.Random(7), CFG_CUT)
        for _ in range(50):
            base = gen.proof(steps=2)
            mix = gen.insert_mix(base)
            if mix is None:
                continue
            assert C.check(mix, CFG_CUT).ok
            assert not C.check(mix, CFG).ok
            # mutating the occurrence list must fail
            bad = Proof(mix.conclusion, "mix",
                        Step(**{**dict(mix.data.items),
                                "pos": tuple(mix.data.get("pos")) + (0,)}),
                        mix.premises)
            assert not C.check(bad, CFG_CUT).ok
            break

    def test_acllp_rule_sets(self):
        # acll+ rule names are rejected under acll
        p = Proof(seq("a |- a"), "init")
        a1 = Proof(
            C.two_sided(parse_structure("(!a1.p, (q, r))"), F.atom("s")),
            "assoc1_m", Step(pos=(), dir="rl"), (p,))
        res = C.check(a1, ACLL)
        assert not res.ok and "assoc1_m" in res.reason


class TestExpandIdentity:
    @given(st.integers(0, 2 ** 32))
    @settings(max_examples=200, deadline=None)
    def test_valid_and_cut_free(self, seed):
        rng = random.Random(seed)
        f = genlib.gen_formula(rng, rng.randrange(0, 4))
        p = C.expand_identity(f)
        assert p.conclusion.structure is S.pair(S.leaf(F.dual(f)), S.leaf(f))
        assert C.check(p, CFG).ok
        assert not C.rule_nodes(p, ("cut", "mix"))


class TestGeneratedProofsCheck:
    @given(st.integers(0, 2 ** 32))
    @settings(max_examples=100, deadline=None)
    def test_one_sided(self, seed):
        rng = random.Random(seed)
        gen = genlib.OneSidedGen(rng, CFG, validate=False)
        p = gen.proof(steps=rng.randrange(0, 6))
        res = C.check(p, CFG)
        assert res.ok, (res.path, res.reason)

    @given(st.integers(0, 2 ** 32))
    @settings(max_examples=100, deadline=None)
    def test_two_sided(self, seed):
        rng = random.Random(seed)
        cfg = ACLLP if seed % 2 else ACLL
        gen = genlib.TwoSidedGen(rng, cfg, validate=False)
        p = gen.proof(steps=rng.randrange(0, 6))
        res = C.check(p, cfg)
        assert res.ok, (res.path, res.reason)
