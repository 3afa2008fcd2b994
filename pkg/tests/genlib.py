"""Random generators shared by the test suite: formulas, structures,
contexts, and forward-built (valid by construction) proofs for all three
calculi, including deliberate cut and mix insertion for the elimination
corpus.
"""

from __future__ import annotations

import random

from cacll import calculus as C
from cacll import formulas as F
from cacll import structures as S
from cacll.calculus import CalculusConfig, Proof, Step

ATOMS = ("p", "q", "r", "s")

#: every feature present, plus a bottom label below everything
GEN_SIGNATURE = F.Signature.make(
    ["c", "w", "e", "a1", "a2", "b0"],
    [("b0", "c"), ("b0", "w"), ("b0", "e"), ("b0", "a1"), ("b0", "a2")],
    {"c": {"C"}, "w": {"W"}, "e": {"E"}, "a1": {"A1"}, "a2": {"A2"}, "b0": set()},
)
GEN_LABELS = ("c", "w", "e", "a1", "a2", "b0")

CWE_SIGNATURE = F.Signature.make(
    ["c", "w", "e"], (), {"c": {"C"}, "w": {"W"}, "e": {"E"}}
)
CWE_LABELS = ("c", "w", "e")


def gen_formula(rng: random.Random, depth: int, labels=GEN_LABELS,
                allow_units=True) -> F.Formula:
    """Random classical formula."""
    if depth <= 0 or rng.random() < 0.3:
        picks = [F.atom(rng.choice(ATOMS)), F.negatom(rng.choice(ATOMS))]
        if allow_units:
            picks += [F.ONE, F.BOT]
        return rng.choice(picks)
    kind = rng.randrange(6)
    if kind == 0:
        return F.tensor(gen_formula(rng, depth - 1, labels, allow_units),
                        gen_formula(rng, depth - 1, labels, allow_units))
    if kind == 1:
        return F.par(gen_formula(rng, depth - 1, labels, allow_units),
                     gen_formula(rng, depth - 1, labels, allow_units))
    if kind == 2:
        return F.plus(gen_formula(rng, depth - 1, labels, allow_units),
                      gen_formula(rng, depth - 1, labels, allow_units))
    if kind == 3:
        return F.with_(gen_formula(rng, depth - 1, labels, allow_units),
                       gen_formula(rng, depth - 1, labels, allow_units))
    if kind == 4:
        return F.bang(rng.choice(labels), gen_formula(rng, depth - 1, labels, allow_units))
    return F.quest(rng.choice(labels), gen_formula(rng, depth - 1, labels, allow_units))


def gen_int_formula(rng: random.Random, depth: int, labels=GEN_LABELS,
                    allow_top=True, allow_units=True) -> F.Formula:
    """Random intuitionistic formula (no 0; top optional)."""
    if depth <= 0 or rng.random() < 0.3:
        picks = [F.atom(rng.choice(ATOMS))]
        if allow_units:
            picks.append(F.ONE)
            if allow_top:
                picks.append(F.TOP)
        return rng.choice(picks)
    kind = rng.randrange(6)
    args = (gen_int_formula(rng, depth - 1, labels, allow_top, allow_units),
            gen_int_formula(rng, depth - 1, labels, allow_top, allow_units))
    if kind == 0:
        return F.tensor(*args)
    if kind == 1:
        return F.rimp(*args)
    if kind == 2:
        return F.limp(*args)
    if kind == 3:
        return F.plus(*args)
    if kind == 4:
        return F.with_(*args)
    return F.bang(rng.choice(labels), args[0])


def gen_structure(rng: random.Random, leaves: int, leaf_gen) -> S.Structure:
    if leaves <= 1:
        return S.leaf(leaf_gen())
    k = rng.randrange(1, leaves)
    return S.pair(gen_structure(rng, k, leaf_gen),
                  gen_structure(rng, leaves - k, leaf_gen))


def gen_marked_structure(rng: random.Random, leaves: int):
    """Structure over distinct integer payloads (for designator tests)."""
    counter = iter(range(leaves))
    return gen_structure(rng, leaves, lambda: next(counter))


# -- forward one-sided proofs -------------------------------------------------


class OneSidedGen:
    def __init__(self, rng: random.Random, cfg: CalculusConfig,
                 max_leaves: int = 8, labels=GEN_LABELS, validate=True):
        self.rng = rng
        self.cfg = cfg
        self.max_leaves = max_leaves
        self.labels = [l for l in labels if l in cfg.signature]
        self.validate = validate

    # helpers

    def _node(self, concl, rule, data, kids) -> Proof:
        node = Proof(C.one_sided(concl), rule, data, tuple(kids))
        if self.validate:
            expect = C.expected_premises(node.conclusion, rule, data, self.cfg)
            assert tuple(k.conclusion for k in kids) == tuple(expect), rule
        return node

    def _small(self, depth=1) -> F.Formula:
        return gen_formula(self.rng, depth, tuple(self.labels))

    def base(self) -> Proof:
        rng = self.rng
        kind = rng.randrange(4)
        if kind == 0:
            p = F.atom(rng.choice(ATOMS))
            lit = rng.choice([p, F.dual(p)])
            return self._node(
                S.pair(S.leaf(lit), S.leaf(F.dual(lit))), "init", C.NO_DATA, ())
        if kind == 1:
            return self._node(S.leaf(F.ONE), "one", C.NO_DATA, ())
        if kind == 2:
            n = rng.randrange(1, 4)
            st = gen_structure(rng, n, lambda: self._small(1))
            pos, side = self._spot(st)
            st2 = S.insert(st, pos, side, S.leaf(F.TOP)) if n else S.leaf(F.TOP)
            tpos = [q for q, v in S.leaves(st2) if v is F.TOP][0]
            return self._node(st2, "top", Step(pos=tpos), ())
        return C.expand_identity(self._small(rng.randrange(1, 3)))

    def _spot(self, st):
        poss = S.positions(st)
        return self.rng.choice(poss), self.rng.choice(("left", "right"))

    # downward moves; each returns a Proof or None

    def m_par(self, p):
        st = p.conclusion.structure
        cands = [q for q in S.positions(st)
                 if isinstance(S.subtree(st, q), S.Pair)
                 and isinstance(S.subtree(st, q).left, S.Leaf)
                 and isinstance(S.subtree(st, q).right, S.Leaf)]
        if not cands:
            return None
        q = self.rng.choice(cands)
        node = S.subtree(st, q)
        f = F.par(node.left.value, node.right.value)
        return self._node(S.replace(st, q, S.leaf(f)), "par", Step(pos=q), (p,))

    def m_bot(self, p):
        st = p.conclusion.structure
        if S.leaf_count(st) >= self.max_leaves:
            return None
        pos, side = self._spot(st)
        grown = S.insert(st, pos, side, S.leaf(F.BOT))
        new = pos + ((0,) if side == "left" else (1,))
        return self._node(grown, "bot", Step(pos=new), (p,))

    def m_der(self, p):
        st = p.conclusion.structure
        q, v = self.rng.choice(S.leaves(st))
        f = F.quest(self.rng.choice(self.labels), v)
        return self._node(S.replace(st, q, S.leaf(f)), "der", Step(pos=q), (p,))

    def m_plus(self, p):
        st = p.conclusion.structure
        q, v = self.rng.choice(S.leaves(st))
        g = self._small(1)
        if self.rng.random() < 0.5:
            return self._node(S.replace(st, q, S.leaf(F.plus(v, g))),
                              "plus1", Step(pos=q), (p,))
        return self._node(S.replace(st, q, S.leaf(F.plus(g, v))),
                          "plus2", Step(pos=q), (p,))

    def m_with(self, p):
        st = p.conclusion.structure
        q, v = self.rng.choice(S.leaves(st))
        return self._node(S.replace(st, q, S.leaf(F.with_(v, v))),
                          "with", Step(pos=q), (p, p))

    def m_qw(self, p):
        st = p.conclusion.structure
        if S.leaf_count(st) >= self.max_leaves:
            return None
        wlabs = [l for l in self.labels if self.cfg.signature.has(l, "W")]
        if not wlabs:
            return None
        block = S.leaf(F.quest(self.rng.choice(wlabs), self._small(1)))
        pos, side = self._spot(st)
        grown = S.insert(st, pos, side, block)
        new = pos + ((0,) if side == "left" else (1,))
        return self._node(grown, "qw", Step(pos=new), (p,))

    def m_sim(self, p):
        st = p.conclusion.structure
        members = sorted(S.equivalence_class(st), key=S.struct_key)
        if len(members) < 2:
            return None
        target = self.rng.choice([m for m in members if m is not st])
        gens = S.sim_path(st, target)
        return Proof(C.one_sided(target), "sim", Step(gens=gens), (p,))

    def _licensed_member(self, st, feature):
        out = []
        for m in S.equivalence_class(st):
            if isinstance(m, S.Pair) and C.all_modal_licensed(
                m.right, feature, self.cfg.signature, "quest"
            ):
                out.append(m)
        return sorted(out, key=S.struct_key)

    def m_qe(self, p):
        st = p.conclusion.structure
        cands = [m for m in self._licensed_member(st, "E")
                 if isinstance(m.left, S.Pair)]
        if not cands:
            return None
        m = self.rng.choice(cands)
        concl = S.pair(S.pair(m.left.right, m.left.left), m.right)
        return self._node(concl, "qe", C.NO_DATA, (C.sim_to(p, m),))

    def m_qa(self, p):
        st = p.conclusion.structure
        rng = self.rng
        for rule, feature in rng.sample([("qa1", "A1"), ("qa2", "A2")], 2):
            for m in self._licensed_member(st, feature):
                z = m.left
                if isinstance(z, S.Pair) and isinstance(z.left, S.Pair):
                    # premise left-nested -> conclusion right-nested ('rl')
                    concl = S.pair(
                        S.pair(z.left.left, S.pair(z.left.right, z.right)),
                        m.right,
                    )
                    return self._node(concl, rule, Step(dir="rl"),
                                      (C.sim_to(p, m),))
                if isinstance(z, S.Pair) and isinstance(z.right, S.Pair):
                    concl = S.pair(
                        S.pair(S.pair(z.left, z.right.left), z.right.right),
                        m.right,
                    )
                    return self._node(concl, rule, Step(dir="lr"),
                                      (C.sim_to(p, m),))
        return None

    def m_prom(self, p):
        st = p.conclusion.structure
        rng = self.rng
        lvs = S.leaves(st)
        rng.shuffle(lvs)
        for q, v in lvs:
            ctx = S.designate(S.hollow(st, q))
            labs = {x.label for x in S.leaf_values(ctx) if isinstance(x, F.Quest)}
            if any(not isinstance(x, F.Quest) for x in S.leaf_values(ctx)):
                continue
            cands = [i for i in self.labels
                     if all(self.cfg.signature.leq(i, k) for k in labs)]
            if not cands:
                continue
            i = rng.choice(cands)
            grown = ctx
            erasable = [l for l in self.labels
                        if self.cfg.signature.has(l, "W")
                        and not self.cfg.signature.leq(i, l)]
            if erasable and ctx is not S.EMPTY and rng.random() < 0.5 \
                    and S.leaf_count(st) < self.max_leaves:
                pos, side = self._spot(ctx)
                grown = S.insert(ctx, pos, side,
                                 S.leaf(F.quest(rng.choice(erasable), self._small(1))))
            concl = S.pair(grown, S.leaf(F.bang(i, v)))
            inner = C.sim_to(p, S.pair(ctx, S.leaf(v)))
            return self._node(concl, "prom", C.NO_DATA, (inner,))
        return None

    def m_qc(self, p):
        """Contract equal disjoint all-C blocks when they exist."""
        st = p.conclusion.structure
        sig = self.cfg.signature
        spots = [q for q in S.positions(st)
                 if C.all_modal_licensed(S.subtree(st, q), "C", sig, "quest")]
        for i, q1 in enumerate(spots):
            for q2 in spots[i + 1:]:
                if q1[: len(q2)] == q2 or q2[: len(q1)] == q1:
                    continue
                if S.subtree(st, q1) is not S.subtree(st, q2):
                    continue
                concl = S.erase(st, q2)
                (src,) = C.erase_many_track(st, [q2], [q1])[1]
                return self._node(
                    concl, "qc",
                    Step(src=src, dst=q2[:-1],
                         side="right" if q2[-1] == 1 else "left"),
                    (p,))
        return None

    def combine_tensor(self, p1, p2):
        s1, s2 = p1.conclusion.structure, p2.conclusion.structure
        if S.leaf_count(s1) + S.leaf_count(s2) > self.max_leaves + 1:
            return None
        q1, g = self.rng.choice(S.leaves(s1))
        q2, f = self.rng.choice(S.leaves(s2))
        g1 = S.designate(S.hollow(s1, q1))
        g2 = S.designate(S.hollow(s2, q2))
        concl = S.pair(S.pair(g1, g2), S.leaf(F.tensor(f, g)))
        return self._node(
            concl, "tensor", Step(gamma=g1, delta=g2),
            (C.sim_to(p1, S.pair(g1, S.leaf(g))),
             C.sim_to(p2, S.pair(g2, S.leaf(f)))),
        )

    def insert_cut(self, p, partner=None, wrap_partner=0, at=None):
        """Cut a random leaf of p against a partner (default: identity)."""
        st = p.conclusion.structure
        q, f = (at, S.subtree(st, at).value) if at is not None \
            else self.rng.choice(S.leaves(st))
        gamma = S.designate(S.hollow(st, q))
        left = C.sim_to(p, S.pair(gamma, S.leaf(f)))
        if partner is None:
            partner = C.expand_identity(f)
        for _ in range(wrap_partner):
            partner = self.wrap(partner)
        ps = partner.conclusion.structure
        spots = [r for r, v in S.leaves(ps) if v is F.dual(f)]
        if not spots:
            return None
        r = self.rng.choice(spots)
        delta = S.designate(S.hollow(ps, r))
        right = C.sim_to(partner, S.pair(S.leaf(F.dual(f)), delta))
        return Proof(
            C.one_sided(S.pair(gamma, delta)), "cut",
            Step(formula=f, gamma=gamma, delta=delta), (left, right),
        )

    def insert_mix(self, p, wrap_partner=0):
        """Mix a bang leaf of p against a purpose-built multi-occurrence
        partner."""
        st = p.conclusion.structure
        bangs = [(q, v) for q, v in S.leaves(st)
                 if isinstance(v, F.Bang) and v.label in self.cfg.signature]
        if not bangs:
            return None
        q, bf = self.rng.choice(bangs)
        gamma = S.designate(S.hollow(st, q))
        left = C.sim_to(p, S.pair(gamma, S.leaf(bf)))
        dualf = F.quest(bf.label, F.dual(bf.body))
        ident = C.expand_identity(bf)  # |- (?dual, !f)
        use_two = self.cfg.signature.has(bf.label, "C") and self.rng.random() < 0.8
        if use_two:
            right = self.combine_tensor(ident, ident)
            if right is None:
                right = ident
        else:
            right = ident
        for _ in range(wrap_partner):
            right = self.wrap(right)
        rs = right.conclusion.structure
        occs = [r for r, v in S.leaves(rs) if v is dualf]
        if not occs:
            return None
        if len(occs) >= 2 and use_two:
            designated, others = occs[0], tuple(occs[1:])
        else:
            designated, others = occs[0], ()
        concl = S.multi_subst(rs, {designated: gamma,
                                   **{o: S.EMPTY for o in others}})
        if concl is S.EMPTY:
            return None
        return Proof(
            C.one_sided(concl), "mix",
            Step(label=bf.label, formula=bf.body, gamma=gamma,
                 pos=designated, others=others),
            (left, right),
        )

    MOVES = ("par", "bot", "der", "plus", "with", "qw", "sim", "qe", "qa",
             "prom", "qc")

    def wrap(self, p) -> Proof:
        moves = list(self.MOVES)
        self.rng.shuffle(moves)
        for name in moves:
            out = getattr(self, "m_" + name)(p)
            if out is not None:
                return out
        return p

    def proof(self, steps=5) -> Proof:
        p = self.base()
        for _ in range(steps):
            if self.rng.random() < 0.15:
                other = self.base()
                combined = self.combine_tensor(p, other)
                p = combined if combined is not None else self.wrap(p)
            else:
                p = self.wrap(p)
        return p


# -- forward two-sided proofs --------------------------------------------------


class TwoSidedGen:
    def __init__(self, rng: random.Random, cfg: CalculusConfig,
                 max_leaves: int = 6, labels=None, validate=True,
                 allow_top=True):
        self.rng = rng
        self.cfg = cfg
        self.max_leaves = max_leaves
        self.labels = [l for l in (labels or sorted(cfg.signature.labels))
                       if l in cfg.signature]
        self.validate = validate
        self.allow_top = allow_top

    def _node(self, ant, succ, rule, data, kids) -> Proof:
        node = Proof(C.two_sided(ant, succ), rule, data, tuple(kids))
        if self.validate:
            expect = C.expected_premises(node.conclusion, rule, data, self.cfg)
            assert tuple(k.conclusion for k in kids) == tuple(expect), rule
        return node

    def _small(self, depth=1) -> F.Formula:
        return gen_int_formula(self.rng, depth, tuple(self.labels),
                               allow_top=self.allow_top)

    def base(self) -> Proof:
        rng = self.rng
        kind = rng.randrange(3 if self.allow_top else 2)
        if kind == 0:
            p = F.atom(rng.choice(ATOMS))
            return self._node(S.leaf(p), p, "init", C.NO_DATA, ())
        if kind == 1:
            return self._node(S.EMPTY, F.ONE, "one_r", C.NO_DATA, ())
        n = rng.randrange(0, 3)
        ant = S.EMPTY if n == 0 else gen_structure(rng, n, lambda: self._small(1))
        return self._node(ant, F.TOP, "top_r", C.NO_DATA, ())

    def _spot(self, st):
        poss = S.positions(st)
        return self.rng.choice(poss), self.rng.choice(("left", "right"))

    # moves

    def m_tensor_l(self, p):
        ant = p.conclusion.antecedent
        cands = [q for q in S.positions(ant)
                 if isinstance(S.subtree(ant, q), S.Pair)
                 and isinstance(S.subtree(ant, q).left, S.Leaf)
                 and isinstance(S.subtree(ant, q).right, S.Leaf)]
        if not cands:
            return None
        q = self.rng.choice(cands)
        node = S.subtree(ant, q)
        f = F.tensor(node.left.value, node.right.value)
        return self._node(S.replace(ant, q, S.leaf(f)), p.conclusion.succedent,
                          "tensor_l", Step(pos=q), (p,))

    def m_one_l(self, p):
        ant = p.conclusion.antecedent
        if S.leaf_count(ant) >= self.max_leaves:
            return None
        if ant is S.EMPTY:
            grown, new = S.leaf(F.ONE), ()
        else:
            pos, side = self._spot(ant)
            grown = S.insert(ant, pos, side, S.leaf(F.ONE))
            new = pos + ((0,) if side == "left" else (1,))
        return self._node(grown, p.conclusion.succedent, "one_l",
                          Step(pos=new), (p,))

    def m_rimp_r(self, p):
        ant, succ = p.conclusion.antecedent, p.conclusion.succedent
        if isinstance(ant, S.Leaf):
            return self._node(S.EMPTY, F.rimp(ant.value, succ),
                              "rimp_r", C.NO_DATA, (p,))
        if isinstance(ant, S.Pair) and isinstance(ant.left, S.Leaf):
            return self._node(ant.right, F.rimp(ant.left.value, succ),
                              "rimp_r", C.NO_DATA, (p,))
        return None

    def m_limp_r(self, p):
        ant, succ = p.conclusion.antecedent, p.conclusion.succedent
        if isinstance(ant, S.Leaf):
            return self._node(S.EMPTY, F.limp(succ, ant.value),
                              "limp_r", C.NO_DATA, (p,))
        if isinstance(ant, S.Pair) and isinstance(ant.right, S.Leaf):
            return self._node(ant.left, F.limp(succ, ant.right.value),
                              "limp_r", C.NO_DATA, (p,))
        return None

    def m_plus_r(self, p):
        succ = p.conclusion.succedent
        g = self._small(1)
        if self.rng.random() < 0.5:
            return self._node(p.conclusion.antecedent, F.plus(succ, g),
                              "plus_r1", C.NO_DATA, (p,))
        return self._node(p.conclusion.antecedent, F.plus(g, succ),
                          "plus_r2", C.NO_DATA, (p,))

    def m_with_r(self, p):
        succ = p.conclusion.succedent
        return self._node(p.conclusion.antecedent, F.with_(succ, succ),
                          "with_r", C.NO_DATA, (p, p))

    def m_plus_l(self, p):
        ant = p.conclusion.antecedent
        if ant is S.EMPTY:
            return None
        q, v = self.rng.choice(S.leaves(ant))
        return self._node(S.replace(ant, q, S.leaf(F.plus(v, v))),
                          p.conclusion.succedent, "plus_l", Step(pos=q), (p, p))

    def m_with_l(self, p):
        ant = p.conclusion.antecedent
        if ant is S.EMPTY:
            return None
        q, v = self.rng.choice(S.leaves(ant))
        g = self._small(1)
        if self.rng.random() < 0.5:
            return self._node(S.replace(ant, q, S.leaf(F.with_(v, g))),
                              p.conclusion.succedent, "with_l1", Step(pos=q), (p,))
        return self._node(S.replace(ant, q, S.leaf(F.with_(g, v))),
                          p.conclusion.succedent, "with_l2", Step(pos=q), (p,))

    def m_der(self, p):
        ant = p.conclusion.antecedent
        if ant is S.EMPTY:
            return None
        q, v = self.rng.choice(S.leaves(ant))
        f = F.bang(self.rng.choice(self.labels), v)
        return self._node(S.replace(ant, q, S.leaf(f)),
                          p.conclusion.succedent, "der", Step(pos=q), (p,))

    def m_weak(self, p):
        ant = p.conclusion.antecedent
        if S.leaf_count(ant) >= self.max_leaves:
            return None
        wlabs = [l for l in self.labels if self.cfg.signature.has(l, "W")]
        if not wlabs:
            return None
        block = S.leaf(F.bang(self.rng.choice(wlabs), self._small(1)))
        if ant is S.EMPTY:
            grown, new = block, ()
        else:
            pos, side = self._spot(ant)
            grown = S.insert(ant, pos, side, block)
            new = pos + ((0,) if side == "left" else (1,))
        return self._node(grown, p.conclusion.succedent, "weak",
                          Step(pos=new), (p,))

    def m_prom(self, p):
        ant, succ = p.conclusion.antecedent, p.conclusion.succedent
        vals = S.leaf_values(ant)
        if any(not isinstance(v, F.Bang) for v in vals):
            return None
        labs = {v.label for v in vals}
        cands = [i for i in self.labels
                 if all(self.cfg.signature.leq(i, k) for k in labs)]
        if not cands:
            return None
        i = self.rng.choice(cands)
        grown = ant
        erasable = [l for l in self.labels
                    if self.cfg.signature.has(l, "W")
                    and not self.cfg.signature.leq(i, l)]
        if erasable and ant is not S.EMPTY and self.rng.random() < 0.5 \
                and S.leaf_count(ant) < self.max_leaves:
            pos, side = self._spot(ant)
            grown = S.insert(ant, pos, side,
                             S.leaf(F.bang(self.rng.choice(erasable), self._small(1))))
        return self._node(grown, F.bang(i, succ), "prom", C.NO_DATA, (p,))

    def m_exch(self, p):
        ant = p.conclusion.antecedent
        sig = self.cfg.signature
        for q in S.positions(ant):
            node = S.subtree(ant, q)
            if not isinstance(node, S.Pair):
                continue
            if C.all_modal_licensed(node.right, "E", sig, "bang"):
                concl = S.replace(ant, q, S.pair(node.right, node.left))
                return self._node(concl, p.conclusion.succedent, "exch1",
                                  Step(pos=q), (p,))
            if C.all_modal_licensed(node.left, "E", sig, "bang"):
                concl = S.replace(ant, q, S.pair(node.right, node.left))
                return self._node(concl, p.conclusion.succedent, "exch2",
                                  Step(pos=q), (p,))
        return None

    def m_assoc(self, p):
        ant = p.conclusion.antecedent
        sig = self.cfg.signature
        rules = sorted(C.ACLL_ONLY if self.cfg.system == "acll" else C.ACLLP_ONLY)
        self.rng.shuffle(rules)
        for rule in rules:
            feature, slot = C._ASSOC_SHAPES[rule]
            for q in S.positions(ant):
                node = S.subtree(ant, q)
                if not isinstance(node, S.Pair):
                    continue
                for direction in ("rl", "lr"):
                    # build the conclusion whose premise is the current tree
                    if direction == "rl":
                        if not isinstance(node, S.Pair) or not isinstance(node.left, S.Pair):
                            continue
                        x1, x2, x3 = node.left.left, node.left.right, node.right
                        concl_node = S.pair(x1, S.pair(x2, x3))
                    else:
                        if not isinstance(node.right, S.Pair):
                            continue
                        x1, x2, x3 = node.left, node.right.left, node.right.right
                        concl_node = S.pair(S.pair(x1, x2), x3)
                    if not C.all_modal_licensed((x1, x2, x3)[slot], feature,
                                                sig, "bang"):
                        continue
                    concl = S.replace(ant, q, concl_node)
                    return self._node(concl, p.conclusion.succedent, rule,
                                      Step(pos=q, dir=direction), (p,))
        return None

    def m_contr(self, p):
        ant = p.conclusion.antecedent
        sig = self.cfg.signature
        spots = [q for q in S.positions(ant)
                 if C.all_modal_licensed(S.subtree(ant, q), "C", sig, "bang")]
        for i, q1 in enumerate(spots):
            for q2 in spots[i + 1:]:
                if q1[: len(q2)] == q2 or q2[: len(q1)] == q1:
                    continue
                if S.subtree(ant, q1) is not S.subtree(ant, q2):
                    continue
                concl = S.erase(ant, q2)
                (src,) = C.erase_many_track(ant, [q2], [q1])[1]
                return self._node(concl, p.conclusion.succedent, "contr",
                                  Step(src=src, dst=q2[:-1],
                                       side="right" if q2[-1] == 1 else "left"),
                                  (p,))
        return None

    def combine_tensor_r(self, p1, p2):
        a1, a2 = p1.conclusion.antecedent, p2.conclusion.antecedent
        if S.leaf_count(a1) + S.leaf_count(a2) > self.max_leaves:
            return None
        succ = F.tensor(p1.conclusion.succedent, p2.conclusion.succedent)
        return self._node(S.pair(a1, a2), succ, "tensor_r",
                          Step(gamma=a1, delta=a2), (p1, p2))

    def combine_imp_l(self, p1, p2):
        """p1: Delta |- A; p2: Gamma{B} |- C  ->  ->L or <-L."""
        ant2 = p2.conclusion.antecedent
        if ant2 is S.EMPTY:
            return None
        if S.leaf_count(p1.conclusion.antecedent) + S.leaf_count(ant2) \
                > self.max_leaves:
            return None
        q, b = self.rng.choice(S.leaves(ant2))
        a = p1.conclusion.succedent
        delta = p1.conclusion.antecedent
        if self.rng.random() < 0.5:
            impl = F.rimp(a, b)
            grown = S.replace(ant2, q, S.pair(delta, S.leaf(impl)))
            return self._node(grown, p2.conclusion.succedent, "rimp_l",
                              Step(pos=q, delta=delta), (p1, p2))
        impl = F.limp(b, a)
        grown = S.replace(ant2, q, S.pair(S.leaf(impl), delta))
        return self._node(grown, p2.conclusion.succedent, "limp_l",
                          Step(pos=q, delta=delta), (p1, p2))

    MOVES = ("tensor_l", "one_l", "rimp_r", "limp_r", "plus_r", "with_r",
             "plus_l", "with_l", "der", "weak", "prom", "exch", "assoc",
             "contr")

    def wrap(self, p) -> Proof:
        moves = list(self.MOVES)
        self.rng.shuffle(moves)
        for name in moves:
            out = getattr(self, "m_" + name)(p)
            if out is not None:
                return out
        return p

    def proof(self, steps=5) -> Proof:
        p = self.base()
        for _ in range(steps):
            roll = self.rng.random()
            if roll < 0.12:
                other = self.base()
                combined = self.combine_tensor_r(p, other)
                p = combined if combined is not None else self.wrap(p)
            elif roll < 0.24:
                other = self.base()
                combined = self.combine_imp_l(other, p)
                p = combined if combined is not None else self.wrap(p)
            else:
                p = self.wrap(p)
        return p
