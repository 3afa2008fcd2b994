"""Executable embedding metatheory: polarization analysis, translation of
two-sided proofs into the one-sided system, and extraction of two-sided
proofs back out of one-sided proofs of translated sequents.

Extraction works node by node on the first non-structural rule,
normalising every intermediate sequent to its unique two-sided reading
(designate the positive leaf, un-translate the rest).  Leaf positions are
tracked mechanically by tagging payloads, never by schema-specific
arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import calculus as C
from . import formulas as F
from . import structures as S
from .calculus import CalculusConfig, OneSided, Proof, Step, TwoSided
from .structures import EMPTY, Leaf, Pair


class NotInImage(Exception):
    """A leaf is neither a translated formula nor the dual of one."""


class NotPolarizable(Exception):
    """The sequent does not carry exactly one positive leaf."""


class AssocForbidden(Exception):
    """A subexponential associativity step cannot be mirrored in acLL."""


# -- polarization ------------------------------------------------------------


@dataclass(frozen=True)
class PolarizationReport:
    n: int
    counter_sum: Optional[int]
    positive_positions: tuple
    verdict: str
    canonical: Optional[TwoSided]

    @property
    def polarizable(self) -> bool:
        return self.verdict == "polarizable"


def classify_leaf(v: F.Formula, allow_zero: bool = False) -> Optional[str]:
    """'positive', 'negative', or None when the leaf is in neither image."""
    if F.inverse_translate(v, allow_zero) is not None:
        return "positive"
    if F.inverse_translate(F.dual(v), allow_zero) is not None:
        return "negative"
    return None


def polarize(seq: OneSided, allow_zero: bool = False) -> PolarizationReport:
    """Classify the leaves of a one-sided sequent by translation image."""
    lvs = S.leaves(seq.structure)
    poss = []
    for pos, v in lvs:
        side = classify_leaf(v, allow_zero)
        if side is None:
            raise NotInImage(f"leaf {v!r} at {pos} is not a translation image")
        if side == "positive":
            poss.append(pos)
    try:
        csum: Optional[int] = S.counter_structure(seq.structure)
    except F.UndefinedCounter:
        csum = None
    if len(poss) == 1:
        ant, succ, _ = canonical_target(seq.structure, allow_zero)
        return PolarizationReport(
            len(lvs), csum, tuple(poss), "polarizable", C.two_sided(ant, succ)
        )
    return PolarizationReport(len(lvs), csum, tuple(poss), "not-polarizable", None)


def canonical_target(st: S.Structure, allow_zero: bool = False):
    """The unique two-sided reading of a polarizable structure.

    Returns (antecedent, succedent, leafmap) where leafmap sends each
    source leaf position to ('succ', ()) or ('ant', position).
    """
    lvs = S.leaves(st)
    poss = []
    for pos, v in lvs:
        side = classify_leaf(v, allow_zero)
        if side is None:
            raise NotInImage(f"leaf {v!r} at {pos} is not a translation image")
        if side == "positive":
            poss.append((pos, v))
    if len(poss) != 1:
        raise NotPolarizable(f"{len(poss)} positive leaves, need exactly one")
    pi, pival = poss[0]
    succ = F.inverse_translate(pival, allow_zero)
    tagged = _tag_leaves(st)
    designated = S.designate(S.hollow(tagged, pi))
    ant_tagged = S.un_neg_translate(designated, allow_zero)
    leafmap = {src: ("ant", pos) for pos, (_, src) in S.leaves(ant_tagged)}
    leafmap[pi] = ("succ", ())
    ant = S.map_leaves(ant_tagged, lambda t: t[0])
    return ant, succ, leafmap


def _tag_leaves(st: S.Structure) -> S.Structure:
    out = st
    for pos, v in S.leaves(st):
        out = S.replace(out, pos, S.leaf((v, pos)))
    return out


def translated_sequent(seq: TwoSided) -> OneSided:
    return C.one_sided(
        S.pair(S.neg_translate(seq.antecedent), S.leaf(F.translate(seq.succedent)))
    )


# -- soundness: two-sided proof -> one-sided proof ---------------------------


def _node(conclusion, rule, data, kids, cfg) -> Proof:
    """Build and locally validate a one-sided node (development guard)."""
    p = Proof(conclusion, rule, data, tuple(kids))
    expect = C.expected_premises(conclusion, rule, data, cfg)
    got = tuple(k.conclusion for k in kids)
    if expect != got:
        raise C.MalformedProof(
            f"embedding produced a bad {rule} node: wanted {expect}, got {got}"
        )
    return p


def embed_proof(p: Proof, cfg: CalculusConfig) -> Proof:
    """Translate a checked two-sided proof into the one-sided system.

    The output concludes |- (neg-translation of the antecedent, translated
    succedent) and passes the one-sided check under the same signature.
    """
    if not isinstance(p.conclusion, TwoSided):
        raise C.MalformedProof("embed_proof expects a two-sided proof")
    out_cfg = CalculusConfig("cacll", cfg.signature, allow_cut=cfg.allow_cut,
                             allow_zero=cfg.allow_zero)
    return _embed(p, cfg, out_cfg)


def _mirror_in(ant: S.Structure, pos) -> tuple:
    """Position of a mirrored antecedent node inside (neg(ant), succ-leaf)."""
    return (0,) + S.mirror_pos(pos)


def _succ_pos(ant: S.Structure) -> tuple:
    return (1,) if ant is not EMPTY else ()


def _embed(p: Proof, cfg: CalculusConfig, ocfg: CalculusConfig) -> Proof:
    seq: TwoSided = p.conclusion
    ant, succ = seq.antecedent, seq.succedent
    target = translated_sequent(seq)
    tstruct = target.structure
    rule, data = p.rule, p.data
    kids = [_embed(q, cfg, ocfg) for q in p.premises]

    def mk(rule_, data_, concl_struct, children):
        return _node(C.one_sided(concl_struct), rule_, data_, children, ocfg)

    if rule == "init":
        return mk("init", C.NO_DATA, tstruct, ())
    if rule == "one_r":
        return mk("one", C.NO_DATA, tstruct, ())
    if rule == "top_r":
        return mk("top", Step(pos=_succ_pos(ant)), tstruct, ())
    if rule == "zero_l":
        return mk("top", Step(pos=_mirror_in(ant, data.get("pos"))), tstruct, ())
    if rule == "tensor_l":
        return mk("par", Step(pos=_mirror_in(ant, data.get("pos"))), tstruct, kids)
    if rule == "one_l":
        return mk("bot", Step(pos=_mirror_in(ant, data.get("pos"))), tstruct, kids)
    if rule == "plus_l":
        return mk("with", Step(pos=_mirror_in(ant, data.get("pos"))), tstruct, kids)
    if rule in ("with_l1", "with_l2"):
        one_rule = "plus1" if rule == "with_l1" else "plus2"
        return mk(one_rule, Step(pos=_mirror_in(ant, data.get("pos"))), tstruct, kids)
    if rule in ("plus_r1", "plus_r2"):
        one_rule = "plus1" if rule == "plus_r1" else "plus2"
        return mk(one_rule, Step(pos=_succ_pos(ant)), tstruct, kids)
    if rule == "with_r":
        return mk("with", Step(pos=_succ_pos(ant)), tstruct, kids)
    if rule == "der":
        return mk("der", Step(pos=_mirror_in(ant, data.get("pos"))), tstruct, kids)
    if rule == "prom":
        return mk("prom", C.NO_DATA, tstruct, kids)
    if rule == "weak":
        return mk("qw", Step(pos=_mirror_in(ant, data.get("pos"))), tstruct, kids)
    if rule == "contr":
        flip = {"left": "right", "right": "left"}
        d2 = Step(
            src=_mirror_in(ant, data.get("src")),
            dst=_mirror_in(ant, data.get("dst")),
            side=flip[data.get("side")],
        )
        return mk("qc", d2, tstruct, kids)
    if rule in ("rimp_r", "limp_r"):
        # wrap: sim the premise into (neg(ant), (X, Y)), then par
        f = F.translate(succ)
        spos = _succ_pos(ant)
        prem_struct = S.replace(
            tstruct, spos, S.pair(S.leaf(f.left), S.leaf(f.right))
        )
        inner = C.sim_to(kids[0], prem_struct)
        return mk("par", Step(pos=spos), tstruct, (inner,))
    if rule == "tensor_r":
        g, d = data.get("gamma"), data.get("delta")
        ng, nd = S.neg_translate(g), S.neg_translate(d)
        return mk("tensor", Step(gamma=nd, delta=ng), tstruct, (kids[1], kids[0]))
    if rule in ("rimp_l", "limp_l", "cut"):
        return _embed_split_left(p, kids, seq, tstruct, ocfg)
    if rule in ("exch1", "exch2"):
        return _embed_structural(p, kids, seq, tstruct, "qe", "E", ocfg)
    if rule in ("assoc1", "assoc1_l", "assoc1_m", "assoc1_r"):
        return _embed_structural(p, kids, seq, tstruct, "qa1", "A1", ocfg)
    if rule in ("assoc2", "assoc2_l", "assoc2_m", "assoc2_r"):
        return _embed_structural(p, kids, seq, tstruct, "qa2", "A2", ocfg)
    raise C.MalformedProof(f"cannot embed rule {rule!r}")


def _embed_split_left(p, kids, seq, tstruct, ocfg) -> Proof:
    """rimp_l / limp_l / cut: a tensor (or cut) against a designated rest.

    Premise 2 holds the residual (B, or the cut formula) at the principal
    position; designating its mirrored leaf gives the context the gadget
    tensors against.
    """
    ant = seq.antecedent
    rule, d = p.rule, p.data
    q = tuple(d.get("pos"))
    delta = d.get("delta")
    ndelta = S.neg_translate(delta)
    rest_kid = kids[1]
    rest_struct = rest_kid.conclusion.structure
    pB = (0,) + S.mirror_pos(q)
    desig = S.designate(S.hollow(rest_struct, pB))
    if rule == "cut":
        a = d.get("formula")
        ta = F.translate(a)
        concl = S.pair(ndelta, desig)
        inner = _node(
            C.one_sided(concl), "cut", Step(formula=ta, gamma=ndelta, delta=desig),
            (kids[0], C.sim_to(rest_kid, S.pair(S.leaf(F.dual(ta)), desig))), ocfg,
        )
        return C.sim_to(inner, tstruct)
    impl = S.subtree(ant, q)
    if isinstance(impl, Leaf):
        impl_f = impl.value
    else:
        impl_f = (impl.right if rule == "rimp_l" else impl.left).value
    tf = F.dual(F.translate(impl_f))
    if rule == "rimp_l":
        # tf = (dual ^B^) * ^A^ ; premises (gamma, ^A^) and (context, dual ^B^)
        concl = S.pair(S.pair(ndelta, desig), S.leaf(tf))
        inner = _node(
            C.one_sided(concl), "tensor", Step(gamma=ndelta, delta=desig),
            (kids[0], C.sim_to(rest_kid, S.pair(desig, S.leaf(tf.left)))), ocfg,
        )
    else:
        # tf = ^A^ * (dual ^B^)
        concl = S.pair(S.pair(desig, ndelta), S.leaf(tf))
        inner = _node(
            C.one_sided(concl), "tensor", Step(gamma=desig, delta=ndelta),
            (C.sim_to(rest_kid, S.pair(desig, S.leaf(tf.right))), kids[0]), ocfg,
        )
    return C.sim_to(inner, tstruct)


def _embed_structural(p, kids, seq, tstruct, one_rule, feature, ocfg) -> Proof:
    """Generic gadget for licensed structural steps: find a one-sided
    instance of one_rule whose conclusion is equivalent to the translated
    conclusion and whose premise is equivalent to the translated premise."""
    kid = kids[0]
    prem_struct = kid.conclusion.structure
    sig = ocfg.signature
    for member in sorted(S.equivalence_class(tstruct), key=S.struct_key):
        if not isinstance(member, Pair):
            continue
        y = member.right
        if not C.all_modal_licensed(y, feature, sig, "quest"):
            continue
        candidates = []
        if one_rule == "qe":
            if isinstance(member.left, Pair):
                candidates.append(C.NO_DATA)
        else:
            z = member.left
            if isinstance(z, Pair) and isinstance(z.right, Pair):
                candidates.append(Step(dir="rl"))
            if isinstance(z, Pair) and isinstance(z.left, Pair):
                candidates.append(Step(dir="lr"))
        for cand in candidates:
            try:
                want = C.expected_premises(C.one_sided(member), one_rule, cand, ocfg)
            except C.RuleFailure:
                continue
            want_struct = want[0].structure
            if S.equivalent(want_struct, prem_struct):
                inner = _node(
                    C.one_sided(member), one_rule, cand,
                    (C.sim_to(kid, want_struct),), ocfg,
                )
                return C.sim_to(inner, tstruct)
    raise C.MalformedProof(
        f"no one-sided {one_rule} instance bridges the translated step"
    )


# -- completeness: one-sided proof of a translated sequent -> two-sided ------


def extract_proof(p: Proof, target: str, cfg: CalculusConfig) -> Proof:
    """Extract a two-sided proof from a cut-free one-sided proof of a
    polarizable sequent.

    target is 'acll' or 'acll+'.  Raises AssocForbidden when a licensed
    associativity step appears with target 'acll', and NotPolarizable /
    NotInImage when the input leaves the embedding fragment.
    """
    if target not in ("acll", "acll+"):
        raise ValueError(f"unknown target {target!r}")
    if not isinstance(p.conclusion, OneSided):
        raise C.MalformedProof("extract_proof expects a one-sided proof")
    for _, node in C.rule_nodes(p, ("cut", "mix")):
        raise C.MalformedProof("extraction needs a cut-free proof")
    C.assert_valid(p, CalculusConfig("cacll", cfg.signature))
    tcfg = CalculusConfig(target, cfg.signature)
    out = _extract(p, tcfg)
    return out


def _two_sided_of(st: S.Structure) -> TwoSided:
    ant, succ, _ = canonical_target(st)
    return C.two_sided(ant, succ)


def _node2(conclusion, rule, data, kids, cfg) -> Proof:
    p = Proof(conclusion, rule, data, tuple(kids))
    expect = C.expected_premises(conclusion, rule, data, cfg)
    got = tuple(k.conclusion for k in kids)
    if expect != got:
        raise C.MalformedProof(
            f"extraction produced a bad {rule} node: wanted {expect}, got {got}"
        )
    return p


def _extract(p: Proof, tcfg: CalculusConfig) -> Proof:
    st = p.conclusion.structure
    rule, data = p.rule, p.data

    if rule == "sim":
        inner = _extract(p.premises[0], tcfg)
        want = _two_sided_of(st)
        if inner.conclusion is not want:
            raise C.MalformedProof("structural move changed the two-sided reading")
        return inner

    ant, succ, leafmap = canonical_target(st)
    goal = C.two_sided(ant, succ)

    if rule == "init":
        return _node2(goal, "init", C.NO_DATA, (), tcfg)
    if rule == "one":
        return _node2(goal, "one_r", C.NO_DATA, (), tcfg)
    if rule == "top":
        if leafmap.get(tuple(data.get("pos"))) != ("succ", ()):
            raise NotPolarizable("closing top is not the positive leaf")
        return _node2(goal, "top_r", C.NO_DATA, (), tcfg)

    if rule == "par":
        q = tuple(data.get("pos"))
        v = S.subtree(st, q).value
        if leafmap[q] == ("succ", ()):
            inv = F.inverse_translate(v)
            kid = _extract(p.premises[0], tcfg)
            if isinstance(inv, F.RImp):
                return _node2(goal, "rimp_r", C.NO_DATA, (kid,), tcfg)
            if isinstance(inv, F.LImp):
                return _node2(goal, "limp_r", C.NO_DATA, (kid,), tcfg)
            raise NotInImage(f"positive par {v!r} is not an implication image")
        kid = _extract(p.premises[0], tcfg)
        prem_struct = p.premises[0].conclusion.structure
        _, _, pmap = canonical_target(prem_struct)
        ra = pmap[q + (1,)]
        rb = pmap[q + (0,)]
        if ra[0] != "ant" or rb[0] != "ant" or ra[1][:-1] != rb[1][:-1] \
                or ra[1][-1:] != (0,) or rb[1][-1:] != (1,):
            raise C.MalformedProof("tensor_l operands did not stay adjacent")
        r = ra[1][:-1]
        return _node2(goal, "tensor_l", Step(pos=r), (kid,), tcfg)

    if rule in ("plus1", "plus2"):
        q = tuple(data.get("pos"))
        v = S.subtree(st, q).value
        kid = _extract(p.premises[0], tcfg)
        if leafmap[q] == ("succ", ()):
            return _node2(goal, "plus_r1" if rule == "plus1" else "plus_r2",
                          C.NO_DATA, (kid,), tcfg)
        prem_struct = p.premises[0].conclusion.structure
        _, _, pmap = canonical_target(prem_struct)
        r = pmap[q][1]
        return _node2(goal, "with_l1" if rule == "plus1" else "with_l2",
                      Step(pos=r), (kid,), tcfg)

    if rule == "with":
        q = tuple(data.get("pos"))
        kid1 = _extract(p.premises[0], tcfg)
        kid2 = _extract(p.premises[1], tcfg)
        if leafmap[q] == ("succ", ()):
            return _node2(goal, "with_r", C.NO_DATA, (kid1, kid2), tcfg)
        _, _, pmap = canonical_target(p.premises[0].conclusion.structure)
        r = pmap[q][1]
        return _node2(goal, "plus_l", Step(pos=r), (kid1, kid2), tcfg)

    if rule == "bot":
        q = tuple(data.get("pos"))
        kid = _extract(p.premises[0], tcfg)
        r = leafmap[q][1]
        return _node2(goal, "one_l", Step(pos=r), (kid,), tcfg)

    if rule == "der":
        q = tuple(data.get("pos"))
        kid = _extract(p.premises[0], tcfg)
        _, _, pmap = canonical_target(p.premises[0].conclusion.structure)
        r = pmap[q][1]
        return _node2(goal, "der", Step(pos=r), (kid,), tcfg)

    if rule == "tensor":
        return _extract_tensor(p, goal, leafmap, tcfg)
    if rule == "prom":
        kid = _extract(p.premises[0], tcfg)
        return _node2(goal, "prom", C.NO_DATA, (kid,), tcfg)
    if rule == "qw":
        q = tuple(data.get("pos"))
        kid = _extract(p.premises[0], tcfg)
        r = _block_position(st, q, leafmap, ant)
        return _node2(goal, "weak", Step(pos=r), (kid,), tcfg)
    if rule == "qc":
        return _extract_contraction(p, goal, tcfg)
    if rule == "qe":
        return _extract_exchange(p, goal, tcfg)
    if rule in ("qa1", "qa2"):
        if tcfg.system == "acll":
            raise AssocForbidden(
                "the proof uses licensed associativity, which acLL cannot mirror"
            )
        return _extract_assoc(p, goal, tcfg)
    raise C.MalformedProof(f"cannot extract rule {rule!r}")


def _block_position(st, q, leafmap, ant) -> tuple:
    """Two-sided position of an antecedent block, from its leaves' images."""
    block = S.subtree(st, q)
    spots = [leafmap[q + rel][1] for rel, _ in S.leaves(block)]
    if not spots:
        raise C.MalformedProof("empty block")
    prefix = spots[0]
    while not all(s[: len(prefix)] == prefix for s in spots):
        prefix = prefix[:-1]
    at = S.subtree(ant, prefix)
    if S.leaf_count(at) != len(spots):
        raise C.MalformedProof("block scattered in the two-sided reading")
    return prefix


def _extract_tensor(p: Proof, goal: TwoSided, leafmap, tcfg) -> Proof:
    st = p.conclusion.structure
    if isinstance(st, Leaf):
        tf = st.value
        qt = ()
    else:
        tf = st.right.value
        qt = (1,)
    if leafmap[qt] == ("succ", ()):
        inv = F.inverse_translate(tf)
        kid1 = _extract(p.premises[0], tcfg)  # (gamma, ^B^)
        kid2 = _extract(p.premises[1], tcfg)  # (delta, ^A^)
        return _node2(
            goal, "tensor_r",
            Step(gamma=kid2.conclusion.antecedent, delta=kid1.conclusion.antecedent),
            (kid2, kid1), tcfg,
        )
    inv = F.inverse_translate(F.dual(tf))
    if isinstance(inv, F.RImp):
        # tf = dual(^B^) * ^A^ : premise 1 is the argument (gamma, ^A^),
        # premise 2 carries the positive inside (delta, dual ^B^)
        arg_kid = _extract(p.premises[0], tcfg)
        main_sub = p.premises[1]
    elif isinstance(inv, F.LImp):
        # tf = ^A^ * dual(^B^) : premise 1 carries the positive
        arg_kid = _extract(p.premises[1], tcfg)
        main_sub = p.premises[0]
    else:
        raise NotPolarizable("tensor leaf is neither positive nor an implication")
    main_kid = _extract(main_sub, tcfg)
    _, _, pmap = canonical_target(main_sub.conclusion.structure)
    r = pmap[(1,)][1]
    delta = arg_kid.conclusion.antecedent
    if isinstance(inv, F.RImp):
        return _node2(goal, "rimp_l", Step(pos=r, delta=delta),
                      (arg_kid, main_kid), tcfg)
    return _node2(goal, "limp_l", Step(pos=r, delta=delta),
                  (arg_kid, main_kid), tcfg)


def _extract_contraction(p: Proof, goal: TwoSided, tcfg) -> Proof:
    st = p.conclusion.structure
    src = tuple(p.data.get("src"))
    dst = tuple(p.data.get("dst"))
    side = p.data.get("side")
    kid = _extract(p.premises[0], tcfg)
    prem_struct = p.premises[0].conclusion.structure
    ant_p, _, pmap = canonical_target(prem_struct)
    ins = dst + ((0,) if side == "left" else (1,))
    src_p = src
    if src[: len(dst)] == dst:
        src_p = dst + ((1,) if side == "left" else (0,)) + src[len(dst):]
    r1 = _block_position(prem_struct, src_p, pmap, ant_p)
    r2 = _block_position(prem_struct, ins, pmap, ant_p)
    if not r2:
        raise C.MalformedProof("contraction copy fills the whole antecedent")
    parent, last = r2[:-1], r2[-1]
    side2 = "right" if last == 1 else "left"
    (r1_new,) = C.erase_many_track(ant_p, [r2], [r1])[1]
    return _node2(goal, "contr", Step(src=r1_new, dst=parent, side=side2),
                  (kid,), tcfg)


def _search_structural(goal: TwoSided, kid_concl: TwoSided, rules, tcfg):
    for rule in rules:
        for pos in S.positions(goal.antecedent):
            datas = (Step(pos=pos),)
            if rule.startswith("assoc"):
                datas = (Step(pos=pos, dir="rl"), Step(pos=pos, dir="lr"))
            for data in datas:
                try:
                    want = C.expected_premises(goal, rule, data, tcfg)
                except C.RuleFailure:
                    continue
                if want[0] is kid_concl:
                    return rule, data
    return None


def _extract_exchange(p: Proof, goal: TwoSided, tcfg) -> Proof:
    kid = _extract(p.premises[0], tcfg)
    found = _search_structural(goal, kid.conclusion, ("exch1", "exch2"), tcfg)
    if found is None:
        raise C.MalformedProof("no two-sided exchange matches the qe step")
    rule, data = found
    return _node2(goal, rule, data, (kid,), tcfg)


def _extract_assoc(p: Proof, goal: TwoSided, tcfg) -> Proof:
    kid = _extract(p.premises[0], tcfg)
    family = (
        ("assoc1_l", "assoc1_m", "assoc1_r")
        if p.rule == "qa1"
        else ("assoc2_l", "assoc2_m", "assoc2_r")
    )
    found = _search_structural(goal, kid.conclusion, family, tcfg)
    if found is None:
        raise C.MalformedProof("no two-sided associativity matches the qa step")
    rule, data = found
    return _node2(goal, rule, data, (kid,), tcfg)
