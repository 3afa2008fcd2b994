"""Cut and mix elimination as a stepwise, measure-decreasing proof rewriter.

Each step locates a topmost cut or mix (premises free of both), applies the
matching rewrite, and records the measure pair (cut-formula complexity,
premise height sum) before and after; the after-measure is the maximum over
the cut/mix nodes the rewrite introduced, and is strictly smaller.

Cut is treated as the single-occurrence case of the generalised mix, which
lets the push-through and subexponential cases share one engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import calculus as C
from . import formulas as F
from . import structures as S
from .calculus import CalculusConfig, MalformedProof, Proof, Step
from .structures import EMPTY, Leaf, Pair


class NoCase(Exception):
    """Internal error: a checked proof hit an unhandled reduction case."""


@dataclass(frozen=True)
class TraceStep:
    case: str
    position: tuple
    before: tuple
    after: tuple


@dataclass
class ReductionTrace:
    steps: list = field(default_factory=list)


def non_sim_height(p: Proof) -> int:
    h = max((non_sim_height(q) for q in p.premises), default=0)
    return h if p.rule == "sim" else h + 1


def measure_of(node: Proof) -> tuple:
    """(cut formula complexity, premise height sum); mix counts its
    question mark in the complexity."""
    depth = sum(non_sim_height(q) for q in node.premises)
    if node.rule == "cut":
        return (F.size(node.data.get("formula")), depth)
    if node.rule == "mix":
        return (1 + F.size(node.data.get("formula")), depth)
    raise ValueError("measure_of expects a cut or mix node")


def find_topmost_cutmix(p: Proof) -> Optional[tuple]:
    """Path of the first cut/mix in post-order: no cut/mix above it."""
    for i, q in enumerate(p.premises):
        found = find_topmost_cutmix(q)
        if found is not None:
            return (i,) + found
    if p.rule in ("cut", "mix"):
        return ()
    return None


def created_measures(p: Proof) -> list:
    return [measure_of(node) for _, node in C.rule_nodes(p, ("cut", "mix"))]


def reduce_step(p: Proof, cfg: CalculusConfig):
    """One topmost reduction, or None when the proof is cut- and mix-free."""
    path = find_topmost_cutmix(p)
    if path is None:
        return None
    node = C.node_at(p, path)
    before = measure_of(node)
    replacement, label = _reduce_at(node, cfg)
    if replacement.conclusion is not node.conclusion:
        raise NoCase(f"{label}: conclusion changed during reduction")
    after = max(created_measures(replacement), default=(0, 0))
    if not after < before:
        raise NoCase(f"{label}: measure did not decrease ({before} -> {after})")
    return C.replace_node(p, path, replacement), TraceStep(label, path, before, after)


def eliminate(p: Proof, cfg: CalculusConfig):
    """Iterate reduce_step to a cut- and mix-free proof of the same
    endsequent."""
    if not cfg.allow_cut:
        cfg = CalculusConfig(cfg.system, cfg.signature, True, cfg.allow_zero)
    C.assert_valid(p, cfg)
    trace = ReductionTrace()
    guard = 0
    while True:
        step = reduce_step(p, cfg)
        if step is None:
            return p, trace
        p, record = step
        trace.steps.append(record)
        guard += 1
        if guard > 100000:
            raise NoCase("reduction did not terminate")


def mix_expand(p: Proof, cfg: CalculusConfig) -> Proof:
    """Rewrite every mix into a cut under a chain of contractions."""
    kids = tuple(mix_expand(q, cfg) for q in p.premises)
    p = Proof(p.conclusion, p.rule, p.data, kids)
    if p.rule != "mix":
        return p
    d = p.data
    label, core = d.get("label"), d.get("formula")
    gamma = d.get("gamma")
    p0, others = tuple(d.get("pos")), [tuple(q) for q in d.get("others", ())]
    if others and not cfg.signature.has(label, "C"):
        raise MalformedProof(f"mix label {label!r} lacks contraction")
    left, right = p.premises
    s2 = right.conclusion.structure
    dualf = F.quest(label, F.dual(core))
    chain = right
    for k in range(len(others) - 1, -1, -1):
        upper = S.erase_many(s2, others[k + 1 :])
        lower = S.erase_many(s2, others[k:])
        (o_up,) = C.erase_many_track(s2, others[k + 1 :], [others[k]])[1]
        (src,) = C.erase_many_track(s2, others[k:], [p0])[1]
        dst, side = o_up[:-1], ("right" if o_up[-1] == 1 else "left")
        node = Proof(
            C.one_sided(lower), "qc", Step(src=src, dst=dst, side=side), (chain,)
        )
        if S.insert(lower, dst, side, S.leaf(dualf)) is not upper:
            raise MalformedProof("mix expansion produced a bad contraction")
        chain = node
    base = S.erase_many(s2, others)
    (p0b,) = C.erase_many_track(s2, others, [p0])[1]
    delta = S.designate(S.hollow(base, p0b))
    cut = Proof(
        C.one_sided(S.pair(gamma, delta)),
        "cut",
        Step(formula=F.bang(label, core), gamma=gamma, delta=delta),
        (left, C.sim_to(chain, S.pair(S.leaf(dualf), delta))),
    )
    return C.sim_to(cut, p.conclusion.structure)


# -- shared machinery ---------------------------------------------------------


def _strip_sims(sub: Proof, tracked):
    """Descend through structural-move nodes, mapping tracked positions."""
    tracked = [tuple(t) for t in tracked]
    while sub.rule == "sim":
        gens = sub.data.get("gens")
        for g in reversed(gens):
            tracked = [S.gen_pos_unmap(None, g, t) for t in tracked]
        sub = sub.premises[0]
    return sub, tracked


def _cm_parts(cm: Proof):
    """(core formula-or-bang, gamma, right subproof, consumed, designated)."""
    d = cm.data
    if cm.rule == "cut":
        a = d.get("formula")
        delta = d.get("delta")
        dpos = (0,) if delta is not EMPTY else ()
        return a, d.get("gamma"), cm.premises[1], [dpos], dpos
    a = F.bang(d.get("label"), d.get("formula"))
    consumed = [tuple(d.get("pos"))] + [tuple(q) for q in d.get("others", ())]
    return a, d.get("gamma"), cm.premises[1], consumed, tuple(d.get("pos"))


def _make_cutmix(left: Proof, right: Proof, formula: F.Formula,
                 consumed, designated, gamma) -> Proof:
    """A cut/mix node concluding exactly multi_subst(right, {designated:
    gamma, rest: empty}).  left must conclude |- (gamma, formula)."""
    rs = right.conclusion.structure
    others = [tuple(q) for q in consumed if tuple(q) != tuple(designated)]
    target = S.multi_subst(rs, {tuple(designated): gamma,
                                **{o: EMPTY for o in others}})
    if others:
        node = Proof(
            C.one_sided(target), "mix",
            Step(label=formula.label, formula=formula.body, gamma=gamma,
                 pos=tuple(designated), others=tuple(others)),
            (left, right),
        )
        return node
    delta = S.designate(S.hollow(rs, tuple(designated)))
    cut = Proof(
        C.one_sided(S.pair(gamma, delta)), "cut",
        Step(formula=formula, gamma=gamma, delta=delta),
        (left, C.sim_to(right, S.pair(S.leaf(F.dual(formula)), delta))),
    )
    return C.sim_to(cut, target)


def _weaken_chain(proof: Proof, target: S.Structure, erase_positions) -> Proof:
    """Stack qw nodes re-adding single leaves until target is reached;
    erase_many(target, erase_positions) must be the current conclusion."""
    eps = [tuple(e) for e in erase_positions]
    cur = proof
    for k in range(len(eps) - 1, -1, -1):
        concl = S.erase_many(target, eps[:k])
        (pos,) = C.erase_many_track(target, eps[:k], [eps[k]])[1]
        cur = Proof(C.one_sided(concl), "qw", Step(pos=pos), (cur,))
    return cur


def _restore_weakened(proof: Proof, spot: tuple, gamma_full, erased) -> Proof:
    """proof concludes ...{upset-part at spot}; re-add the erased leaves so
    the spot holds gamma_full."""
    if not erased:
        return proof
    cur_struct = proof.conclusion.structure
    target = S.replace(cur_struct, spot, gamma_full)
    eps = [spot + tuple(p) for p, _ in erased]
    return _weaken_chain(proof, target, eps)


def _rebuilt_prom(nodeL: Proof, new_context: S.Structure, bangf: F.Bang,
                  cfg) -> Proof:
    """Promotion node over the same premise with a different conclusion
    context (legal: promotion absorbs weakening)."""
    concl = C.one_sided(S.pair(new_context, S.leaf(bangf)))
    node = Proof(concl, "prom", C.NO_DATA, (nodeL.premises[0],))
    expect = C.expected_premises(node.conclusion, "prom", C.NO_DATA, cfg)
    if expect[0] is not nodeL.premises[0].conclusion:
        raise NoCase("promotion context rebuild failed")
    return node


# -- pushability ---------------------------------------------------------------


def _pushable(node: Proof, tracked) -> bool:
    r, d = node.rule, node.data
    tracked = [tuple(t) for t in tracked]
    if r in ("init", "one", "prom", "sim", "cut", "mix"):
        return False
    if r in ("par", "plus1", "plus2", "with", "bot", "der", "top"):
        pos = tuple(d.get("pos"))
        return all(t != pos for t in tracked)
    if r == "tensor":
        return all(t[:1] == (0,) for t in tracked)
    if r in ("qe", "qa1", "qa2"):
        return all(t[:1] == (0,) for t in tracked)
    if r == "qw":
        wp = tuple(d.get("pos"))
        return all(t[: len(wp)] != wp for t in tracked)
    if r == "qc":
        src = tuple(d.get("src"))
        return all(t[: len(src)] != src for t in tracked)
    return False


def _premise_maps(node: Proof):
    """Per-premise position maps for tracked (non-active) positions.

    Each entry is a function pos -> pos or None (position absent there).
    """
    r, d = node.rule, node.data
    ident = lambda q: q  # noqa: E731

    if r in ("par", "plus1", "plus2", "der"):
        return [ident]
    if r == "with":
        return [ident, ident]
    if r == "top":
        return []
    if r in ("bot", "qw"):
        pos = tuple(d.get("pos"))
        sib = pos[:-1] + (1 - pos[-1],)

        def erased(q):
            if q[: len(sib)] == sib:
                return pos[:-1] + q[len(sib):]
            return q

        return [erased]
    if r == "qc":
        dst, side = tuple(d.get("dst")), d.get("side")
        keep = (1,) if side == "left" else (0,)

        def inserted(q):
            if q[: len(dst)] == dst:
                return dst + keep + q[len(dst):]
            return q

        return [inserted]
    if r == "qe":

        def swapped(q):
            if q[:2] == (0, 0):
                return (0, 1) + q[2:]
            if q[:2] == (0, 1):
                return (0, 0) + q[2:]
            return q

        return [swapped]
    if r in ("qa1", "qa2"):
        if d.get("dir") == "rl":

            def assoc(q):
                if q[:2] == (0, 0):
                    return (0, 0, 0) + q[2:]
                if q[:3] == (0, 1, 0):
                    return (0, 0, 1) + q[3:]
                if q[:3] == (0, 1, 1):
                    return (0, 1) + q[3:]
                return q

        else:

            def assoc(q):
                if q[:3] == (0, 0, 0):
                    return (0, 0) + q[3:]
                if q[:3] == (0, 0, 1):
                    return (0, 1, 0) + q[3:]
                if q[:2] == (0, 1):
                    return (0, 1, 1) + q[2:]
                return q

        return [assoc]
    if r == "tensor":
        g, dl = d.get("gamma"), d.get("delta")
        if g is EMPTY and dl is EMPTY:
            return [lambda q: None, lambda q: None]
        if dl is EMPTY:
            return [ident, lambda q: None]
        if g is EMPTY:
            return [lambda q: None, ident]

        def into_gamma(q):
            return (0,) + q[2:] if q[:2] == (0, 0) else None

        def into_delta(q):
            return (0,) + q[2:] if q[:2] == (0, 1) else None

        return [into_gamma, into_delta]
    raise NoCase(f"no premise map for rule {node.rule}")


def _remap_step(node: Proof, subst_map):
    """Rule data with positions and split structures pushed through a
    substitution on the node's conclusion."""
    st = node.conclusion.structure
    fields = dict(node.data.items)
    for key in ("pos", "src", "dst"):
        if key in fields:
            (new,) = S.track_through_subst(st, subst_map, [fields[key]])
            if new is None:
                raise NoCase(f"data position {key} vanished in push")
            fields[key] = new
    if node.rule == "tensor":
        g, dl = fields["gamma"], fields["delta"]
        if g is EMPTY or dl is EMPTY:
            inner = {tuple(k)[1:]: v for k, v in subst_map.items()}
            part = S.multi_subst(g if dl is EMPTY else dl, inner)
            fields["gamma"], fields["delta"] = (
                (part, EMPTY) if dl is EMPTY else (EMPTY, part)
            )
        else:
            gm = {tuple(k)[2:]: v for k, v in subst_map.items() if tuple(k)[:2] == (0, 0)}
            dm = {tuple(k)[2:]: v for k, v in subst_map.items() if tuple(k)[:2] == (0, 1)}
            fields["gamma"] = S.multi_subst(g, gm)
            fields["delta"] = S.multi_subst(dl, dm)
    return Step(**fields)


# -- the reduction dispatcher --------------------------------------------------


def _reduce_at(cm: Proof, cfg: CalculusConfig):
    a, gamma, right, consumed, designated = _cm_parts(cm)
    left = cm.premises[0]
    bang_pos = (1,) if gamma is not EMPTY else ()
    nodeL, tl = _strip_sims(left, [bang_pos])
    nodeR, tr = _strip_sims(right, consumed)
    des_r = tr[consumed.index(designated)]

    if nodeL.rule == "init":
        if cm.rule != "cut":
            raise NoCase("mix left premise ended in init")
        return right, "init-left"
    if nodeR.rule == "init":
        if cm.rule != "cut":
            raise NoCase("mix right premise ended in init")
        return left, "init-right"

    if _pushable(nodeL, tl):
        return _push(cm, "left", nodeL, tl, cfg), "push-left"
    if _pushable(nodeR, tr):
        return _push(cm, "right", nodeR, tr, cfg), "push-right"

    if cm.rule == "cut" and not isinstance(a, (F.Bang, F.Quest)):
        return _principal_cut(cm, nodeL, tl[0], nodeR, tr[0], cfg)
    if cm.rule == "cut" and isinstance(a, F.Quest):
        swapped = _swap_cut(cm)
        inner, label = _reduce_at(swapped.premises[0] if swapped.rule == "sim"
                                  else swapped, cfg)
        if swapped.rule == "sim":
            inner = C.sim_to(inner, cm.conclusion.structure)
        return inner, label
    return _subexp_cases(cm, a, gamma, nodeL, nodeR, tr, des_r, cfg)


def _swap_cut(cm: Proof) -> Proof:
    a = cm.data.get("formula")
    gamma, delta = cm.data.get("gamma"), cm.data.get("delta")
    lf, rt = cm.premises
    left2 = C.sim_to(rt, S.pair(delta, S.leaf(F.dual(a))))
    right2 = C.sim_to(lf, S.pair(S.leaf(a), gamma))
    inner = Proof(
        C.one_sided(S.pair(delta, gamma)), "cut",
        Step(formula=F.dual(a), gamma=delta, delta=gamma), (left2, right2),
    )
    return C.sim_to(inner, cm.conclusion.structure)


# -- push-through ---------------------------------------------------------------


def _node(concl_struct, rule, data, kids, cfg) -> Proof:
    node = Proof(C.one_sided(concl_struct), rule, data, tuple(kids))
    try:
        expect = C.expected_premises(node.conclusion, rule, data, cfg)
    except C.RuleFailure as e:
        raise NoCase(f"rebuilt {rule} node invalid: {e}")
    got = tuple(k.conclusion for k in kids)
    if tuple(expect) != got:
        raise NoCase(f"rebuilt {rule} node premises do not line up")
    return node


def _push(cm: Proof, side: str, node: Proof, tracked, cfg: CalculusConfig) -> Proof:
    a, gamma, right, consumed, designated = _cm_parts(cm)
    left = cm.premises[0]
    st = node.conclusion.structure
    maps = _premise_maps(node)

    if side == "left":
        qL = tracked[0]
        if cm.rule == "cut":
            rest = cm.data.get("delta")
        else:
            rs = right.conclusion.structure
            others = [q for q in consumed if q != designated]
            base = S.erase_many(rs, others)
            (p0b,) = C.erase_many_track(rs, others, [designated])[1]
            rest = S.designate(S.hollow(base, p0b))
        concl_map = {qL: rest}
        new_data = _remap_step(node, concl_map)
        v_struct = S.multi_subst(st, concl_map)
        kids = []
        for j, sub in enumerate(node.premises):
            pj = maps[j](qL)
            if pj is None:
                kids.append(sub)
                continue
            sj = sub.conclusion.structure
            gamma_j = S.designate(S.hollow(sj, pj))
            left_j = C.sim_to(sub, S.pair(gamma_j, S.leaf(a)))
            inner = _make_cutmix_left(left_j, gamma_j, cm, cfg)
            kids.append(C.sim_to(inner, S.multi_subst(sj, {pj: rest})))
        bottom = _node(v_struct, node.rule, new_data, kids, cfg)
        return C.sim_to(bottom, cm.conclusion.structure)

    # pushing right: group the consumed occurrences by premise
    groups = []
    for j, fn in enumerate(maps):
        groups.append([(q, fn(q)) for q in tracked if fn(q) is not None])
    live = [j for j, g in enumerate(groups) if g]
    if not live:
        # axiom (top): the whole cut/mix disappears
        concl_map = {q: EMPTY for q in tracked}
        des_t = tracked[consumed.index(designated)]
        concl_map[des_t] = gamma
        v_struct = S.multi_subst(st, concl_map)
        bottom = _node(v_struct, node.rule, _remap_step(node, concl_map), (), cfg)
        return C.sim_to(bottom, cm.conclusion.structure)

    des_t = tracked[consumed.index(designated)]
    # additive premises (with) each see every occurrence: no resource split
    split = len(live) > 1 and not all(
        len(groups[j]) == len(tracked) for j in live
    )
    body = gamma
    erased_l: tuple = ()
    if split:
        nodeLp, tl = _strip_sims(left, [(1,) if gamma is not EMPTY else ()])
        if nodeLp.rule != "prom":
            raise NoCase("split mix push without a promotion on the left")
        up = S.upset(gamma, a.label, cfg.signature, "quest")
        if up is None:
            raise NoCase("split mix push: context upset undefined")
        body, erased_l = up

    keepers = {}
    for j in live:
        qs = [q for q, _ in groups[j]]
        keepers[j] = des_t if des_t in qs else min(qs)

    concl_map = {q: EMPTY for q in tracked}
    for j in live:
        concl_map[keepers[j]] = body
    v_struct = S.multi_subst(st, concl_map)
    new_data = _remap_step(node, concl_map)

    kids = []
    for j, sub in enumerate(node.premises):
        if j not in live:
            kids.append(sub)
            continue
        sj = sub.conclusion.structure
        spots = [pj for _, pj in groups[j]]
        keeper_p = dict(groups[j])[keepers[j]]
        if split:
            nodeLp, _ = _strip_sims(left, [(1,) if gamma is not EMPTY else ()])
            left_j = _rebuilt_prom(nodeLp, body, a, cfg)
        else:
            left_j = left
        inner = _make_cutmix(left_j, sub, a, spots, keeper_p, body)
        vj = S.multi_subst(sj, {**{pj: EMPTY for pj in spots}, keeper_p: body})
        kids.append(C.sim_to(inner, vj))

    bottom = _node(v_struct, node.rule, new_data, kids, cfg)
    out = bottom
    if split:
        out = _dedup_and_restore(
            bottom, st, concl_map, [keepers[j] for j in live], des_t,
            body, gamma, erased_l, cfg,
        )
    return C.sim_to(out, cm.conclusion.structure)


def _make_cutmix_left(left_j: Proof, gamma_j, cm: Proof, cfg) -> Proof:
    """Inner cut/mix for a left push: same right premise and occurrences,
    new left context."""
    a, _, right, consumed, designated = _cm_parts(cm)
    if cm.rule == "cut":
        delta = cm.data.get("delta")
        return Proof(
            C.one_sided(S.pair(gamma_j, delta)), "cut",
            Step(formula=a, gamma=gamma_j, delta=delta), (left_j, right),
        )
    others = tuple(q for q in consumed if q != designated)
    concl = S.multi_subst(
        right.conclusion.structure,
        {designated: gamma_j, **{q: EMPTY for q in others}},
    )
    return Proof(
        C.one_sided(concl), "mix",
        Step(label=a.label, formula=a.body, gamma=gamma_j,
             pos=designated, others=others),
        (left_j, right),
    )


def _dedup_and_restore(bottom, st, concl_map, keeper_qs, des_t, body,
                       gamma, erased_l, cfg) -> Proof:
    """Contract the extra upset copies of the promotion context onto the
    designated spot, then weaken its erased leaves back in."""
    if body is EMPTY:
        # every copy vanished; regrow the (all-weakenable) context at the
        # designated spot
        if gamma is EMPTY:
            return bottom
        target_map = dict(concl_map)
        target_map[des_t] = gamma
        target = S.multi_subst(st, target_map)
        (pos,) = S.track_through_subst(st, target_map, [des_t])
        return Proof(C.one_sided(target), "qw", Step(pos=pos), (bottom,))
    spots = S.track_through_subst(st, concl_map, keeper_qs)
    keep_spot = spots[keeper_qs.index(des_t)]
    cur = bottom
    extras = [s for q, s in zip(keeper_qs, spots) if q != des_t]
    for spot in extras:
        cur_struct = cur.conclusion.structure
        concl = S.erase(cur_struct, spot)
        tracked_now = C.erase_many_track(
            cur_struct, [spot], [keep_spot] + [e for e in extras if e != spot]
        )[1]
        keep_now = tracked_now[0]
        parent, last = spot[:-1], spot[-1]
        side2 = "right" if last == 1 else "left"
        cur = _node(concl, "qc", Step(src=keep_now, dst=parent, side=side2),
                    (cur,), cfg)
        # remap the remaining extras
        remap = dict(zip([e for e in extras if e != spot], tracked_now[1:]))
        extras = [remap.get(e, e) for e in extras if e != spot]
        keep_spot = keep_now
    return _restore_weakened(cur, keep_spot, gamma, erased_l)


# -- principal connective cases -------------------------------------------------


def _principal_cut(cm, nodeL, qL, nodeR, qR, cfg):
    a = cm.data.get("formula")
    if isinstance(a, (F.Tensor, F.With)) or a is F.ONE:
        swapped = _swap_cut(cm)
        core = swapped.premises[0] if swapped.rule == "sim" else swapped
        inner, label = _reduce_at(core, cfg)
        if swapped.rule == "sim":
            inner = C.sim_to(inner, cm.conclusion.structure)
        return inner, label
    if isinstance(a, F.Par):
        return _cut_par_tensor(cm, nodeL, qL, nodeR, qR, cfg), "par-tensor"
    if isinstance(a, F.Plus):
        return _cut_plus_with(cm, nodeL, qL, nodeR, qR, cfg), "plus-with"
    if a is F.BOT:
        return _cut_bot_one(cm, nodeL, qL, nodeR, qR, cfg), "bot-one"
    raise NoCase(f"no principal case for cut formula {a!r}")


def _principal_guard(node, q, rule, what):
    if node.rule != rule or tuple(node.data.get("pos", ())) != tuple(q):
        raise NoCase(f"{what}: expected principal {rule}, found {node.rule}")


def _cut_par_tensor(cm, nodeL, qL, nodeR, qR, cfg):
    a = cm.data.get("formula")  # Par(fa, fb)
    fa, fb = a.left, a.right
    _principal_guard(nodeL, qL, "par", "par-tensor")
    sub_l = nodeL.premises[0]
    s1 = sub_l.conclusion.structure
    if nodeR.rule != "tensor" or tuple(qR) != _tensor_leaf_pos(nodeR):
        raise NoCase("par-tensor: right premise not a principal tensor")
    g_r, d_r = nodeR.data.get("gamma"), nodeR.data.get("delta")
    sub_r1, sub_r2 = nodeR.premises  # |- (g_r, dual fa), |- (d_r, dual fb)

    fa_pos = tuple(qL) + (0,)
    fb_pos = tuple(qL) + (1,)
    gamma1, (fb_new,) = S.designate_track(
        S.replace(s1, fa_pos, S.leaf(("cuthole",))) if False else s1,
        fa_pos, [fb_pos],
    )
    left1 = C.sim_to(sub_l, S.pair(gamma1, S.leaf(fa)))
    right1 = C.sim_to(sub_r1, S.pair(S.leaf(F.dual(fa)), g_r))
    cut1 = Proof(
        C.one_sided(S.pair(gamma1, g_r)), "cut",
        Step(formula=fa, gamma=gamma1, delta=g_r), (left1, right1),
    )
    c1 = cut1.conclusion.structure
    fb_in_c1 = ((0,) + fb_new) if g_r is not EMPTY else fb_new
    gamma2, _ = S.designate_track(c1, fb_in_c1, [])
    left2 = C.sim_to(cut1, S.pair(gamma2, S.leaf(fb)))
    right2 = C.sim_to(sub_r2, S.pair(S.leaf(F.dual(fb)), d_r))
    cut2 = Proof(
        C.one_sided(S.pair(gamma2, d_r)), "cut",
        Step(formula=fb, gamma=gamma2, delta=d_r), (left2, right2),
    )
    return C.sim_to(cut2, cm.conclusion.structure)


def _tensor_leaf_pos(node):
    return (1,) if isinstance(node.conclusion.structure, Pair) else ()


def _cut_plus_with(cm, nodeL, qL, nodeR, qR, cfg):
    a = cm.data.get("formula")
    if nodeL.rule not in ("plus1", "plus2"):
        raise NoCase("plus-with: left premise not a principal plus")
    _principal_guard(nodeL, qL, nodeL.rule, "plus-with")
    _principal_guard(nodeR, qR, "with", "plus-with")
    i = 0 if nodeL.rule == "plus1" else 1
    f_i = a.left if i == 0 else a.right
    sub_l = nodeL.premises[0]
    sub_r = nodeR.premises[i]
    gamma_i = S.designate(S.hollow(sub_l.conclusion.structure, tuple(qL)))
    delta_i = S.designate(S.hollow(sub_r.conclusion.structure, tuple(qR)))
    cut = Proof(
        C.one_sided(S.pair(gamma_i, delta_i)), "cut",
        Step(formula=f_i, gamma=gamma_i, delta=delta_i),
        (
            C.sim_to(sub_l, S.pair(gamma_i, S.leaf(f_i))),
            C.sim_to(sub_r, S.pair(S.leaf(F.dual(f_i)), delta_i)),
        ),
    )
    return C.sim_to(cut, cm.conclusion.structure)


def _cut_bot_one(cm, nodeL, qL, nodeR, qR, cfg):
    _principal_guard(nodeL, qL, "bot", "bot-one")
    if nodeR.rule != "one":
        raise NoCase("bot-one: right premise not the one axiom")
    return C.sim_to(nodeL.premises[0], cm.conclusion.structure)


# -- subexponential cases ---------------------------------------------------------


def _subexp_cases(cm, a, gamma, nodeL, nodeR, tr, des_r, cfg):
    """Cut formula is a bang (possibly a mix): the left premise must end in
    promotion; dispatch on how the right premise touches the occurrences."""
    if nodeL.rule != "prom":
        raise NoCase(f"bang cut without promotion on the left ({nodeL.rule})")
    p_l = nodeL.premises[0]
    up = S.upset(gamma, a.label, cfg.signature, "quest")
    if up is None:
        raise NoCase("left promotion context upset undefined")
    g_up, erased_l = up
    consumed = list(tr)
    r = nodeR.rule
    if r == "der":
        return _sx_der(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR,
                       consumed, des_r, cfg), "prom-der"
    if r == "prom":
        return _sx_prom(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR,
                        consumed, des_r, cfg), "prom-prom"
    if r == "qw":
        return _sx_weak(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR,
                        consumed, des_r, cfg), "prom-weak"
    if r in ("qe", "qa1", "qa2"):
        return _sx_struct(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR,
                          consumed, des_r, cfg), f"prom-{r}"
    if r == "qc":
        return _sx_contr(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR,
                         consumed, des_r, cfg), "prom-contr"
    raise NoCase(f"no subexponential case for right rule {r!r}")


def _sx_der(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR, consumed,
            des_r, cfg):
    """Dereliction at one of the occurrences: cut on the core."""
    qx = tuple(nodeR.data.get("pos"))
    if qx not in consumed:
        raise NoCase("prom-der: dereliction not at an occurrence")
    sub = nodeR.premises[0]
    s_prime = sub.conclusion.structure  # qx now holds dual(core)
    core = a.body
    rest = [q for q in consumed if q != qx]
    if not rest:
        # single occurrence: weaken the full context into the core premise
        target_left = S.pair(gamma, S.leaf(core))
        eps = [((0,) + p if gamma is not EMPTY else p) for p, _ in erased_l]
        lw = _weaken_chain(p_l, target_left, eps)
        delta2 = S.designate(S.hollow(s_prime, qx))
        cut2 = Proof(
            C.one_sided(S.pair(gamma, delta2)), "cut",
            Step(formula=core, gamma=gamma, delta=delta2),
            (lw, C.sim_to(sub, S.pair(S.leaf(F.dual(core)), delta2))),
        )
        return C.sim_to(cut2, cm.conclusion.structure)
    # several occurrences: a mix on the rest plus a core cut, both placing
    # the upset context; contract the extra copy, then weaken back in
    des2 = des_r if qx != des_r else rest[0]
    mix_map = {des2: g_up, **{q: EMPTY for q in rest if q != des2}}
    if g_up is EMPTY:
        # nothing survives promotion: the spare copy never materialises
        mix1 = _make_cutmix(_rebuilt_prom(nodeL, g_up, a, cfg),
                            sub, a, rest, des2, g_up)
        c1 = mix1.conclusion.structure
        (qx1,) = S.track_through_subst(s_prime, mix_map, [qx])
        delta2 = S.designate(S.hollow(c1, qx1))
        cut2 = Proof(
            C.one_sided(S.pair(g_up, delta2)), "cut",
            Step(formula=core, gamma=g_up, delta=delta2),
            (p_l, C.sim_to(mix1, S.pair(S.leaf(F.dual(core)), delta2))),
        )
        if gamma is EMPTY:
            return C.sim_to(cut2, cm.conclusion.structure)
        final_map = {des_r: gamma, **{q: EMPTY for q in consumed if q != des_r}}
        fin = S.multi_subst(s_prime, final_map)
        (pos,) = S.track_through_subst(s_prime, final_map, [des_r])
        bridged = C.sim_to(cut2, S.erase(fin, pos))
        grown = _node(fin, "qw", Step(pos=pos), (bridged,), cfg)
        return C.sim_to(grown, cm.conclusion.structure)
    l_up = _rebuilt_prom(nodeL, g_up, a, cfg)
    mix1 = _make_cutmix(l_up, sub, a, rest, des2, g_up)
    c1 = mix1.conclusion.structure
    (qx1, des2_1) = S.track_through_subst(s_prime, mix_map, [qx, des2])
    delta2, (des2_2,) = S.designate_track(c1, qx1, [des2_1])
    cut2 = Proof(
        C.one_sided(S.pair(g_up, delta2)), "cut",
        Step(formula=core, gamma=g_up, delta=delta2),
        (p_l, C.sim_to(mix1, S.pair(S.leaf(F.dual(core)), delta2))),
    )
    c2 = cut2.conclusion.structure
    left_spot = (0,)
    des2_spot = (1,) + des2_2
    # keep the copy standing at the designated occurrence
    if qx == des_r:
        erase_spot, keep0 = des2_spot, left_spot
    else:
        erase_spot, keep0 = left_spot, des2_spot
    concl = S.erase(c2, erase_spot)
    (keep1,) = C.erase_many_track(c2, [erase_spot], [keep0])[1]
    dedup = _node(
        concl, "qc",
        Step(src=keep1, dst=erase_spot[:-1],
             side="right" if erase_spot[-1] == 1 else "left"),
        (cut2,), cfg,
    )
    restored = _restore_weakened(dedup, keep1, gamma, erased_l)
    return C.sim_to(restored, cm.conclusion.structure)


def _sx_prom(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR, consumed,
             des_r, cfg):
    """The occurrences sit in a promotion context on the right.  All of
    them carry the same label, so the right upset either keeps them all
    (j below i) or erases them all (weakenable)."""
    s_r = nodeR.conclusion.structure
    if not (isinstance(s_r, Pair) and isinstance(s_r.right, Leaf)):
        raise NoCase("prom-prom: unexpected right conclusion shape")
    bj = s_r.right.value
    theta = s_r.left
    p_r = nodeR.premises[0]
    upR = S.upset(theta, bj.label, cfg.signature, "quest")
    if upR is None:
        raise NoCase("prom-prom: right upset undefined")
    erased_pos = [p for p, _ in upR[1]]
    kept = [q for q in consumed if q[1:] not in erased_pos]
    if kept and len(kept) != len(consumed):
        raise NoCase("prom-prom: occurrences split by the right upset")
    if kept:
        up_gamma = S.upset(gamma, bj.label, cfg.signature, "quest")
        if up_gamma is None:
            raise NoCase("prom-prom: gamma has no upset at the right label")
        g_j = up_gamma[0]
        l_reb = _rebuilt_prom(nodeL, g_j, a, cfg)
        track_in = C.erase_many_track(theta, erased_pos,
                                      [q[1:] for q in consumed])[1]
        prefix = (0,) if S.erase_many(theta, erased_pos) is not EMPTY else ()
        consumed_p = [prefix + t for t in track_in]
        des_p = consumed_p[consumed.index(des_r)]
        mix1 = _make_cutmix(l_reb, p_r, a, consumed_p, des_p, g_j)
        theta_map = {q[1:]: EMPTY for q in consumed}
        theta_map[des_r[1:]] = gamma
        v_struct = S.pair(S.multi_subst(theta, theta_map), S.leaf(bj))
        prom = _node(v_struct, "prom", C.NO_DATA, (mix1,), cfg)
        return C.sim_to(prom, cm.conclusion.structure)
    # all occurrences weakened away by the right promotion
    all_map = {q: EMPTY for q in consumed}
    v_struct = S.multi_subst(s_r, all_map)
    prom = _node(v_struct, "prom", C.NO_DATA, (p_r,), cfg)
    if gamma is EMPTY:
        return C.sim_to(prom, cm.conclusion.structure)
    fin_map = {q: EMPTY for q in consumed if q != des_r}
    fin_map[des_r] = gamma
    fin = S.multi_subst(s_r, fin_map)
    (pos,) = S.track_through_subst(s_r, fin_map, [des_r])
    if not all(cfg.signature.has(v.label, "W") for v in S.leaf_values(gamma)):
        raise NoCase("prom-prom: erased occurrence with unweakenable context")
    grown = _node(fin, "qw", Step(pos=pos), (C.sim_to(prom, S.erase(fin, pos)),), cfg)
    return C.sim_to(grown, cm.conclusion.structure)


def _sx_weak(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR, consumed,
             des_r, cfg):
    w = tuple(nodeR.data.get("pos"))
    s_r = nodeR.conclusion.structure
    inside = [q for q in consumed if q[: len(w)] == w]
    outside = [q for q in consumed if q[: len(w)] != w]
    if not inside:
        raise NoCase("prom-weak: no occurrence inside the erased block")
    sub = nodeR.premises[0]
    sib = w[:-1] + (1 - w[-1],)

    def emap(q):
        return w[:-1] + q[len(sib):] if q[: len(sib)] == sib else q

    def weaken_block(chain, mid_map):
        """qw node re-growing the block (with substitutions) at w."""
        mid = S.multi_subst(s_r, mid_map)
        (wpos,) = S.track_through_subst(s_r, mid_map, [w])
        if wpos is None:
            return C.sim_to(chain, mid)
        return _node(mid, "qw", Step(pos=wpos),
                     (C.sim_to(chain, S.erase(mid, wpos)),), cfg)

    if not outside:
        # the whole interaction happens inside the weakened block
        if gamma is not EMPTY and not all(
            cfg.signature.has(v.label, "W") for v in S.leaf_values(gamma)
        ):
            raise NoCase("prom-weak: context not weakenable")
        fin_map = {q: EMPTY for q in consumed if q != des_r}
        fin_map[des_r] = gamma
        grown = weaken_block(sub, fin_map)
        return C.sim_to(grown, cm.conclusion.structure)
    if des_r not in inside:
        # gamma lands outside; the block grows back without it
        mix1 = _make_cutmix(cm.premises[0], sub, a,
                            [emap(q) for q in outside], emap(des_r), gamma)
        fin_map = {q: EMPTY for q in consumed if q != des_r}
        fin_map[des_r] = gamma
        grown = weaken_block(mix1, fin_map)
        return C.sim_to(grown, cm.conclusion.structure)
    # gamma must end up inside the regrown block: park an upset copy on an
    # outside occurrence, put another inside the block, contract, weaken in
    spare_src = outside[0]
    l_up = _rebuilt_prom(nodeL, g_up, a, cfg)
    mix1 = _make_cutmix(l_up, sub, a, [emap(q) for q in outside],
                        emap(spare_src), g_up)
    mid_map = {q: EMPTY for q in consumed}
    mid_map[des_r] = g_up
    mid_map[spare_src] = g_up
    grown = weaken_block(mix1, mid_map)
    if g_up is EMPTY:
        (dpos,) = S.track_through_subst(s_r, mid_map, [des_r])
        restored = _restore_weakened(grown, dpos, gamma, erased_l)
        return C.sim_to(restored, cm.conclusion.structure)
    mid = grown.conclusion.structure
    spare, dpos = S.track_through_subst(s_r, mid_map, [spare_src, des_r])
    concl = S.erase(mid, spare)
    (keep1,) = C.erase_many_track(mid, [spare], [dpos])[1]
    dedup = _node(concl, "qc",
                  Step(src=keep1, dst=spare[:-1],
                       side="right" if spare[-1] == 1 else "left"),
                  (grown,), cfg)
    restored = _restore_weakened(dedup, keep1, gamma, erased_l)
    return C.sim_to(restored, cm.conclusion.structure)


def _sx_struct(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR, consumed,
               des_r, cfg):
    """Occurrences inside the licensor of a top-level licensed move."""
    rule = nodeR.rule
    s_r = nodeR.conclusion.structure
    sub = nodeR.premises[0]
    s_p = sub.conclusion.structure
    fn = _premise_maps(nodeR)[0]
    inside = [q for q in consumed if q[:1] == (1,)]
    if not inside:
        raise NoCase("prom-struct: no occurrence in the licensor")
    in_licensor = des_r in inside
    body = g_up if in_licensor else gamma
    left_for = _rebuilt_prom(nodeL, g_up, a, cfg) if in_licensor \
        else cm.premises[0]
    consumed_p = [fn(q) for q in consumed]
    des_p = consumed_p[consumed.index(des_r)]
    mix1 = _make_cutmix(left_for, sub, a, consumed_p, des_p, body)
    v_map = {q: EMPTY for q in consumed if q != des_r}
    v_map[des_r] = body
    v_struct = S.multi_subst(s_r, v_map)
    prem_map = {fn(q): v for q, v in v_map.items()}
    if mix1.conclusion.structure is not S.multi_subst(s_p, prem_map):
        raise NoCase("prom-struct: substituted premise mismatch")
    try:
        bottom = _node(v_struct, rule, nodeR.data, (mix1,), cfg)
    except NoCase:
        # the licensor was consumed entirely; the move is a free one now
        bottom = C.sim_to(mix1, v_struct)
    if in_licensor:
        (dpos,) = S.track_through_subst(s_r, v_map, [des_r])
        if dpos is not None:
            bottom = _restore_weakened(bottom, dpos, gamma, erased_l)
        elif gamma is not EMPTY:
            fin_map = dict(v_map)
            fin_map[des_r] = gamma
            fin = S.multi_subst(s_r, fin_map)
            (pos,) = S.track_through_subst(s_r, fin_map, [des_r])
            bottom = _node(fin, "qw", Step(pos=pos),
                           (C.sim_to(bottom, S.erase(fin, pos)),), cfg)
    return C.sim_to(bottom, cm.conclusion.structure)


def _sx_contr(cm, a, gamma, nodeL, p_l, g_up, erased_l, nodeR, consumed,
              des_r, cfg):
    src = tuple(nodeR.data.get("src"))
    dst = tuple(nodeR.data.get("dst"))
    side = nodeR.data.get("side")
    s_r = nodeR.conclusion.structure
    sub = nodeR.premises[0]
    s_p = sub.conclusion.structure
    fn = _premise_maps(nodeR)[0]
    ins = dst + ((0,) if side == "left" else (1,))
    inside = [q for q in consumed if q[: len(src)] == src]
    if not inside:
        raise NoCase("prom-contr: no occurrence in the copied block")
    rels = [q[len(src):] for q in inside]
    twins = [ins + r for r in rels]
    consumed_p = [fn(q) for q in consumed] + twins
    src_p = fn(src)
    if des_r not in inside:
        mix1 = _make_cutmix(cm.premises[0], sub, a, consumed_p, fn(des_r), gamma)
        v_map = {q: EMPTY for q in consumed if q != des_r}
        v_map[des_r] = gamma
        v_struct = S.multi_subst(s_r, v_map)
        try:
            bottom = _node(v_struct, "qc", _remap_step(nodeR, v_map),
                           (mix1,), cfg)
        except NoCase:
            bottom = C.sim_to(mix1, v_struct)
        return C.sim_to(bottom, cm.conclusion.structure)
    # the designated occurrence sits inside the copied block
    d_rel = des_r[len(src):]
    left_for = _rebuilt_prom(nodeL, g_up, a, cfg)
    des_p = fn(des_r)
    mix1 = _make_cutmix(left_for, sub, a, consumed_p, des_p, g_up)
    prem_map = {p: EMPTY for p in consumed_p if p != des_p}
    prem_map[des_p] = g_up
    if g_up is EMPTY:
        # both copies erode identically; contract whole blocks if any is left
        v_map = {q: EMPTY for q in consumed}
        v_struct = S.multi_subst(s_r, v_map)
        try:
            bottom = _node(v_struct, "qc", _remap_step(nodeR, v_map),
                           (mix1,), cfg)
        except NoCase:
            bottom = C.sim_to(mix1, v_struct)
        if gamma is EMPTY:
            return C.sim_to(bottom, cm.conclusion.structure)
        if not all(cfg.signature.has(v.label, "W") for v in S.leaf_values(gamma)):
            raise NoCase("prom-contr: context not weakenable")
        fin_map = {q: EMPTY for q in consumed if q != des_r}
        fin_map[des_r] = gamma
        fin = S.multi_subst(s_r, fin_map)
        (pos,) = S.track_through_subst(s_r, fin_map, [des_r])
        grown = _node(fin, "qw", Step(pos=pos),
                      (C.sim_to(bottom, S.erase(fin, pos)),), cfg)
        return C.sim_to(grown, cm.conclusion.structure)
    # erase what is left of the inserted copy piece by piece against the
    # matching pieces of the kept copy
    piece_srcs = []
    for k in range(len(d_rel) - 1, -1, -1):
        sib_rel = d_rel[:k] + (1 - d_rel[k],)
        piece_srcs.append((ins + sib_rel, src_p + sib_rel))
    tracks = [p for pair_ in piece_srcs for p in pair_] + [des_p]
    spots = S.track_through_subst(s_p, prem_map, tracks)
    piece_spots = list(zip(spots[0:-1:2], spots[1:-1:2]))
    dpos = spots[-1]
    cur = mix1
    for n, (piece, twin) in enumerate(piece_spots):
        if piece is None:
            continue
        if twin is None:
            raise NoCase("prom-contr: twin piece missing")
        cur_struct = cur.conclusion.structure
        concl = S.erase(cur_struct, piece)
        rest_tracks = [twin] + [
            p for pair_ in piece_spots[n + 1:] for p in pair_ if p is not None
        ] + [dpos]
        remapped = C.erase_many_track(cur_struct, [piece], rest_tracks)[1]
        cur = _node(concl, "qc",
                    Step(src=remapped[0], dst=piece[:-1],
                         side="right" if piece[-1] == 1 else "left"),
                    (cur,), cfg)
        # update the stored positions
        it = iter(remapped[1:-1])
        updated = []
        for pair_ in piece_spots[n + 1:]:
            new_pair = tuple(next(it) if p is not None else None for p in pair_)
            updated.append(new_pair)
        piece_spots[n + 1:] = updated
        dpos = remapped[-1]
    restored = _restore_weakened(cur, dpos, gamma, erased_l)
    return C.sim_to(restored, cm.conclusion.structure)
