"""Sequents, proof trees, rule schemas for the classical one-sided system
and the two intuitionistic two-sided systems, and an independent proof
checker.

Every rule application is replayable: a node's rule name plus its data
record determine the premises from the conclusion (the one exception is
mix, whose validation also inspects the stated premises).  The checker
never searches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import formulas as F
from . import structures as S
from .formulas import Signature
from .structures import EMPTY, Leaf, Pair, Structure


class MalformedProof(Exception):
    pass


# -- sequents ----------------------------------------------------------------


class Sequent:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        from . import syntax

        return syntax.fmt_sequent(self)


class OneSided(Sequent):
    __slots__ = ("structure",)


class TwoSided(Sequent):
    __slots__ = ("antecedent", "succedent")


_SEQ_TABLE: dict = {}


def one_sided(structure: Structure) -> OneSided:
    key = ("1", structure)
    got = _SEQ_TABLE.get(key)
    if got is None:
        got = object.__new__(OneSided)
        object.__setattr__(got, "structure", structure)
        _SEQ_TABLE[key] = got
    return got


def two_sided(antecedent: Structure, succedent: F.Formula) -> TwoSided:
    key = ("2", antecedent, succedent)
    got = _SEQ_TABLE.get(key)
    if got is None:
        got = object.__new__(TwoSided)
        object.__setattr__(got, "antecedent", antecedent)
        object.__setattr__(got, "succedent", succedent)
        _SEQ_TABLE[key] = got
    return got


def OneSided_(s):  # pragma: no cover - compat alias
    return one_sided(s)


# Allow `calculus.OneSided(x)`-style construction while keeping interning.
def _onesided_new(cls, structure):
    return one_sided(structure)


def _twosided_new(cls, antecedent, succedent):
    return two_sided(antecedent, succedent)


OneSided.__new__ = _onesided_new  # type: ignore[assignment]
TwoSided.__new__ = _twosided_new  # type: ignore[assignment]


# -- configuration -----------------------------------------------------------

SYSTEMS = ("cacll", "acll", "acll+")


@dataclass(frozen=True)
class CalculusConfig:
    system: str
    signature: Signature
    allow_cut: bool = False
    allow_zero: bool = False

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")

    @property
    def one_sided(self) -> bool:
        return self.system == "cacll"


# -- rule data records -------------------------------------------------------


class Step:
    """Immutable keyword bag describing a rule instantiation."""

    __slots__ = ("items",)

    def __init__(self, **kw):
        self.items = tuple(sorted(kw.items()))

    def get(self, key, default=None):
        for k, v in self.items:
            if k == key:
                return v
        return default

    def __eq__(self, other):
        return isinstance(other, Step) and self.items == other.items

    def __hash__(self):
        return hash(self.items)

    def __repr__(self):  # pragma: no cover
        inner = ", ".join(f"{k}={v!r}" for k, v in self.items)
        return f"Step({inner})"


NO_DATA = Step()


class Proof:
    """A derivation: a rule name, its instantiation data, and premises."""

    __slots__ = ("conclusion", "rule", "data", "premises")

    def __init__(self, conclusion: Sequent, rule: str, data: Step = NO_DATA,
                 premises: tuple = ()):
        self.conclusion = conclusion
        self.rule = rule
        self.data = data
        self.premises = tuple(premises)

    def __eq__(self, other):
        return (
            isinstance(other, Proof)
            and self.conclusion is other.conclusion
            and self.rule == other.rule
            and self.data == other.data
            and self.premises == other.premises
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):  # pragma: no cover
        return f"<{self.rule} {self.conclusion!r} / {len(self.premises)} premises>"


def endsequent(p: Proof) -> Sequent:
    return p.conclusion


def proof_size(p: Proof) -> int:
    return 1 + sum(proof_size(q) for q in p.premises)


def rule_nodes(p: Proof, names=None):
    """All (path, node) pairs, optionally restricted to given rule names."""
    out = []

    def go(node, path):
        if names is None or node.rule in names:
            out.append((path, node))
        for i, q in enumerate(node.premises):
            go(q, path + (i,))

    go(p, ())
    return out


def node_at(p: Proof, path) -> Proof:
    for i in path:
        p = p.premises[i]
    return p


def replace_node(p: Proof, path, new: Proof) -> Proof:
    if not path:
        return new
    i = path[0]
    kids = list(p.premises)
    kids[i] = replace_node(kids[i], path[1:], new)
    return Proof(p.conclusion, p.rule, p.data, tuple(kids))


# -- rule name sets ----------------------------------------------------------

ONE_SIDED_RULES = frozenset(
    "tensor par plus1 plus2 with bot one top init sim prom der "
    "qa1 qa2 qe qw qc cut mix".split()
)

TWO_SIDED_COMMON = frozenset(
    "init tensor_l tensor_r rimp_l rimp_r limp_l limp_r plus_l plus_r1 "
    "plus_r2 with_l1 with_l2 with_r one_l one_r top_r zero_l prom der "
    "weak contr exch1 exch2 cut".split()
)
ACLL_ONLY = frozenset(["assoc1", "assoc2"])
ACLLP_ONLY = frozenset(
    ["assoc1_l", "assoc1_m", "assoc1_r", "assoc2_l", "assoc2_m", "assoc2_r"]
)


def rules_for(system: str) -> frozenset:
    if system == "cacll":
        return ONE_SIDED_RULES
    if system == "acll":
        return TWO_SIDED_COMMON | ACLL_ONLY
    return TWO_SIDED_COMMON | ACLLP_ONLY


# -- leaf predicates ---------------------------------------------------------


def all_modal_licensed(block: Structure, feature: str, sig: Signature, kind: str) -> bool:
    """Every leaf is a ?-formula ('quest') or !-formula ('bang') whose label
    carries the feature."""
    cls = F.Quest if kind == "quest" else F.Bang
    vals = S.leaf_values(block)
    if not vals:
        return False
    return all(
        isinstance(v, cls) and v.label in sig and sig.has(v.label, feature)
        for v in vals
    )


class RuleFailure(Exception):
    """A node is not a valid instance of its named rule."""


def _fail(msg: str):
    raise RuleFailure(msg)


# -- one-sided rule schemas --------------------------------------------------


def _expect_leaf(struct: Structure, pos, cls, what: str):
    if pos is None:
        _fail(f"{what}: missing position")
    try:
        node = S.subtree(struct, tuple(pos))
    except KeyError:
        _fail(f"{what}: position {pos} not in structure")
    if not isinstance(node, Leaf) or not isinstance(node.value, cls):
        _fail(f"{what}: no {cls.__name__} leaf at {pos}")
    return node.value


def _sub(struct: Structure, pos, what: str) -> Structure:
    if pos is None:
        _fail(f"{what}: missing position")
    try:
        return S.subtree(struct, tuple(pos))
    except KeyError:
        _fail(f"{what}: position {pos} not in structure")


def premises_one_sided(seq: OneSided, rule: str, data: Step, cfg: CalculusConfig):
    sig = cfg.signature
    st = seq.structure
    if rule == "init":
        if not (
            isinstance(st, Pair)
            and isinstance(st.left, Leaf)
            and isinstance(st.right, Leaf)
            and F.is_literal(st.left.value)
            and st.right.value is F.dual(st.left.value)
        ):
            _fail("init needs a pair of dual literals")
        return ()
    if rule == "one":
        if st is not S.leaf(F.ONE):
            _fail("rule one closes exactly |- 1")
        return ()
    if rule == "top":
        _expect_leaf(st, data.get("pos"), F.Unit, "top")
        if S.subtree(st, data.get("pos")).value is not F.TOP:
            _fail("top: leaf is not top")
        return ()
    if rule == "par":
        pos = data.get("pos")
        f = _expect_leaf(st, pos, F.Par, "par")
        prem = S.replace(st, pos, S.pair(S.leaf(f.left), S.leaf(f.right)))
        return (one_sided(prem),)
    if rule in ("plus1", "plus2"):
        pos = data.get("pos")
        f = _expect_leaf(st, pos, F.Plus, rule)
        sub = f.left if rule == "plus1" else f.right
        return (one_sided(S.replace(st, pos, S.leaf(sub))),)
    if rule == "with":
        pos = data.get("pos")
        f = _expect_leaf(st, pos, F.With, "with")
        return (
            one_sided(S.replace(st, pos, S.leaf(f.left))),
            one_sided(S.replace(st, pos, S.leaf(f.right))),
        )
    if rule == "bot":
        pos = data.get("pos")
        v = _expect_leaf(st, pos, F.Unit, "bot")
        if v is not F.BOT:
            _fail("bot: leaf is not bot")
        prem = S.erase(st, pos)
        if prem is EMPTY:
            _fail("bot: erasing would empty the sequent")
        return (one_sided(prem),)
    if rule == "der":
        pos = data.get("pos")
        f = _expect_leaf(st, pos, F.Quest, "der")
        if f.label not in sig:
            _fail(f"der: unknown label {f.label!r}")
        return (one_sided(S.replace(st, pos, S.leaf(f.body))),)
    if rule == "tensor":
        g, d = data.get("gamma"), data.get("delta")
        if g is None or d is None:
            _fail("tensor: missing split")
        rest = S.pair(g, d)
        if isinstance(st, Pair) and isinstance(st.right, Leaf):
            tf = st.right.value
            ctx = st.left
        elif isinstance(st, Leaf):
            tf = st.value
            ctx = EMPTY
        else:
            _fail("tensor: conclusion is not (context, leaf)")
        if not isinstance(tf, F.Tensor):
            _fail("tensor: principal leaf is not a tensor")
        if ctx is not rest:
            _fail("tensor: split does not match the conclusion")
        return (
            one_sided(S.pair(g, S.leaf(tf.right))),
            one_sided(S.pair(d, S.leaf(tf.left))),
        )
    if rule == "prom":
        if isinstance(st, Pair) and isinstance(st.right, Leaf):
            bf = st.right.value
            ctx = st.left
        elif isinstance(st, Leaf):
            bf = st.value
            ctx = EMPTY
        else:
            _fail("prom: conclusion is not (context, leaf)")
        if not isinstance(bf, F.Bang):
            _fail("prom: principal leaf is not a bang")
        if bf.label not in sig:
            _fail(f"prom: unknown label {bf.label!r}")
        up = S.upset(ctx, bf.label, sig, "quest")
        if up is None:
            _fail("prom: upset of the context is undefined")
        kept, erased = up
        stated = data.get("erased")
        if stated is not None and tuple(stated) != erased:
            _fail("prom: stated erased leaves disagree with the upset")
        return (one_sided(S.pair(kept, S.leaf(bf.body))),)
    if rule == "qw":
        pos = data.get("pos")
        block = _sub(st, pos, "qw")
        if not all_modal_licensed(block, "W", sig, "quest"):
            _fail("qw: erased block is not all W-licensed quests")
        prem = S.erase(st, pos)
        if prem is EMPTY:
            _fail("qw: erasing would empty the sequent")
        return (one_sided(prem),)
    if rule == "qc":
        src, dst, side = data.get("src"), data.get("dst"), data.get("side")
        block = _sub(st, src, "qc")
        _sub(st, dst, "qc")
        if not all_modal_licensed(block, "C", sig, "quest"):
            _fail("qc: copied block is not all C-licensed quests")
        if dst[: len(src)] == tuple(src) and tuple(dst) != tuple(src):
            _fail("qc: insertion inside the copied occurrence")
        if side not in ("left", "right"):
            _fail("qc: bad side")
        return (one_sided(S.insert(st, dst, side, block)),)
    if rule == "qe":
        if not (isinstance(st, Pair) and isinstance(st.left, Pair)):
            _fail("qe: conclusion is not ((x1, x2), licensor)")
        if not all_modal_licensed(st.right, "E", sig, "quest"):
            _fail("qe: licensor is not all E-licensed quests")
        flipped = S.pair(S.pair(st.left.right, st.left.left), st.right)
        return (one_sided(flipped),)
    if rule in ("qa1", "qa2"):
        feature = "A1" if rule == "qa1" else "A2"
        direction = data.get("dir")
        if not isinstance(st, Pair):
            _fail(f"{rule}: conclusion is not (triple, licensor)")
        z, y = st.left, st.right
        if not all_modal_licensed(y, feature, sig, "quest"):
            _fail(f"{rule}: licensor is not all {feature}-licensed quests")
        if direction == "rl":
            if not (isinstance(z, Pair) and isinstance(z.right, Pair)):
                _fail(f"{rule}: conclusion triple is not right-nested")
            prem = S.pair(S.pair(S.pair(z.left, z.right.left), z.right.right), y)
        elif direction == "lr":
            if not (isinstance(z, Pair) and isinstance(z.left, Pair)):
                _fail(f"{rule}: conclusion triple is not left-nested")
            prem = S.pair(S.pair(z.left.left, S.pair(z.left.right, z.right)), y)
        else:
            _fail(f"{rule}: missing direction")
        return (one_sided(prem),)
    if rule == "sim":
        gens = data.get("gens")
        if not gens:
            _fail("sim: empty generator word")
        inv = {"e": "e", "a1": "a2", "a2": "a1"}
        cur = st
        try:
            for g in reversed(gens):
                nxt = S.apply_gen(cur, inv[g])
                if nxt is None:
                    _fail(f"sim: generator {g!r} does not replay")
                cur = nxt
        except KeyError:
            _fail("sim: unknown generator")
        return (one_sided(cur),)
    if rule == "cut":
        if not cfg.allow_cut:
            _fail("cut: not allowed by configuration")
        a = data.get("formula")
        g, d = data.get("gamma"), data.get("delta")
        if a is None or g is None or d is None:
            _fail("cut: missing data")
        if st is not S.pair(g, d):
            _fail("cut: conclusion does not match the split")
        return (
            one_sided(S.pair(g, S.leaf(a))),
            one_sided(S.pair(S.leaf(F.dual(a)), d)),
        )
    if rule == "mix":
        _fail("mix is validated against its premises")
    _fail(f"unknown one-sided rule {rule!r}")


def validate_mix(node: Proof, cfg: CalculusConfig) -> None:
    """Mix: left premise |- (G, !i.A); right premise contains the dual
    ?i.~A at the designated position and at each listed extra position.
    The conclusion replaces the designated occurrence by G and erases the
    others.  Contraction capability is needed as soon as copies exist."""
    if not cfg.allow_cut:
        _fail("mix: not allowed by configuration")
    data = node.data
    label, a = data.get("label"), data.get("formula")
    g = data.get("gamma")
    p0, others = data.get("pos"), data.get("others", ())
    if None in (label, a, g, p0):
        _fail("mix: missing data")
    if len(node.premises) != 2:
        _fail("mix: needs two premises")
    left, right = node.premises
    bangf = F.bang(label, a)
    if left.conclusion is not one_sided(S.pair(g, S.leaf(bangf))):
        _fail("mix: left premise shape mismatch")
    if not isinstance(right.conclusion, OneSided):
        _fail("mix: right premise must be one-sided")
    s2 = right.conclusion.structure
    dualf = F.quest(label, F.dual(a))
    spots = (tuple(p0),) + tuple(map(tuple, others))
    if len(set(spots)) != len(spots):
        _fail("mix: duplicate occurrence positions")
    for q in spots:
        v = _expect_leaf(s2, q, F.Quest, "mix")
        if v is not dualf:
            _fail("mix: listed occurrence is not the dual formula")
    if others and not cfg.signature.has(label, "C"):
        _fail("mix: contraction feature missing on the label")
    erased, tracked = erase_many_track(s2, [tuple(q) for q in others], [tuple(p0)])
    expected = S.replace(erased, tracked[0], g)
    if expected is EMPTY:
        _fail("mix: conclusion would be empty")
    if node.conclusion is not one_sided(expected):
        _fail("mix: conclusion mismatch")


def erase_many_track(s: Structure, erase_positions, tracked):
    """erase_many plus the new locations of tracked (disjoint) subtrees."""
    marked = set(map(tuple, erase_positions))
    tag_map = {tuple(tp): ("track", i) for i, tp in enumerate(tracked)}
    tagged = s
    for tp, tag in tag_map.items():
        tagged = S.replace(tagged, tp, S.leaf(tag))
    out_tagged = S.erase_many(tagged, marked)
    new_positions = []
    for tp in tracked:
        tag = tag_map[tuple(tp)]
        spots = [p for p, v in S.leaves(out_tagged) if v == tag]
        if len(spots) != 1:
            raise RuleFailure("tracked position vanished during erasure")
        new_positions.append(spots[0])
    return S.erase_many(s, marked), new_positions


# -- two-sided rule schemas --------------------------------------------------


def premises_two_sided(seq: TwoSided, rule: str, data: Step, cfg: CalculusConfig):
    sig = cfg.signature
    ant, succ = seq.antecedent, seq.succedent

    def sub(pos, what):
        return _sub(ant, pos, what)

    if rule == "init":
        if not (
            isinstance(ant, Leaf)
            and isinstance(ant.value, F.Atom)
            and ant.value is succ
        ):
            _fail("init needs an atomic antecedent equal to the succedent")
        return ()
    if rule == "one_r":
        if ant is not EMPTY or succ is not F.ONE:
            _fail("one_r closes exactly () |- 1")
        return ()
    if rule == "top_r":
        if succ is not F.TOP:
            _fail("top_r: succedent is not top")
        return ()
    if rule == "zero_l":
        if not cfg.allow_zero:
            _fail("zero_l: the 0 extension is off")
        pos = data.get("pos")
        node = sub(pos, "zero_l")
        if not (isinstance(node, Leaf) and node.value is F.ZERO):
            _fail("zero_l: no 0 leaf at the position")
        return ()
    if rule == "tensor_r":
        if not isinstance(succ, F.Tensor):
            _fail("tensor_r: succedent is not a tensor")
        g, d = data.get("gamma"), data.get("delta")
        if g is None or d is None or S.pair(g, d) is not ant:
            _fail("tensor_r: split does not match the antecedent")
        return (two_sided(g, succ.left), two_sided(d, succ.right))
    if rule == "rimp_r":
        if not isinstance(succ, F.RImp):
            _fail("rimp_r: succedent is not ->")
        return (two_sided(S.pair(S.leaf(succ.left), ant), succ.right),)
    if rule == "limp_r":
        if not isinstance(succ, F.LImp):
            _fail("limp_r: succedent is not <-")
        return (two_sided(S.pair(ant, S.leaf(succ.right)), succ.left),)
    if rule in ("plus_r1", "plus_r2"):
        if not isinstance(succ, F.Plus):
            _fail(f"{rule}: succedent is not +")
        return (two_sided(ant, succ.left if rule == "plus_r1" else succ.right),)
    if rule == "with_r":
        if not isinstance(succ, F.With):
            _fail("with_r: succedent is not &")
        return (two_sided(ant, succ.left), two_sided(ant, succ.right))
    if rule == "prom":
        if not isinstance(succ, F.Bang):
            _fail("prom: succedent is not a bang")
        if succ.label not in sig:
            _fail(f"prom: unknown label {succ.label!r}")
        up = S.upset(ant, succ.label, sig, "bang")
        if up is None:
            _fail("prom: upset of the antecedent is undefined")
        kept, erased = up
        stated = data.get("erased")
        if stated is not None and tuple(stated) != erased:
            _fail("prom: stated erased leaves disagree with the upset")
        return (two_sided(kept, succ.body),)
    if rule == "tensor_l":
        pos = data.get("pos")
        node = sub(pos, "tensor_l")
        if not (isinstance(node, Leaf) and isinstance(node.value, F.Tensor)):
            _fail("tensor_l: no tensor leaf at the position")
        f = node.value
        prem = S.replace(ant, pos, S.pair(S.leaf(f.left), S.leaf(f.right)))
        return (two_sided(prem, succ),)
    if rule == "one_l":
        pos = data.get("pos")
        node = sub(pos, "one_l")
        if not (isinstance(node, Leaf) and node.value is F.ONE):
            _fail("one_l: no 1 leaf at the position")
        return (two_sided(S.erase(ant, pos), succ),)
    if rule in ("rimp_l", "limp_l"):
        pos = data.get("pos")
        delta = data.get("delta")
        if delta is None:
            _fail(f"{rule}: missing argument structure")
        node = sub(pos, rule)
        if rule == "rimp_l":
            # (Delta, A -> B) at pos
            if isinstance(node, Leaf):
                impl = node.value
                if delta is not EMPTY:
                    _fail("rimp_l: split does not match")
            elif isinstance(node, Pair) and isinstance(node.right, Leaf):
                impl = node.right.value
                if node.left is not delta:
                    _fail("rimp_l: split does not match")
            else:
                _fail("rimp_l: position does not hold (Delta, ->)")
            if not isinstance(impl, F.RImp):
                _fail("rimp_l: principal formula is not ->")
            a, b = impl.left, impl.right
        else:
            # (B <- A, Delta) at pos
            if isinstance(node, Leaf):
                impl = node.value
                if delta is not EMPTY:
                    _fail("limp_l: split does not match")
            elif isinstance(node, Pair) and isinstance(node.left, Leaf):
                impl = node.left.value
                if node.right is not delta:
                    _fail("limp_l: split does not match")
            else:
                _fail("limp_l: position does not hold (<-, Delta)")
            if not isinstance(impl, F.LImp):
                _fail("limp_l: principal formula is not <-")
            b, a = impl.left, impl.right
        return (
            two_sided(delta, a),
            two_sided(S.replace(ant, pos, S.leaf(b)), succ),
        )
    if rule == "plus_l":
        pos = data.get("pos")
        node = sub(pos, "plus_l")
        if not (isinstance(node, Leaf) and isinstance(node.value, F.Plus)):
            _fail("plus_l: no + leaf at the position")
        f = node.value
        return (
            two_sided(S.replace(ant, pos, S.leaf(f.left)), succ),
            two_sided(S.replace(ant, pos, S.leaf(f.right)), succ),
        )
    if rule in ("with_l1", "with_l2"):
        pos = data.get("pos")
        node = sub(pos, rule)
        if not (isinstance(node, Leaf) and isinstance(node.value, F.With)):
            _fail(f"{rule}: no & leaf at the position")
        f = node.value
        pick = f.left if rule == "with_l1" else f.right
        return (two_sided(S.replace(ant, pos, S.leaf(pick)), succ),)
    if rule == "der":
        pos = data.get("pos")
        node = sub(pos, "der")
        if not (isinstance(node, Leaf) and isinstance(node.value, F.Bang)):
            _fail("der: no bang leaf at the position")
        f = node.value
        if f.label not in sig:
            _fail(f"der: unknown label {f.label!r}")
        return (two_sided(S.replace(ant, pos, S.leaf(f.body)), succ),)
    if rule == "weak":
        pos = data.get("pos")
        block = sub(pos, "weak")
        if not all_modal_licensed(block, "W", sig, "bang"):
            _fail("weak: erased block is not all W-licensed bangs")
        return (two_sided(S.erase(ant, pos), succ),)
    if rule == "contr":
        src, dst, side = data.get("src"), data.get("dst"), data.get("side")
        block = sub(src, "contr")
        sub(dst, "contr")
        if not all_modal_licensed(block, "C", sig, "bang"):
            _fail("contr: copied block is not all C-licensed bangs")
        if tuple(dst)[: len(src)] == tuple(src) and tuple(dst) != tuple(src):
            _fail("contr: insertion inside the copied occurrence")
        if side not in ("left", "right"):
            _fail("contr: bad side")
        return (two_sided(S.insert(ant, dst, side, block), succ),)
    if rule in ("exch1", "exch2"):
        pos = data.get("pos")
        node = sub(pos, rule)
        if not isinstance(node, Pair):
            _fail(f"{rule}: position does not hold a pair")
        licensed = node.left if rule == "exch1" else node.right
        if not all_modal_licensed(licensed, "E", sig, "bang"):
            _fail(f"{rule}: moved block is not all E-licensed bangs")
        prem = S.replace(ant, pos, S.pair(node.right, node.left))
        return (two_sided(prem, succ),)
    if rule in ("assoc1", "assoc1_l", "assoc1_m", "assoc1_r",
                "assoc2", "assoc2_l", "assoc2_m", "assoc2_r"):
        return _assoc_premise(seq, rule, data, cfg)
    if rule == "cut":
        if not cfg.allow_cut:
            _fail("cut: not allowed by configuration")
        pos = data.get("pos")
        a = data.get("formula")
        delta = data.get("delta")
        if a is None or delta is None:
            _fail("cut: missing data")
        node = sub(pos, "cut")
        if node is not delta:
            _fail("cut: antecedent does not hold the stated structure")
        return (
            two_sided(delta, a),
            two_sided(S.replace(ant, pos, S.leaf(a)), succ),
        )
    _fail(f"unknown two-sided rule {rule!r}")


_ASSOC_SHAPES = {
    # rule: (feature, licensor slot among the ordered triple)
    # The re-association axioms are equivalences, so each rule fires in both
    # directions; 'dir' in the data says which nesting the conclusion has
    # ('rl': right-nested conclusion, 'lr': left-nested conclusion).  The
    # printed forms are 'rl' for assoc1/assoc1_l/assoc1_r/assoc2_m and 'lr'
    # for the rest.
    "assoc1": ("A1", 0),
    "assoc1_l": ("A1", 0),
    "assoc1_m": ("A1", 1),
    "assoc1_r": ("A1", 2),
    "assoc2": ("A2", 2),
    "assoc2_l": ("A2", 0),
    "assoc2_m": ("A2", 1),
    "assoc2_r": ("A2", 2),
}


def _assoc_premise(seq: TwoSided, rule: str, data: Step, cfg: CalculusConfig):
    feature, slot = _ASSOC_SHAPES[rule]
    allowed = ACLL_ONLY if cfg.system == "acll" else ACLLP_ONLY
    if cfg.system == "cacll" or rule not in allowed:
        _fail(f"{rule}: not part of system {cfg.system}")
    ant = seq.antecedent
    pos = data.get("pos")
    direction = data.get("dir")
    node = _sub(ant, pos, rule)
    if direction == "rl":
        # conclusion (x1, (x2, x3)); premise ((x1, x2), x3)
        if not (isinstance(node, Pair) and isinstance(node.right, Pair)):
            _fail(f"{rule}: conclusion triple is not right-nested")
        x1, x2, x3 = node.left, node.right.left, node.right.right
        prem_node = S.pair(S.pair(x1, x2), x3)
    elif direction == "lr":
        if not (isinstance(node, Pair) and isinstance(node.left, Pair)):
            _fail(f"{rule}: conclusion triple is not left-nested")
        x1, x2, x3 = node.left.left, node.left.right, node.right
        prem_node = S.pair(x1, S.pair(x2, x3))
    else:
        _fail(f"{rule}: missing direction")
    licensed = (x1, x2, x3)[slot]
    if not all_modal_licensed(licensed, feature, cfg.signature, "bang"):
        _fail(f"{rule}: block {slot + 1} is not all {feature}-licensed bangs")
    return (two_sided(S.replace(ant, pos, prem_node), seq.succedent),)


# -- well-formedness ---------------------------------------------------------


def check_sequent(seq: Sequent, cfg: CalculusConfig) -> Optional[str]:
    sig = cfg.signature
    if isinstance(seq, OneSided):
        if cfg.system != "cacll":
            return "one-sided sequent in a two-sided system"
        if seq.structure is EMPTY:
            return "one-sided sequent with empty structure"
        for _, v in S.leaves(seq.structure):
            if not isinstance(v, F.Formula) or not F.is_classical(v):
                return f"leaf {v!r} is not a classical formula"
            for lab in F.subexp_labels(v):
                if lab not in sig:
                    return f"unknown subexponential label {lab!r}"
        return None
    if cfg.system == "cacll":
        return "two-sided sequent in the one-sided system"
    vals = [v for _, v in S.leaves(seq.antecedent)] + [seq.succedent]
    for v in vals:
        if not isinstance(v, F.Formula) or not F.is_intuitionistic(v, cfg.allow_zero):
            return f"{v!r} is not an intuitionistic formula here"
        for lab in F.subexp_labels(v):
            if lab not in sig:
                return f"unknown subexponential label {lab!r}"
    return None


# -- the checker -------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    path: Optional[tuple] = None
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


def expected_premises(seq: Sequent, rule: str, data: Step, cfg: CalculusConfig):
    if isinstance(seq, OneSided):
        return premises_one_sided(seq, rule, data, cfg)
    return premises_two_sided(seq, rule, data, cfg)


def check(proof: Proof, cfg: CalculusConfig) -> CheckResult:
    """Validate every node against its named rule; on failure the result
    names the first offending node (preorder) and the broken condition."""

    def go(node: Proof, path) -> CheckResult:
        bad = check_sequent(node.conclusion, cfg)
        if bad:
            return CheckResult(False, path, bad)
        if node.rule not in rules_for(cfg.system):
            return CheckResult(False, path, f"rule {node.rule!r} not in {cfg.system}")
        try:
            if node.rule == "mix":
                validate_mix(node, cfg)
                expect = tuple(q.conclusion for q in node.premises)
            else:
                expect = expected_premises(node.conclusion, node.rule, node.data, cfg)
        except RuleFailure as e:
            return CheckResult(False, path, str(e))
        if len(expect) != len(node.premises):
            return CheckResult(
                False, path,
                f"{node.rule} expects {len(expect)} premises, has {len(node.premises)}",
            )
        for i, (want, child) in enumerate(zip(expect, node.premises)):
            if child.conclusion is not want:
                from . import syntax

                return CheckResult(
                    False, path + (i,),
                    f"premise {i} of {node.rule} should conclude "
                    f"{syntax.fmt_sequent(want)!r}, child concludes "
                    f"{syntax.fmt_sequent(child.conclusion)!r}",
                )
        for i, child in enumerate(node.premises):
            res = go(child, path + (i,))
            if not res.ok:
                return res
        return CheckResult(True)

    return go(proof, ())


def assert_valid(proof: Proof, cfg: CalculusConfig) -> None:
    res = check(proof, cfg)
    if not res.ok:
        raise MalformedProof(f"at node {res.path}: {res.reason}")


# -- proof construction helpers ----------------------------------------------


def sim_to(proof: Proof, target: Structure) -> Proof:
    """Wrap a one-sided proof in a structural-move node reaching target."""
    assert isinstance(proof.conclusion, OneSided)
    src = proof.conclusion.structure
    if src is target:
        return proof
    gens = S.sim_path(src, target)
    if gens is None:
        raise MalformedProof(
            f"structures not equivalent: {src!r} vs {target!r}"
        )
    return Proof(one_sided(target), "sim", Step(gens=gens), (proof,))


def expand_identity(f: F.Formula) -> Proof:
    """A cut-free proof of |- (dual(f), f) for any classical formula."""
    concl = one_sided(S.pair(S.leaf(F.dual(f)), S.leaf(f)))
    if F.is_literal(f):
        return Proof(concl, "init")
    if f is F.ONE:
        return Proof(concl, "bot", Step(pos=(0,)), (Proof(one_sided(S.leaf(F.ONE)), "one"),))
    if f is F.BOT:
        return Proof(concl, "bot", Step(pos=(1,)), (Proof(one_sided(S.leaf(F.ONE)), "one"),))
    if f is F.TOP:
        return Proof(concl, "top", Step(pos=(1,)))
    if f is F.ZERO:
        return Proof(concl, "top", Step(pos=(0,)))
    if isinstance(f, F.Tensor):
        a, b = f.left, f.right
        inner = one_sided(
            S.pair(S.pair(S.leaf(F.dual(b)), S.leaf(F.dual(a))), S.leaf(f))
        )
        split = Proof(
            inner, "tensor",
            Step(gamma=S.leaf(F.dual(b)), delta=S.leaf(F.dual(a))),
            (expand_identity(b), expand_identity(a)),
        )
        return Proof(concl, "par", Step(pos=(0,)), (split,))
    if isinstance(f, F.Par):
        a, b = f.left, f.right
        flipped = one_sided(S.pair(S.leaf(f), S.leaf(F.dual(f))))
        split_struct = S.pair(S.pair(S.leaf(a), S.leaf(b)), S.leaf(F.dual(f)))
        split = Proof(
            one_sided(split_struct), "tensor",
            Step(gamma=S.leaf(a), delta=S.leaf(b)),
            (expand_identity(F.dual(a)), expand_identity(F.dual(b))),
        )
        parred = Proof(flipped, "par", Step(pos=(0,)), (split,))
        return Proof(concl, "sim", Step(gens=("e",)), (parred,))
    if isinstance(f, F.Plus):
        a, b = f.left, f.right
        left = Proof(
            one_sided(S.pair(S.leaf(F.dual(a)), S.leaf(f))),
            "plus1", Step(pos=(1,)), (expand_identity(a),),
        )
        right = Proof(
            one_sided(S.pair(S.leaf(F.dual(b)), S.leaf(f))),
            "plus2", Step(pos=(1,)), (expand_identity(b),),
        )
        return Proof(concl, "with", Step(pos=(0,)), (left, right))
    if isinstance(f, F.With):
        a, b = f.left, f.right
        left = Proof(
            one_sided(S.pair(S.leaf(F.dual(f)), S.leaf(a))),
            "plus1", Step(pos=(0,)), (expand_identity(a),),
        )
        right = Proof(
            one_sided(S.pair(S.leaf(F.dual(f)), S.leaf(b))),
            "plus2", Step(pos=(0,)), (expand_identity(b),),
        )
        return Proof(concl, "with", Step(pos=(1,)), (left, right))
    if isinstance(f, F.Bang):
        body = expand_identity(f.body)
        dered = Proof(
            one_sided(S.pair(S.leaf(F.quest(f.label, F.dual(f.body))), S.leaf(f.body))),
            "der", Step(pos=(0,)), (body,),
        )
        return Proof(concl, "prom", Step(erased=()), (dered,))
    if isinstance(f, F.Quest):
        flipped = one_sided(S.pair(S.leaf(f), S.leaf(F.dual(f))))
        body = expand_identity(F.dual(f.body))
        dered = Proof(
            one_sided(S.pair(S.leaf(f), S.leaf(F.dual(f.body)))),
            "der", Step(pos=(0,)), (body,),
        )
        prommed = Proof(flipped, "prom", Step(erased=()), (dered,))
        return Proof(concl, "sim", Step(gens=("e",)), (prommed,))
    raise TypeError(f"cannot expand identity on {f!r}")


# -- bottom-up rule instance enumeration --------------------------------------


class Instance:
    """One backward rule application: conclusion is the (possibly moved)
    class member the rule fires on."""

    __slots__ = ("rule", "data", "conclusion", "premises")

    def __init__(self, rule, data, conclusion, premises):
        self.rule = rule
        self.data = data
        self.conclusion = conclusion
        self.premises = tuple(premises)

    def __repr__(self):  # pragma: no cover
        return f"<{self.rule} at {self.conclusion!r}>"


def _inst(out, seen, rule, data, conclusion, cfg):
    key = (rule, data, conclusion)
    if key in seen:
        return
    seen.add(key)
    try:
        if rule == "mix":
            return
        premises = expected_premises(conclusion, rule, data, cfg)
    except RuleFailure:
        return
    out.append(Instance(rule, data, conclusion, premises))


def applicable_rules(seq: Sequent, cfg: CalculusConfig):
    """Every bottom-up rule instance on seq (modulo structural moves for the
    one-sided system), in the fixed search order.  Cut and mix are never
    enumerated."""
    if isinstance(seq, OneSided):
        return _applicable_one_sided(seq, cfg)
    return _applicable_two_sided(seq, cfg)


def _applicable_one_sided(seq: OneSided, cfg: CalculusConfig):
    sig = cfg.signature
    st = seq.structure
    out: list = []
    seen: set = set()
    lvs = S.leaves(st)
    members = sorted(S.equivalence_class(st), key=S.struct_key)

    # closers
    if (
        isinstance(st, Pair)
        and isinstance(st.left, Leaf)
        and isinstance(st.right, Leaf)
        and F.is_literal(st.left.value)
        and st.right.value is F.dual(st.left.value)
    ):
        _inst(out, seen, "init", NO_DATA, seq, cfg)
    if st is S.leaf(F.ONE):
        _inst(out, seen, "one", NO_DATA, seq, cfg)
    for pos, v in lvs:
        if v is F.TOP:
            _inst(out, seen, "top", Step(pos=pos), seq, cfg)

    # invertible-ish context rules
    for pos, v in lvs:
        if isinstance(v, F.Par):
            _inst(out, seen, "par", Step(pos=pos), seq, cfg)
    for pos, v in lvs:
        if isinstance(v, F.With):
            _inst(out, seen, "with", Step(pos=pos), seq, cfg)
    for pos, v in lvs:
        if v is F.BOT:
            _inst(out, seen, "bot", Step(pos=pos), seq, cfg)
    for pos, v in lvs:
        if isinstance(v, F.Quest) and v.label in sig:
            _inst(out, seen, "der", Step(pos=pos), seq, cfg)
    for pos, v in lvs:
        if isinstance(v, F.Plus):
            _inst(out, seen, "plus1", Step(pos=pos), seq, cfg)
            _inst(out, seen, "plus2", Step(pos=pos), seq, cfg)

    # tensor splits over the equivalence class
    for m in members:
        if isinstance(m, Leaf) and isinstance(m.value, F.Tensor):
            _inst(out, seen, "tensor", Step(gamma=EMPTY, delta=EMPTY),
                  one_sided(m), cfg)
        if isinstance(m, Pair) and isinstance(m.right, Leaf) and isinstance(
            m.right.value, F.Tensor
        ):
            ms = one_sided(m)
            x = m.left
            if isinstance(x, Pair):
                _inst(out, seen, "tensor", Step(gamma=x.left, delta=x.right), ms, cfg)
            _inst(out, seen, "tensor", Step(gamma=EMPTY, delta=x), ms, cfg)
            _inst(out, seen, "tensor", Step(gamma=x, delta=EMPTY), ms, cfg)

    # promotion
    for m in members:
        if isinstance(m, Leaf) and isinstance(m.value, F.Bang):
            _inst(out, seen, "prom", NO_DATA, one_sided(m), cfg)
        if isinstance(m, Pair) and isinstance(m.right, Leaf) and isinstance(
            m.right.value, F.Bang
        ):
            _inst(out, seen, "prom", NO_DATA, one_sided(m), cfg)

    # licensed structural rules
    for m in members:
        if not isinstance(m, Pair):
            continue
        ms = one_sided(m)
        z, y = m.left, m.right
        for rule, feature in (("qa1", "A1"), ("qa2", "A2")):
            if all_modal_licensed(y, feature, sig, "quest"):
                if isinstance(z, Pair) and isinstance(z.right, Pair):
                    _inst(out, seen, rule, Step(dir="rl"), ms, cfg)
                if isinstance(z, Pair) and isinstance(z.left, Pair):
                    _inst(out, seen, rule, Step(dir="lr"), ms, cfg)
        if isinstance(z, Pair) and all_modal_licensed(y, "E", sig, "quest"):
            _inst(out, seen, "qe", NO_DATA, ms, cfg)
    for pos in S.positions(st):
        block = S.subtree(st, pos)
        if all_modal_licensed(block, "W", sig, "quest"):
            _inst(out, seen, "qw", Step(pos=pos), seq, cfg)

    # contraction last
    for src in S.positions(st):
        block = S.subtree(st, src)
        if not all_modal_licensed(block, "C", sig, "quest"):
            continue
        for dst in S.positions(st):
            if dst[: len(src)] == src and dst != src:
                continue
            for side in ("left", "right"):
                _inst(out, seen, "qc", Step(src=src, dst=dst, side=side), seq, cfg)
    return out


def _applicable_two_sided(seq: TwoSided, cfg: CalculusConfig):
    sig = cfg.signature
    ant, succ = seq.antecedent, seq.succedent
    out: list = []
    seen: set = set()
    lvs = S.leaves(ant)

    # closers
    if isinstance(ant, Leaf) and isinstance(ant.value, F.Atom) and ant.value is succ:
        _inst(out, seen, "init", NO_DATA, seq, cfg)
    if ant is EMPTY and succ is F.ONE:
        _inst(out, seen, "one_r", NO_DATA, seq, cfg)
    if succ is F.TOP:
        _inst(out, seen, "top_r", NO_DATA, seq, cfg)
    if cfg.allow_zero:
        for pos, v in lvs:
            if v is F.ZERO:
                _inst(out, seen, "zero_l", Step(pos=pos), seq, cfg)

    # invertible-ish
    for pos, v in lvs:
        if isinstance(v, F.Tensor):
            _inst(out, seen, "tensor_l", Step(pos=pos), seq, cfg)
    for pos, v in lvs:
        if v is F.ONE:
            _inst(out, seen, "one_l", Step(pos=pos), seq, cfg)
    if isinstance(succ, F.RImp):
        _inst(out, seen, "rimp_r", NO_DATA, seq, cfg)
    if isinstance(succ, F.LImp):
        _inst(out, seen, "limp_r", NO_DATA, seq, cfg)
    if isinstance(succ, F.With):
        _inst(out, seen, "with_r", NO_DATA, seq, cfg)
    for pos, v in lvs:
        if isinstance(v, F.Plus):
            _inst(out, seen, "plus_l", Step(pos=pos), seq, cfg)
    for pos, v in lvs:
        if isinstance(v, F.Bang):
            _inst(out, seen, "der", Step(pos=pos), seq, cfg)

    # choice rules
    if isinstance(succ, F.Plus):
        _inst(out, seen, "plus_r1", NO_DATA, seq, cfg)
        _inst(out, seen, "plus_r2", NO_DATA, seq, cfg)
    for pos, v in lvs:
        if isinstance(v, F.With):
            _inst(out, seen, "with_l1", Step(pos=pos), seq, cfg)
            _inst(out, seen, "with_l2", Step(pos=pos), seq, cfg)

    # splits
    if isinstance(succ, F.Tensor):
        if isinstance(ant, Pair):
            _inst(out, seen, "tensor_r", Step(gamma=ant.left, delta=ant.right), seq, cfg)
        _inst(out, seen, "tensor_r", Step(gamma=EMPTY, delta=ant), seq, cfg)
        _inst(out, seen, "tensor_r", Step(gamma=ant, delta=EMPTY), seq, cfg)
    for pos, v in lvs:
        if isinstance(v, F.RImp):
            _inst(out, seen, "rimp_l", Step(pos=pos, delta=EMPTY), seq, cfg)
            if pos and pos[-1] == 1:
                parent = S.subtree(ant, pos[:-1])
                _inst(out, seen, "rimp_l",
                      Step(pos=pos[:-1], delta=parent.left), seq, cfg)
        if isinstance(v, F.LImp):
            _inst(out, seen, "limp_l", Step(pos=pos, delta=EMPTY), seq, cfg)
            if pos and pos[-1] == 0:
                parent = S.subtree(ant, pos[:-1])
                _inst(out, seen, "limp_l",
                      Step(pos=pos[:-1], delta=parent.right), seq, cfg)

    # promotion
    if isinstance(succ, F.Bang):
        _inst(out, seen, "prom", NO_DATA, seq, cfg)

    # licensed structural rules
    for pos in S.positions(ant):
        block = S.subtree(ant, pos)
        if all_modal_licensed(block, "W", sig, "bang"):
            _inst(out, seen, "weak", Step(pos=pos), seq, cfg)
    for pos in S.positions(ant):
        node = S.subtree(ant, pos)
        if not isinstance(node, Pair):
            continue
        if all_modal_licensed(node.left, "E", sig, "bang"):
            _inst(out, seen, "exch1", Step(pos=pos), seq, cfg)
        if all_modal_licensed(node.right, "E", sig, "bang"):
            _inst(out, seen, "exch2", Step(pos=pos), seq, cfg)
    assoc_rules = ACLL_ONLY if cfg.system == "acll" else ACLLP_ONLY
    for rule in sorted(assoc_rules):
        for pos in S.positions(ant):
            for direction in ("rl", "lr"):
                _inst(out, seen, rule, Step(pos=pos, dir=direction), seq, cfg)

    # contraction last
    for src in S.positions(ant):
        block = S.subtree(ant, src)
        if not all_modal_licensed(block, "C", sig, "bang"):
            continue
        for dst in S.positions(ant):
            if dst[: len(src)] == src and dst != src:
                continue
            for side in ("left", "right"):
                _inst(out, seen, "contr", Step(src=src, dst=dst, side=side), seq, cfg)
    return out
