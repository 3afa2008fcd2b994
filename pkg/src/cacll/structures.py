"""Structures: binary trees of formulas with an empty structure, contexts
with holes, top-level structural equivalence, the designator, and the upset
operation that guards promotion.

Trees are hash-consed like formulas; leaf payloads may be any hashable
value (formulas, tagged pairs, the hole marker), which lets the same
machinery track positions through rearrangements.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, Optional

from . import formulas
from .formulas import Bang, Quest, Signature


class Structure:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        from . import syntax

        return syntax.fmt_structure(self)


class _Empty(Structure):
    __slots__ = ()


class Leaf(Structure):
    __slots__ = ("value",)


class Pair(Structure):
    __slots__ = ("left", "right")


EMPTY: Structure = object.__new__(_Empty)

_TABLE: dict = {EMPTY: EMPTY}


def leaf(value) -> Leaf:
    key = ("L", value)
    got = _TABLE.get(key)
    if got is None:
        got = object.__new__(Leaf)
        object.__setattr__(got, "value", value)
        _TABLE[key] = got
    return got


def pair(left: Structure, right: Structure) -> Structure:
    """Normalising pair constructor: empty children are wiped out."""
    if left is EMPTY:
        return right
    if right is EMPTY:
        return left
    key = ("P", left, right)
    got = _TABLE.get(key)
    if got is None:
        got = object.__new__(Pair)
        object.__setattr__(got, "left", left)
        object.__setattr__(got, "right", right)
        _TABLE[key] = got
    return got


def structure_of(items) -> Structure:
    """Right-nested structure from an iterable of leaf payloads."""
    out = EMPTY
    for v in reversed(list(items)):
        out = pair(leaf(v), out)
    return out


# -- basic tree operations -------------------------------------------------

Position = tuple  # of 0 (left) / 1 (right) steps


def subtree(s: Structure, pos: Position) -> Structure:
    for step in pos:
        if not isinstance(s, Pair):
            raise KeyError(f"position {pos} not in structure")
        s = s.left if step == 0 else s.right
    return s


def replace(s: Structure, pos: Position, new: Structure) -> Structure:
    """Replace the subtree at pos (normalising away EMPTY)."""
    if not pos:
        return new
    if not isinstance(s, Pair):
        raise KeyError(f"position {pos} not in structure")
    if pos[0] == 0:
        return pair(replace(s.left, pos[1:], new), s.right)
    return pair(s.left, replace(s.right, pos[1:], new))


def erase(s: Structure, pos: Position) -> Structure:
    return replace(s, pos, EMPTY)


def erase_many(s: Structure, positions: Iterable[Position]) -> Structure:
    marked = set(map(tuple, positions))
    for p in marked:
        for q in marked:
            if p != q and p[: len(q)] == q:
                raise ValueError("overlapping erase positions")

    def go(t: Structure, prefix: Position) -> Structure:
        if prefix in marked:
            return EMPTY
        if isinstance(t, Pair):
            return pair(go(t.left, prefix + (0,)), go(t.right, prefix + (1,)))
        return t

    return go(s, ())


def insert(s: Structure, pos: Position, side: str, block: Structure) -> Structure:
    """Put block beside the subtree at pos ('left' or 'right' of it)."""
    at = subtree(s, pos)
    grown = pair(block, at) if side == "left" else pair(at, block)
    return replace(s, pos, grown)


def leaves(s: Structure):
    """All (position, payload) pairs, left to right."""
    out = []

    def go(t, prefix):
        if isinstance(t, Leaf):
            out.append((prefix, t.value))
        elif isinstance(t, Pair):
            go(t.left, prefix + (0,))
            go(t.right, prefix + (1,))

    go(s, ())
    return out


def leaf_values(s: Structure):
    return [v for _, v in leaves(s)]


def positions(s: Structure):
    """All subtree positions (root first, preorder)."""
    out = []

    def go(t, prefix):
        out.append(prefix)
        if isinstance(t, Pair):
            go(t.left, prefix + (0,))
            go(t.right, prefix + (1,))

    if s is not EMPTY:
        go(s, ())
    return out


def leaf_count(s: Structure) -> int:
    if isinstance(s, Pair):
        return leaf_count(s.left) + leaf_count(s.right)
    return 0 if s is EMPTY else 1


def map_leaves(s: Structure, fn: Callable) -> Structure:
    if isinstance(s, Leaf):
        return leaf(fn(s.value))
    if isinstance(s, Pair):
        return pair(map_leaves(s.left, fn), map_leaves(s.right, fn))
    return s


def reverse(s: Structure) -> Structure:
    """Mirror image: reverse((G, D)) = (reverse(D), reverse(G))."""
    if isinstance(s, Pair):
        return pair(reverse(s.right), reverse(s.left))
    return s


def mirror_pos(pos: Position) -> Position:
    return tuple(1 - step for step in pos)


_key_cache: dict = {}


def struct_key(s: Structure):
    """Deterministic total order key, used to pick canonical class members."""
    got = _key_cache.get(id(s))
    if got is None:
        if s is EMPTY:
            got = (0,)
        elif isinstance(s, Leaf):
            got = (1, _leaf_key(s.value))
        else:
            got = (2, struct_key(s.left), struct_key(s.right))
        _key_cache[id(s)] = got
    return got


def _leaf_key(v):
    if isinstance(v, formulas.Formula):
        return _formula_key(v)
    return (str(type(v).__name__), str(v))


_fkey_cache: dict = {}


def _formula_key(f):
    got = _fkey_cache.get(id(f))
    if got is None:
        if isinstance(f, formulas.Atom):
            got = ("a", f.name)
        elif isinstance(f, formulas.NegAtom):
            got = ("n", f.name)
        elif isinstance(f, formulas.Unit):
            got = ("u", f.tag)
        elif isinstance(f, (Bang, Quest)):
            got = (type(f).__name__, f.label, _formula_key(f.body))
        else:
            got = (type(f).__name__, _formula_key(f.left), _formula_key(f.right))
        _fkey_cache[id(f)] = got
    return got


# -- structural equivalence (top-level exchange and reassociation) ---------

GENS = ("e", "a1", "a2")


def apply_gen(s: Structure, gen: str) -> Optional[Structure]:
    """One top-level move, premise-to-conclusion direction; None if shape
    does not match."""
    if not isinstance(s, Pair):
        return None
    if gen == "e":
        return pair(s.right, s.left)
    if gen == "a1":
        if isinstance(s.right, Pair):
            return pair(pair(s.left, s.right.left), s.right.right)
        return None
    if gen == "a2":
        if isinstance(s.left, Pair):
            return pair(s.left.left, pair(s.left.right, s.right))
        return None
    raise ValueError(f"unknown generator {gen!r}")


def gen_pos_map(s: Structure, gen: str, pos: Position) -> Position:
    """Where a position of s lands after apply_gen(s, gen)."""
    if gen == "e":
        if pos[:1] == (0,):
            return (1,) + pos[1:]
        if pos[:1] == (1,):
            return (0,) + pos[1:]
    elif gen == "a1":
        if pos[:1] == (0,):
            return (0, 0) + pos[1:]
        if pos[:2] == (1, 0):
            return (0, 1) + pos[2:]
        if pos[:2] == (1, 1):
            return (1,) + pos[2:]
    elif gen == "a2":
        if pos[:2] == (0, 0):
            return (0,) + pos[2:]
        if pos[:2] == (0, 1):
            return (1, 0) + pos[2:]
        if pos[:1] == (1,):
            return (1, 1) + pos[1:]
    raise ValueError(f"position {pos} incompatible with {gen}")


def gen_pos_unmap(s_conclusion: Structure, gen: str, pos: Position) -> Position:
    """Inverse of gen_pos_map: position in the conclusion back to the premise."""
    inverse = {"e": "e", "a1": "a2", "a2": "a1"}[gen]
    return gen_pos_map(s_conclusion, inverse, pos)


_class_cache: dict = {}


def equivalence_class(s: Structure) -> frozenset:
    """All structures reachable by top-level moves (finite, small)."""
    got = _class_cache.get(id(s))
    if got is not None:
        return got
    seen = {s}
    queue = deque([s])
    while queue:
        cur = queue.popleft()
        for gen in GENS:
            nxt = apply_gen(cur, gen)
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    got = frozenset(seen)
    for member in got:
        _class_cache[id(member)] = got
    return got


def equivalent(a: Structure, b: Structure) -> bool:
    if a is b:
        return True
    if leaf_count(a) != leaf_count(b):
        return False
    return b in equivalence_class(a)


def sim_path(src: Structure, dst: Structure) -> Optional[tuple]:
    """Generator word turning src into dst by top-level moves, or None."""
    if src is dst:
        return ()
    seen = {src: ()}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for gen in GENS:
            nxt = apply_gen(cur, gen)
            if nxt is not None and nxt not in seen:
                seen[nxt] = seen[cur] + (gen,)
                if nxt is dst:
                    return seen[nxt]
                queue.append(nxt)
    return None


def apply_gens(s: Structure, gens) -> Structure:
    for gen in gens:
        nxt = apply_gen(s, gen)
        if nxt is None:
            raise ValueError(f"generator {gen!r} does not apply to {s!r}")
        s = nxt
    return s


def canonical_member(s: Structure) -> Structure:
    return min(equivalence_class(s), key=struct_key)


# -- contexts and the designator -------------------------------------------


class _HoleType:
    __slots__ = ()

    def __repr__(self):
        return "_"


HOLE = _HoleType()


class Context:
    """A structure whose designated leaves are holes, ordered left to right."""

    __slots__ = ("shape",)

    def __init__(self, shape: Structure):
        if not hole_positions(shape):
            raise ValueError("a context needs at least one hole")
        self.shape = shape

    @property
    def holes(self):
        return hole_positions(self.shape)

    def fill(self, *blocks: Structure) -> Structure:
        holes = self.holes
        if len(blocks) != len(holes):
            raise ValueError(f"expected {len(holes)} fillers, got {len(blocks)}")
        out = self.shape
        for pos, block in sorted(zip(holes, blocks), reverse=True):
            out = replace(out, pos, block)
        return out

    def __repr__(self) -> str:  # pragma: no cover
        from . import syntax

        return syntax.fmt_structure(self.shape)


def hole_positions(shape: Structure):
    return tuple(pos for pos, v in leaves(shape) if v is HOLE)


def hollow(s: Structure, *positions_: Position) -> Context:
    """Context obtained by punching holes at the given subtree positions."""
    shape = s
    for pos in positions_:
        shape = replace(shape, pos, leaf(HOLE))
    return Context(shape)


def designate(ctx) -> Structure:
    """Rearrange a one-hole context so the hole sits at the top right, then
    drop it: the unique structure D with (D, X) equivalent to ctx[X].

    Terminates because every step strictly shrinks the hole's depth on the
    right-hand side.
    """
    t = ctx.shape if isinstance(ctx, Context) else ctx
    if len(hole_positions(t)) != 1:
        raise ValueError("designate needs exactly one hole")

    def has_hole(x: Structure) -> bool:
        return bool(hole_positions(x))

    while True:
        if isinstance(t, Leaf) and t.value is HOLE:
            return EMPTY
        assert isinstance(t, Pair)
        l, r = t.left, t.right
        if has_hole(l):
            t = pair(r, l)
            continue
        if isinstance(r, Leaf) and r.value is HOLE:
            return l
        assert isinstance(r, Pair)
        if has_hole(r.right):
            t = pair(pair(l, r.left), r.right)
        else:
            t = pair(pair(r.right, l), r.left)


# -- upset (the promotion side condition) ----------------------------------


def upset(
    s: Structure, index: str, sig: Signature, kind: str = "quest"
) -> Optional[tuple]:
    """Erase the weakenable part of an all-modal structure.

    Leaves must all be ?-formulas (kind 'quest', one-sided) or !-formulas
    ('bang', two-sided).  Keeps leaves whose label is above index, erases
    those that are not but carry W, and returns None when neither holds
    (promotion inapplicable).  Returns (kept structure, erased leaves).
    """
    cls = Quest if kind == "quest" else Bang
    erased = []
    for pos, v in leaves(s):
        if not isinstance(v, cls):
            return None
        if sig.leq(index, v.label):
            continue
        if sig.has(v.label, "W"):
            erased.append((pos, v))
        else:
            return None
    return erase_many(s, [p for p, _ in erased]), tuple(erased)


# -- bridges between the formula languages ----------------------------------


def counter_structure(s: Structure) -> int:
    """Sum of the polarity counter over the leaves."""
    return sum(formulas.counter(v) for v in leaf_values(s))


def neg_translate(s: Structure) -> Structure:
    """Negative translation of an intuitionistic structure: leaves become
    duals of their translations and pair order is reversed."""
    if isinstance(s, Leaf):
        return leaf(formulas.dual(formulas.translate(s.value)))
    if isinstance(s, Pair):
        return pair(neg_translate(s.right), neg_translate(s.left))
    return s


def un_neg_translate(s: Structure, allow_zero: bool = False) -> Structure:
    """Inverse of neg_translate; raises ValueError off the image."""
    if isinstance(s, Leaf):
        v = s.value
        payload, tag = (v if isinstance(v, tuple) else (v, None))
        inv = formulas.inverse_translate(formulas.dual(payload), allow_zero)
        if inv is None:
            raise ValueError(f"leaf {payload!r} not a dual translation")
        return leaf(inv if tag is None else (inv, tag))
    if isinstance(s, Pair):
        return pair(
            un_neg_translate(s.right, allow_zero), un_neg_translate(s.left, allow_zero)
        )
    return s


# -- substitution with position tracking -------------------------------------


def multi_subst(s: Structure, mapping) -> Structure:
    """Simultaneously replace the (pairwise disjoint) positions; EMPTY
    replacements erase with normalisation."""
    marked = {tuple(k): v for k, v in mapping.items()}
    for p in marked:
        for q in marked:
            if p != q and p[: len(q)] == q:
                raise ValueError("overlapping substitution positions")

    def go(t: Structure, prefix) -> Structure:
        if prefix in marked:
            return marked[prefix]
        if isinstance(t, Pair):
            return pair(go(t.left, prefix + (0,)), go(t.right, prefix + (1,)))
        return t

    return go(s, ())


def track_through_subst(s: Structure, mapping, tracks):
    """New positions of tracked subtrees after multi_subst.

    A tracked position may contain substitution spots but must not sit
    inside one; it must itself survive (not collapse to EMPTY).
    """
    marked = {tuple(k): v for k, v in mapping.items()}

    def image(t, prefix):
        if prefix in marked:
            return marked[prefix]
        if isinstance(t, Pair):
            return pair(image(t.left, prefix + (0,)), image(t.right, prefix + (1,)))
        return t

    out = []
    for track in tracks:
        track = tuple(track)
        cur = s
        prefix: tuple = ()
        newpos: tuple = ()
        ok = True
        for step in track:
            assert isinstance(cur, Pair), "tracked position not in structure"
            this = cur.left if step == 0 else cur.right
            other = cur.right if step == 0 else cur.left
            this_new = image(this, prefix + (step,))
            other_new = image(other, prefix + (1 - step,))
            if this_new is EMPTY:
                ok = False
                break
            if other_new is not EMPTY:
                newpos = newpos + (step,)
            cur = this
            prefix = prefix + (step,)
        out.append(newpos if ok else None)
    return out


def designate_track(struct: Structure, hole: tuple, tracks):
    """Designate at hole while tracking disjoint subtree positions.

    Substitution commutes with the designator, so each tracked subtree is
    collapsed to a fresh marker, designated along, and re-expanded.
    """
    tracks = [tuple(t) for t in tracks]
    collapsed = struct
    originals = []
    for n, t in enumerate(tracks):
        originals.append(subtree(struct, t))
        collapsed = replace(collapsed, t, leaf(("desitrack", n)))
    d = designate(hollow(collapsed, tuple(hole)))
    newpos: list = [None] * len(tracks)
    for p, v in leaves(d):
        if isinstance(v, tuple) and v[:1] == ("desitrack",):
            newpos[v[1]] = p
    out = d
    for n in sorted(range(len(tracks)), key=lambda k: newpos[k] or (), reverse=True):
        if newpos[n] is None:
            raise ValueError("tracked subtree vanished during designation")
        out = replace(out, newpos[n], originals[n])
    return out, newpos
