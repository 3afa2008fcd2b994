"""Formula terms for the classical one-sided language and its intuitionistic
restriction, plus duality, the polarity counter, translation, and
subexponential signatures.

All terms are hash-consed: the module-level constructors return interned
objects, so structural equality coincides with ``is`` and hashing is O(1).
Never instantiate the classes directly; use the lowercase factories.
"""

from __future__ import annotations

import sys
from typing import Iterable, Optional


class UndefinedCounter(Exception):
    """The polarity counter is not defined on this formula (contains top/0)."""


class Formula:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        from . import syntax

        return syntax.fmt_formula(self)


class Atom(Formula):
    __slots__ = ("name",)


class NegAtom(Formula):
    __slots__ = ("name",)


class Tensor(Formula):
    __slots__ = ("left", "right")


class Par(Formula):
    __slots__ = ("left", "right")


class Plus(Formula):
    __slots__ = ("left", "right")


class With(Formula):
    __slots__ = ("left", "right")


class RImp(Formula):
    """Right implication A -> B (intuitionistic only)."""

    __slots__ = ("left", "right")


class LImp(Formula):
    """Left implication B <- A, stored as (result, argument)."""

    __slots__ = ("left", "right")


class Unit(Formula):
    __slots__ = ("tag",)


class Bang(Formula):
    __slots__ = ("label", "body")


class Quest(Formula):
    __slots__ = ("label", "body")


_TABLE: dict = {}


def _mk(cls, *args):
    key = (cls, args)
    obj = _TABLE.get(key)
    if obj is None:
        obj = object.__new__(cls)
        for slot, val in zip(cls.__slots__, args):
            object.__setattr__(obj, slot, val)
        _TABLE[key] = obj
    return obj


def atom(name: str) -> Atom:
    return _mk(Atom, sys.intern(name))


def negatom(name: str) -> NegAtom:
    return _mk(NegAtom, sys.intern(name))


def tensor(a: Formula, b: Formula) -> Tensor:
    return _mk(Tensor, a, b)


def par(a: Formula, b: Formula) -> Par:
    return _mk(Par, a, b)


def plus(a: Formula, b: Formula) -> Plus:
    return _mk(Plus, a, b)


def with_(a: Formula, b: Formula) -> With:
    return _mk(With, a, b)


def rimp(a: Formula, b: Formula) -> RImp:
    return _mk(RImp, a, b)


def limp(b: Formula, a: Formula) -> LImp:
    return _mk(LImp, b, a)


def bang(label: str, body: Formula) -> Bang:
    return _mk(Bang, sys.intern(label), body)


def quest(label: str, body: Formula) -> Quest:
    return _mk(Quest, sys.intern(label), body)


ONE: Unit = _mk(Unit, "1")
BOT: Unit = _mk(Unit, "bot")
TOP: Unit = _mk(Unit, "top")
ZERO: Unit = _mk(Unit, "0")

_BINARY = (Tensor, Par, Plus, With, RImp, LImp)

_dual_cache: dict = {}


def dual(f: Formula) -> Formula:
    """De Morgan dual with atomic-scope negation.

    The multiplicatives swap argument order (the negation is "tight":
    (A * B)^perp = B^perp | A^perp); the additives keep it.  Involutive.
    """
    got = _dual_cache.get(id(f))
    if got is not None:
        return got
    if isinstance(f, Atom):
        d = negatom(f.name)
    elif isinstance(f, NegAtom):
        d = atom(f.name)
    elif isinstance(f, Tensor):
        d = par(dual(f.right), dual(f.left))
    elif isinstance(f, Par):
        d = tensor(dual(f.right), dual(f.left))
    elif isinstance(f, Plus):
        d = with_(dual(f.left), dual(f.right))
    elif isinstance(f, With):
        d = plus(dual(f.left), dual(f.right))
    elif f is ONE:
        d = BOT
    elif f is BOT:
        d = ONE
    elif f is TOP:
        d = ZERO
    elif f is ZERO:
        d = TOP
    elif isinstance(f, Bang):
        d = quest(f.label, dual(f.body))
    elif isinstance(f, Quest):
        d = bang(f.label, dual(f.body))
    else:
        raise TypeError(f"no dual for {f!r}")
    _dual_cache[id(f)] = d
    return d


_size_cache: dict = {}


def size(f: Formula) -> int:
    got = _size_cache.get(id(f))
    if got is not None:
        return got
    if isinstance(f, _BINARY):
        n = 1 + size(f.left) + size(f.right)
    elif isinstance(f, (Bang, Quest)):
        n = 1 + size(f.body)
    else:
        n = 1
    _size_cache[id(f)] = n
    return n


_counter_cache: dict = {}


def counter(f: Formula) -> int:
    """Polarity counter: 0 on positive translations, 1 on their duals.

    Partial by design: top and 0 have no assigned value and raise
    UndefinedCounter.
    """
    got = _counter_cache.get(id(f))
    if got is not None:
        return got
    if isinstance(f, Atom):
        n = 0
    elif isinstance(f, NegAtom):
        n = 1
    elif f is ONE:
        n = 0
    elif f is BOT:
        n = 1
    elif isinstance(f, Par):
        n = counter(f.left) + counter(f.right) - 1
    elif isinstance(f, Tensor):
        n = counter(f.left) + counter(f.right)
    elif isinstance(f, (Plus, With)):
        n = counter(f.left)
    elif isinstance(f, (Bang, Quest)):
        n = counter(f.body)
    else:
        raise UndefinedCounter(f"counter undefined on {f!r}")
    _counter_cache[id(f)] = n
    return n


def is_literal(f: Formula) -> bool:
    return isinstance(f, (Atom, NegAtom))


def is_classical(f: Formula) -> bool:
    """True iff f belongs to the one-sided language (no implications)."""
    if isinstance(f, (RImp, LImp)):
        return False
    if isinstance(f, _BINARY):
        return is_classical(f.left) and is_classical(f.right)
    if isinstance(f, (Bang, Quest)):
        return is_classical(f.body)
    return True


def is_intuitionistic(f: Formula, allow_zero: bool = False) -> bool:
    """True iff f belongs to the two-sided language.

    Excludes par, bot, ?, and negated atoms; 0 only with the extension flag.
    """
    if isinstance(f, (Par, NegAtom, Quest)) or f is BOT:
        return False
    if f is ZERO:
        return allow_zero
    if isinstance(f, (Tensor, Plus, With, RImp, LImp)):
        return is_intuitionistic(f.left, allow_zero) and is_intuitionistic(
            f.right, allow_zero
        )
    if isinstance(f, Bang):
        return is_intuitionistic(f.body, allow_zero)
    return True


def subexp_labels(f: Formula) -> frozenset:
    if isinstance(f, (Bang, Quest)):
        return subexp_labels(f.body) | {f.label}
    if isinstance(f, _BINARY):
        return subexp_labels(f.left) | subexp_labels(f.right)
    return frozenset()


_translate_cache: dict = {}


def translate(a: Formula) -> Formula:
    """Map an intuitionistic formula into the one-sided language.

    Homomorphic except on the implications, which become pars against a
    dualised argument; 0 (when present) maps to 0.
    """
    got = _translate_cache.get(id(a))
    if got is not None:
        return got
    if isinstance(a, Atom):
        t = a
    elif isinstance(a, Tensor):
        t = tensor(translate(a.left), translate(a.right))
    elif isinstance(a, RImp):
        t = par(dual(translate(a.left)), translate(a.right))
    elif isinstance(a, LImp):
        t = par(translate(a.left), dual(translate(a.right)))
    elif isinstance(a, With):
        t = with_(translate(a.left), translate(a.right))
    elif isinstance(a, Plus):
        t = plus(translate(a.left), translate(a.right))
    elif isinstance(a, Bang):
        t = bang(a.label, translate(a.body))
    elif a in (ONE, TOP, ZERO):
        t = a
    else:
        raise TypeError(f"not an intuitionistic formula: {a!r}")
    _translate_cache[id(a)] = t
    return t


_inverse_cache: dict = {}


def inverse_translate(f: Formula, allow_zero: bool = False) -> Optional[Formula]:
    """Recover a from translate(a), or None if f is not in the image.

    The translation is injective, and (without 0) its image is disjoint from
    the image of dual . translate, so inversion is deterministic.
    """
    key = (id(f), allow_zero)
    if key in _inverse_cache:
        return _inverse_cache[key]
    res: Optional[Formula]
    if isinstance(f, Atom):
        res = f
    elif f is ONE or f is TOP:
        res = f
    elif f is ZERO:
        res = f if allow_zero else None
    elif isinstance(f, Tensor):
        a = inverse_translate(f.left, allow_zero)
        b = inverse_translate(f.right, allow_zero)
        res = tensor(a, b) if a is not None and b is not None else None
    elif isinstance(f, Par):
        # ^A->B^ = dual(^A^) | ^B^ ; ^B<-A^ = ^B^ | dual(^A^)
        a = inverse_translate(dual(f.left), allow_zero)
        b = inverse_translate(f.right, allow_zero)
        if a is not None and b is not None:
            res = rimp(a, b)
        else:
            b = inverse_translate(f.left, allow_zero)
            a = inverse_translate(dual(f.right), allow_zero)
            res = limp(b, a) if a is not None and b is not None else None
    elif isinstance(f, Plus):
        a = inverse_translate(f.left, allow_zero)
        b = inverse_translate(f.right, allow_zero)
        res = plus(a, b) if a is not None and b is not None else None
    elif isinstance(f, With):
        a = inverse_translate(f.left, allow_zero)
        b = inverse_translate(f.right, allow_zero)
        res = with_(a, b) if a is not None and b is not None else None
    elif isinstance(f, Bang):
        a = inverse_translate(f.body, allow_zero)
        res = bang(f.label, a) if a is not None else None
    else:
        res = None
    _inverse_cache[key] = res
    return res


FEATURES = ("C", "W", "E", "A1", "A2")


class SignatureError(ValueError):
    pass


class Signature:
    """A multimodal signature: labels, a preorder, and per-label features.

    The preorder must be reflexive and transitive as given, and the feature
    map must be upward closed along it; construction validates all three.
    Use ``Signature.make`` to close an arbitrary relation first.
    """

    __slots__ = ("labels", "order", "feature_map")

    def __init__(self, labels, order, feature_map):
        labels = frozenset(labels)
        order = frozenset(order)
        fmap = {lab: frozenset(feature_map.get(lab, ())) for lab in labels}
        for i, j in order:
            if i not in labels or j not in labels:
                raise SignatureError(f"order mentions unknown label: {(i, j)}")
        for lab, feats in fmap.items():
            bad = feats - set(FEATURES)
            if bad:
                raise SignatureError(f"unknown features {sorted(bad)} on {lab!r}")
        for lab in labels:
            if (lab, lab) not in order:
                raise SignatureError(f"preorder not reflexive at {lab!r}")
        for i, j in order:
            for k, l in order:
                if j == k and (i, l) not in order:
                    raise SignatureError(f"preorder not transitive: {i} {j} {l}")
        for i, j in order:
            if not fmap[i] <= fmap[j]:
                raise SignatureError(
                    f"feature map not upward closed: {i} <= {j} but "
                    f"{sorted(fmap[i])} is not within {sorted(fmap[j])}"
                )
        self.labels = labels
        self.order = order
        self.feature_map = fmap

    @classmethod
    def make(cls, labels: Iterable[str], pairs: Iterable = (), features=None) -> "Signature":
        """Build a signature, closing the order reflexively and transitively."""
        labels = set(labels)
        rel = {(i, i) for i in labels} | {(i, j) for i, j in pairs}
        labels |= {x for p in rel for x in p}
        rel |= {(i, i) for i in labels}
        changed = True
        while changed:
            changed = False
            for i, j in list(rel):
                for k, l in list(rel):
                    if j == k and (i, l) not in rel:
                        rel.add((i, l))
                        changed = True
        return cls(labels, rel, features or {})

    def leq(self, i: str, j: str) -> bool:
        return (i, j) in self.order

    def features(self, label: str) -> frozenset:
        try:
            return self.feature_map[label]
        except KeyError:
            raise SignatureError(f"unknown subexponential label {label!r}")

    def has(self, label: str, feature: str) -> bool:
        return feature in self.features(label)

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def __repr__(self) -> str:  # pragma: no cover
        return f"Signature(labels={sorted(self.labels)})"


#: Conventional labels, one per feature, discretely ordered.
DEFAULT_SIGNATURE = Signature.make(
    ["c", "w", "e", "a1", "a2"],
    (),
    {"c": {"C"}, "w": {"W"}, "e": {"E"}, "a1": {"A1"}, "a2": {"A2"}},
)


def load_signature(text: str) -> Signature:
    """Parse the signature file format.

    Lines are ``label <name> : <features>`` (comma separated, possibly empty)
    or ``order <i> <= <j>``; blank lines and ``#`` comments are skipped.
    """
    labels: list[str] = []
    pairs: list[tuple] = []
    feats: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "label":
            rest = line[len("label"):].strip()
            if ":" not in rest:
                raise SignatureError(f"line {lineno}: expected 'label <name> : <features>'")
            name, featpart = rest.split(":", 1)
            name = name.strip()
            if not name:
                raise SignatureError(f"line {lineno}: missing label name")
            fs = [tok.strip() for tok in featpart.split(",") if tok.strip()]
            labels.append(name)
            feats[name] = set(fs)
        elif parts[0] == "order":
            if len(parts) != 4 or parts[2] != "<=":
                raise SignatureError(f"line {lineno}: expected 'order <i> <= <j>'")
            pairs.append((parts[1], parts[3]))
        else:
            raise SignatureError(f"line {lineno}: unknown directive {parts[0]!r}")
    return Signature.make(labels, pairs, feats)
